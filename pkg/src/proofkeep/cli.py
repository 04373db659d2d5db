"""Command-line front end.

Subcommands: check (compile constraints and build the proof forest), apply
(incrementally re-validate under a transaction), translate (print compiled
clauses), fuzz (randomized incremental-vs-oracle harness).

Exit codes: 0 all satisfied, 1 some constraint violated, 2 parse/legality/
flounder/budget error, 3 paranoid-mode disagreement, 4 fuzz counterexample.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor

from . import maintenance as mnt
from . import model as bu
from . import prooftree as pt
from . import randgen, session
from .compiler import CompileError, compile_constraints, parse_constraints
from .engine import Budget, BudgetExceeded, EngineError, FlounderError, build_proof
from .formulas import format_formula
from .maintenance import Verdict, ueberpruefe_baum
from .program import (
    Database,
    DatabaseError,
    TransactionError,
    apply_transaction,
    check_legality,
    format_clause,
    parse_database,
    parse_transaction,
    resolve_transaction,
)
from .prooftree import construct, validate
from .subst import EMPTY
from .syntax import ParseError, parse_transaction_text
from .terms import Atom, Literal

EXIT_OK, EXIT_VIOLATED, EXIT_ERROR, EXIT_DISAGREE, EXIT_COUNTEREXAMPLE = 0, 1, 2, 3, 4


def _budget(args) -> Budget:
    return Budget(max_depth=args.max_depth, max_nodes=args.max_nodes)


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-depth", type=int, default=512, help="engine depth budget")
    p.add_argument(
        "--max-nodes", type=int, default=1_000_000, help="engine node budget"
    )


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _check_one(db, cc, budget):
    proof = build_proof(db, (Literal(cc.entry, True),), EMPTY, budget)
    if not proof.succeeded:
        return "violated", None
    return "satisfied", construct(proof, db)


def cmd_check(args) -> int:
    try:
        db_text = _read(args.database)
        fol_text = _read(args.constraints)
        db = parse_database(db_text)
        formulas = parse_constraints(fol_text)
        extended, compiled = compile_constraints(db, formulas)
    except (ParseError, DatabaseError, CompileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = check_legality(extended)
    if not report.stratified or not report.allowed:
        for v in report.violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_ERROR
    if not report.strict:
        if not args.force:
            for v in report.violations:
                print(f"error: {v}", file=sys.stderr)
            print("error: use --force to downgrade strictness to a warning", file=sys.stderr)
            return EXIT_ERROR
        for v in report.violations:
            print(f"warning: {v}", file=sys.stderr)

    def run(cc):
        return _check_one(extended, cc, _budget(args))

    try:
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(run, compiled))
        else:
            results = [run(cc) for cc in compiled]
    except (FlounderError, BudgetExceeded, pt.ConstructError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    states = []
    all_ok = True
    for cc, f, (status, tree) in zip(compiled, formulas, results):
        print(f"{cc.entry.pred}: {status}")
        if status != "satisfied":
            all_ok = False
        states.append(
            session.ConstraintState(cc.entry.pred, format_formula(f) + ".", status, tree)
        )
        if args.dump and tree is not None:
            _dump_tree(args, cc.entry.pred, tree)
    state = session.SessionState(
        extended, states, session.content_hash(db_text), session.content_hash(fol_text)
    )
    session.save(state, args.state)
    print(f"state written to {args.state}")
    return EXIT_OK if all_ok else EXIT_VIOLATED


def _dump_tree(args, name: str, tree) -> None:
    os.makedirs(args.dump_dir, exist_ok=True)
    if args.dump == "dot":
        path = os.path.join(args.dump_dir, f"{name}.dot")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(pt.to_dot(tree))
    else:
        path = os.path.join(args.dump_dir, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(pt.tree_to_json(tree), fh, sort_keys=True)
            fh.write("\n")
    print(f"wrote {path}")


def cmd_apply(args) -> int:
    try:
        state = session.load(args.state)
        txn_text = _read(args.transaction)
        txn = resolve_transaction(state.database, parse_transaction_text(txn_text))
    except (ParseError, TransactionError, session.StateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        db_post = apply_transaction(state.database, txn)
    except DatabaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = check_legality(db_post)
    if not report.stratified:
        for v in report.violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_ERROR

    def run(cs: session.ConstraintState):
        budget = _budget(args)
        entry = Atom(cs.entry, ())
        if cs.tree is None:
            proof = build_proof(db_post, (Literal(entry, True),), EMPTY, budget)
            stats = mnt.RepairStats(engine_nodes=budget.used)
            if proof.succeeded:
                return Verdict("satisfied", construct(proof, db_post), stats)
            return Verdict("violated", None, stats)
        working = session.clone_tree(cs.tree)
        return ueberpruefe_baum(working, txn, db_post, budget)

    try:
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                verdicts = list(pool.map(run, state.constraints))
        else:
            verdicts = [run(cs) for cs in state.constraints]
    except (FlounderError, pt.ConstructError, mnt.MergeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    any_violated = False
    for cs, verdict in zip(state.constraints, verdicts):
        s = verdict.stats
        print(
            f"{cs.entry}: {verdict.status} "
            f"({s.maintenance_hits} maintenance hits, {s.conflict_hits} conflicts, "
            f"{s.reproofs} re-proofs, {s.engine_nodes} engine nodes)"
        )
        if verdict.status == "unknown":
            print("error: budget exhausted", file=sys.stderr)
            return EXIT_ERROR
        if verdict.status == "violated":
            any_violated = True
        if args.paranoid:
            oracle = mnt.oracle_recheck(db_post, Atom(cs.entry, ()), _budget(args))
            if oracle != verdict.status:
                print(
                    f"error: paranoid disagreement for {cs.entry}: "
                    f"incremental={verdict.status} oracle={oracle}",
                    file=sys.stderr,
                )
                return EXIT_DISAGREE
    if any_violated:
        print("transaction rejected; state unchanged")
        return EXIT_VIOLATED
    for cs, verdict in zip(state.constraints, verdicts):
        cs.status = verdict.status
        cs.tree = verdict.tree
    new_state = session.SessionState(db_post, state.constraints, state.db_hash, state.fol_hash)
    session.save(new_state, args.state)
    print(f"state updated: {args.state}")
    return EXIT_OK


def cmd_translate(args) -> int:
    try:
        fol_text = _read(args.constraints)
        formulas = parse_constraints(fol_text)
        empty = parse_database("")
        _, compiled = compile_constraints(empty, formulas)
    except (ParseError, CompileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for cc in compiled:
        for head, body in cc.clauses:
            from .program import Clause

            print(format_clause(Clause(head, body)))
    return EXIT_OK


def cmd_fuzz(args) -> int:
    rng = random.Random(args.seed)
    bounds = randgen.SizeBounds(max_facts=args.max_facts, max_rules=args.max_rules)
    failures = 0
    incremental_cheaper = 0
    for case in range(args.cases):
        result = _fuzz_case(rng, bounds, args)
        if result is None:
            continue
        ok, cheaper = result
        if cheaper:
            incremental_cheaper += 1
        if not ok:
            failures += 1
            print(f"counterexample at case {case}; artifacts written", file=sys.stderr)
            return EXIT_COUNTEREXAMPLE
    print(
        f"fuzz: {args.cases} cases, 0 disagreements, "
        f"incremental cheaper in {incremental_cheaper} repair cases"
    )
    return EXIT_OK


def _fuzz_case(rng, bounds, args):
    from .fuzzcase import run_case

    return run_case(rng, bounds, args.shrink_dir)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="proofkeep",
        description="incremental integrity checking for deductive databases",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="compile constraints and build the proof forest")
    p.add_argument("database", help=".dl database file")
    p.add_argument("constraints", help=".fol constraint file")
    p.add_argument("--state", default="state.json", help="state file to write")
    p.add_argument("--dump", choices=["dot", "json"], help="export proof trees")
    p.add_argument("--dump-dir", default=".", help="directory for exports")
    p.add_argument("--force", action="store_true", help="downgrade strictness failure to a warning")
    p.add_argument("--jobs", type=int, default=1, help="per-constraint parallelism")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("apply", help="apply a transaction incrementally")
    p.add_argument("state", help="state file from a previous check")
    p.add_argument("transaction", help=".txn transaction file")
    p.add_argument("--paranoid", action="store_true", help="cross-check each verdict with a full re-proof")
    p.add_argument("--jobs", type=int, default=1, help="per-constraint parallelism")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("translate", help="print compiled constraint clauses")
    p.add_argument("constraints", help=".fol constraint file")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("fuzz", help="randomized incremental-vs-oracle harness")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--cases", type=int, default=500)
    p.add_argument("--max-facts", type=int, default=20)
    p.add_argument("--max-rules", type=int, default=6)
    p.add_argument("--shrink-dir", default=".", help="where to write counterexamples")
    p.set_defaults(func=cmd_fuzz)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
