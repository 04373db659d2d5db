"""One randomized incremental-vs-oracle test case, plus shrinking.

A case draws a legal database, a constraint the database initially
satisfies, and a valid transaction; it then compares the incremental
verdict against both a fresh SLDNF run and the bottom-up model, and checks
that repaired trees still validate as standard proof trees.
"""
from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass
from typing import Optional

from . import formulas as F
from . import model as bu
from . import randgen, session
from .compiler import compile_constraints
from .engine import Budget, BudgetExceeded, build_proof
from .formulas import Formula, format_formula
from .maintenance import oracle_recheck, ueberpruefe_baum
from .program import (
    Database,
    TransactionError,
    apply_transaction,
    check_legality,
    format_clause,
    format_database,
    resolve_transaction,
)
from .prooftree import construct, validate
from .subst import EMPTY
from .syntax import ParsedTransaction
from .terms import Atom, Literal

FUZZ_BUDGET = Budget(max_depth=200, max_nodes=300_000)


@dataclass
class CaseOutcome:
    ok: bool
    reason: str = ""
    incremental_cheaper: bool = False


def draw_instance(
    rng: random.Random, bounds: randgen.SizeBounds
) -> Optional[tuple[Database, Formula, ParsedTransaction]]:
    """A (db, constraint, transaction) triple whose initial state satisfies
    the constraint; None when the draw fails to produce one."""
    db = None
    for _ in range(12):
        cand_db = randgen.gen_database(rng, bounds)
        if check_legality(cand_db).ok:
            db = cand_db
            break
    if db is None:
        return None
    formula = None
    for _ in range(8):
        cand = randgen.gen_constraint(rng, db)
        for attempt in (cand, F.Not(cand)):
            extended, compiled = compile_constraints(db, [attempt])
            if not check_legality(extended).ok:
                continue
            if bu.model_satisfies(extended, compiled[0].entry):
                formula = attempt
                break
        if formula is not None:
            break
    if formula is None:
        return None
    for _ in range(8):
        try:
            parsed = randgen.gen_transaction(rng, db)
            resolve_transaction(compile_constraints(db, [formula])[0], parsed)
            return db, formula, parsed
        except TransactionError:
            continue
    return None


def check_case(
    db: Database, formula: Formula, parsed_txn: ParsedTransaction
) -> CaseOutcome:
    extended, compiled = compile_constraints(db, [formula])
    entry = compiled[0].entry
    try:
        txn = resolve_transaction(extended, parsed_txn)
    except TransactionError as exc:
        return CaseOutcome(True, f"skip: {exc}")
    db_post = apply_transaction(extended, txn)
    if not check_legality(db_post).stratified:
        return CaseOutcome(True, "skip: post-state not stratified")

    build_budget = FUZZ_BUDGET.spawn()
    try:
        proof = build_proof(extended, (Literal(entry, True),), EMPTY, build_budget)
    except BudgetExceeded:
        return CaseOutcome(True, "skip: initial budget")
    if bu.model_satisfies(extended, entry) != proof.succeeded:
        return CaseOutcome(False, "engine disagrees with model on the initial state")
    if not proof.succeeded:
        return CaseOutcome(True, "skip: initially violated")
    tree = construct(proof, extended)

    inc_budget = Budget(FUZZ_BUDGET.max_depth, FUZZ_BUDGET.max_nodes)
    verdict = ueberpruefe_baum(session.clone_tree(tree), txn, db_post, inc_budget)
    oracle_budget = Budget(FUZZ_BUDGET.max_depth, FUZZ_BUDGET.max_nodes)
    oracle = oracle_recheck(db_post, entry, oracle_budget)
    model_truth = (
        "satisfied" if bu.model_satisfies(db_post, entry) else "violated"
    )
    if verdict.status == "unknown" or oracle == "unknown":
        return CaseOutcome(True, "skip: budget")
    if oracle != model_truth:
        return CaseOutcome(False, f"full re-check {oracle} vs model {model_truth}")
    if verdict.status != oracle:
        return CaseOutcome(False, f"incremental {verdict.status} vs oracle {oracle}")
    if verdict.status == "satisfied":
        report = validate(verdict.tree, db_post, EMPTY, FUZZ_BUDGET.spawn())
        if not report.is_standard:
            return CaseOutcome(False, f"repaired tree invalid: {report.violations[:3]}")
    cheaper = (
        verdict.stats.conflict_hits > 0
        and verdict.stats.engine_nodes < oracle_budget.used
    )
    return CaseOutcome(True, "", incremental_cheaper=cheaper)


def shrink(
    db: Database, formula: Formula, parsed: ParsedTransaction
) -> tuple[Database, Formula, ParsedTransaction]:
    """Greedy shrink: drop transaction items, facts and rules while the
    counterexample persists."""

    def still_fails(d, f, t) -> bool:
        try:
            return not check_case(d, f, t).ok
        except Exception:
            return True

    changed = True
    while changed:
        changed = False
        for i in range(len(parsed.deletes)):
            cand = ParsedTransaction(
                parsed.deletes[:i] + parsed.deletes[i + 1 :], parsed.adds
            )
            if still_fails(db, formula, cand):
                parsed = cand
                changed = True
                break
        for i in range(len(parsed.adds)):
            cand = ParsedTransaction(
                parsed.deletes, parsed.adds[:i] + parsed.adds[i + 1 :]
            )
            if still_fails(db, formula, cand):
                parsed = cand
                changed = True
                break
        for i, clause in enumerate(db.clauses):
            if any(
                d.head == clause.head and d.body == clause.body for d in parsed.deletes
            ):
                continue
            raw = [
                (c.head, c.body, c.origin)
                for j, c in enumerate(db.clauses)
                if j != i
            ]
            try:
                cand_db = Database.build(raw, db.declared_edb, db.declared_idb)
            except Exception:
                continue
            if still_fails(cand_db, formula, parsed):
                db = cand_db
                changed = True
                break
    return db, formula, parsed


def write_counterexample(
    directory: str,
    db: Database,
    formula: Formula,
    parsed: ParsedTransaction,
    reason: str,
) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "fuzz-counterexample.dl"), "w") as fh:
        fh.write(format_database(db))
    with open(os.path.join(directory, "fuzz-counterexample.fol"), "w") as fh:
        fh.write(format_formula(formula) + ".\n")
    with open(os.path.join(directory, "fuzz-counterexample.txn"), "w") as fh:
        for c in parsed.deletes:
            fh.write("del " + format_clause(c) + "\n")
        for c in parsed.adds:
            fh.write("add " + format_clause(c) + "\n")
    with open(os.path.join(directory, "fuzz-counterexample.json"), "w") as fh:
        json.dump({"reason": reason}, fh)
        fh.write("\n")


def run_case(
    rng: random.Random, bounds: randgen.SizeBounds, shrink_dir: str
) -> Optional[tuple[bool, bool]]:
    """Returns (ok, incremental_cheaper) or None when the draw was skipped."""
    drawn = draw_instance(rng, bounds)
    if drawn is None:
        return None
    db, formula, parsed = drawn
    outcome = check_case(db, formula, parsed)
    if outcome.reason.startswith("skip"):
        return None
    if not outcome.ok:
        db2, f2, t2 = shrink(db, formula, parsed)
        write_counterexample(shrink_dir, db2, f2, t2, outcome.reason)
        return False, False
    return True, outcome.incremental_cheaper
