"""Random legal databases, constraints and transactions for the fuzz harness.

Generated programs are stratified, strict, safe and function-free by
construction: rules only call strictly lower predicates, every variable is
guarded by a positive body literal, and quantifiers in constraints carry an
extensional sort guard.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import formulas as F
from .program import Clause, Database, Transaction, resolve_transaction
from .syntax import ParsedTransaction, RawClause
from .terms import Atom, Const, Literal, Var

CONSTS = [Const("a"), Const("b"), Const("c")]


@dataclass
class SizeBounds:
    max_edb_preds: int = 4
    max_idb_preds: int = 3
    max_facts: int = 20
    max_rules: int = 6
    max_constants: int = 3
    max_body: int = 3


def gen_database(rng: random.Random, bounds: SizeBounds | None = None) -> Database:
    bounds = bounds or SizeBounds()
    consts = CONSTS[: bounds.max_constants]
    n_edb = rng.randint(2, bounds.max_edb_preds)
    n_idb = rng.randint(1, bounds.max_idb_preds)
    edb = [(f"e{i}", rng.randint(1, 2)) for i in range(n_edb)]
    idb = [(f"r{i}", rng.randint(1, 2)) for i in range(n_idb)]

    raw: list[tuple[Atom, tuple[Literal, ...], str]] = []
    n_facts = rng.randint(2, bounds.max_facts)
    seen = set()
    for _ in range(n_facts):
        name, arity = rng.choice(edb)
        args = tuple(rng.choice(consts) for _ in range(arity))
        if (name, args) not in seen:
            seen.add((name, args))
            raw.append((Atom(name, args), (), "base"))

    # rules for r_k may use edb predicates and r_j with j < k: hierarchy
    n_rules = rng.randint(1, bounds.max_rules)
    for _ in range(n_rules):
        k = rng.randrange(n_idb)
        head_name, head_arity = idb[k]
        head_vars = tuple(Var(f"X{i}") for i in range(head_arity))
        callable_preds = edb + idb[:k]
        body: list[Literal] = []
        n_body = rng.randint(1, bounds.max_body)
        available = list(head_vars)
        # positive guards first so every variable is bound
        guards = rng.randint(max(1, head_arity > 0), n_body)
        for _ in range(guards):
            name, arity = rng.choice(callable_preds)
            args = []
            for _ in range(arity):
                if available and rng.random() < 0.8:
                    args.append(rng.choice(available))
                else:
                    args.append(rng.choice(consts))
            body.append(Literal(Atom(name, tuple(args)), True))
        bound_vars = {
            v for lit in body if lit.positive for v in lit.atom.args if isinstance(v, Var)
        }
        missing = [v for v in head_vars if v not in bound_vars]
        for v in missing:
            name, arity = rng.choice(edb)
            args = tuple(v if i == 0 else rng.choice(consts) for i in range(arity))
            body.append(Literal(Atom(name, args), True))
            bound_vars.add(v)
        for _ in range(n_body - guards):
            negative = rng.random() < 0.45
            # negated callees lean extensional; mixed-sign call chains would
            # break strictness too often
            pool = edb if negative and rng.random() < 0.8 else callable_preds
            name, arity = rng.choice(pool)
            usable = sorted(bound_vars, key=lambda v: v.name)
            args = tuple(
                rng.choice(usable) if usable and rng.random() < 0.7 else rng.choice(consts)
                for _ in range(arity)
            )
            body.append(Literal(Atom(name, tuple(args)), not negative))
        raw.append((Atom(head_name, head_vars), tuple(body), "base"))

    declared = frozenset(edb)
    return Database.build(raw, declared_edb=declared, declared_idb=frozenset(idb))


def gen_constraint(rng: random.Random, db: Database) -> F.Formula:
    """A closed formula with sorted quantifiers over the database predicates."""
    unary_edb = sorted({k for k in db.edb if k[1] == 1})
    guards = unary_edb or sorted(db.edb)
    preds = sorted(db.edb | db.idb)

    def guard_name() -> str:
        return rng.choice(guards)[0] if guards else "e0"

    def atom_over(vars_in_scope: list[Var]) -> F.Formula:
        name, arity = rng.choice(preds)
        args = tuple(
            rng.choice(vars_in_scope)
            if vars_in_scope and rng.random() < 0.8
            else rng.choice(CONSTS)
            for _ in range(arity)
        )
        return F.FAtom(Atom(name, args))

    def body(depth: int, scope: list[Var]) -> F.Formula:
        if depth <= 0 or rng.random() < 0.4:
            f: F.Formula = atom_over(scope)
            return F.Not(f) if rng.random() < 0.3 else f
        roll = rng.random()
        if roll < 0.25:
            return F.And(body(depth - 1, scope), body(depth - 1, scope))
        if roll < 0.5:
            return F.Or(body(depth - 1, scope), body(depth - 1, scope))
        if roll < 0.7:
            return F.Implies(body(depth - 1, scope), body(depth - 1, scope))
        v = Var(f"Q{len(scope)}")
        quant = F.Forall if rng.random() < 0.5 else F.Exists
        return quant(v, guard_name(), body(depth - 1, scope + [v]))

    v = Var("Q0")
    quant = F.Forall if rng.random() < 0.7 else F.Exists
    return quant(v, guard_name(), body(rng.randint(1, 2), [v]))


def gen_transaction(
    rng: random.Random, db: Database, allow_rules: bool = True
) -> ParsedTransaction:
    facts = [c for c in db.clauses if c.is_unit and c.origin == "base"]
    rules = [c for c in db.clauses if not c.is_unit and c.origin == "base"]
    deletes: list[RawClause] = []
    adds: list[RawClause] = []
    for c in rng.sample(facts, min(len(facts), rng.randint(0, 2))):
        deletes.append(RawClause(c.head, ()))
    if allow_rules and rules and rng.random() < 0.25:
        c = rng.choice(rules)
        deletes.append(RawClause(c.head, c.body))
    existing = {(c.head.pred, c.head.args) for c in facts}
    consts = db.constants() or list(CONSTS)
    for _ in range(rng.randint(0, 2)):
        keys = sorted(db.edb)
        if not keys:
            break
        name, arity = rng.choice(keys)
        args = tuple(rng.choice(consts) for _ in range(arity))
        if (name, args) not in existing:
            existing.add((name, args))
            adds.append(RawClause(Atom(name, args), ()))
    if allow_rules and rules and rng.random() < 0.2:
        adds.append(gen_added_rule(rng, db))
    if not deletes and not adds and facts:
        deletes.append(RawClause(facts[0].head, ()))
    return ParsedTransaction(tuple(deletes), tuple(adds))


def gen_added_rule(rng: random.Random, db: Database) -> RawClause:
    """A fresh safe rule for an existing intensional predicate, calling only
    extensional predicates so stratification is preserved."""
    idb = sorted(k for k in db.idb if not k[0].startswith(("ic", "_aux")))
    edb = sorted(db.edb)
    name, arity = rng.choice(idb or [("r_new", 1)])
    head_vars = tuple(Var(f"Y{i}") for i in range(arity))
    body: list[Literal] = []
    for v in head_vars:
        gname, garity = rng.choice(edb)
        args = tuple(v if i == 0 else rng.choice(CONSTS) for i in range(garity))
        body.append(Literal(Atom(gname, args), True))
    if not body:
        gname, garity = rng.choice(edb)
        body.append(Literal(Atom(gname, tuple(rng.choice(CONSTS) for _ in range(garity))), True))
    return RawClause(Atom(name, head_vars), tuple(body))
