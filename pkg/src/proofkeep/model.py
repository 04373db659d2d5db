"""Naive bottom-up evaluation of the stratified model.

This is the independent oracle the test suite compares the resolution
engine against: answers and finite-failure verdicts of the engine must
agree with truth in this model on function-free instances.
"""
from __future__ import annotations

from itertools import product
from typing import Iterable, Optional

from .engine import eval_builtin, is_builtin
from .program import BUILTIN_PREDS, Clause, Database, analyze_dependencies
from .subst import EMPTY, Substitution
from .terms import Atom, Const, Goal, Literal, Var, atom_vars, goal_vars


class NotStratified(ValueError):
    pass


def stratify(db: Database) -> dict[tuple[str, int], int]:
    """Stratum numbers: positive body predicates stay level, negated ones
    must live strictly below.  Raises when no assignment exists."""
    preds = {c.head.key for c in db.clauses}
    for c in db.clauses:
        for lit in c.body:
            preds.add(lit.atom.key)
    preds -= BUILTIN_PREDS
    strata = {p: 1 for p in preds}
    bound = len(preds) + 1
    for _ in range(bound * bound + 1):
        changed = False
        for c in db.clauses:
            for lit in c.body:
                q = lit.atom.key
                if q in BUILTIN_PREDS:
                    continue
                need = strata[q] + (0 if lit.positive else 1)
                if strata[c.head.key] < need:
                    strata[c.head.key] = need
                    changed = True
        if not changed:
            return strata
        if max(strata.values()) > bound:
            raise NotStratified("program is not stratified")
    raise NotStratified("program is not stratified")


def _ground_bodies(
    clause: Clause, model: set[Atom], domain: list[Const]
) -> Iterable[Substitution]:
    """All substitutions grounding the clause body that satisfy it in the
    current model.  Positive non-builtin literals are enumerated against the
    model; any leftover variables range over the active domain."""

    def extend(i: int, binding: dict[Var, Const]) -> Iterable[dict[Var, Const]]:
        if i == len(clause.body):
            yield binding
            return
        lit = clause.body[i]
        sub = Substitution(binding)
        atom = sub.apply_atom(lit.atom)
        free = atom_vars(atom)
        if lit.positive and not is_builtin(lit) and free:
            for fact in model:
                if fact.key != atom.key:
                    continue
                new = dict(binding)
                ok = True
                for pat, val in zip(atom.args, fact.args):
                    if isinstance(pat, Var):
                        if new.get(pat, val) != val:
                            ok = False
                            break
                        new[pat] = val
                    elif pat != val:
                        ok = False
                        break
                if ok:
                    yield from extend(i + 1, new)
            return
        if free:
            # unguarded variables range over the active domain
            for combo in product(domain, repeat=len(free)):
                new = dict(binding)
                new.update(zip(free, combo))
                yield from extend(i, new)
            return
        if is_builtin(lit):
            holds = eval_builtin(atom)
        else:
            holds = atom in model
        if holds == lit.positive:
            yield from extend(i + 1, binding)

    head_free = [v for v in atom_vars(clause.head)]
    for binding in extend(0, {}):
        sub = Substitution(binding)
        leftover = [v for v in head_free if isinstance(sub.apply_term(v), Var)]
        if leftover:
            for combo in product(domain, repeat=len(leftover)):
                full = dict(binding)
                full.update(zip(leftover, combo))
                yield Substitution(full)
        else:
            yield sub


def stratified_model(db: Database) -> set[Atom]:
    """The perfect model of a stratified database by naive iteration."""
    strata = stratify(db)
    domain = db.constants() or [Const("a")]
    model: set[Atom] = set()
    for level in sorted(set(strata.values())):
        clauses = [c for c in db.clauses if strata[c.head.key] == level]
        changed = True
        while changed:
            changed = False
            derived: list[Atom] = []
            for c in clauses:
                for sub in _ground_bodies(c, model, domain):
                    fact = sub.apply_atom(c.head)
                    if fact not in model:
                        derived.append(fact)
            for fact in derived:
                if fact not in model:
                    model.add(fact)
                    changed = True
    return model


def holds(model: set[Atom], goal: Goal, domain: list[Const]) -> bool:
    """Some grounding of the goal is true in the model."""
    return bool(model_answers(model, goal, domain, first_only=True))


def model_answers(
    model: set[Atom],
    goal: Goal,
    domain: list[Const],
    first_only: bool = False,
) -> list[Substitution]:
    """Ground substitutions over the domain that make the goal true."""
    free = goal_vars(goal)
    out: list[Substitution] = []
    for combo in product(domain, repeat=len(free)):
        sub = Substitution(dict(zip(free, combo)))
        ok = True
        for lit in sub.apply_goal(goal):
            if is_builtin(lit):
                truth = eval_builtin(lit.atom)
            else:
                truth = lit.atom in model
            if truth != lit.positive:
                ok = False
                break
        if ok:
            out.append(sub)
            if first_only:
                return out
    return out


def model_satisfies(db: Database, entry: Atom) -> bool:
    """Does the entry query hold in the stratified model?"""
    return entry in stratified_model(db)
