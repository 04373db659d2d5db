"""Compile first-order integrity constraints into normal program clauses.

The translation follows the six mutually recursive worklist functions that
turn a closed, relativized formula into clauses for a fresh entry atom:
disjunctions become multiple clauses for one head, and non-literal pieces
are delegated to fresh helper predicates instead of copying clause bodies.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import formulas as F
from .formulas import Formula, FreshNames, free_vars, is_closed, rectify, relativize
from .program import Database, DatabaseError, clause_signature
from .syntax import parse_formulas_text
from .terms import Atom, Literal, Var


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class CompiledConstraint:
    entry: Atom
    clauses: tuple[tuple[Atom, tuple[Literal, ...]], ...]
    source: Formula

    @property
    def predicates(self) -> set[tuple[str, int]]:
        return {head.key for head, _ in self.clauses}


def parse_constraints(text: str) -> list[Formula]:
    """One closed formula per '.'-terminated statement, rectified."""
    out = []
    for f in parse_formulas_text(text):
        fv = free_vars(f)
        if fv:
            raise CompileError(
                f"constraint is not closed: unbound variable {fv[0].name}"
            )
        out.append(rectify(f))
    return out


def _is_literal(f: Formula) -> bool:
    if isinstance(f, F.FAtom):
        return True
    return isinstance(f, F.Not) and isinstance(f.f, F.FAtom)


def _as_literal(f: Formula) -> Literal:
    if isinstance(f, F.FAtom):
        return Literal(f.atom, True)
    assert isinstance(f, F.Not) and isinstance(f.f, F.FAtom)
    return Literal(f.f.atom, False)


class _Translator:
    def __init__(self, taken: set[str]):
        self.taken = taken
        self.counter = 0
        self.names = FreshNames(set())

    def fresh_pred(self, args: tuple[Var, ...]) -> Atom:
        self.counter += 1
        name = f"_aux{self.counter}"
        if name in self.taken:
            raise CompileError(f"fresh predicate name {name} collides with the database")
        return Atom(name, args)

    def clone_bound(self, f: Formula) -> Formula:
        """Copy with all bound variables renamed (keeps rectification)."""
        return rectify(f, self.names)

    # -- the worklist algorithm ------------------------------------------

    def translate(self, head: Atom, f: Formula) -> list[tuple[Atom, tuple[Literal, ...]]]:
        disj, todo1 = self.disjuncts(+1, f)
        program1, todo2 = self.clauses_for(head, disj)
        program2 = self.drain(todo1 + todo2)
        return program1 + program2

    def drain(self, todo: list[tuple[Atom, Formula]]) -> list:
        rules: list[tuple[Atom, tuple[Literal, ...]]] = []
        for atom, f in todo:
            rules.extend(self.translate(atom, f))
        return rules

    def clauses_for(self, head: Atom, disjuncts: list[Formula]):
        rules = []
        todo: list[tuple[Atom, Formula]] = []
        for dis in disjuncts:
            konj, todo1 = self.conjuncts(+1, dis)
            body, todo2 = self.body_of(konj)
            rules.append((head, body))
            todo += todo1 + todo2
        return rules, todo

    def body_of(self, conjuncts: list[Formula]):
        body: list[Literal] = []
        todo: list[tuple[Atom, Formula]] = []
        for konj in conjuncts:
            if _is_literal(konj):
                body.append(_as_literal(konj))
            else:
                args = tuple(free_vars(konj))
                p = self.fresh_pred(args)
                todo.append((p, konj))
                body.append(Literal(p, True))
        return tuple(body), todo

    def disjuncts(self, pol: int, f: Formula):
        if isinstance(f, F.Not):
            return self.disjuncts(-pol, f.f)
        if pol > 0 and isinstance(f, F.Or):
            d1, t1 = self.disjuncts(+1, f.left)
            d2, t2 = self.disjuncts(+1, f.right)
            return d1 + d2, t1 + t2
        if pol < 0 and isinstance(f, F.And):
            d1, t1 = self.disjuncts(-1, f.left)
            d2, t2 = self.disjuncts(-1, f.right)
            return d1 + d2, t1 + t2
        if pol > 0 and isinstance(f, F.ImpliedBy):
            d1, t1 = self.disjuncts(+1, f.left)
            d2, t2 = self.disjuncts(-1, f.right)
            return d1 + d2, t1 + t2
        if pol > 0 and isinstance(f, F.Implies):
            d1, t1 = self.disjuncts(+1, f.right)
            d2, t2 = self.disjuncts(-1, f.left)
            return d1 + d2, t1 + t2
        if pol < 0 and isinstance(f, F.Iff):
            left2 = self.clone_bound(f.left)
            right2 = self.clone_bound(f.right)
            d1, t1 = self.disjuncts(-1, F.ImpliedBy(f.left, f.right))
            d2, t2 = self.disjuncts(-1, F.Implies(left2, right2))
            return d1 + d2, t1 + t2
        if pol < 0 and isinstance(f, F.Exists):
            args = tuple(free_vars(f))
            p = self.fresh_pred(args)
            # the delegated body keeps the bound variable free: clause
            # variables are implicitly quantified
            return [F.Not(F.FAtom(p))], [(p, f.body)]
        if pol > 0 and isinstance(f, F.Exists):
            return self.disjuncts(+1, f.body)
        if isinstance(f, F.Forall):
            return self.disjuncts(-pol, F.Exists(f.var, None, F.Not(f.body)))
        if pol > 0:
            return [f], []
        return [F.Not(f)], []

    def conjuncts(self, pol: int, f: Formula):
        if isinstance(f, F.Not):
            return self.conjuncts(-pol, f.f)
        if pol > 0 and isinstance(f, F.And):
            c1, t1 = self.conjuncts(+1, f.left)
            c2, t2 = self.conjuncts(+1, f.right)
            return c1 + c2, t1 + t2
        if pol < 0 and isinstance(f, F.Or):
            c1, t1 = self.conjuncts(-1, f.left)
            c2, t2 = self.conjuncts(-1, f.right)
            return c1 + c2, t1 + t2
        if pol < 0 and isinstance(f, F.ImpliedBy):
            c1, t1 = self.conjuncts(+1, f.right)
            c2, t2 = self.conjuncts(-1, f.left)
            return c1 + c2, t1 + t2
        if pol < 0 and isinstance(f, F.Implies):
            c1, t1 = self.conjuncts(+1, f.left)
            c2, t2 = self.conjuncts(-1, f.right)
            return c1 + c2, t1 + t2
        if pol > 0 and isinstance(f, F.Iff):
            left2 = self.clone_bound(f.left)
            right2 = self.clone_bound(f.right)
            c1, t1 = self.conjuncts(+1, F.ImpliedBy(f.left, f.right))
            c2, t2 = self.conjuncts(+1, F.Implies(left2, right2))
            return c1 + c2, t1 + t2
        if pol < 0 and isinstance(f, F.Exists):
            # the printed algorithm drops the negation sign on the fresh
            # predicate here; a negative-polarity existential must contribute
            # a negative literal, so we emit one (see the decisions ledger)
            args = tuple(free_vars(f))
            p = self.fresh_pred(args)
            return [F.Not(F.FAtom(p))], [(p, f.body)]
        if pol > 0 and isinstance(f, F.Exists):
            return self.conjuncts(+1, f.body)
        if isinstance(f, F.Forall):
            return self.conjuncts(-pol, F.Exists(f.var, None, F.Not(f.body)))
        if pol > 0:
            return [f], []
        return [F.Not(f)], []


def _assert_relativized(f: Formula) -> None:
    if isinstance(f, F.Not):
        _assert_relativized(f.f)
    elif isinstance(f, (F.And, F.Or, F.Implies, F.ImpliedBy, F.Iff)):
        _assert_relativized(f.left)
        _assert_relativized(f.right)
    elif isinstance(f, (F.Forall, F.Exists)):
        if f.sort is not None:
            raise CompileError("translate expects a relativized formula")
        _assert_relativized(f.body)


def translate(entry: Atom, f: Formula, taken: set[str] | None = None) -> CompiledConstraint:
    """Translate a rectified, relativized, closed formula into clauses whose
    entry query decides the constraint under the derivability view."""
    fv = free_vars(f)
    if fv:
        raise CompileError(f"constraint is not closed: unbound variable {fv[0].name}")
    _assert_relativized(f)
    taken = set(taken or ())
    if entry.pred in taken:
        raise CompileError(f"entry predicate {entry.pred} collides with the database")
    tr = _Translator(taken)
    rules = tr.translate(entry, f)
    return CompiledConstraint(entry, tuple(rules), f)


def compile_constraint(
    db: Database, f: Formula, entry_name: str
) -> CompiledConstraint:
    taken = {c.head.key[0] for c in db.clauses}
    taken |= {lit.atom.key[0] for c in db.clauses for lit in c.body}
    return translate(Atom(entry_name, ()), relativize(rectify(f)), taken)


def compile_constraints(
    db: Database, constraints: list[Formula], entry_base: str = "ic"
) -> tuple[Database, list[CompiledConstraint]]:
    """Compile all constraints and return the extended database plus the
    per-constraint entry information."""
    compiled: list[CompiledConstraint] = []
    extra: list = []
    taken = {c.head.key[0] for c in db.clauses}
    taken |= {lit.atom.key[0] for c in db.clauses for lit in c.body}
    for i, f in enumerate(constraints, start=1):
        name = f"{entry_base}{i}"
        if name in taken:
            raise CompileError(f"entry predicate {name} collides with the database")
        cc = translate(Atom(name, ()), relativize(rectify(f)), taken)
        taken |= {head.key[0] for head, _ in cc.clauses}
        compiled.append(cc)
        extra.extend((head, body, "constraint") for head, body in cc.clauses)
    try:
        extended = db.extend(extra)
    except DatabaseError as exc:
        raise CompileError(str(exc)) from exc
    return extended, compiled
