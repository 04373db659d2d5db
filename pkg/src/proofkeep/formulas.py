"""First-order constraint formulas: AST, rectification, sort relativization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .terms import Atom, Var, atom_vars


@dataclass(frozen=True)
class FAtom:
    atom: Atom


@dataclass(frozen=True)
class Not:
    f: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ImpliedBy:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: Var
    sort: str | None
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: Var
    sort: str | None
    body: "Formula"


Formula = Union[FAtom, Not, And, Or, Implies, ImpliedBy, Iff, Forall, Exists]

_BINARY = (And, Or, Implies, ImpliedBy, Iff)
_QUANT = (Forall, Exists)


def free_vars(f: Formula, bound: frozenset[Var] = frozenset()) -> list[Var]:
    """Free variables in first-occurrence order."""
    out: list[Var] = []

    def go(g: Formula, b: frozenset[Var]) -> None:
        if isinstance(g, FAtom):
            for v in atom_vars(g.atom):
                if v not in b and v not in out:
                    out.append(v)
        elif isinstance(g, Not):
            go(g.f, b)
        elif isinstance(g, _BINARY):
            go(g.left, b)
            go(g.right, b)
        else:
            go(g.body, b | {g.var})

    go(f, bound)
    return out


def is_closed(f: Formula) -> bool:
    return not free_vars(f)


def substitute_var(f: Formula, old: Var, new: Var) -> Formula:
    """Replace free occurrences of old by new (new must be fresh)."""

    def sub_atom(a: Atom) -> Atom:
        from .subst import Substitution

        return Substitution({old: new}).apply_atom(a)

    if isinstance(f, FAtom):
        return FAtom(sub_atom(f.atom))
    if isinstance(f, Not):
        return Not(substitute_var(f.f, old, new))
    if isinstance(f, _BINARY):
        return type(f)(substitute_var(f.left, old, new), substitute_var(f.right, old, new))
    if f.var == old:
        return f
    return type(f)(f.var, f.sort, substitute_var(f.body, old, new))


class FreshNames:
    """Deterministic fresh-variable supply with numbered suffixes."""

    def __init__(self, used: set[str]):
        self.used = set(used)

    def fresh(self, base: str) -> Var:
        if base not in self.used:
            self.used.add(base)
            return Var(base)
        i = 1
        while f"{base}_{i}" in self.used:
            i += 1
        name = f"{base}_{i}"
        self.used.add(name)
        return Var(name)


def rectify(f: Formula, names: FreshNames | None = None) -> Formula:
    """Rename bound variables so no variable is quantified twice or occurs
    both free and bound."""
    if names is None:
        names = FreshNames({v.name for v in free_vars(f)})

    def go(g: Formula) -> Formula:
        if isinstance(g, FAtom):
            return g
        if isinstance(g, Not):
            return Not(go(g.f))
        if isinstance(g, _BINARY):
            return type(g)(go(g.left), go(g.right))
        new = names.fresh(g.var.name)
        body = g.body if new == g.var else substitute_var(g.body, g.var, new)
        return type(g)(new, g.sort, go(body))

    return go(f)


def relativize(f: Formula) -> Formula:
    """Replace sorted quantifiers by guarded unsorted ones.

    forall X:s B becomes forall X (s(X) -> B); the existential case is the
    dual forced by the usual abbreviation of exists through forall.
    Sort guards are ordinary unary predicates expected in the EDB.
    """
    if isinstance(f, FAtom):
        return f
    if isinstance(f, Not):
        return Not(relativize(f.f))
    if isinstance(f, _BINARY):
        return type(f)(relativize(f.left), relativize(f.right))
    body = relativize(f.body)
    if f.sort is None:
        return type(f)(f.var, None, body)
    guard = FAtom(Atom(f.sort, (f.var,)))
    if isinstance(f, Forall):
        return Forall(f.var, None, Implies(guard, body))
    return Exists(f.var, None, And(guard, body))


def format_formula(f: Formula) -> str:
    """Printer matching the .fol concrete syntax (fully parenthesized binaries)."""
    if isinstance(f, FAtom):
        return repr(f.atom)
    if isinstance(f, Not):
        return "not " + _wrap(f.f)
    if isinstance(f, And):
        return f"{_wrap(f.left)} & {_wrap(f.right)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left)} | {_wrap(f.right)}"
    if isinstance(f, Implies):
        return f"{_wrap(f.left)} -> {_wrap(f.right)}"
    if isinstance(f, ImpliedBy):
        return f"{_wrap(f.left)} <- {_wrap(f.right)}"
    if isinstance(f, Iff):
        return f"{_wrap(f.left)} <-> {_wrap(f.right)}"
    sort = f":{f.sort}" if f.sort else ""
    word = "forall" if isinstance(f, Forall) else "exists"
    return f"{word} {f.var.name}{sort} {_wrap(f.body)}"


def _wrap(f: Formula) -> str:
    if isinstance(f, FAtom):
        return format_formula(f)
    return "(" + format_formula(f) + ")"
