"""Object language: terms, atoms, literals, goals.

The database language is function-free, but compound terms are supported
here so the substitution algebra stays general and separately testable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    symbol: Union[str, int]

    def __repr__(self) -> str:
        return str(self.symbol)


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple["Term", ...]

    def __post_init__(self) -> None:
        if not self.args:
            raise ValueError("compound terms need at least one argument")

    def __repr__(self) -> str:
        return "%s(%s)" % (self.functor, ", ".join(map(repr, self.args)))


Term = Union[Var, Const, Compound]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def key(self) -> tuple[str, int]:
        """Predicate identifier: name plus arity."""
        return (self.pred, len(self.args))

    def __repr__(self) -> str:
        if not self.args:
            return self.pred
        return "%s(%s)" % (self.pred, ", ".join(map(repr, self.args)))


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __repr__(self) -> str:
        return repr(self.atom) if self.positive else "not " + repr(self.atom)


# A goal is the body of a normal goal clause; () is the empty clause.
Goal = tuple[Literal, ...]


def term_vars(t: Term, acc: list[Var] | None = None) -> list[Var]:
    """Variables of a term in first-occurrence order."""
    if acc is None:
        acc = []
    if isinstance(t, Var):
        if t not in acc:
            acc.append(t)
    elif isinstance(t, Compound):
        for a in t.args:
            term_vars(a, acc)
    return acc


def atom_vars(a: Atom, acc: list[Var] | None = None) -> list[Var]:
    if acc is None:
        acc = []
    for t in a.args:
        term_vars(t, acc)
    return acc


def goal_vars(g: Goal) -> list[Var]:
    acc: list[Var] = []
    for lit in g:
        atom_vars(lit.atom, acc)
    return acc


def term_is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Compound):
        return all(term_is_ground(a) for a in t.args)
    return True


def atom_is_ground(a: Atom) -> bool:
    return all(term_is_ground(t) for t in a.args)


def term_key(t: Term):
    """Total order on terms, used wherever deterministic iteration matters."""
    if isinstance(t, Var):
        return (0, "", t.name)
    if isinstance(t, Const):
        if isinstance(t.symbol, int):
            return (1, 0, t.symbol)
        return (1, 1, t.symbol)
    return (2, t.functor, tuple(term_key(a) for a in t.args))


RENAME_SEP = "@"


def rename_var(v: Var, tag: int) -> Var:
    """Height-stable renaming: tag a source variable with the derivation depth.

    Source variable names never contain the separator (the lexer forbids it),
    so renamed variables cannot collide with goal variables and the same
    clause renamed at the same height always yields the same names.
    """
    return Var(f"{v.name}{RENAME_SEP}{tag}")


def base_var_name(name: str) -> str:
    """Strip the renaming tag; used for display and walkthrough comparisons."""
    return name.split(RENAME_SEP, 1)[0]
