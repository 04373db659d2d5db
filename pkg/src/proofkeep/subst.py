"""Substitutions, unification and the substitution-set/tuple algebra.

Substitutions are kept in idempotent normal form: no x->x entries, and no
variable of the domain occurs in any image term.  The generality order,
set difference and unifiability tests below are what the proof-tree
annotations are built from.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .terms import (
    Atom,
    Compound,
    Const,
    Goal,
    Literal,
    Term,
    Var,
    term_key,
    term_vars,
)


class Substitution:
    """An immutable, idempotent mapping from variables to terms."""

    __slots__ = ("_map", "_hash")

    def __init__(self, mapping: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        items = dict(mapping)
        self._map: dict[Var, Term] = {
            v: t for v, t in sorted(items.items(), key=lambda kv: kv[0].name) if t != v
        }
        self._hash: Optional[int] = None

    @property
    def domain(self) -> frozenset[Var]:
        return frozenset(self._map)

    def get(self, v: Var) -> Term:
        return self._map.get(v, v)

    def items(self) -> Iterator[tuple[Var, Term]]:
        return iter(self._map.items())

    def is_identity(self) -> bool:
        return not self._map

    def is_ground(self) -> bool:
        return all(not term_vars(t) for t in self._map.values())

    # -- application -------------------------------------------------------

    def apply_term(self, t: Term) -> Term:
        if isinstance(t, Var):
            return self._map.get(t, t)
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(self.apply_term(a) for a in t.args))
        return t

    def apply_atom(self, a: Atom) -> Atom:
        return Atom(a.pred, tuple(self.apply_term(t) for t in a.args))

    def apply_literal(self, lit: Literal) -> Literal:
        return Literal(self.apply_atom(lit.atom), lit.positive)

    def apply_goal(self, g: Goal) -> Goal:
        return tuple(self.apply_literal(lit) for lit in g)

    # -- algebra -----------------------------------------------------------

    def compose(self, other: "Substitution") -> "Substitution":
        """Pointwise composition: x * result == (x * self) * other."""
        out: dict[Var, Term] = {}
        for v, t in self._map.items():
            out[v] = other.apply_term(t)
        for v, t in other._map.items():
            if v not in self._map:
                out[v] = t
        return Substitution(out)

    def restrict(self, variables: Iterable[Var]) -> "Substitution":
        keep = set(variables)
        return Substitution({v: t for v, t in self._map.items() if v in keep})

    # -- value semantics ----------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __len__(self) -> int:
        return len(self._map)

    def __repr__(self) -> str:
        if not self._map:
            return "{}"
        inner = ", ".join(f"{v.name}/{t!r}" for v, t in self._map.items())
        return "{%s}" % inner

    def sort_key(self):
        return tuple((v.name, term_key(t)) for v, t in self._map.items())


EMPTY = Substitution()


# -- unification ------------------------------------------------------------


def _occurs(v: Var, t: Term) -> bool:
    if isinstance(t, Var):
        return v == t
    if isinstance(t, Compound):
        return any(_occurs(v, a) for a in t.args)
    return False


def unify_terms(pairs: Sequence[tuple[Term, Term]]) -> Optional[Substitution]:
    """Most general unifier of a list of term equations, or None.

    Orientation rule: when two variables meet, the variable of the left-hand
    side becomes the binding key, so results are deterministic.
    """
    binding: dict[Var, Term] = {}

    def resolve(t: Term) -> Term:
        if isinstance(t, Var):
            seen = t
            while isinstance(seen, Var) and seen in binding:
                seen = binding[seen]
            return seen
        return t

    def walk(t: Term) -> Term:
        t = resolve(t)
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(walk(a) for a in t.args))
        return t

    stack: list[tuple[Term, Term]] = list(reversed(pairs))
    while stack:
        s, t = stack.pop()
        s, t = resolve(s), resolve(t)
        if s == t:
            continue
        if isinstance(s, Var):
            if _occurs(s, walk(t)):
                return None
            binding[s] = t
        elif isinstance(t, Var):
            if _occurs(t, walk(s)):
                return None
            binding[t] = s
        elif isinstance(s, Compound) and isinstance(t, Compound):
            if s.functor != t.functor or len(s.args) != len(t.args):
                return None
            stack.extend(reversed(list(zip(s.args, t.args))))
        else:
            return None
    return Substitution({v: walk(v) for v in binding})


def mgu(a: Atom | Term, b: Atom | Term) -> Optional[Substitution]:
    """Most general unifier of two atoms (or terms); None when not unifiable."""
    if isinstance(a, Atom) or isinstance(b, Atom):
        if not (isinstance(a, Atom) and isinstance(b, Atom)):
            raise TypeError("cannot unify an atom with a term")
        if a.key != b.key:
            return None
        return unify_terms(list(zip(a.args, b.args)))
    return unify_terms([(a, b)])


def match_term(pattern: Term, target: Term, binding: dict[Var, Term]) -> bool:
    """One-sided simultaneous matching: extend binding so pattern*binding == target."""
    if isinstance(pattern, Var):
        if pattern in binding:
            return binding[pattern] == target
        binding[pattern] = target
        return True
    if isinstance(pattern, Const):
        return pattern == target
    if isinstance(target, Compound) and pattern.functor == target.functor and len(
        pattern.args
    ) == len(target.args):
        return all(match_term(p, t, binding) for p, t in zip(pattern.args, target.args))
    return False


def match_atom(pattern: Atom, target: Atom) -> Optional[Substitution]:
    if pattern.key != target.key:
        return None
    binding: dict[Var, Term] = {}
    for p, t in zip(pattern.args, target.args):
        if not match_term(p, t, binding):
            return None
    return Substitution(binding)


def more_general(s1: Substitution, s2: Substitution) -> bool:
    """True iff some theta composes s1 into s2 (s1 >= s2).

    Because stored substitutions are idempotent, the only candidate theta is
    s2 restricted to the variables outside dom(s1); it remains to check that
    it reproduces s2 on dom(s1).
    """
    theta = Substitution({v: t for v, t in s2.items() if v not in s1.domain})
    for v, t in s1.items():
        if theta.apply_term(t) != s2.get(v):
            return False
    return True


def unifiable(s1: Substitution, s2: Substitution) -> bool:
    """True iff the two substitutions have a common instance.

    Decided by unifying the tuple encodings of both over the union of their
    domains.
    """
    shared = sorted(s1.domain | s2.domain, key=lambda v: v.name)
    pairs = [(s1.get(v), s2.get(v)) for v in shared]
    return unify_terms(pairs) is not None


# -- sets and tuples of substitutions ---------------------------------------


class SubstSet:
    """A duplicate-free set of substitutions with deterministic iteration."""

    __slots__ = ("_members",)

    def __init__(self, members: Iterable[Substitution] = ()):
        seen: dict[Substitution, None] = {}
        for m in members:
            seen.setdefault(m, None)
        self._members: tuple[Substitution, ...] = tuple(seen)

    @property
    def members(self) -> tuple[Substitution, ...]:
        return self._members

    def __iter__(self) -> Iterator[Substitution]:
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, s: Substitution) -> bool:
        return s in self._members

    def __eq__(self, other) -> bool:
        return isinstance(other, SubstSet) and set(self._members) == set(other._members)

    def __hash__(self) -> int:
        return hash(frozenset(self._members))

    def __repr__(self) -> str:
        return "{%s}" % ", ".join(map(repr, self._members))

    def union(self, other: Iterable[Substitution]) -> "SubstSet":
        return SubstSet(list(self._members) + list(other))

    def restrict(self, variables: Iterable[Var]) -> "SubstSet":
        keep = tuple(variables)
        return SubstSet(m.restrict(keep) for m in self._members)

    def subset_of(self, other: "SubstSet") -> bool:
        return set(self._members) <= set(other._members)

    def instances_of(self, delta: Iterable[Substitution]) -> "SubstSet":
        """Members subsumed by (instances of) some element of delta."""
        ds = list(delta)
        return SubstSet(m for m in self._members if any(more_general(d, m) for d in ds))

    def minus(self, delta: Iterable[Substitution]) -> "SubstSet":
        """Drop every member that some element of delta is more general than."""
        ds = list(delta)
        return SubstSet(
            m for m in self._members if not any(more_general(d, m) for d in ds)
        )


def set_more_general(s: SubstSet, s2: SubstSet) -> bool:
    """S >= S': every member of S' is an instance of some member of S."""
    return all(any(more_general(a, b) for a in s) for b in s2)


def set_strictly_more_general(s: SubstSet, s2: SubstSet) -> bool:
    return set_more_general(s, s2) and not s.subset_of(s2)


def set_difference(s: SubstSet, s2: SubstSet) -> SubstSet:
    """Generality-based difference: remove members explained by s2."""
    return s.minus(s2)


def uncovered(s_b: SubstSet, s_e: SubstSet) -> SubstSet:
    """Members of S_B with no instance in S_E (the finitely-failed ones)."""
    return SubstSet(
        m for m in s_b if not any(more_general(m, e) for e in s_e)
    )


class SubstTuple:
    """An ordered tuple of substitutions; position is meaningful."""

    __slots__ = ("_items",)

    def __init__(self, items: Iterable[Substitution] = ()):
        self._items: tuple[Substitution, ...] = tuple(items)

    @property
    def items(self) -> tuple[Substitution, ...]:
        return self._items

    def __iter__(self) -> Iterator[Substitution]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, i: int) -> Substitution:
        return self._items[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, SubstTuple) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        return "<%s>" % ", ".join(map(repr, self._items))

    def concat(self, other: "SubstTuple") -> "SubstTuple":
        return SubstTuple(self._items + other._items)

    def restrict(self, variables: Iterable[Var]) -> "SubstTuple":
        keep = tuple(variables)
        return SubstTuple(m.restrict(keep) for m in self._items)

    def delete_positions(self, positions: Iterable[int]) -> "SubstTuple":
        drop = set(positions)
        return SubstTuple(m for i, m in enumerate(self._items) if i not in drop)

    def to_set(self) -> SubstSet:
        return SubstSet(self._items)


def tuple_more_general(u: SubstTuple, u2: SubstTuple) -> bool:
    return len(u) == len(u2) and all(more_general(a, b) for a, b in zip(u, u2))


def subst_domain_vars(collection: Iterable[Substitution]) -> set[Var]:
    out: set[Var] = set()
    for s in collection:
        out |= s.domain
    return out
