"""Normal programs and deductive databases: clauses, EDB/IDB partition,
dependency analysis, static legality checks and database updates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import syntax
from .syntax import COMPARISONS, ParsedDatabase, ParsedTransaction, RawClause
from .terms import Atom, Const, Goal, Literal, Term, Var, atom_is_ground, atom_vars
from .subst import Substitution

BUILTIN_PREDS = frozenset((op, 2) for op in COMPARISONS)


class DatabaseError(ValueError):
    pass


class TransactionError(ValueError):
    pass


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple[Literal, ...] = ()
    origin: str = "base"  # "base" or "constraint"
    cid: int = -1

    @property
    def is_unit(self) -> bool:
        return not self.body

    def vars(self) -> list[Var]:
        acc = atom_vars(self.head)
        for lit in self.body:
            atom_vars(lit.atom, acc)
        return acc

    def __repr__(self) -> str:
        return format_clause(self)


def format_clause(c: Clause | RawClause) -> str:
    if not c.body:
        return syntax.format_atom(c.head) + "."
    body = ", ".join(syntax.format_literal(lit) for lit in c.body)
    return f"{syntax.format_atom(c.head)} :- {body}."


def normalize_head(head: Atom, body: tuple[Literal, ...]) -> tuple[Atom, tuple[Literal, ...]]:
    """Rewrite non-variable head arguments of a rule through '=' built-ins,
    so every non-unit clause head carries only variables."""
    if not body or all(isinstance(t, Var) for t in head.args):
        return head, body
    used = {v.name for v in atom_vars(head)}
    for lit in body:
        used |= {v.name for v in atom_vars(lit.atom)}
    new_args: list[Term] = []
    eqs: list[Literal] = []
    counter = 1
    for t in head.args:
        if isinstance(t, Var):
            new_args.append(t)
            continue
        while f"V{counter}" in used:
            counter += 1
        v = Var(f"V{counter}")
        used.add(v.name)
        new_args.append(v)
        eqs.append(Literal(Atom("=", (v, t))))
    return Atom(head.pred, tuple(new_args)), tuple(eqs) + body


def normalize_clause_vars(head: Atom, body: tuple[Literal, ...]) -> tuple[Atom, tuple[Literal, ...]]:
    """Canonical variable numbering (left to right) for structural clause identity."""
    mapping: dict[Var, Var] = {}

    def canon(t: Term) -> Term:
        if isinstance(t, Var):
            if t not in mapping:
                mapping[t] = Var(f"_{len(mapping)}")
            return mapping[t]
        return t

    def canon_atom(a: Atom) -> Atom:
        return Atom(a.pred, tuple(canon(t) for t in a.args))

    return canon_atom(head), tuple(Literal(canon_atom(l.atom), l.positive) for l in body)


def clause_signature(head: Atom, body: tuple[Literal, ...]) -> tuple:
    h, b = normalize_clause_vars(head, body)
    return (h, b)


@dataclass(frozen=True)
class Database:
    clauses: tuple[Clause, ...]
    edb: frozenset[tuple[str, int]]
    idb: frozenset[tuple[str, int]]
    declared_edb: frozenset[tuple[str, int]] = frozenset()
    declared_idb: frozenset[tuple[str, int]] = frozenset()
    next_cid: int = 0

    def __post_init__(self):
        index: dict[tuple[str, int], list[Clause]] = {}
        for c in self.clauses:
            index.setdefault(c.head.key, []).append(c)
        object.__setattr__(self, "_by_pred", index)

    @staticmethod
    def build(
        raw: Iterable[tuple[Atom, tuple[Literal, ...], str]],
        declared_edb: frozenset = frozenset(),
        declared_idb: frozenset = frozenset(),
        start_cid: int = 0,
        allow_mixed: bool = False,
    ) -> "Database":
        clauses: list[Clause] = []
        cid = start_cid
        for head, body, origin in raw:
            if head.key in BUILTIN_PREDS:
                raise DatabaseError(f"cannot define built-in predicate {head.pred}")
            head, body = normalize_head(head, body)
            clauses.append(Clause(head, body, origin, cid))
            cid += 1
        edb, idb = compute_partition(clauses, declared_edb, declared_idb, allow_mixed)
        db = Database(tuple(clauses), edb, idb, declared_edb, declared_idb, cid)
        if not allow_mixed:
            _check_units_ground(db)
        return db

    def clauses_for(self, key: tuple[str, int]) -> list[Clause]:
        return self._by_pred.get(key, [])

    def clause_by_cid(self, cid: int) -> Optional[Clause]:
        for c in self.clauses:
            if c.cid == cid:
                return c
        return None

    def constants(self) -> list[Const]:
        seen: dict[Const, None] = {}
        for c in self.clauses:
            for t in c.head.args:
                if isinstance(t, Const):
                    seen.setdefault(t, None)
            for lit in c.body:
                for t in lit.atom.args:
                    if isinstance(t, Const):
                        seen.setdefault(t, None)
        return list(seen)

    def extend(self, extra: Iterable[tuple[Atom, tuple[Literal, ...], str]]) -> "Database":
        """New database with additional clauses appended (fresh stable ids)."""
        raw = [(c.head, c.body, c.origin) for c in self.clauses] + list(extra)
        return Database.build(raw, self.declared_edb, self.declared_idb)

    def __repr__(self) -> str:
        return f"<Database {len(self.clauses)} clauses>"


def compute_partition(
    clauses: list[Clause],
    declared_edb: frozenset,
    declared_idb: frozenset,
    allow_mixed: bool = False,
) -> tuple[frozenset, frozenset]:
    has_unit: set[tuple[str, int]] = set()
    has_rule: set[tuple[str, int]] = set()
    used: set[tuple[str, int]] = set()
    for c in clauses:
        (has_unit if c.is_unit else has_rule).add(c.head.key)
        used.add(c.head.key)
        for lit in c.body:
            used.add(lit.atom.key)
    clash = has_unit & has_rule
    if clash:
        if not allow_mixed:
            name, arity = sorted(clash)[0]
            raise DatabaseError(
                f"predicate {name}/{arity} has both facts and rules (EDB/IDB clash)"
            )
        # plain normal programs (the resolution algebra) may mix; rule-bearing
        # predicates count as intensional
        has_unit -= clash
    overlap = declared_edb & declared_idb
    if overlap:
        name, arity = sorted(overlap)[0]
        raise DatabaseError(f"predicate {name}/{arity} declared both edb and idb")
    for key in sorted(has_rule & declared_edb):
        raise DatabaseError(f"predicate {key[0]}/{key[1]} declared edb but has rules")
    for key in sorted(has_unit & declared_idb):
        raise DatabaseError(f"predicate {key[0]}/{key[1]} declared idb but has facts")
    # Undefined-but-used predicates default to the EDB (empty extension).
    rest = used - has_unit - has_rule - declared_edb - declared_idb - BUILTIN_PREDS
    edb = frozenset(has_unit | declared_edb | rest)
    idb = frozenset(has_rule | declared_idb)
    return edb, idb


def _check_units_ground(db: Database) -> None:
    for c in db.clauses:
        if c.is_unit and not atom_is_ground(c.head):
            raise DatabaseError(f"non-ground fact: {format_clause(c)}")


def parse_database(text: str) -> Database:
    parsed: ParsedDatabase = syntax.parse_database_text(text)
    return Database.build(
        [(rc.head, rc.body, "base") for rc in parsed.clauses],
        parsed.declared_edb,
        parsed.declared_idb,
    )


def parse_program(text: str) -> Database:
    """Like parse_database but for plain normal programs: a predicate may be
    defined by facts and rules at once (used by the resolution algebra)."""
    parsed: ParsedDatabase = syntax.parse_database_text(text)
    return Database.build(
        [(rc.head, rc.body, "base") for rc in parsed.clauses],
        parsed.declared_edb,
        parsed.declared_idb,
        allow_mixed=True,
    )


def format_database(db: Database) -> str:
    lines: list[str] = []
    defined = {c.head.key for c in db.clauses}
    extra_edb = sorted(db.declared_edb - defined)
    extra_idb = sorted(db.declared_idb - defined)
    if extra_edb:
        lines.append(":- edb " + ", ".join(f"{n}/{a}" for n, a in extra_edb) + ".")
    if extra_idb:
        lines.append(":- idb " + ", ".join(f"{n}/{a}" for n, a in extra_idb) + ".")
    lines.extend(format_clause(c) for c in db.clauses)
    return "\n".join(lines) + ("\n" if lines else "")


# -- dependency analysis -------------------------------------------------------


@dataclass(frozen=True)
class DependencyGraph:
    edges: frozenset[tuple[tuple[str, int], tuple[str, int], int]]
    pos: frozenset[tuple[tuple[str, int], tuple[str, int]]]  # p >_{+1} q
    neg: frozenset[tuple[tuple[str, int], tuple[str, int]]]  # p >_{-1} q

    def depends(self, p, q) -> bool:
        return (p, q) in self.pos or (p, q) in self.neg

    def mutual(self, p, q) -> bool:
        return self.depends(p, q) and self.depends(q, p)


def analyze_dependencies(db: Database) -> DependencyGraph:
    """Signed transitive dependency relations; a path's sign is the product
    of its edge signs."""
    direct: set[tuple[tuple[str, int], tuple[str, int], int]] = set()
    for c in db.clauses:
        for lit in c.body:
            sign = 1 if lit.positive else -1
            direct.add((c.head.key, lit.atom.key, sign))
    closure: set[tuple[tuple[str, int], tuple[str, int], int]] = set(direct)
    changed = True
    while changed:
        changed = False
        by_source: dict = {}
        for p, q, s in closure:
            by_source.setdefault(p, []).append((q, s))
        for p, r, t in direct:
            for q, u in by_source.get(r, ()):
                item = (p, q, t * u)
                if item not in closure:
                    closure.add(item)
                    changed = True
    pos = frozenset((p, q) for p, q, s in closure if s == 1)
    neg = frozenset((p, q) for p, q, s in closure if s == -1)
    return DependencyGraph(frozenset(direct), pos, neg)


@dataclass(frozen=True)
class LegalityReport:
    stratified: bool
    strict: bool
    allowed: bool
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.stratified and self.strict and self.allowed


def _binding_positive_vars(body: tuple[Literal, ...]) -> set[Var]:
    out: set[Var] = set()
    for lit in body:
        if lit.positive and lit.atom.key not in BUILTIN_PREDS:
            out |= set(atom_vars(lit.atom))
    return out


def check_legality(db: Database, deps: DependencyGraph | None = None) -> LegalityReport:
    """Stratification, strictness and allowedness report.

    Base clauses must be safe (every variable bound by a positive body
    literal); compiled-constraint clauses only need to be admissible
    (every variable in the head or a positive body literal).
    """
    if deps is None:
        deps = analyze_dependencies(db)
    violations: list[str] = []
    stratified = True
    strict = True
    preds = sorted({c.head.key for c in db.clauses} | {l.atom.key for c in db.clauses for l in c.body})
    for p in preds:
        for q in preds:
            if deps.mutual(p, q) and (p, q) in deps.neg:
                stratified = False
                violations.append(
                    f"not stratified: {p[0]}/{p[1]} and {q[0]}/{q[1]} are mutually and negatively dependent"
                )
            if (p, q) in deps.pos and (p, q) in deps.neg:
                strict = False
                violations.append(
                    f"not strict: {p[0]}/{p[1]} depends both positively and negatively on {q[0]}/{q[1]}"
                )
    allowed = True
    for c in db.clauses:
        binding = _binding_positive_vars(c.body)
        head_vars = set(atom_vars(c.head))
        if c.origin == "base":
            bad = [v for v in c.vars() if v not in binding]
            if bad:
                allowed = False
                violations.append(
                    f"not safe: variable {bad[0].name} of '{format_clause(c)}' "
                    "does not occur in a positive body literal"
                )
        else:
            bad = [v for v in c.vars() if v not in binding and v not in head_vars]
            if bad:
                allowed = False
                violations.append(
                    f"not admissible: variable {bad[0].name} of '{format_clause(c)}' "
                    "occurs neither in the head nor in a positive body literal"
                )
    return LegalityReport(stratified, strict, allowed, tuple(violations))


# -- transactions ---------------------------------------------------------------


@dataclass(frozen=True)
class Transaction:
    deletes: tuple[Clause, ...]  # resolved against the database (real cids)
    adds: tuple[Clause, ...]  # cid == -1 until applied

    @property
    def deleted_facts(self) -> list[Atom]:
        return [c.head for c in self.deletes if c.is_unit]

    @property
    def added_facts(self) -> list[Atom]:
        return [c.head for c in self.adds if c.is_unit]

    @property
    def deleted_rules(self) -> list[Clause]:
        return [c for c in self.deletes if not c.is_unit]

    @property
    def added_rules(self) -> list[Clause]:
        return [c for c in self.adds if not c.is_unit]


def resolve_transaction(db: Database, parsed: ParsedTransaction) -> Transaction:
    """Validate a parsed transaction against a database (Del membership,
    add/del disjointness, EDB/IDB discipline) and resolve Del clause ids."""
    deletes: list[Clause] = []
    for rc in parsed.deletes:
        head, body = normalize_head(rc.head, rc.body)
        sig = clause_signature(head, body)
        found = None
        for c in db.clauses:
            if clause_signature(c.head, c.body) == sig:
                found = c
                break
        if found is None:
            raise TransactionError(f"clause to delete not in database: {format_clause(rc)}")
        if any(found.cid == d.cid for d in deletes):
            raise TransactionError(f"clause deleted twice: {format_clause(rc)}")
        deletes.append(found)
    adds: list[Clause] = []
    del_sigs = {clause_signature(c.head, c.body) for c in deletes}
    for rc in parsed.adds:
        head, body = normalize_head(rc.head, rc.body)
        if clause_signature(head, body) in del_sigs:
            raise TransactionError(
                f"clause appears in both add and del: {format_clause(rc)}"
            )
        if not body:
            if not atom_is_ground(head):
                raise TransactionError(f"added fact must be ground: {format_clause(rc)}")
            if head.key in db.idb:
                raise TransactionError(
                    f"added fact {format_clause(rc)} targets intensional predicate"
                )
        else:
            if head.key in db.edb and db.clauses_for(head.key):
                raise TransactionError(
                    f"added rule {format_clause(rc)} targets extensional predicate"
                )
        adds.append(Clause(head, body, "base", -1))
    return Transaction(tuple(deletes), tuple(adds))


def parse_transaction(db: Database, text: str) -> Transaction:
    return resolve_transaction(db, syntax.parse_transaction_text(text))


def apply_transaction(db: Database, txn: Transaction) -> Database:
    """Resulting database: deletions removed, additions appended to the end of
    their predicate's definition; the input value is unchanged."""
    removed = {c.cid for c in txn.deletes}
    remaining = [c for c in db.clauses if c.cid not in removed]
    cid = db.next_cid
    out = list(remaining)
    for add in txn.adds:
        new = Clause(add.head, add.body, add.origin, cid)
        cid += 1
        last = -1
        for i, c in enumerate(out):
            if c.head.key == new.head.key:
                last = i
        if last >= 0:
            out.insert(last + 1, new)
        else:
            out.append(new)
    edb, idb = compute_partition(out, db.declared_edb, db.declared_idb)
    new_db = Database(tuple(out), edb, idb, db.declared_edb, db.declared_idb, cid)
    _check_units_ground(new_db)
    return new_db


def invert_transaction(txn: Transaction) -> ParsedTransaction:
    """Swap add and del (used by tests for the undo property)."""
    return ParsedTransaction(
        deletes=tuple(RawClause(c.head, c.body) for c in txn.adds),
        adds=tuple(RawClause(c.head, c.body) for c in txn.deletes),
    )
