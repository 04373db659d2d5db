"""Persisted session state: database snapshot, compiled constraints and the
proof forest, as canonical versioned JSON."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

from . import prooftree as pt
from .compiler import CompiledConstraint
from .formulas import Formula, format_formula
from .program import Clause, Database, compute_partition, format_clause
from .prooftree import ProofNode
from .syntax import parse_clause_text

STATE_FORMAT = 1


class StateError(ValueError):
    pass


@dataclass
class ConstraintState:
    entry: str
    formula_text: str
    status: str  # satisfied | violated
    tree: Optional[ProofNode]


@dataclass
class SessionState:
    database: Database
    constraints: list[ConstraintState]
    db_hash: str
    fol_hash: str


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def to_json(state: SessionState) -> dict:
    return {
        "format": STATE_FORMAT,
        "database": {
            "clauses": [
                [c.cid, c.origin, format_clause(c)] for c in state.database.clauses
            ],
            "declared_edb": sorted([n, a] for n, a in state.database.declared_edb),
            "declared_idb": sorted([n, a] for n, a in state.database.declared_idb),
            "next_cid": state.database.next_cid,
        },
        "constraints": [
            {
                "entry": c.entry,
                "formula": c.formula_text,
                "status": c.status,
                "tree": pt.tree_to_json(c.tree) if c.tree is not None else None,
            }
            for c in state.constraints
        ],
        "hashes": {"db": state.db_hash, "fol": state.fol_hash},
    }


def from_json(data: dict) -> SessionState:
    if data.get("format") != STATE_FORMAT:
        raise StateError(f"unsupported state format {data.get('format')!r}")
    dbd = data["database"]
    clauses = []
    for cid, origin, text in dbd["clauses"]:
        raw = parse_clause_text(text)
        clauses.append(Clause(raw.head, raw.body, origin, cid))
    declared_edb = frozenset((n, a) for n, a in dbd["declared_edb"])
    declared_idb = frozenset((n, a) for n, a in dbd["declared_idb"])
    edb, idb = compute_partition(clauses, declared_edb, declared_idb)
    db = Database(tuple(clauses), edb, idb, declared_edb, declared_idb, dbd["next_cid"])
    constraints = [
        ConstraintState(
            entry=c["entry"],
            formula_text=c["formula"],
            status=c["status"],
            tree=pt.tree_from_json(c["tree"]) if c["tree"] is not None else None,
        )
        for c in data["constraints"]
    ]
    return SessionState(db, constraints, data["hashes"]["db"], data["hashes"]["fol"])


def dumps(state: SessionState) -> str:
    return json.dumps(to_json(state), sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> SessionState:
    return from_json(json.loads(text))


def save(state: SessionState, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(state))


def load(path: str) -> SessionState:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def clone_tree(tree: ProofNode) -> ProofNode:
    """Value copy of a proof tree (leaf evidence is derivable and dropped)."""
    return pt.tree_from_json(pt.tree_to_json(tree))
