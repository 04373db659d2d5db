"""Substitution-annotated AND-OR proof trees.

A proof tree records one SLDNF proof set-at-a-time: positive nodes carry
answer tuples (the refutation side), negative nodes carry shrinking
substitution sets (the finite-failure side).  This module provides the node
type, construction from an SLDNF proof, mechanical validation of the node
conditions, and JSON/DOT export.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from . import engine as eng
from .engine import Budget, Refutation, SldnfProof, TreeNode
from .program import BUILTIN_PREDS, Clause, Database
from .subst import (
    EMPTY,
    SubstSet,
    SubstTuple,
    Substitution,
    match_atom,
    mgu,
    more_general,
    subst_domain_vars,
    set_more_general,
)
from .terms import Atom, Compound, Const, Goal, Literal, Term, Var, atom_vars, goal_vars

POS_AND, NEG_AND, POS_OR, NEG_OR = "pos_and", "neg_and", "pos_or", "neg_or"


class ConstructError(Exception):
    pass


class ProofNode:
    """One node of a proof tree.  AND nodes are labelled with a conjunction
    of literals, OR nodes with a single atom.  Mutable: the maintenance
    algorithms repair trees in place."""

    __slots__ = (
        "kind",
        "label",
        "parent",
        "children",
        "orig_lit",
        "orig_clause",
        "renamed_clause",
        "u_seq",
        "s_seq",
        "u_pair",
        "s_pair",
        "positions",
        "evidence",
    )

    def __init__(self, kind: str, label):
        self.kind = kind
        self.label = label
        self.parent: Optional[ProofNode] = None
        self.children: list[ProofNode] = []
        self.orig_lit: Optional[int] = None  # OR under AND: source literal index
        self.orig_clause: Optional[int] = None  # AND under OR: clause id
        self.renamed_clause: Optional[Clause] = None
        self.u_seq: Optional[list[SubstTuple]] = None  # pos_and
        self.s_seq: Optional[list[SubstSet]] = None  # neg_and
        self.u_pair: Optional[list[SubstTuple]] = None  # pos_or [U_B, U_E]
        self.s_pair: Optional[list[SubstSet]] = None  # neg_or [S_B, S_E]
        self.positions: Optional[list[int]] = None  # pos_and under pos_or
        self.evidence = None  # leaves: refutations / per-sigma coverage

    # -- structure helpers ---------------------------------------------------

    def add_child(self, child: "ProofNode") -> "ProofNode":
        child.parent = self
        self.children.append(child)
        return child

    def nodes(self) -> Iterator["ProofNode"]:
        yield self
        for c in self.children:
            yield from c.nodes()

    def postorder(self) -> Iterator["ProofNode"]:
        for c in self.children:
            yield from c.postorder()
        yield self

    def detach_child(self, child: "ProofNode") -> None:
        self.children.remove(child)
        child.parent = None

    def is_attached_to(self, root: "ProofNode") -> bool:
        node = self
        while node.parent is not None:
            node = node.parent
        return node is root

    def child_index(self) -> int:
        assert self.parent is not None
        return self.parent.children.index(self)

    @property
    def is_or(self) -> bool:
        return self.kind in (POS_OR, NEG_OR)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def label_text(self) -> str:
        from .syntax import format_atom, format_goal

        return format_atom(self.label) if self.is_or else format_goal(self.label)

    def __repr__(self) -> str:
        return f"<{self.kind} {self.label_text()}>"


def node_count(root: ProofNode) -> int:
    return sum(1 for _ in root.nodes())


def _child_kind(parent_kind: str, positive_literal: bool) -> str:
    """OR child of an AND node: polarity flips across a negated edge."""
    pos = parent_kind == POS_AND
    return (POS_OR if pos else NEG_OR) if positive_literal else (NEG_OR if pos else POS_OR)


def _is_builtin_key(key: tuple[str, int]) -> bool:
    return key in BUILTIN_PREDS


def _stops_expansion(db: Database, atom: Atom) -> bool:
    """Construction stops at extensional and built-in atoms; an intensional
    predicate with an empty definition is a leaf too (nothing to expand)."""
    if atom.key in db.edb or _is_builtin_key(atom.key):
        return True
    return not db.clauses_for(atom.key)


# -- AND-OR tree expansion (the underlying call hierarchy) -----------------------


def and_or_children(db: Database, label, kind: str, depth: int = 0):
    """Children labels in the AND-OR tree underneath a node.

    AND nodes of length n yield their n atoms (with a flag marking negated
    edges); OR nodes yield one instantiated rule body per unifiable non-unit
    clause.  EDB and built-in atoms are leaves.
    """
    if kind in (POS_AND, NEG_AND):
        return [(lit.atom, not lit.positive) for lit in label]
    atom = label
    if _stops_expansion(db, atom):
        return []
    out = []
    for clause in db.clauses_for(atom.key):
        if clause.is_unit:
            continue
        renamed = eng.rename_clause(clause, depth + 1)
        theta = match_atom(renamed.head, atom)
        if theta is None:
            theta = mgu(renamed.head, atom)
        if theta is None:
            continue
        out.append((theta.apply_goal(renamed.body), clause.cid))
    return out


# -- construction (SLDNF proof -> proof tree) ------------------------------------


def construct(proof: SldnfProof, db: Database) -> ProofNode:
    """Turn a standard-rule SLDNF proof into a standard proof tree."""
    if not proof.succeeded:
        raise ConstructError("query has no refutation; nothing to construct")
    return _build_pos_and(
        db, proof, proof.goal, [proof.tau], [proof.main_refutation]
    )


def _label_for(renamed: Clause, label_atom: Atom) -> Goal:
    theta = match_atom(renamed.head, label_atom)
    if theta is None:
        raise ConstructError(
            f"cannot align clause head {renamed.head!r} with node label "
            f"{label_atom!r} (repeated head variables are unsupported)"
        )
    return theta.apply_goal(renamed.body)


def _build_pos_and(
    db: Database,
    proof: SldnfProof,
    label: Goal,
    u0: list[Substitution],
    refs: list[Refutation],
) -> ProofNode:
    node = ProofNode(POS_AND, label)
    n = len(label)
    u_stages: list[list[Substitution]] = [list(u0)]
    r_stages: list[list[Refutation]] = [list(refs)]
    part_stages: list[list[Refutation]] = []
    for _ in range(n):
        next_u: list[Substitution] = []
        next_r: list[Refutation] = []
        parts: list[Refutation] = []
        for sigma, r in zip(u_stages[-1], r_stages[-1]):
            part, rest = eng.split_refutation(r)
            next_u.append(sigma.compose(part.answer))
            next_r.append(rest)
            parts.append(part)
        u_stages.append(next_u)
        r_stages.append(next_r)
        part_stages.append(parts)
    node.u_seq = [SubstTuple(u) for u in u_stages]

    for i, lit in enumerate(label):
        prev = u_stages[i]
        if lit.positive:
            child = _build_pos_or(
                db,
                proof,
                lit.atom,
                node.u_seq[i],
                node.u_seq[i + 1],
                part_stages[i],
            )
        else:
            trees = []
            if not _is_builtin_key(lit.atom.key):
                for sigma in prev:
                    ground = sigma.apply_atom(lit.atom)
                    tree = proof.failed.get(ground)
                    if tree is None:
                        raise ConstructError(f"missing failed tree for {ground!r}")
                    trees.append((sigma, tree))
            child = _build_neg_or(
                db, proof, lit.atom, SubstSet(prev), SubstSet(), trees
            )
        child.orig_lit = i
        node.add_child(child)
    return node


def _build_pos_or(
    db: Database,
    proof: SldnfProof,
    label: Atom,
    u_b: SubstTuple,
    u_e: SubstTuple,
    refs: list[Refutation],
) -> ProofNode:
    node = ProofNode(POS_OR, label)
    node.u_pair = [u_b, u_e]
    if _stops_expansion(db, label):
        node.evidence = list(refs)
        return node
    groups: dict[int, list[int]] = {}
    for j, r in enumerate(refs):
        clause = r.first_clause()
        if clause is None:
            raise ConstructError(f"refutation for {label!r} has no first step")
        groups.setdefault(clause.cid, []).append(j)
    for cid in sorted(groups):
        idxs = groups[cid]
        renamed = refs[idxs[0]].steps[0].clause
        assert renamed is not None
        for j in idxs[1:]:
            if refs[j].steps[0].clause != renamed:
                raise ConstructError("height-unstable renaming across refutations")
        child_label = _label_for(renamed, label)
        child = _build_pos_and(
            db,
            proof,
            child_label,
            [u_b[j] for j in idxs],
            [refs[j].drop_first_goal() for j in idxs],
        )
        child.orig_clause = cid
        child.renamed_clause = renamed
        child.positions = list(idxs)
        node.add_child(child)
    return node


def _build_neg_or(
    db: Database,
    proof: SldnfProof,
    label: Atom,
    s_b: SubstSet,
    s_e: SubstSet,
    sigma_trees: list[tuple[Substitution, TreeNode]],
) -> ProofNode:
    node = ProofNode(NEG_OR, label)
    node.s_pair = [s_b, s_e]
    if _stops_expansion(db, label):
        cover: dict[Substitution, SubstSet] = {}
        for sigma, tree in sigma_trees:
            cov = eng.coverage(tree)
            cover[sigma] = SubstSet(sigma.compose(theta) for theta in cov)
        node.evidence = cover
        return node
    # group each tree's first resolution step by originating clause
    by_clause: dict[int, list[tuple[Substitution, TreeNode]]] = {}
    renamed_by_clause: dict[int, Clause] = {}
    for sigma, tree in sigma_trees:
        for child in tree.children:
            clause = child.step.clause
            assert clause is not None
            sub = eng._copy_rebased(child, EMPTY)
            by_clause.setdefault(clause.cid, []).append((sigma, sub))
            prev = renamed_by_clause.setdefault(clause.cid, clause)
            if prev != clause:
                raise ConstructError("height-unstable renaming across failed trees")
    for cid in sorted(by_clause):
        renamed = renamed_by_clause[cid]
        child_label = _label_for(renamed, label)
        child = _build_neg_and(db, proof, child_label, s_b, by_clause[cid])
        child.orig_clause = cid
        child.renamed_clause = renamed
        node.add_child(child)
    return node


def _build_neg_and(
    db: Database,
    proof: SldnfProof,
    label: Goal,
    s0: SubstSet,
    f0: list[tuple[Substitution, TreeNode]],
) -> ProofNode:
    node = ProofNode(NEG_AND, label)
    n = len(label)
    # raw stage-by-stage splitting; stage j covers literal j (1-based)
    raw_s: list[SubstSet] = [s0]
    raw_f: list[list[tuple[Substitution, TreeNode]]] = [f0]
    raw_parts: list[list[tuple[Substitution, TreeNode]]] = []
    raw_rootfail: list[list[Substitution]] = []
    for _ in range(n):
        parts: list[tuple[Substitution, TreeNode]] = []
        nxt: list[tuple[Substitution, TreeNode]] = []
        members: list[Substitution] = []
        rootfail: list[Substitution] = []
        for sigma, tree in raw_f[-1]:
            if tree.status == "fail" and not tree.children:
                rootfail.append(sigma)
            part, rests = eng.split_tree(tree)
            parts.append((sigma, part))
            for ans, rest in rests:
                combined = sigma.compose(ans)
                nxt.append((combined, rest))
                members.append(combined)
        raw_parts.append(parts)
        raw_rootfail.append(rootfail)
        raw_s.append(SubstSet(members))
        raw_f.append(nxt)

    node.s_seq = [s0]
    for j in range(1, n + 1):
        if raw_s[j] == raw_s[j - 1]:
            continue  # non-filtering literal: no child, stage dropped
        lit = label[j - 1]
        prev_set = raw_s[j - 1]
        if lit.positive:
            child = _build_neg_or(
                db, proof, lit.atom, prev_set, raw_s[j], raw_parts[j - 1]
            )
        else:
            eliminated = [s for s in prev_set if s not in raw_s[j]]
            u_b = SubstTuple(eliminated)
            refs = []
            if not _is_builtin_key(lit.atom.key):
                for sigma in eliminated:
                    ground = sigma.apply_atom(lit.atom)
                    r = proof.refutations.get(ground)
                    if r is None:
                        raise ConstructError(f"missing refutation for {ground!r}")
                    refs.append(r)
            child = _build_pos_or(db, proof, lit.atom, u_b, u_b, refs)
        child.orig_lit = j - 1
        node.s_seq.append(raw_s[j])
        node.add_child(child)
    return node


def root_answer(root: ProofNode) -> SubstTuple:
    """The root's final tuple U_n: the computed answer of the proved query."""
    if root.kind != POS_AND or not root.u_seq:
        raise ValueError("root answer is defined on annotated positive AND roots")
    return root.u_seq[-1]


# -- validation -------------------------------------------------------------------


@dataclass
class ValidationReport:
    is_proof_tree: bool
    is_safe: bool
    is_allowed: bool
    is_complete: bool
    violations: tuple[str, ...]

    @property
    def is_standard(self) -> bool:
        return self.is_proof_tree and self.is_safe and self.is_allowed and self.is_complete


def validate(
    root: ProofNode,
    db: Database,
    tau: Substitution = EMPTY,
    budget: Optional[Budget] = None,
) -> ValidationReport:
    """Mechanically check the proof-tree node conditions plus the safety,
    allowedness and completeness classifications.  Leaf obligations are
    re-verified by running the engine against db."""
    budget = budget or Budget()
    problems: list[str] = []
    structural: list[str] = []
    safe: list[str] = []
    allowed: list[str] = []
    complete: list[str] = []

    if root.kind != POS_AND:
        structural.append("c1: root must be a positive AND node")
    elif not root.u_seq or root.u_seq[0] != SubstTuple([tau]):
        structural.append("c1: root U_0 must be the singleton initial substitution")

    answer_cache: dict[Atom, Optional[list[Substitution]]] = {}

    def atom_answers(ground_or_not: Atom) -> list[Substitution]:
        key = ground_or_not
        if key not in answer_cache:
            if _is_builtin_key(key.key):
                ok = eng.eval_builtin(key) if not atom_vars(key) else False
                answer_cache[key] = [EMPTY] if ok else []
            else:
                res = eng.answers(db, (Literal(key, True),), EMPTY, budget.spawn())
                answer_cache[key] = [a for _, a in res]
        return answer_cache[key]

    for node in root.nodes():
        where = node.label_text()
        if node.kind == POS_AND:
            _check_pos_and(node, structural, where)
        elif node.kind == NEG_AND:
            _check_neg_and(node, structural, where)
        elif node.kind == POS_OR:
            _check_pos_or(node, db, structural, where)
        else:
            _check_neg_or(node, db, structural, where)

        # safety: groundness at polarity-switch children
        if node.kind == POS_AND and node.u_seq is not None:
            for child in node.children:
                if child.kind == NEG_OR and child.orig_lit is not None:
                    for sigma in node.u_seq[child.orig_lit]:
                        if atom_vars(sigma.apply_atom(child.label)):
                            safe.append(
                                f"unsafe: {child.label_text()} not ground under {sigma!r}"
                            )
        if node.kind == NEG_AND and node.s_seq is not None:
            for stage, child in enumerate(node.children, start=1):
                if child.kind == POS_OR:
                    prev, cur = node.s_seq[stage - 1], node.s_seq[stage]
                    for sigma in prev:
                        if sigma not in cur and atom_vars(sigma.apply_atom(child.label)):
                            safe.append(
                                f"unsafe: {child.label_text()} not ground under {sigma!r}"
                            )
        # allowedness: groundness of OR end annotations
        if node.kind == POS_OR and node.u_pair is not None:
            for sigma in node.u_pair[1]:
                if atom_vars(sigma.apply_atom(node.label)):
                    allowed.append(f"not allowed: {where} under {sigma!r}")
        if node.kind == NEG_OR and node.s_pair is not None:
            for sigma in node.s_pair[1]:
                if atom_vars(sigma.apply_atom(node.label)):
                    allowed.append(f"not allowed: {where} under {sigma!r}")
        # completeness: leaves carry EDB (or built-in) predicates
        if node.is_or and node.is_leaf and not _stops_expansion(db, node.label):
            complete.append(f"incomplete: non-extensional leaf {where}")

        # leaf evidence re-verification (conditions 6 and 7)
        if node.kind == POS_OR and node.is_leaf and node.u_pair is not None:
            u_b, u_e = node.u_pair
            if len(u_b) != len(u_e):
                structural.append(f"c7: tuple length mismatch at {where}")
            else:
                for sigma, end in zip(u_b, u_e):
                    hits = [
                        theta
                        for theta in atom_answers(sigma.apply_atom(node.label))
                        if sigma.compose(theta) == end
                    ]
                    if not hits:
                        structural.append(
                            f"c7: no refutation justifies {end!r} at {where}"
                        )
        if node.kind == NEG_OR and node.is_leaf and node.s_pair is not None:
            s_b, s_e = node.s_pair
            for sigma in s_b:
                answers_here = atom_answers(sigma.apply_atom(node.label))
                covered = [e for e in s_e if more_general(sigma, e)]
                if not covered and answers_here:
                    structural.append(
                        f"c6: {sigma!r} at {where} is uncovered but does not finitely fail"
                    )
                for e in covered:
                    if e != sigma and not any(
                        sigma.compose(theta) == e for theta in answers_here
                    ):
                        structural.append(
                            f"c6: {e!r} at {where} is not justified by any answer"
                        )

    problems = structural + safe + allowed + complete
    return ValidationReport(
        is_proof_tree=not structural,
        is_safe=not safe,
        is_allowed=not allowed,
        is_complete=not complete,
        violations=tuple(problems),
    )


def _check_pos_and(node: ProofNode, out: list[str], where: str) -> None:
    n = len(node.label)
    if node.u_seq is None or len(node.u_seq) != n + 1:
        out.append(f"c2: positive AND node {where} needs n+1 substitution tuples")
        return
    width = len(node.u_seq[0])
    if any(len(u) != width for u in node.u_seq):
        out.append(f"c2: tuple widths differ at {where}")
    if len(node.children) != n:
        out.append(f"c2: positive AND node {where} must have one child per literal")
        return
    for i, (lit, child) in enumerate(zip(node.label, node.children)):
        if child.orig_lit != i:
            out.append(f"c2: child order corrupted at {where}")
        expected_kind = _child_kind(POS_AND, lit.positive)
        if child.kind != expected_kind:
            out.append(f"c2: child {child.label_text()} of {where} has wrong polarity")
            continue
        if lit.atom != child.label:
            out.append(f"c2: child label mismatch at {where}")
        if child.kind == POS_OR:
            if child.u_pair is None or child.u_pair[0] != node.u_seq[i] or child.u_pair[1] != node.u_seq[i + 1]:
                out.append(f"c2: positive child annotation mismatch at {where}")
        else:
            if child.s_pair is None or child.s_pair[0] != node.u_seq[i].to_set() or len(child.s_pair[1]) != 0:
                out.append(f"c2: negative child of {where} must carry (U_i as set, empty)")
            if node.u_seq[i + 1] != node.u_seq[i]:
                out.append(f"c2: negative literal must not change the tuple at {where}")


def _check_neg_and(node: ProofNode, out: list[str], where: str) -> None:
    if node.s_seq is None or len(node.s_seq) != len(node.children) + 1:
        out.append(f"c3: negative AND node {where} needs one set per child plus S_0")
        return
    if not node.children:
        out.append(f"c3: negative AND node {where} has no filtering child")
    if len(node.children) > len(node.label):
        out.append(f"c3: more children than literals at {where}")
    last = -1
    for stage, child in enumerate(node.children, start=1):
        prev, cur = node.s_seq[stage - 1], node.s_seq[stage]
        if not set_more_general(prev, cur) or prev == cur:
            out.append(f"c3: stage {stage} at {where} is not strictly falling")
        if child.orig_lit is None or child.orig_lit <= last or child.orig_lit >= len(node.label):
            out.append(f"c3: child literal indices corrupted at {where}")
            continue
        last = child.orig_lit
        lit = node.label[child.orig_lit]
        expected_kind = _child_kind(NEG_AND, lit.positive)
        if child.kind != expected_kind:
            out.append(f"c3: child {child.label_text()} of {where} has wrong polarity")
            continue
        if lit.atom != child.label:
            out.append(f"c3: child label mismatch at {where}")
        if child.kind == NEG_OR:
            if child.s_pair is None or child.s_pair[0] != prev or child.s_pair[1] != cur:
                out.append(f"c3: negative child annotation mismatch at {where}")
        else:
            if child.u_pair is None or len(child.u_pair[0]) == 0:
                out.append(f"c3: eliminating child at {where} must carry a nonempty tuple")
                continue
            eliminated = SubstSet(s for s in prev if s not in cur)
            if child.u_pair[0].to_set() != eliminated:
                out.append(f"c3: eliminated members mismatch at {where}")
            if SubstSet(s for s in cur) != SubstSet(s for s in prev if s not in child.u_pair[0].to_set()):
                out.append(f"c3: S_i is not S_(i-1) minus the eliminated members at {where}")


def _check_pos_or(node: ProofNode, db: Database, out: list[str], where: str) -> None:
    if node.u_pair is None:
        out.append(f"c4: positive OR node {where} carries no tuple pair")
        return
    u_b, u_e = node.u_pair
    if len(u_b) != len(u_e):
        out.append(f"c4: tuple lengths differ at {where}")
    if node.is_leaf:
        return
    restriction = set(subst_domain_vars(u_b)) | set(atom_vars(node.label))
    seen_positions: list[int] = []
    prev_cid = -1
    for child in node.children:
        if child.kind != POS_AND:
            out.append(f"c4: child of {where} must be a positive AND node")
            continue
        if child.orig_clause is None or child.orig_clause <= prev_cid:
            out.append(f"c4: children of {where} must be in database clause order")
        prev_cid = child.orig_clause if child.orig_clause is not None else prev_cid
        if child.renamed_clause is not None and _label_mismatch(child, node.label):
            out.append(f"c4: child label of {where} does not match its clause")
        if child.positions is None or child.u_seq is None:
            out.append(f"c4: child of {where} lacks position bookkeeping")
            continue
        if len(child.positions) != len(child.u_seq[0]) or not child.positions:
            out.append(f"c4: positions and tuple width differ under {where}")
            continue
        for j, p in enumerate(child.positions):
            if p < 0 or p >= len(u_b):
                out.append(f"c4: position {p} out of range under {where}")
                continue
            if child.u_seq[0][j] != u_b[p]:
                out.append(f"c4: begin tuple mismatch at position {p} under {where}")
            if child.u_seq[-1][j].restrict(restriction) != u_e[p]:
                out.append(f"c4: end tuple mismatch at position {p} under {where}")
        seen_positions.extend(child.positions)
    if sorted(seen_positions) != list(range(len(u_b))):
        out.append(f"c4: child positions of {where} are not a permutation")


def _check_neg_or(node: ProofNode, db: Database, out: list[str], where: str) -> None:
    if node.s_pair is None:
        out.append(f"c5: negative OR node {where} carries no set pair")
        return
    s_b, s_e = node.s_pair
    if s_b.subset_of(s_e):
        out.append(f"c5: S_B must not be contained in S_E at {where}")
    if node.is_leaf:
        return
    union: list[Substitution] = []
    for child in node.children:
        if child.kind != NEG_AND:
            out.append(f"c5: child of {where} must be a negative AND node")
            continue
        if child.renamed_clause is not None and _label_mismatch(child, node.label):
            out.append(f"c5: child label of {where} does not match its clause")
        if child.s_seq is None or child.s_seq[0] != s_b:
            out.append(f"c5: child of {where} must start with S_B")
            continue
        restriction = set(subst_domain_vars(child.s_seq[0])) | set(atom_vars(node.label))
        union.extend(s.restrict(restriction) for s in child.s_seq[-1])
    if SubstSet(union) != s_e:
        out.append(f"c5: children do not reconstruct S_E at {where}")


def _label_mismatch(child: ProofNode, parent_label: Atom) -> bool:
    renamed = child.renamed_clause
    assert renamed is not None
    theta = match_atom(renamed.head, parent_label)
    if theta is None:
        return True
    return theta.apply_goal(renamed.body) != child.label


# -- serialization ----------------------------------------------------------------

FORMAT_VERSION = 1


def _term_to_json(t: Term):
    if isinstance(t, Var):
        return {"var": t.name}
    if isinstance(t, Const):
        return {"const": t.symbol}
    return {"fn": t.functor, "args": [_term_to_json(a) for a in t.args]}


def _term_from_json(d) -> Term:
    if "var" in d:
        return Var(d["var"])
    if "const" in d:
        return Const(d["const"])
    return Compound(d["fn"], tuple(_term_from_json(a) for a in d["args"]))


def _atom_to_json(a: Atom):
    return [a.pred, [_term_to_json(t) for t in a.args]]


def _atom_from_json(d) -> Atom:
    return Atom(d[0], tuple(_term_from_json(t) for t in d[1]))


def _goal_to_json(g: Goal):
    return [{"atom": _atom_to_json(l.atom), "pos": l.positive} for l in g]


def _goal_from_json(d) -> Goal:
    return tuple(Literal(_atom_from_json(x["atom"]), x["pos"]) for x in d)


def _subst_to_json(s: Substitution):
    return [[v.name, _term_to_json(t)] for v, t in s.items()]


def _subst_from_json(d) -> Substitution:
    return Substitution({Var(name): _term_from_json(t) for name, t in d})


def _clause_to_json(c: Clause):
    return {
        "head": _atom_to_json(c.head),
        "body": _goal_to_json(c.body),
        "origin": c.origin,
        "cid": c.cid,
    }


def _clause_from_json(d) -> Clause:
    return Clause(_atom_from_json(d["head"]), _goal_from_json(d["body"]), d["origin"], d["cid"])


def node_to_json(node: ProofNode) -> dict:
    out: dict = {"kind": node.kind}
    if node.is_or:
        out["label"] = _atom_to_json(node.label)
    else:
        out["label"] = _goal_to_json(node.label)
    if node.orig_lit is not None:
        out["orig_lit"] = node.orig_lit
    if node.orig_clause is not None:
        out["orig_clause"] = node.orig_clause
    if node.renamed_clause is not None:
        out["renamed_clause"] = _clause_to_json(node.renamed_clause)
    if node.u_seq is not None:
        out["u_seq"] = [[_subst_to_json(s) for s in u] for u in node.u_seq]
    if node.s_seq is not None:
        out["s_seq"] = [[_subst_to_json(s) for s in ss] for ss in node.s_seq]
    if node.u_pair is not None:
        out["u_pair"] = [[_subst_to_json(s) for s in u] for u in node.u_pair]
    if node.s_pair is not None:
        out["s_pair"] = [[_subst_to_json(s) for s in ss] for ss in node.s_pair]
    if node.positions is not None:
        out["positions"] = list(node.positions)
    out["children"] = [node_to_json(c) for c in node.children]
    return out


def node_from_json(d: dict) -> ProofNode:
    kind = d["kind"]
    label = _atom_from_json(d["label"]) if kind in (POS_OR, NEG_OR) else _goal_from_json(d["label"])
    node = ProofNode(kind, label)
    node.orig_lit = d.get("orig_lit")
    node.orig_clause = d.get("orig_clause")
    if "renamed_clause" in d:
        node.renamed_clause = _clause_from_json(d["renamed_clause"])
    if "u_seq" in d:
        node.u_seq = [SubstTuple(_subst_from_json(s) for s in u) for u in d["u_seq"]]
    if "s_seq" in d:
        node.s_seq = [SubstSet(_subst_from_json(s) for s in ss) for ss in d["s_seq"]]
    if "u_pair" in d:
        node.u_pair = [SubstTuple(_subst_from_json(s) for s in u) for u in d["u_pair"]]
    if "s_pair" in d:
        node.s_pair = [SubstSet(_subst_from_json(s) for s in ss) for ss in d["s_pair"]]
    if "positions" in d:
        node.positions = list(d["positions"])
    for c in d["children"]:
        node.add_child(node_from_json(c))
    return node


def tree_to_json(root: ProofNode) -> dict:
    return {"format": FORMAT_VERSION, "root": node_to_json(root)}


def tree_from_json(d: dict) -> ProofNode:
    if d.get("format") != FORMAT_VERSION:
        raise ValueError(f"unsupported proof-tree format {d.get('format')!r}")
    return node_from_json(d["root"])


def to_dot(root: ProofNode) -> str:
    """GraphViz export: annotations in the node labels, negated edges dashed."""
    lines = ["digraph prooftree {", "  node [shape=box, fontname=monospace];"]
    ids: dict[int, str] = {}

    def annot(node: ProofNode) -> str:
        if node.u_seq is not None:
            return " ".join(repr(u) for u in node.u_seq)
        if node.s_seq is not None:
            return " ".join(repr(s) for s in node.s_seq)
        if node.u_pair is not None:
            return f"{node.u_pair[0]!r} -> {node.u_pair[1]!r}"
        if node.s_pair is not None:
            return f"{node.s_pair[0]!r} -> {node.s_pair[1]!r}"
        return ""

    def esc(s: str) -> str:
        return s.replace("\\", "\\\\").replace('"', '\\"')

    for i, node in enumerate(root.nodes()):
        ids[id(node)] = f"n{i}"
        shape = "box" if node.is_or else "ellipse"
        lines.append(
            f'  n{i} [shape={shape}, label="{esc(node.label_text())}\\n{esc(annot(node))}"];'
        )
    for node in root.nodes():
        for child in node.children:
            negated = (node.kind, child.kind) in (
                (POS_AND, NEG_OR),
                (NEG_AND, POS_OR),
            )
            style = ' [style=dashed, label="¬"]' if negated else ""
            lines.append(f"  {ids[id(node)]} -> {ids[id(child)]}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
