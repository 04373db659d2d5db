"""Incremental integrity checking by proof-tree maintenance.

Classifies a transaction's impact on a proof tree (maintenance situations
vs. conflicts), restores trees after deletions that only shrink the
negative side, cleans up and partially re-proves around conflicts, and
merges freshly proved subtrees back in.  The full re-check is kept as an
oracle for tests and the paranoid mode.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import engine as eng
from . import prooftree as pt
from .engine import Budget, BudgetExceeded, build_proof
from .program import Clause, Database, Transaction
from .prooftree import NEG_AND, NEG_OR, POS_AND, POS_OR, ProofNode, construct
from .subst import EMPTY, SubstSet, SubstTuple, Substitution, match_atom, more_general
from .terms import Atom, Goal, Literal

# conflict kinds (the four bullets of the conflict definition)
DEL_POS_LEAF = "del-pos-leaf"
ADD_NEG_LEAF = "add-neg-leaf"
DEL_RULE_POS_AND = "del-rule-pos-AND"
ADD_RULE_NEG_OR = "add-rule-neg-OR"


@dataclass
class ImpactReport:
    maintenance_hits: list[tuple[ProofNode, Clause]] = field(default_factory=list)
    conflict_hits: list[tuple[ProofNode, Clause, str]] = field(default_factory=list)

    @property
    def has_conflicts(self) -> bool:
        return bool(self.conflict_hits)

    @property
    def is_quiet(self) -> bool:
        return not self.maintenance_hits and not self.conflict_hits


@dataclass
class RepairStats:
    maintenance_hits: int = 0
    conflict_hits: int = 0
    reproofs: int = 0
    engine_nodes: int = 0


@dataclass
class Verdict:
    status: str  # satisfied | violated | unknown
    tree: Optional[ProofNode]
    stats: RepairStats


def _fact_matches(label: Atom, sigma: Substitution, fact: Atom) -> bool:
    """The deleted/added ground fact matches the annotated leaf instance."""
    inst = sigma.apply_atom(label)
    if inst == fact:
        return True
    return match_atom(inst, fact) is not None


def detect(root: ProofNode, txn: Transaction) -> ImpactReport:
    """Scan a standard proof tree for the transaction's hit points."""
    report = ImpactReport()
    del_rule_cids = {c.cid for c in txn.deleted_rules}
    for node in root.postorder():
        if node.kind == NEG_OR and node.is_leaf and node.s_pair is not None:
            for fact in txn.deleted_facts:
                if fact.key == node.label.key and any(
                    _fact_matches(node.label, s, fact) for s in node.s_pair[1]
                ):
                    report.maintenance_hits.append((node, Clause(fact)))
            for fact in txn.added_facts:
                if fact.key == node.label.key and any(
                    _fact_matches(node.label, s, fact) for s in node.s_pair[0]
                ):
                    report.conflict_hits.append((node, Clause(fact), ADD_NEG_LEAF))
        if node.kind == POS_OR and node.is_leaf and node.u_pair is not None:
            for fact in txn.deleted_facts:
                if fact.key == node.label.key and any(
                    _fact_matches(node.label, s, fact) for s in node.u_pair[1]
                ):
                    report.conflict_hits.append((node, Clause(fact), DEL_POS_LEAF))
        if node.kind == NEG_AND and node.orig_clause in del_rule_cids:
            clause = next(c for c in txn.deleted_rules if c.cid == node.orig_clause)
            report.maintenance_hits.append((node, clause))
        if node.kind == POS_AND and node.orig_clause in del_rule_cids:
            clause = next(c for c in txn.deleted_rules if c.cid == node.orig_clause)
            report.conflict_hits.append((node, clause, DEL_RULE_POS_AND))
        if node.kind == NEG_OR:
            for rule in txn.added_rules:
                if rule.head.key == node.label.key and match_atom(rule.head, node.label) is not None:
                    report.conflict_hits.append((node, rule, ADD_RULE_NEG_OR))
    return report


# -- helpers on annotations ------------------------------------------------------


def _set_minus(s: SubstSet, delta: Iterable[Substitution]) -> SubstSet:
    return s.minus(delta)


def _instances(s: SubstSet, delta: Iterable[Substitution]) -> SubstSet:
    return s.instances_of(delta)


def _stage_of(node: ProofNode) -> int:
    """1-based stage index of an OR child inside a negative AND node."""
    assert node.parent is not None and node.parent.kind == NEG_AND
    return node.parent.children.index(node) + 1


def _restriction_vars(node_or: ProofNode, s0: SubstSet):
    from .subst import subst_domain_vars
    from .terms import atom_vars

    return set(subst_domain_vars(s0)) | set(atom_vars(node_or.label))


def prune_empty(root: ProofNode) -> None:
    """Drop OR children whose annotations emptied out; they no longer
    contribute to the proof."""
    changed = True
    while changed:
        changed = False
        for node in list(root.nodes()):
            for child in list(node.children):
                dead = False
                if node.kind == POS_OR and child.u_seq is not None and not len(child.u_seq[0]):
                    dead = True
                if node.kind == NEG_OR and child.s_seq is not None and not len(child.s_seq[0]):
                    dead = True
                if dead:
                    node.detach_child(child)
                    changed = True


# -- proof maintenance (deletions on the negative side) ---------------------------


def pflege(root: ProofNode, txn: Transaction, stats: Optional[RepairStats] = None) -> None:
    """Repair all maintenance situations of the transaction without any
    engine call: shrink the negative-side annotations bottom-up and push the
    shrinkage across sibling subtrees top-down."""
    stats = stats or RepairStats()
    del_rule_cids = {c.cid for c in txn.deleted_rules}
    targets = [n for n in root.postorder()]
    for node in targets:
        if not node.is_attached_to(root):
            continue
        if node.kind == NEG_OR and node.is_leaf and node.s_pair is not None:
            facts = [f for f in txn.deleted_facts if f.key == node.label.key]
            if facts:
                hit = _start_bu_neg_or_leaf(node, facts)
                if hit:
                    stats.maintenance_hits += 1
        elif node.kind == NEG_AND and node.orig_clause in del_rule_cids:
            stats.maintenance_hits += 1
            _start_bu_neg_and(node)
    prune_empty(root)


def _start_bu_neg_or_leaf(node: ProofNode, facts: list[Atom]) -> bool:
    s_b, s_e = node.s_pair
    delta = SubstSet(
        s for s in s_e if any(_fact_matches(node.label, s, f) for f in facts)
    )
    if not len(delta):
        return False
    node.s_pair[1] = SubstSet(s for s in s_e if s not in delta)
    parent = node.parent
    if parent is not None and parent.kind == NEG_AND:
        _bu_neg_and(parent, delta, _stage_of(node))
    return True


def _start_bu_neg_and(node: ProofNode) -> None:
    parent = node.parent
    assert parent is not None and parent.kind == NEG_OR
    s_last = node.s_seq[-1]
    delta = s_last.restrict(_restriction_vars(parent, node.s_seq[0]))
    parent.detach_child(node)
    if len(s_last):
        _bu_neg_or(parent, delta)


def _bu_neg_and(node: ProofNode, delta: SubstSet, stage: int) -> None:
    """Propagate a shrinkage arriving at the given stage bottom-up through
    the stage sequence, pushing top-down into later siblings."""
    s = node.s_seq
    s[stage] = SubstSet(m for m in s[stage] if m not in delta)
    if node.children[stage - 1].kind == NEG_OR:
        node.children[stage - 1].s_pair[1] = s[stage]
    j = stage + 1
    current = delta
    while j < len(s):
        delta_j = _instances(s[j], current)
        s[j] = _set_minus(s[j], current)
        child = node.children[j - 1]
        if s[j] == s[j - 1]:
            del s[j]
            node.detach_child(child)
            current = delta_j
            continue
        if child.kind == NEG_OR:
            if len(current):
                _td_neg_or(child, current)
        else:
            u_b = child.u_pair[0]
            idx = [i for i, m in enumerate(u_b) if m in current]
            if idx:
                _td_pos_or(child, idx)
        current = delta_j
        j += 1
    if len(current):
        parent = node.parent
        if parent is not None and parent.kind == NEG_OR:
            rest = current.restrict(_restriction_vars(parent, s[0]))
            _bu_neg_or(parent, rest)


def _bu_neg_or(node: ProofNode, delta: SubstSet) -> None:
    s_b, s_e = node.s_pair
    unexplained = []
    for sigma in delta:
        explained = False
        for child in node.children:
            rest = child.s_seq[-1].restrict(_restriction_vars(node, child.s_seq[0]))
            if sigma in rest:
                explained = True
                break
        if not explained:
            unexplained.append(sigma)
    delta2 = SubstSet(unexplained)
    if not len(delta2):
        return
    node.s_pair[1] = SubstSet(m for m in s_e if m not in delta2)
    parent = node.parent
    if parent is not None and parent.kind == NEG_AND:
        _bu_neg_and(parent, delta2, _stage_of(node))


def _td_neg_or(node: ProofNode, delta: SubstSet) -> None:
    s_b, s_e = node.s_pair
    delta_e = _instances(s_e, delta)
    node.s_pair[0] = _set_minus(s_b, delta)
    node.s_pair[1] = SubstSet(m for m in s_e if m not in delta_e)
    if len(delta):
        for child in node.children:
            _td_neg_and(child, delta)


def _td_neg_and(node: ProofNode, delta0: SubstSet) -> None:
    s = node.s_seq
    # the printed loop starts at stage 1; stage 0 mirrors the parent's S_B
    # and is filtered too so the S_0 = S_B invariant survives
    s[0] = _set_minus(s[0], delta0)
    j = 1
    current = delta0
    while j < len(s):
        delta_j = _instances(s[j], current)
        s[j] = _set_minus(s[j], current)
        child = node.children[j - 1]
        if s[j] == s[j - 1]:
            del s[j]
            node.detach_child(child)
            current = delta_j
            continue
        if child.kind == NEG_OR:
            if len(current):
                _td_neg_or(child, current)
        else:
            u_b = child.u_pair[0]
            idx = [i for i, m in enumerate(u_b) if m in current]
            if idx:
                _td_pos_or(child, idx)
        current = delta_j
        j += 1


def _td_pos_or(node: ProofNode, positions: list[int]) -> None:
    drop = set(positions)
    node.u_pair[0] = node.u_pair[0].delete_positions(drop)
    node.u_pair[1] = node.u_pair[1].delete_positions(drop)
    if isinstance(node.evidence, list):
        node.evidence = [r for i, r in enumerate(node.evidence) if i not in drop]
    if node.is_leaf:
        return
    for child in list(node.children):
        idx = [j for j, p in enumerate(child.positions) if p in drop]
        if idx:
            _td_pos_and(child, idx)
    # reindex the surviving positions against the shrunk tuple
    for child in node.children:
        child.positions = [
            p - sum(1 for q in drop if q < p) for p in child.positions if p not in drop
        ]


def _td_pos_and(node: ProofNode, positions: list[int]) -> None:
    drop = set(positions)
    for j, child in enumerate(node.children):
        if child.kind == NEG_OR:
            delta = SubstSet(m for i, m in enumerate(node.u_seq[j]) if i in drop)
            if len(delta):
                _td_neg_or(child, delta)
        else:
            _td_pos_or(child, positions)
    node.u_seq = [u.delete_positions(drop) for u in node.u_seq]


# -- conflict cleanup (bereinigung) ------------------------------------------------


@dataclass
class Barrier:
    kind: str  # "pos" | "neg" | "root"
    node: Optional[ProofNode] = None
    delta: Optional[SubstSet] = None  # neg side residual
    positions: Optional[list[int]] = None  # pos side / root residual


def _bereinige_neg_or(node: ProofNode, delta: SubstSet) -> Barrier:
    parent = node.parent
    assert parent is not None
    if parent.kind == POS_AND:
        _td_neg_or(node, delta)
        return Barrier("neg", node, delta=delta)
    return _bereinige_neg_and(parent, delta)


def _bereinige_neg_and(node: ProofNode, delta: SubstSet) -> Barrier:
    up = SubstSet(
        s for s in node.s_seq[0] if any(more_general(s, d) for d in delta)
    )
    parent = node.parent
    assert parent is not None and parent.kind == NEG_OR
    return _bereinige_neg_or(parent, up)


def _bereinige_pos_or(node: ProofNode, positions: list[int]) -> Barrier:
    parent = node.parent
    assert parent is not None
    if parent.kind == NEG_AND:
        residual = SubstSet(node.u_pair[0][i] for i in positions)
        _td_pos_or(node, positions)
        return Barrier("pos", node, delta=residual)
    return _bereinige_pos_and(parent, positions)


def _bereinige_pos_and(node: ProofNode, positions: list[int]) -> Barrier:
    parent = node.parent
    if parent is None:
        return Barrier("root", node, positions=positions)
    assert parent.kind == POS_OR
    up = sorted({node.positions[i] for i in positions})
    return _bereinige_pos_or(parent, up)


# -- merging freshly proved subtrees (vereinigung) ----------------------------------


class MergeError(Exception):
    pass


def vereinige(a: ProofNode, b: ProofNode) -> None:
    """Merge proof tree b (for the same label, same computation rule) into a."""
    if a.kind != b.kind or a.label != b.label:
        raise MergeError(f"cannot merge {a!r} with {b!r}")
    if a.kind == POS_OR:
        _merge_pos_or(a, b)
    elif a.kind == NEG_OR:
        _merge_neg_or(a, b)
    elif a.kind == POS_AND:
        _merge_pos_and(a, b)
    else:
        _merge_neg_and(a, b)


def _merge_pos_or(a: ProofNode, b: ProofNode) -> None:
    offset = len(a.u_pair[0])
    a.u_pair[0] = a.u_pair[0].concat(b.u_pair[0])
    a.u_pair[1] = a.u_pair[1].concat(b.u_pair[1])
    if isinstance(a.evidence, list) and isinstance(b.evidence, list):
        a.evidence = a.evidence + b.evidence
    if b.is_leaf:
        return
    by_clause = {c.orig_clause: c for c in a.children}
    for child_b in list(b.children):
        child_b.positions = [p + offset for p in child_b.positions]
        mate = by_clause.get(child_b.orig_clause)
        if mate is None:
            _insert_by_clause(a, child_b)
        else:
            _merge_pos_and(mate, child_b)


def _merge_pos_and(a: ProofNode, b: ProofNode) -> None:
    if len(a.label) != len(b.label) or a.label != b.label:
        raise MergeError(f"cannot merge {a!r} with {b!r}")
    a.u_seq = [u.concat(u2) for u, u2 in zip(a.u_seq, b.u_seq)]
    if a.positions is not None and b.positions is not None:
        a.positions = a.positions + b.positions
    for child_a, child_b in zip(a.children, b.children):
        if child_a.kind == POS_OR:
            _merge_pos_or(child_a, child_b)
        else:
            _merge_neg_or(child_a, child_b)


def _merge_neg_or(a: ProofNode, b: ProofNode) -> None:
    old_s_e = a.s_pair[1]
    a.s_pair[0] = a.s_pair[0].union(b.s_pair[0])
    a.s_pair[1] = a.s_pair[1].union(b.s_pair[1])
    if isinstance(a.evidence, dict) and isinstance(b.evidence, dict):
        merged = dict(a.evidence)
        for k, v in b.evidence.items():
            merged[k] = merged[k].union(v) if k in merged else v
        a.evidence = merged
    if b.is_leaf:
        return
    by_clause = {c.orig_clause: c for c in a.children}
    for child_b in list(b.children):
        mate = by_clause.get(child_b.orig_clause)
        if mate is None:
            _insert_by_clause(a, child_b)
            _push_stratum(child_b, old_s_e)
        else:
            _merge_neg_and(mate, child_b)


def _merge_neg_and(a: ProofNode, b: ProofNode) -> None:
    if a.label != b.label:
        raise MergeError(f"cannot merge {a!r} with {b!r}")

    def stage_set(node: ProofNode, lit_index: int) -> SubstSet:
        best = node.s_seq[0]
        for stage, child in enumerate(node.children, start=1):
            if child.orig_lit is not None and child.orig_lit <= lit_index:
                best = node.s_seq[stage]
        return best

    lits_a = [c.orig_lit for c in a.children]
    lits_b = [c.orig_lit for c in b.children]
    merged_lits = sorted(set(lits_a) | set(lits_b))
    old_children_a = list(a.children)
    old_s_a = list(a.s_seq)
    olds = {
        "a": {c.orig_lit: c for c in old_children_a},
        "b": {c.orig_lit: c for c in b.children},
    }

    new_children: list[ProofNode] = []
    new_s: list[SubstSet] = [old_s_a[0].union(b.s_seq[0])]
    for k in merged_lits:
        set_a = stage_set_with(a, old_children_a, old_s_a, k)
        set_b = stage_set(b, k)
        new_s.append(set_a.union(set_b))
        child_a = olds["a"].get(k)
        child_b = olds["b"].get(k)
        if child_a is not None and child_b is not None:
            if child_a.kind == POS_OR:
                _merge_pos_or(child_a, child_b)
            else:
                _merge_neg_or(child_a, child_b)
            new_children.append(child_a)
        elif child_a is not None:
            if child_a.kind == NEG_OR:
                _push_stratum(child_a, stage_set(b, k))
            new_children.append(child_a)
        else:
            assert child_b is not None
            if child_b.kind == NEG_OR:
                _push_stratum(child_b, stage_set_with(a, old_children_a, old_s_a, k))
            child_b.parent = a
            new_children.append(child_b)
    a.children = new_children
    a.s_seq = new_s


def stage_set_with(node: ProofNode, children: list[ProofNode], s_seq: list[SubstSet], lit_index: int) -> SubstSet:
    best = s_seq[0]
    for stage, child in enumerate(children, start=1):
        if child.orig_lit is not None and child.orig_lit <= lit_index:
            best = s_seq[stage]
    return best


def _push_stratum(node: ProofNode, extra: SubstSet) -> None:
    """Union a set into every substitution set of the subtree within the
    same polarity stratum (stopping at negation-marked edges)."""
    if not len(extra):
        return
    if node.kind == NEG_OR:
        node.s_pair[0] = node.s_pair[0].union(extra)
        node.s_pair[1] = node.s_pair[1].union(extra)
        if isinstance(node.evidence, dict):
            for sigma in extra:
                node.evidence.setdefault(sigma, SubstSet([sigma]))
        for child in node.children:
            _push_stratum(child, extra)
    elif node.kind == NEG_AND:
        node.s_seq = [s.union(extra) for s in node.s_seq]
        for child in node.children:
            if child.kind == NEG_OR:
                _push_stratum(child, extra)


def _insert_by_clause(parent: ProofNode, child: ProofNode) -> None:
    child.parent = parent
    cid = child.orig_clause if child.orig_clause is not None else 1 << 30
    at = len(parent.children)
    for i, c in enumerate(parent.children):
        existing = c.orig_clause if c.orig_clause is not None else 1 << 30
        if existing > cid:
            at = i
            break
    parent.children.insert(at, child)


# -- conflict resolution -------------------------------------------------------------


class _Violated(Exception):
    pass


class _ReplaceRoot(Exception):
    def __init__(self, new_root: ProofNode):
        self.new_root = new_root


def loese_konflikt(
    root: ProofNode,
    node: ProofNode,
    seed_delta: Optional[SubstSet],
    seed_positions: Optional[list[int]],
    db_post: Database,
    budget: Budget,
    stats: RepairStats,
) -> ProofNode:
    """Clean up around one conflict node and re-prove the residual
    obligations at each polarity barrier; returns the (possibly replaced)
    root or raises _Violated."""
    if node.kind == POS_OR:
        barrier = _bereinige_pos_or(node, seed_positions or [])
    elif node.kind == NEG_OR:
        barrier = _bereinige_neg_or(node, seed_delta or SubstSet())
    elif node.kind == POS_AND:
        barrier = _bereinige_pos_and(node, seed_positions or [])
    else:
        barrier = _bereinige_neg_and(node, seed_delta or SubstSet())

    while True:
        if barrier.kind == "root":
            if not barrier.positions:
                return root
            stats.reproofs += 1
            goal: Goal = root.label
            tau = root.u_seq[0][0]
            proof = build_proof(db_post, goal, tau, budget.spawn())
            if not proof.succeeded:
                raise _Violated()
            raise _ReplaceRoot(construct(proof, db_post))

        if barrier.kind == "pos":
            a = barrier.node
            failures: list[Substitution] = []
            for sigma in barrier.delta or SubstSet():
                stats.reproofs += 1
                proof = build_proof(
                    db_post, (Literal(a.label, True),), sigma, budget.spawn()
                )
                if proof.succeeded:
                    fresh = construct(proof, db_post)
                    vereinige(a, fresh.children[0])
                else:
                    failures.append(sigma)
            if not failures:
                return root
            parent = a.parent
            assert parent is not None and parent.kind == NEG_AND
            barrier = _bereinige_neg_and(parent, SubstSet(failures))
            continue

        # negative barrier: re-establish finite failure per residual sigma
        a = barrier.node
        failures = []
        for sigma in barrier.delta or SubstSet():
            stats.reproofs += 1
            proof = build_proof(
                db_post, (Literal(a.label, False),), sigma, budget.spawn()
            )
            if proof.succeeded:
                fresh = construct(proof, db_post)
                vereinige(a, fresh.children[0])
            else:
                failures.append(sigma)
        if not failures:
            return root
        parent = a.parent
        assert parent is not None and parent.kind == POS_AND
        lit_index = a.orig_lit
        u_prev = parent.u_seq[lit_index]
        idx = [i for i, s in enumerate(u_prev) if s in failures]
        barrier = _bereinige_pos_and(parent, idx)


# -- the checking algorithm ------------------------------------------------------------


def _conflict_seed(node: ProofNode, clause: Clause, kind: str):
    if kind == DEL_POS_LEAF:
        u_e = node.u_pair[1]
        idx = [
            i
            for i, s in enumerate(u_e)
            if _fact_matches(node.label, s, clause.head)
        ]
        return None, idx
    if kind == ADD_NEG_LEAF:
        delta = SubstSet(
            s
            for s in node.s_pair[0]
            if match_atom(s.apply_atom(node.label), clause.head) is not None
        )
        return delta, None
    if kind == DEL_RULE_POS_AND:
        return None, list(range(len(node.u_seq[0])))
    # a rule added for this predicate can produce new answers for any sigma
    return node.s_pair[0], None


def ueberpruefe_baum(
    root: ProofNode,
    txn: Transaction,
    db_post: Database,
    budget: Optional[Budget] = None,
) -> Verdict:
    """Incrementally re-validate one constraint's proof tree under a
    transaction: maintenance first, then per-conflict cleanup and partial
    re-proof; the first irreparable conflict yields 'violated'."""
    budget = budget or Budget()
    stats = RepairStats()
    start_nodes = budget.used
    try:
        pflege(root, txn, stats)
        conflicts = [
            hit
            for hit in detect(root, txn).conflict_hits
        ]
        stats.conflict_hits = len(conflicts)
        for node, clause, kind in conflicts:
            if not node.is_attached_to(root):
                continue
            delta, positions = _conflict_seed(node, clause, kind)
            if (delta is None or not len(delta)) and not positions:
                continue
            try:
                root = loese_konflikt(root, node, delta, positions, db_post, budget, stats)
            except _ReplaceRoot as repl:
                root = repl.new_root
            except _Violated:
                stats.engine_nodes = budget.used - start_nodes
                return Verdict("violated", None, stats)
        prune_empty(root)
        stats.engine_nodes = budget.used - start_nodes
        return Verdict("satisfied", root, stats)
    except BudgetExceeded:
        stats.engine_nodes = budget.used - start_nodes
        return Verdict("unknown", None, stats)


def oracle_recheck(
    db_post: Database, entry: Atom, budget: Optional[Budget] = None
) -> str:
    """Ground-truth baseline: fresh SLDNF run of the entry query."""
    try:
        proof = build_proof(db_post, (Literal(entry, True),), EMPTY, budget or Budget())
    except BudgetExceeded:
        return "unknown"
    return "satisfied" if proof.succeeded else "violated"
