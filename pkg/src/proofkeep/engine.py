"""SLDNF resolution with the standard computation rule.

Builds (possibly incomplete) SLDNF trees, enumerates refutations and
computed answers, detects finite failure and floundering, and provides the
composition/decomposition algebra on refutations and incomplete trees that
the proof-tree construction is built from.

Goals are kept fully instantiated: every node's literal list already has
the node's relevant substitution applied.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .program import BUILTIN_PREDS, Clause, Database
from .subst import EMPTY, SubstSet, Substitution, mgu
from .terms import Atom, Goal, Literal, Var, atom_is_ground, goal_vars, rename_var


class EngineError(Exception):
    pass


class FlounderError(EngineError):
    """A non-ground negative (or unevaluable built-in) literal was leftmost."""

    def __init__(self, goal: Goal):
        from .syntax import format_goal

        super().__init__(f"goal flounders: {format_goal(goal)}")
        self.goal = goal


class BudgetExceeded(EngineError):
    """Search budget exhausted; the outcome is unknown, not failure."""


class _Counter:
    __slots__ = ("nodes",)

    def __init__(self) -> None:
        self.nodes = 0


@dataclass
class Budget:
    """Node/depth limits.  Subsidiary trees get a fresh depth slice while the
    node counter is shared across the whole derivation."""

    max_depth: int = 512
    max_nodes: int = 1_000_000
    _counter: _Counter = field(default_factory=_Counter)

    def spawn(self) -> "Budget":
        return Budget(self.max_depth, self.max_nodes, self._counter)

    def tick(self, depth: int) -> None:
        self._counter.nodes += 1
        if self._counter.nodes > self.max_nodes:
            raise BudgetExceeded(f"node budget of {self.max_nodes} exhausted")
        if depth > self.max_depth:
            raise BudgetExceeded(f"depth budget of {self.max_depth} exhausted")

    @property
    def used(self) -> int:
        return self._counter.nodes


def eval_builtin(atom: Atom) -> bool:
    """Evaluate a ground comparison literal.  Integers compare numerically;
    mixed or symbolic arguments compare on their printed form."""
    left, right = atom.args
    lv, rv = getattr(left, "symbol", None), getattr(right, "symbol", None)
    if atom.pred == "=":
        return left == right
    if atom.pred == "\\=":
        return left != right
    if isinstance(lv, int) and isinstance(rv, int):
        a, b = lv, rv
    else:
        a, b = repr(left), repr(right)
    return a < b if atom.pred == "<" else a <= b


def is_builtin(lit: Literal) -> bool:
    return lit.atom.key in BUILTIN_PREDS


def select(goal: Goal) -> Optional[int]:
    """Standard computation rule: the leftmost literal, provided it is
    executable; otherwise None (the goal flounders)."""
    if not goal:
        raise ValueError("cannot select from the empty clause")
    lit = goal[0]
    if is_builtin(lit):
        return 0 if atom_is_ground(lit.atom) else None
    if lit.positive:
        return 0
    return 0 if atom_is_ground(lit.atom) else None


def rename_clause(clause: Clause, depth: int) -> Clause:
    """Height-stable renaming of the clause variables."""
    mapping = {v: rename_var(v, depth) for v in clause.vars()}
    if not mapping:
        return clause
    sub = Substitution(mapping)
    return Clause(sub.apply_atom(clause.head), sub.apply_goal(clause.body), clause.origin, clause.cid)


@dataclass(frozen=True)
class Step:
    """Edge data: how a node was reached from its parent."""

    theta: Substitution = EMPTY
    clause: Optional[Clause] = None  # the renamed clause instance (positive steps)
    builtin: bool = False
    neg_atom: Optional[Atom] = None  # ground atom of a negative step
    neg_failed_tree: Optional["TreeNode"] = None


class TreeNode:
    """A node of a (possibly incomplete) SLDNF tree.

    Each goal literal carries an origin tag: the call-hierarchy depth at
    which it was introduced.  Clause variables are renamed by that tag, so
    the same clause resolving the same literal occurrence is renamed
    identically in every branch and every subsidiary derivation (the
    height-stable renaming the proof-tree construction relies on)."""

    __slots__ = (
        "goal",
        "tags",
        "selected",
        "relevant",
        "status",
        "children",
        "step",
        "neg_refutation",
        "depth",
    )

    def __init__(
        self,
        goal: Goal,
        relevant: Substitution,
        depth: int,
        step: Optional[Step] = None,
        tags: Optional[tuple[int, ...]] = None,
    ):
        self.goal = goal
        self.tags = tags if tags is not None else (0,) * len(goal)
        self.selected: Optional[int] = None
        self.relevant = relevant
        # inner | fail | success (empty clause) | open (unselected leaf)
        self.status = "open"
        self.children: list[TreeNode] = []
        self.step = step or Step()
        self.neg_refutation: Optional["Refutation"] = None
        self.depth = depth

    @property
    def is_potential_success(self) -> bool:
        return self.status in ("success", "open")

    def nodes(self) -> Iterator["TreeNode"]:
        yield self
        for c in self.children:
            yield from c.nodes()

    def __repr__(self) -> str:
        from .syntax import format_goal

        return f"<{self.status} {format_goal(self.goal)}>"


HaltPredicate = Callable[[Goal, Substitution], bool]


def build_tree(
    db: Database,
    goal: Goal,
    tau: Substitution = EMPTY,
    budget: Optional[Budget] = None,
    halt: Optional[HaltPredicate] = None,
    _memo: Optional[dict] = None,
) -> TreeNode:
    """Complete SLDNF tree for db and goal*tau under the standard rule.

    With a halt predicate, expansion stops at matching nodes, which become
    potential-success leaves (incomplete trees).  Subsidiary trees for
    negative literals are always built to completion.
    """
    budget = budget or Budget()
    memo = _memo if _memo is not None else {}
    root = TreeNode(tau.apply_goal(goal), EMPTY, 0)
    _expand(db, root, budget, halt, memo)
    return root


def _expand(
    db: Database,
    node: TreeNode,
    budget: Budget,
    halt: Optional[HaltPredicate],
    memo: dict,
) -> None:
    budget.tick(node.depth)
    if not node.goal:
        node.status = "success"
        return
    if halt is not None and halt(node.goal, node.relevant):
        node.status = "open"
        return
    sel = select(node.goal)
    if sel is None:
        raise FlounderError(node.goal)
    node.selected = sel
    lit = node.goal[sel]
    tag = node.tags[sel]
    rest = node.goal[:sel] + node.goal[sel + 1 :]
    rest_tags = node.tags[:sel] + node.tags[sel + 1 :]

    if is_builtin(lit):
        holds = eval_builtin(lit.atom)
        if holds == lit.positive:
            child = TreeNode(
                rest, node.relevant, node.depth + 1, Step(builtin=True), rest_tags
            )
            node.children.append(child)
            node.status = "inner"
            _expand(db, child, budget, halt, memo)
        else:
            node.status = "fail"
        return

    if lit.positive:
        any_child = False
        for clause in db.clauses_for(lit.atom.key):
            renamed = rename_clause(clause, tag + 1)
            theta = mgu(renamed.head, lit.atom)
            if theta is None:
                continue
            any_child = True
            new_goal = theta.apply_goal(renamed.body + rest)
            child = TreeNode(
                new_goal,
                node.relevant.compose(theta),
                node.depth + 1,
                Step(theta=theta, clause=renamed),
                (tag + 1,) * len(renamed.body) + rest_tags,
            )
            node.children.append(child)
            _expand(db, child, budget, halt, memo)
        node.status = "inner" if any_child else "fail"
        return

    # ground negative literal: build the subsidiary tree for its atom
    atom = lit.atom
    sub = memo.get(atom)
    if sub is None:
        sub = build_tree(db, (Literal(atom, True),), EMPTY, budget.spawn(), None, memo)
        memo[atom] = sub
    if has_success(sub):
        node.status = "fail"
        node.neg_refutation = first_refutation(sub)
        return
    child = TreeNode(
        rest,
        node.relevant,
        node.depth + 1,
        Step(neg_atom=atom, neg_failed_tree=sub),
        rest_tags,
    )
    node.children.append(child)
    node.status = "inner"
    _expand(db, child, budget, halt, memo)


def has_success(tree: TreeNode) -> bool:
    return any(n.status == "success" for n in tree.nodes())


def is_finitely_failed(tree: TreeNode) -> bool:
    return all(n.status == "fail" for n in tree.nodes() if not n.children)


def coverage(tree: TreeNode) -> SubstSet:
    """Relevant substitutions of the potential-success leaves, restricted to
    the root goal's variables."""
    keep = goal_vars(tree.goal)
    return SubstSet(
        n.relevant.restrict(keep) for n in tree.nodes() if n.is_potential_success
    )


# -- refutations ----------------------------------------------------------------


@dataclass(frozen=True)
class Refutation:
    """A successful SLDNF derivation: a goal sequence ending in the empty
    clause, with the per-step substitutions and used clauses."""

    goals: tuple[Goal, ...]
    selected: tuple[int, ...]
    steps: tuple[Step, ...]
    relevants: tuple[Substitution, ...]

    @staticmethod
    def make(goals, selected, steps) -> "Refutation":
        rel = [EMPTY]
        for s in steps:
            rel.append(rel[-1].compose(s.theta))
        return Refutation(tuple(goals), tuple(selected), tuple(steps), tuple(rel))

    @property
    def root(self) -> Goal:
        return self.goals[0]

    @property
    def answer(self) -> Substitution:
        return self.relevants[-1].restrict(goal_vars(self.goals[0]))

    def first_clause(self) -> Optional[Clause]:
        return self.steps[0].clause if self.steps else None

    def drop_first_goal(self) -> "Refutation":
        """The refutation for the body of the first used clause."""
        return Refutation.make(self.goals[1:], self.selected[1:], self.steps[1:])

    def __repr__(self) -> str:
        from .syntax import format_goal

        return " , ".join("<- " + format_goal(g) if g else "[]" for g in self.goals)


def iter_refutations(tree: TreeNode) -> Iterator[Refutation]:
    """Depth-first, left-to-right enumeration of the success branches."""
    path: list[TreeNode] = []

    def walk(node: TreeNode) -> Iterator[Refutation]:
        path.append(node)
        if node.status == "success":
            goals = tuple(n.goal for n in path)
            selected = tuple(n.selected for n in path[:-1])
            steps = tuple(n.step for n in path[1:])
            yield Refutation.make(goals, selected, steps)
        for child in node.children:
            yield from walk(child)
        path.pop()

    yield from walk(tree)


def first_refutation(tree: TreeNode) -> Refutation:
    for r in iter_refutations(tree):
        return r
    raise EngineError("tree has no refutation")


def answers(
    db: Database,
    goal: Goal,
    tau: Substitution = EMPTY,
    budget: Optional[Budget] = None,
) -> list[tuple[Refutation, Substitution]]:
    """All computed answers of db and goal*tau, in derivation order."""
    tree = build_tree(db, goal, tau, budget)
    return [(r, r.answer) for r in iter_refutations(tree)]


# -- composition and splitting ----------------------------------------------------


def compose_refutations(r1: Refutation, g2: Goal, r2: Refutation) -> Refutation:
    """Chain a refutation of g1 with one of g2 instantiated by its answer."""
    expected = r1.answer.apply_goal(g2)
    if r2.goals[0] != expected:
        from .syntax import format_goal

        raise ValueError(
            f"second refutation proves {format_goal(r2.goals[0])}, "
            f"expected {format_goal(expected)}"
        )
    goals = [
        g + rel.apply_goal(g2) for g, rel in zip(r1.goals[:-1], r1.relevants[:-1])
    ] + list(r2.goals)
    selected = r1.selected + r2.selected
    steps = r1.steps + r2.steps
    return Refutation.make(goals, selected, steps)


def split_refutation(r: Refutation) -> tuple[Refutation, Refutation]:
    """Shortest prefix proving the first literal, plus the remainder."""
    n = len(r.goals[0])
    if n == 0:
        raise ValueError("cannot split a refutation of the empty clause")
    cut = None
    for k, g in enumerate(r.goals):
        if len(g) == n - 1:
            cut = k
            break
    if cut is None:
        raise ValueError("refutation does not have standard-rule shape")
    part_goals = [g[: len(g) - (n - 1)] for g in r.goals[: cut + 1]]
    part = Refutation.make(part_goals, r.selected[:cut], r.steps[:cut])
    rest = Refutation.make(r.goals[cut:], r.selected[cut:], r.steps[cut:])
    return part, rest


def _copy_rebased(node: TreeNode, relevant: Substitution, depth_delta: int = 0) -> TreeNode:
    new = TreeNode(node.goal, relevant, node.depth + depth_delta, node.step, node.tags)
    new.selected = node.selected
    new.status = node.status
    new.neg_refutation = node.neg_refutation
    for c in node.children:
        new.children.append(_copy_rebased(c, relevant.compose(c.step.theta), depth_delta))
    return new


def split_tree(tree: TreeNode) -> tuple[TreeNode, list[tuple[Substitution, TreeNode]]]:
    """Part tree for the first literal plus the rest trees, keyed by the
    accumulated answer at the leaf they hang off."""
    n = len(tree.goal)
    if n == 0:
        raise ValueError("cannot split a tree for the empty clause")
    first_vars = goal_vars(tree.goal[:1])
    rests: list[tuple[Substitution, TreeNode]] = []

    def walk(node: TreeNode) -> TreeNode:
        residue = len(node.goal) - (n - 1)
        if residue == 0:
            leaf = TreeNode((), node.relevant, node.depth, node.step, ())
            leaf.status = "success"
            answer = node.relevant.restrict(first_vars)
            rests.append((answer, _copy_rebased(node, EMPTY)))
            return leaf
        new = TreeNode(
            node.goal[:residue], node.relevant, node.depth, node.step, node.tags[:residue]
        )
        new.selected = node.selected
        new.neg_refutation = node.neg_refutation
        if node.children:
            new.status = "inner"
            new.children = [walk(c) for c in node.children]
        else:
            new.status = node.status
        return new

    return walk(tree), rests


def compose_trees(
    t: TreeNode,
    g2: Goal,
    parts: dict[Substitution, TreeNode],
    leaf_filter: Optional[Callable[[TreeNode], bool]] = None,
) -> TreeNode:
    """Composition of an incomplete tree for g1 with per-answer trees for g2.

    parts maps members of coverage(t) to incomplete trees for g2 instantiated
    by that member; every matching potential-success leaf is grafted (the
    complete composition, unless a leaf_filter narrows the chosen leaves).
    """
    g1vars = goal_vars(t.goal)
    cov = coverage(t)
    for sigma in parts:
        if sigma not in cov:
            raise ValueError(f"selection {sigma!r} is not in the coverage of the tree")

    def graft(leaf: TreeNode, t_sigma: TreeNode) -> TreeNode:
        k = leaf.goal

        def walk2(nd: TreeNode, relevant: Substitution) -> TreeNode:
            prefix = nd.relevant.apply_goal(k)
            new = TreeNode(
                prefix + nd.goal, relevant, nd.depth, nd.step, leaf.tags + nd.tags
            )
            new.neg_refutation = nd.neg_refutation
            if nd.selected is not None:
                new.selected = nd.selected + len(prefix)
            if nd.children:
                new.status = "inner"
                new.children = [
                    walk2(c, relevant.compose(c.step.theta)) for c in nd.children
                ]
            elif nd.status == "success" and prefix:
                new.status = "open"
            else:
                new.status = nd.status
            return new

        grafted = walk2(t_sigma, leaf.relevant)
        expected = leaf.goal + leaf.relevant.apply_goal(g2)
        if grafted.goal != expected:
            raise ValueError("grafted tree root does not match the extended leaf")
        return grafted

    def walk(node: TreeNode) -> TreeNode:
        theta = node.relevant
        sigma = theta.restrict(g1vars)
        if node.is_potential_success and sigma in parts:
            if leaf_filter is None or leaf_filter(node):
                return graft(node, parts[sigma])
        ext = theta.apply_goal(g2)
        new = TreeNode(
            node.goal + ext, theta, node.depth, node.step, node.tags + (0,) * len(ext)
        )
        new.selected = node.selected
        new.neg_refutation = node.neg_refutation
        if node.children:
            new.status = "inner"
            new.children = [walk(c) for c in node.children]
        elif node.status == "success" and new.goal:
            new.status = "open"
        else:
            new.status = node.status
        return new

    return walk(t)


# -- SLDNF proofs (the closed evidence set) ----------------------------------------


@dataclass
class SldnfProof:
    """The smallest closed set of evidence for a query: the main refutation
    (or failed tree), one finitely failed tree per negative literal selected
    in a refutation, and one refutation per negative literal selected at a
    failure leaf of a failed tree; deduplicated by ground atom."""

    goal: Goal
    tau: Substitution
    succeeded: bool
    main: Refutation | TreeNode
    failed: dict[Atom, TreeNode]
    refutations: dict[Atom, Refutation]

    @property
    def main_refutation(self) -> Refutation:
        if not self.succeeded:
            raise EngineError("query has no refutation")
        assert isinstance(self.main, Refutation)
        return self.main


def build_proof(
    db: Database,
    goal: Goal,
    tau: Substitution = EMPTY,
    budget: Optional[Budget] = None,
) -> SldnfProof:
    budget = budget or Budget()
    tree = build_tree(db, goal, tau, budget)
    succeeded = has_success(tree)
    main: Refutation | TreeNode = first_refutation(tree) if succeeded else tree
    proof = SldnfProof(goal, tau, succeeded, main, {}, {})
    if succeeded:
        _collect_refutation(proof, proof.main_refutation)
    else:
        _collect_failed(proof, tree)
    return proof


def _collect_refutation(proof: SldnfProof, r: Refutation) -> None:
    for step in r.steps:
        if step.neg_atom is not None and step.neg_failed_tree is not None:
            if step.neg_atom not in proof.failed:
                proof.failed[step.neg_atom] = step.neg_failed_tree
                _collect_failed(proof, step.neg_failed_tree)


def _collect_failed(proof: SldnfProof, tree: TreeNode) -> None:
    for node in tree.nodes():
        if node.status != "fail" or node.selected is None:
            continue
        lit = node.goal[node.selected]
        if lit.positive or is_builtin(lit):
            continue
        atom = lit.atom
        if atom not in proof.refutations and node.neg_refutation is not None:
            proof.refutations[atom] = node.neg_refutation
            _collect_refutation(proof, node.neg_refutation)
