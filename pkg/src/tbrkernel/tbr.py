"""TBR moves and exact TBR distance.

Two independent routes to ``d_TBR``:

* :func:`tbr_distance_bfs` explores the move graph breadth first.  It is only
  practical for tiny trees and serves as the oracle.
* :func:`tbr_distance_maf` searches for a maximum agreement forest by
  bounded branching with iterative deepening on the number of cuts.  It is
  the solver used at kernel scale.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from . import _graph
from .errors import BudgetExceeded, PreconditionError
from .reductions import DEFAULT_RULES, kernelize
from .tree import UnrootedTree, check_same_taxa, set_key, sort_taxa, taxon_key


# ---------------------------------------------------------------------- moves


@dataclass(frozen=True)
class TbrMove:
    """Delete ``cut_edge`` and reconnect the two sides.

    ``reattach_1`` is an edge of the component containing ``cut_edge[0]``
    after suppression, given by original vertex ids, or ``None`` when that
    component is a single vertex.  ``reattach_2`` likewise for
    ``cut_edge[1]``.
    """

    cut_edge: tuple
    reattach_1: tuple | None
    reattach_2: tuple | None


def _bisect(tree, u, v):
    adj, labels = tree.mutable()
    if not tree.has_edge(u, v):
        raise PreconditionError(f"({u}, {v}) is not an edge")
    _graph.remove_edge(adj, u, v)
    sides = []
    for x in (u, v):
        comp = _graph.components({w: adj[w] for w in adj})  # cheap at these sizes
        comp = next(c for c in comp if x in c)
        if len(adj[x]) == 2:
            _graph.suppress_vertex(adj, x)
            comp = comp - {x}
        sides.append(comp)
    return adj, labels, sides


def _component_edges(adj, comp):
    return sorted((a, b) for a in comp for b in adj[a] if a < b)


def apply_tbr(tree, move):
    """Apply one TBR move; returns a new tree on the same taxa."""
    u, v = move.cut_edge
    adj, labels, sides = _bisect(tree, u, v)
    nxt = max(adj) + 1
    ends = []
    for comp, target in zip(sides, (move.reattach_1, move.reattach_2)):
        if target is None:
            if len(comp) != 1:
                raise PreconditionError("component has edges; a reattachment edge is required")
            ends.append(next(iter(comp)))
            continue
        a, b = target
        if a not in comp or b not in adj.get(a, ()):
            raise PreconditionError(f"{target} is not an edge of the detached component")
        _graph.remove_edge(adj, a, b)
        _graph.add_edge(adj, a, nxt)
        _graph.add_edge(adj, nxt, b)
        ends.append(nxt)
        nxt += 1
    _graph.add_edge(adj, ends[0], ends[1])
    return UnrootedTree._build(adj, labels)


def tbr_moves(tree):
    """Every TBR move of *tree* (including ones that return the same tree)."""
    for u, v in tree.edges:
        adj, _, sides = _bisect(tree, u, v)
        options = [_component_edges(adj, c) or [None] for c in sides]
        for e1 in options[0]:
            for e2 in options[1]:
                yield TbrMove((u, v), e1, e2)


def tbr_neighbors(tree):
    """All distinct trees one TBR move away from *tree*."""
    if tree.n_leaves < 4:
        return set()
    out = set()
    for move in tbr_moves(tree):
        t = apply_tbr(tree, move)
        if t != tree:
            out.add(t)
    return out


def tbr_distance_bfs(t1, t2, max_k=None, budget=None):
    """Exact d_TBR by breadth-first search over the move graph.

    Returns the distance, or ``None`` when it exceeds *max_k*.  *budget*
    caps the number of expanded trees and raises :class:`BudgetExceeded`
    (with the certified lower bound) when hit.
    """
    check_same_taxa(t1, t2)
    target = t2.split_masks
    if t1.split_masks == target:
        return 0
    seen = {t1.split_masks}
    frontier = [t1]
    depth = 0
    expanded = 0
    while frontier:
        if max_k is not None and depth >= max_k:
            return None
        depth += 1
        nxt = []
        for t in frontier:
            expanded += 1
            if budget is not None and expanded > budget:
                raise BudgetExceeded("BFS budget exceeded", lower=depth)
            for s in tbr_neighbors(t):
                key = s.split_masks
                if key == target:
                    return depth
                if key not in seen:
                    seen.add(key)
                    nxt.append(s)
        frontier = nxt
    raise AssertionError("TBR move graph is connected; target not reached")


# ---------------------------------------------------------------------- agreement forests


@dataclass(frozen=True)
class AgreementForest:
    components: tuple

    @classmethod
    def of(cls, blocks):
        blocks = [frozenset(b) for b in blocks]
        return cls(tuple(sorted(blocks, key=lambda b: set_key(b))))

    def __len__(self):
        return len(self.components)

    def to_text(self):
        return "".join(",".join(sort_taxa(b)) + "\n" for b in self.components)


def _spanning_vertices(tree, block):
    block = sort_taxa(block)
    first = tree.vertex(block[0])
    verts = {first}
    for t in block[1:]:
        verts.update(tree.path(first, tree.vertex(t)))
    return verts


def is_agreement_forest(t1, t2, blocks):
    """Independent check of the agreement-forest conditions."""
    check_same_taxa(t1, t2)
    blocks = [frozenset(b) for b in blocks]
    union = frozenset().union(*blocks) if blocks else frozenset()
    if union != t1.taxa or sum(len(b) for b in blocks) != t1.n_leaves:
        return False
    for b in blocks:
        if len(b) >= 3 and t1.restrict(b) != t2.restrict(b):
            return False
    for tree in (t1, t2):
        used = set()
        for b in blocks:
            vs = _spanning_vertices(tree, b)
            if vs & used:
                return False
            used |= vs
    return True


class _Forest:
    """Mutable forest with leaves labelled by integer block ids."""

    __slots__ = ("adj", "leaf", "vert", "nxt")

    def __init__(self, adj, leaf, nxt):
        self.adj = adj
        self.leaf = leaf  # vertex -> block id
        self.vert = {b: v for v, b in leaf.items()}
        self.nxt = nxt

    @classmethod
    def from_tree(cls, tree, block_of):
        adj, labels = tree.mutable()
        return cls(adj, {v: block_of[t] for v, t in labels.items()}, max(adj) + 1)

    def copy(self):
        f = _Forest.__new__(_Forest)
        f.adj = {v: list(nb) for v, nb in self.adj.items()}
        f.leaf = dict(self.leaf)
        f.vert = dict(self.vert)
        f.nxt = self.nxt
        return f

    def _tidy(self, x):
        if x in self.adj and x not in self.leaf:
            d = len(self.adj[x])
            if d == 2:
                _graph.suppress_vertex(self.adj, x)
            elif d == 0:
                del self.adj[x]

    def cut(self, a, b):
        _graph.remove_edge(self.adj, a, b)
        self._tidy(a)
        self._tidy(b)

    def isolated(self, blk):
        return not self.adj[self.vert[blk]]

    def remove_leaf(self, blk):
        v = self.vert.pop(blk)
        del self.leaf[v]
        nbrs = list(self.adj[v])
        _graph.remove_vertex(self.adj, v)
        for w in nbrs:
            self._tidy(w)

    def siblings(self, a, b):
        va, vb = self.vert[a], self.vert[b]
        na, nb = self.adj[va], self.adj[vb]
        if na == [vb]:
            return True
        return bool(na) and bool(nb) and na[0] == nb[0] and na[0] not in self.leaf

    def merge(self, a, b, new):
        """Replace sibling leaves a, b by one leaf *new*."""
        va, vb = self.vert.pop(a), self.vert.pop(b)
        del self.leaf[va], self.leaf[vb]
        if self.adj[va] == [vb]:
            _graph.remove_vertex(self.adj, vb)
            p = va
        else:
            p = self.adj[va][0]
            _graph.remove_vertex(self.adj, va)
            _graph.remove_vertex(self.adj, vb)
        self.leaf[p] = new
        self.vert[new] = p

    def path(self, a, b):
        va, vb = self.vert[a], self.vert[b]
        prev = {va: None}
        queue = deque([va])
        while queue:
            x = queue.popleft()
            if x == vb:
                break
            for y in self.adj[x]:
                if y not in prev:
                    prev[y] = x
                    queue.append(y)
        if vb not in prev:
            return None
        out = [vb]
        while out[-1] != va:
            out.append(prev[out[-1]])
        return out[::-1]

    def leaf_count(self):
        return len(self.leaf)


class _Search:
    def __init__(self, t1, t2, budget):
        self.budget = budget
        self.nodes = 0
        order = t1.taxa_order
        self.blocks = {i: frozenset([t]) for i, t in enumerate(order)}
        self.key = {i: taxon_key(t) for i, t in enumerate(order)}
        block_of = {t: i for i, t in enumerate(order)}
        self.f1 = _Forest.from_tree(t1, block_of)
        self.f2 = _Forest.from_tree(t2, block_of)
        self.next_block = len(order)

    # The search state is (f1, f2, done, blocks); f1 only ever holds one tree.

    def _simplify(self, f1, f2, done, blocks):
        """Apply the forced steps: drop isolated leaves, merge common cherries."""
        changed = True
        while changed:
            changed = False
            for blk in list(f1.vert):
                if f2.isolated(blk):
                    f1.remove_leaf(blk)
                    f2.remove_leaf(blk)
                    done.append(blk)
                    changed = True
            if f1.leaf_count() <= 1:
                return None
            pair = self._cherry(f1, blocks)
            if f2.siblings(*pair):
                a, b = pair
                new = self.next_block
                self.next_block += 1
                blocks[new] = blocks[a] | blocks[b]
                self.key[new] = min(self.key[a], self.key[b])
                f1.merge(a, b, new)
                f2.merge(a, b, new)
                changed = True
                if f1.leaf_count() <= 1:
                    return None
        return self._cherry(f1, blocks)

    def _cherry(self, f1, blocks):
        """The cherry of f1 with the smallest taxon, deterministic."""
        key = self.key
        if f1.leaf_count() <= 3:
            return tuple(sorted(f1.vert, key=lambda b: key[b])[:2])
        best = None
        groups = {}
        for v, blk in f1.leaf.items():
            groups.setdefault(f1.adj[v][0], []).append(blk)
        for g in groups.values():
            if len(g) == 2:
                pair = tuple(sorted(g, key=lambda b: key[b]))
                k = key[pair[0]]
                if best is None or k < best[0]:
                    best = (k, pair)
        return best[1]

    def _branches(self, f2, a, b):
        """Cut sets to try, as lists of f2 edges, in deterministic order."""
        va, vb = f2.vert[a], f2.vert[b]
        out = [[(va, f2.adj[va][0])], [(vb, f2.adj[vb][0])]]
        path = f2.path(a, b)
        if path is None:
            return out
        on_path = set(path)
        pendants = []
        for x in path[1:-1]:
            for y in f2.adj[x]:
                if y not in on_path:
                    pendants.append((x, y))
        for j in range(len(pendants)):
            out.append([e for i, e in enumerate(pendants) if i != j])
        return out

    def solve(self, f1, f2, done, blocks, k):
        """A forest with at most k more cuts, or None."""
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExceeded("MAF branching budget exceeded")
        pair = self._simplify(f1, f2, done, blocks)
        if pair is None:
            return self._finish(f1, done, blocks)
        if k <= 0:
            return None
        for cuts in self._branches(f2, *pair):
            if len(cuts) > k:
                continue
            g1, g2 = f1.copy(), f2.copy()
            for x, y in cuts:
                # pendant edges hang off distinct path vertices, so earlier
                # suppressions never touch later ones
                g2.cut(x, y)
            res = self.solve(g1, g2, list(done), dict(blocks), k - len(cuts))
            if res is not None:
                return res
        return None

    def _finish(self, f1, done, blocks):
        comps = [blocks[b] for b in done] + [blocks[b] for b in f1.vert]
        return AgreementForest.of(comps)

    def greedy(self):
        f1, f2 = self.f1.copy(), self.f2.copy()
        done, blocks = [], dict(self.blocks)
        while True:
            pair = self._simplify(f1, f2, done, blocks)
            if pair is None:
                return self._finish(f1, done, blocks)
            # cutting one side of the cherry always makes progress
            cuts = self._branches(f2, *pair)
            best = min(cuts, key=len)
            for x, y in best:
                f2.cut(x, y)


@dataclass
class TbrResult:
    """Outcome of an exact solve, or a certified interval when inexact."""

    distance: int | None
    exact: bool
    lower: int
    upper: int
    forest: AgreementForest | None = None
    nodes: int = 0
    trace: object = field(default=None, repr=False)

    def __int__(self):
        if not self.exact:
            raise ValueError(f"inexact result: distance in [{self.lower}, {self.upper}]")
        return self.distance

    def certificate_text(self):
        lines = ["TBR-CERTIFICATE v1"]
        if self.exact:
            lines.append(f"distance {self.distance}")
        else:
            lines.append(f"interval {self.lower} {self.upper}")
        lines.append(f"nodes {self.nodes}")
        if self.trace is not None:
            lines.append(f"kernel-steps {len(self.trace)}")
        if self.forest is not None:
            lines.append(f"components {len(self.forest)}")
            lines.extend(",".join(sort_taxa(b)) for b in self.forest.components)
        return "\n".join(lines) + "\n"


def tbr_distance_maf(t1, t2, budget=None, k_max=None, lower=0):
    """Exact d_TBR as (size of a maximum agreement forest) - 1.

    Iterative deepening on the number of cuts with deterministic branching
    on the cherry of the first tree holding the smallest taxon.  *budget*
    limits branching nodes over all depths; when exhausted the result is
    flagged inexact and carries ``[lower, upper]`` where upper comes from a
    greedy forest.
    """
    check_same_taxa(t1, t2)
    search = _Search(t1, t2, budget)
    greedy = search.greedy()
    upper = len(greedy) - 1
    k = max(lower, 0)
    while k <= upper:
        if k_max is not None and k > k_max:
            return TbrResult(None, False, k, upper, greedy, search.nodes)
        try:
            res = search.solve(search.f1.copy(), search.f2.copy(), [], dict(search.blocks), k)
        except BudgetExceeded:
            return TbrResult(None, False, k, upper, greedy, search.nodes)
        if res is not None:
            return TbrResult(len(res) - 1, True, len(res) - 1, len(res) - 1, res, search.nodes)
        k += 1
    return TbrResult(upper, True, upper, upper, greedy, search.nodes)


def tbr_distance(t1, t2, budget=None, rules=DEFAULT_RULES):
    """Kernelize with the subtree and chain rules, then solve the kernel."""
    s1, s2, trace = kernelize(t1, t2, rules)
    if s1.n_leaves <= 3:
        return TbrResult(0, True, 0, 0, AgreementForest.of([s1.taxa]), 0, trace)
    res = tbr_distance_maf(s1, s2, budget=budget)
    res.trace = trace
    return res


# ---------------------------------------------------------------------- random instances


def random_tree(taxa, rng=None):
    """Uniform random binary tree by stepwise leaf insertion."""
    rng = rng if rng is not None else random.Random()
    taxa = list(taxa)
    rng.shuffle(taxa)
    if len(taxa) < 2:
        raise ValueError("need at least two taxa")
    adj = {0: [1], 1: [0]}
    labels = {0: taxa[0], 1: taxa[1]}
    nxt = 2
    for t in taxa[2:]:
        edges = sorted((a, b) for a in adj for b in adj[a] if a < b)
        a, b = rng.choice(edges)
        mid, leaf = nxt, nxt + 1
        nxt += 2
        _graph.remove_edge(adj, a, b)
        _graph.add_edge(adj, a, mid)
        _graph.add_edge(adj, mid, b)
        _graph.add_edge(adj, mid, leaf)
        labels[leaf] = t
    return UnrootedTree._build(adj, labels)


def random_tbr_walk(tree, steps, rng=None):
    """Apply *steps* random TBR moves."""
    rng = rng if rng is not None else random.Random()
    for _ in range(steps):
        moves = list(tbr_moves(tree))
        tree = apply_tbr(tree, rng.choice(moves))
    return tree
