"""Unrooted binary phylogenetic trees: data model, Newick I/O, structural queries.

Taxa are strings.  Internally every tree numbers its taxa in :func:`taxon_key`
order and represents leaf sets as integer bitmasks, which keeps split and
cluster comparisons cheap.  Two trees over the same taxa share the same bit
assignment, so masks from one can be looked up in the other.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations

from . import _graph

RESERVED_PREFIX = "$"
_SPECIAL = set(" \t\r\n(),:;[]'")


def taxon_key(label):
    """Sort key for taxa: decimal labels numerically first, then the rest."""
    if label.isdigit():
        return (0, int(label), label)
    return (1, 0, label)


def sort_taxa(taxa):
    return sorted(taxa, key=taxon_key)


def set_key(taxa):
    """Total order on taxon sets: lexicographic on the sorted label keys."""
    return tuple(taxon_key(t) for t in sort_taxa(taxa))


def valid_taxon(label, allow_reserved=False):
    if not label or any(c in _SPECIAL for c in label):
        return False
    return allow_reserved or not label.startswith(RESERVED_PREFIX)


class NewickError(ValueError):
    """Malformed or unsupported Newick input."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class LeafSetMismatch(ValueError):
    pass


def check_same_taxa(t1, t2):
    if t1.taxa != t2.taxa:
        only1 = sort_taxa(t1.taxa - t2.taxa)
        only2 = sort_taxa(t2.taxa - t1.taxa)
        raise LeafSetMismatch(f"leaf sets differ: only in first {only1}, only in second {only2}")


@dataclass(frozen=True)
class Bipartition:
    side_a: frozenset
    side_b: frozenset

    @classmethod
    def of(cls, side, taxa):
        side = frozenset(side)
        other = frozenset(taxa) - side
        if not side or not other:
            raise ValueError("both sides of a bipartition must be nonempty")
        if set_key(other) < set_key(side):
            side, other = other, side
        return cls(side, other)

    @property
    def trivial(self):
        return min(len(self.side_a), len(self.side_b)) == 1

    def __str__(self):
        return ",".join(sort_taxa(self.side_a)) + "|" + ",".join(sort_taxa(self.side_b))


@dataclass(frozen=True)
class Chain:
    """An ordered chain together with its pendant flags in one tree."""

    leaves: tuple
    pendant_head: bool = False
    pendant_tail: bool = False

    def __len__(self):
        return len(self.leaves)

    def reversed(self):
        return Chain(self.leaves[::-1], self.pendant_tail, self.pendant_head)


@dataclass(frozen=True)
class CommonChain:
    """A chain shared by two trees.

    ``first`` and ``second`` carry the pendant flags in each tree; both list the
    leaves in the same order.  ``reversed_in_second`` records whether the
    second tree's canonical traversal meets the chain in the opposite direction.
    """

    leaves: tuple
    first: Chain
    second: Chain
    reversed_in_second: bool = False

    def __len__(self):
        return len(self.leaves)


class UnrootedTree:
    """Leaf-labelled unrooted binary tree.

    Parameters
    ----------
    adjacency : mapping vertex -> iterable of neighbours
    labels : mapping leaf vertex -> taxon

    Instances are treated as immutable; every transformation returns a new
    tree with vertices renumbered canonically (leaves first, in taxon order).
    Equality and hashing use the taxon set and the split set, which for binary
    trees is the same as labelled isomorphism.
    """

    def __init__(self, adjacency, labels, allow_reserved=True):
        adj = {v: tuple(nb) for v, nb in adjacency.items()}
        labels = dict(labels)
        self._adj = adj
        self._labels = labels
        self._vertex = {}
        for v, t in labels.items():
            if t in self._vertex:
                raise ValueError(f"duplicate taxon {t!r}")
            if not valid_taxon(t, allow_reserved):
                raise ValueError(f"invalid taxon label {t!r}")
            self._vertex[t] = v
        self._validate()

    def _validate(self):
        adj, labels = self._adj, self._labels
        if len(labels) < 2:
            raise ValueError("a tree needs at least two leaves")
        n_edges = 0
        for v, nb in adj.items():
            if v in nb:
                raise ValueError(f"loop at vertex {v}")
            if len(set(nb)) != len(nb):
                raise ValueError(f"parallel edges at vertex {v}")
            for w in nb:
                if v not in adj.get(w, ()):
                    raise ValueError(f"asymmetric adjacency {v}-{w}")
            d = len(nb)
            if d == 1:
                if v not in labels:
                    raise ValueError(f"unlabelled leaf {v}")
            elif d == 3:
                if v in labels:
                    raise ValueError(f"labelled internal vertex {v}")
            else:
                raise ValueError(f"vertex {v} has degree {d}")
            n_edges += d
        n_edges //= 2
        if n_edges != len(adj) - 1 or not _graph.is_connected(adj):
            raise ValueError("graph is not a tree")

    # ------------------------------------------------------------------ basics

    @classmethod
    def from_edges(cls, edges, labels):
        adj = {}
        for u, v in edges:
            _graph.add_edge(adj, u, v)
        return cls(adj, labels)

    @classmethod
    def _build(cls, adj, labels):
        """Renumber a mutable adjacency canonically and wrap it."""
        labels = {v: t for v, t in labels.items() if v in adj}
        leaves = sorted(labels, key=lambda v: taxon_key(labels[v]))
        order = {v: i for i, v in enumerate(leaves)}
        if leaves:
            queue = deque([leaves[0]])
            seen = {leaves[0]}
            while queue:
                v = queue.popleft()
                for w in sorted(adj[v], key=lambda x: order.get(x, len(adj) + x)):
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
                        if w not in order:
                            order[w] = len(order)
        for v in adj:
            order.setdefault(v, len(order))
        new_adj = {order[v]: [order[w] for w in nb] for v, nb in adj.items()}
        new_labels = {order[v]: t for v, t in labels.items()}
        return cls(new_adj, new_labels)

    def mutable(self):
        """Copy of (adjacency lists, leaf labels) for building derived graphs."""
        return _graph.copy_adj(self._adj), dict(self._labels)

    @property
    def taxa(self):
        return frozenset(self._vertex)

    @cached_property
    def taxa_order(self):
        return tuple(sort_taxa(self._vertex))

    @property
    def n_leaves(self):
        return len(self._labels)

    def __len__(self):
        return len(self._labels)

    @property
    def vertices(self):
        return tuple(sorted(self._adj))

    @cached_property
    def edges(self):
        return tuple(sorted((u, v) for u, nb in self._adj.items() for v in nb if u < v))

    @property
    def internal_vertices(self):
        return tuple(v for v in sorted(self._adj) if v not in self._labels)

    def neighbors(self, v):
        return self._adj[v]

    def degree(self, v):
        return len(self._adj[v])

    def is_leaf(self, v):
        return v in self._labels

    def label(self, v):
        return self._labels[v]

    def vertex(self, taxon):
        return self._vertex[taxon]

    def parent(self, taxon):
        """The unique neighbour of the leaf labelled *taxon*."""
        return self._adj[self._vertex[taxon]][0]

    def has_edge(self, u, v):
        return v in self._adj.get(u, ())

    # ------------------------------------------------------------------ masks

    @cached_property
    def bit(self):
        return {t: i for i, t in enumerate(self.taxa_order)}

    @property
    def full_mask(self):
        return (1 << len(self._labels)) - 1

    def mask(self, taxa):
        m = 0
        for t in taxa:
            m |= 1 << self.bit[t]
        return m

    def taxa_of(self, mask):
        order = self.taxa_order
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(order[i])
            mask >>= 1
            i += 1
        return frozenset(out)

    @cached_property
    def _side_masks(self):
        """(u, v) -> mask of taxa on v's side of edge u-v, for both directions."""
        root = self._vertex[self.taxa_order[0]]
        below = {}
        parent = {root: None}
        order = [root]
        for v in order:
            for w in self._adj[v]:
                if w not in parent:
                    parent[w] = v
                    order.append(w)
        sub = {}
        for v in reversed(order):
            m = 1 << self.bit[self._labels[v]] if v in self._labels else 0
            for w in self._adj[v]:
                if w != parent[v]:
                    m |= sub[w]
            sub[v] = m
        full = self.full_mask
        for v, p in parent.items():
            if p is not None:
                below[(p, v)] = sub[v]
                below[(v, p)] = full ^ sub[v]
        return below

    def side_mask(self, u, v):
        return self._side_masks[(u, v)]

    def side_taxa(self, u, v):
        """Taxa separated from *u* by deleting edge u-v (v's side)."""
        return self.taxa_of(self._side_masks[(u, v)])

    @cached_property
    def cluster_masks(self):
        """Every cluster (both sides of every edge) as a mask."""
        return frozenset(self._side_masks.values())

    @cached_property
    def split_masks(self):
        """One canonical mask per edge: the side without the first taxon."""
        return frozenset(m for m in self._side_masks.values() if not m & 1)

    @cached_property
    def nontrivial_split_masks(self):
        n = self.n_leaves
        return frozenset(m for m in self.split_masks if 2 <= bin(m).count("1") <= n - 2)

    def bipartitions(self):
        return frozenset(Bipartition.of(self.taxa_of(m), self.taxa) for m in self.split_masks)

    def nontrivial_bipartitions(self):
        return frozenset(b for b in self.bipartitions() if not b.trivial)

    def is_cluster(self, taxa):
        return self.mask(taxa) in self.cluster_masks

    def cluster_edge(self, taxa):
        """The directed edge (u, v) whose v side holds exactly *taxa*."""
        m = self.mask(taxa)
        for e, s in self._side_masks.items():
            if s == m:
                return e
        raise ValueError(f"{sort_taxa(taxa)} is not a cluster")

    def subcluster_masks(self, ymask):
        """Clusters strictly inside cluster *ymask* with at least two taxa.

        These determine the pendant subtree on Y as a rooted tree.
        """
        return frozenset(
            s for s in self.cluster_masks
            if not s & ~ymask and s != ymask and s & (s - 1)
        )

    # ------------------------------------------------------------------ identity

    def __eq__(self, other):
        if not isinstance(other, UnrootedTree):
            return NotImplemented
        return self.taxa == other.taxa and self.split_masks == other.split_masks

    def __hash__(self):
        return hash((self.taxa, self.split_masks))

    def __repr__(self):
        return f"UnrootedTree({serialize_newick(self)!r})"

    # ------------------------------------------------------------------ derived trees

    def restrict(self, taxa):
        """The tree induced on *taxa* (other leaves deleted, then suppressed)."""
        taxa = frozenset(taxa)
        if not taxa <= self.taxa:
            raise ValueError("restriction to taxa outside the tree")
        if len(taxa) < 2:
            raise ValueError("restriction needs at least two taxa")
        adj, labels = self.mutable()
        for v, t in list(labels.items()):
            if t not in taxa:
                _graph.remove_vertex(adj, v)
                del labels[v]
        _graph.prune_unlabeled_leaves(adj, labels)
        _graph.suppress_degree_two(adj)
        return UnrootedTree._build(adj, labels)

    def delete_taxa(self, taxa):
        return self.restrict(self.taxa - frozenset(taxa))

    def relabel(self, mapping):
        labels = {v: mapping.get(t, t) for v, t in self._labels.items()}
        return UnrootedTree._build(_graph.copy_adj(self._adj), labels)

    def replace_cluster(self, taxa, new_label):
        """Collapse the pendant subtree on cluster *taxa* into one leaf."""
        taxa = frozenset(taxa)
        if len(taxa) == self.n_leaves:
            raise ValueError("cannot collapse the whole tree")
        u, v = self.cluster_edge(taxa)
        adj, labels = self.mutable()
        doomed = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y != u and y not in doomed:
                    doomed.add(y)
                    stack.append(y)
        _graph.remove_edge(adj, u, v)
        for x in doomed:
            del adj[x]
            labels.pop(x, None)
        w = max(self._adj) + 1
        _graph.add_edge(adj, u, w)
        labels[w] = new_label
        if len(adj[u]) == 2 and u not in labels:
            _graph.suppress_vertex(adj, u)
        return UnrootedTree._build(adj, labels)

    def path(self, a, b):
        """Vertex path from a to b."""
        prev = {a: None}
        queue = deque([a])
        while queue:
            v = queue.popleft()
            if v == b:
                break
            for w in self._adj[v]:
                if w not in prev:
                    prev[w] = v
                    queue.append(w)
        out = [b]
        while out[-1] != a:
            out.append(prev[out[-1]])
        return out[::-1]


# ---------------------------------------------------------------------- construction


def tree_from_splits(taxa, split_sides):
    """Rebuild the binary tree whose nontrivial splits are *split_sides*.

    Each element of *split_sides* is one side (any orientation) of a split.
    Raises ValueError if the splits do not describe a binary tree on *taxa*.
    """
    order = sort_taxa(taxa)
    n = len(order)
    if n < 2:
        raise ValueError("need at least two taxa")
    if n == 2:
        return UnrootedTree({0: [1], 1: [0]}, {0: order[0], 1: order[1]})
    anchor = order[0]
    rest = frozenset(order[1:])
    clusters = {frozenset([t]) for t in rest}
    for side in split_sides:
        side = frozenset(side)
        if anchor in side:
            side = frozenset(taxa) - side
        if len(side) < 2 or len(side) > n - 2:
            raise ValueError("trivial split supplied")
        clusters.add(side)
    if len(clusters) != 2 * n - 4:
        raise ValueError("split set does not describe a binary tree")
    ordered = sorted(clusters, key=len)
    ids = {c: i for i, c in enumerate(ordered)}
    root = len(ordered)
    adj = {i: [] for i in range(root + 2)}
    anchor_v = root + 1
    labels = {ids[frozenset([t])]: t for t in rest}
    labels[anchor_v] = anchor
    for i, c in enumerate(ordered):
        parent = next((d for d in ordered[i + 1:] if len(d) > len(c) and c < d), None)
        _graph.add_edge(adj, ids[parent] if parent is not None else root, ids[c])
    _graph.add_edge(adj, root, anchor_v)
    try:
        tree = UnrootedTree._build(adj, labels)
    except ValueError as exc:
        raise ValueError(f"split set does not describe a binary tree: {exc}") from None
    if {tree.taxa_of(m) for m in tree.nontrivial_split_masks} != {c for c in clusters if len(c) > 1}:
        raise ValueError("incompatible splits")
    return tree


# ---------------------------------------------------------------------- Newick


class _NewickReader:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise NewickError(msg, self.pos)

    def skip(self):
        t = self.text
        while self.pos < len(t):
            c = t[self.pos]
            if c.isspace():
                self.pos += 1
            elif c == "[":
                end = t.find("]", self.pos)
                if end < 0:
                    self.error("unterminated comment")
                self.pos = end + 1
            else:
                break

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def label(self):
        self.skip()
        t = self.text
        if self.pos < len(t) and t[self.pos] == "'":
            out = []
            self.pos += 1
            while True:
                if self.pos >= len(t):
                    self.error("unterminated quoted label")
                c = t[self.pos]
                if c == "'":
                    if t[self.pos + 1:self.pos + 2] == "'":
                        out.append("'")
                        self.pos += 2
                        continue
                    self.pos += 1
                    return "".join(out)
                out.append(c)
                self.pos += 1
        start = self.pos
        while self.pos < len(t) and t[self.pos] not in _SPECIAL:
            self.pos += 1
        return t[start:self.pos]

    def branch_length(self):
        if self.peek() == ":":
            self.pos += 1
            if not self.label():
                self.error("missing branch length")

    def subtree(self):
        """Return ('leaf', label, pos) or ('node', [children], pos)."""
        start = self.pos
        if self.peek() == "(":
            self.pos += 1
            kids = [self.subtree()]
            while self.peek() == ",":
                self.pos += 1
                kids.append(self.subtree())
            if self.peek() != ")":
                self.error("expected ',' or ')'")
            self.pos += 1
            self.label()  # internal label, discarded
            self.branch_length()
            return ("node", kids, start)
        self.skip()
        start = self.pos
        name = self.label()
        if not name:
            self.error("expected a taxon label")
        self.branch_length()
        return ("leaf", name, start)


def _newick_graph(text, allow_reserved, max_root_degree):
    reader = _NewickReader(text)
    tree = reader.subtree()
    if reader.peek() != ";":
        reader.error("expected ';'")
    reader.pos += 1
    if reader.peek():
        reader.error("trailing characters after ';'")
    adj = {}
    labels = {}
    seen = {}

    def build(node, is_root):
        v = len(adj)
        adj[v] = []
        kind, payload, pos = node
        if kind == "leaf":
            if not valid_taxon(payload, allow_reserved):
                raise NewickError(f"invalid taxon label {payload!r}", pos)
            if payload in seen:
                raise NewickError(f"duplicate taxon {payload!r}", pos)
            seen[payload] = v
            labels[v] = payload
            return v
        if is_root:
            if len(payload) < 2:
                raise NewickError("root must have at least two children", pos)
            if len(payload) > max_root_degree:
                raise NewickError("non-binary vertex at the root", pos)
        elif len(payload) != 2:
            raise NewickError(f"non-binary vertex with {len(payload)} children", pos)
        for child in payload:
            _graph.add_edge(adj, v, build(child, False))
        return v

    if tree[0] == "leaf":
        raise NewickError("fewer than 2 leaves", 0)
    build(tree, True)
    if len(labels) < 2:
        raise NewickError("fewer than 2 leaves", 0)
    return adj, labels


def parse_newick(text, allow_reserved=False):
    """Parse one Newick string into an :class:`UnrootedTree`.

    Branch lengths, internal labels and ``[...]`` comments are discarded.  A
    degree-2 written root is suppressed; any other non-binary vertex is an
    error.  Labels starting with ``$`` are reserved for reduction output and
    rejected unless *allow_reserved* is set.
    """
    adj, labels = _newick_graph(text, allow_reserved, 3)
    _graph.suppress_degree_two(adj)
    return UnrootedTree._build(adj, labels)


def serialize_newick(tree):
    """Deterministic Newick text; isomorphic trees give identical strings.

    The written root is the neighbour of the smallest taxon, and children are
    ordered by their smallest taxon.
    """
    if tree.n_leaves == 2:
        a, b = tree.taxa_order
        return f"({a},{b});"
    first = tree.vertex(tree.taxa_order[0])
    root = tree.neighbors(first)[0]
    key = {}

    def min_key(parent, v):
        k = key.get((parent, v))
        if k is None:
            if tree.is_leaf(v):
                k = taxon_key(tree.label(v))
            else:
                k = min(min_key(v, w) for w in tree.neighbors(v) if w != parent)
            key[(parent, v)] = k
        return k

    def write(parent, v):
        if tree.is_leaf(v):
            return tree.label(v)
        kids = sorted((w for w in tree.neighbors(v) if w != parent), key=lambda w: min_key(v, w))
        return "(" + ",".join(write(v, w) for w in kids) + ")"

    return write(None, root) + ";"


def read_newick_file(path, allow_reserved=False):
    """All trees in a file, one Newick string per line."""
    with open(path, encoding="utf-8") as fh:
        return [parse_newick(line, allow_reserved) for line in fh if line.strip()]


def write_newick_file(path, trees):
    with open(path, "w", encoding="utf-8") as fh:
        for t in trees:
            fh.write(serialize_newick(t) + "\n")


# ---------------------------------------------------------------------- queries


def bipartitions(tree):
    return tree.bipartitions()


def trees_equal(t1, t2):
    check_same_taxa(t1, t2)
    return t1.split_masks == t2.split_masks


def common_nontrivial_clusters(t1, t2):
    """Common clusters Y with 2 <= |Y| <= |X|-2, one per split.

    Each split is reported by its smaller side (ties broken by taxon order).
    """
    check_same_taxa(t1, t2)
    common = t1.nontrivial_split_masks & t2.nontrivial_split_masks
    full = t1.full_mask
    out = []
    for m in common:
        a, b = t1.taxa_of(m), t1.taxa_of(full ^ m)
        out.append(min(a, b, key=lambda s: (len(s), set_key(s))))
    return sorted(out, key=lambda s: (len(s), set_key(s)))


def _common_pendant_masks(t1, t2):
    full = t1.full_mask
    out = []
    for m in t1.nontrivial_split_masks & t2.nontrivial_split_masks:
        for y in (m, full ^ m):
            if t1.subcluster_masks(y) == t2.subcluster_masks(y):
                out.append(y)
    return out


def maximal_common_pendant_subtrees(t1, t2):
    """Maximal pairwise-disjoint taxon sets Y (2 <= |Y| <= |X|-2) that are
    pendant subtrees of both trees with the same induced topology.

    Two candidates can only overlap when their union is all of X, in which
    case the trees are identical; the larger (then taxon-order smaller) one
    wins and the survivors are filled in greedily.
    """
    check_same_taxa(t1, t2)
    cands = [t1.taxa_of(m) for m in _common_pendant_masks(t1, t2)]
    cands.sort(key=lambda s: (-len(s), set_key(s)))
    chosen = []
    used = frozenset()
    for c in cands:
        if c & used:
            continue
        if any(c < d for d in cands):
            # contained in a larger common pendant subtree that overlaps a chosen one
            if any(c < d and not (d & used) for d in cands):
                continue
        chosen.append(c)
        used |= c
    return sorted(chosen, key=set_key)


# ---------------------------------------------------------------------- chains


def _chain_on_parents(ps, adjacent):
    n = len(ps)
    if n <= 1:
        return True
    if n == 2:
        return ps[0] == ps[1] or adjacent(ps[0], ps[1])
    core = ps[1:-1]
    if len(set(core)) != len(core):
        return False
    for a, b in zip(core, core[1:]):
        if not adjacent(a, b):
            return False
    inner = set(core)
    ends = []
    for end, nxt in ((ps[0], ps[1]), (ps[-1], ps[-2])):
        if end == nxt:
            continue
        if end in inner or not adjacent(end, nxt):
            return False
        ends.append(end)
    return len(ends) < 2 or ends[0] != ends[1]


def is_chain(tree, leaves):
    """True iff *leaves* (an ordered sequence) is a chain of *tree*.

    Works for any object with ``parent(taxon)``, ``has_edge(u, v)`` and
    ``taxa`` (trees and networks).
    """
    leaves = tuple(leaves)
    if len(set(leaves)) != len(leaves) or not set(leaves) <= tree.taxa:
        return False
    ps = [tree.parent(x) for x in leaves]
    return _chain_on_parents(ps, tree.has_edge)


def chain_in(tree, leaves):
    """The :class:`Chain` record for *leaves* in *tree* (which must be a chain)."""
    leaves = tuple(leaves)
    if not is_chain(tree, leaves):
        raise ValueError(f"{leaves} is not a chain")
    n = len(leaves)
    head = n >= 2 and tree.parent(leaves[0]) == tree.parent(leaves[1])
    tail = n >= 2 and tree.parent(leaves[-1]) == tree.parent(leaves[-2])
    return Chain(leaves, head, tail)


def caterpillar_sequences(tree):
    """Maximal chain carriers of *tree*.

    Leaf parents induce a set of paths in the tree; each path lists its
    leaves in order.  Returns one tuple per path, oriented so the first taxon
    sorts before the last.  Cherry ends are listed in taxon order; both
    orders are chains.
    """
    if tree.n_leaves <= 3:
        return [tuple(tree.taxa_order)]
    holders = {}
    for t in tree.taxa_order:
        holders.setdefault(tree.parent(t), []).append(t)
    seen = set()
    out = []
    for start in holders:
        if start in seen:
            continue
        nbrs = [w for w in tree.neighbors(start) if w in holders]
        if len(nbrs) == 2:
            continue
        path = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [w for w in tree.neighbors(cur) if w in holders and w != prev and w not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            path.append(cur)
            seen.add(cur)
        seq = []
        for p in path:
            seq.extend(sort_taxa(holders[p]))
        if taxon_key(seq[-1]) < taxon_key(seq[0]):
            seq.reverse()
        out.append(tuple(seq))
    # cycles of holders cannot occur in a tree; every holder was reached
    return out


def _chain_variants(seq, tree):
    """Both cherry orderings at each end of a carrier sequence."""
    variants = {tuple(seq)}
    if len(seq) >= 2 and tree.parent(seq[0]) == tree.parent(seq[1]):
        variants |= {(v[1], v[0]) + v[2:] for v in variants}
    if len(seq) >= 2 and tree.parent(seq[-1]) == tree.parent(seq[-2]):
        variants |= {v[:-2] + (v[-1], v[-2]) for v in variants}
    return variants


def _orientation(tree, leaves):
    for seq in caterpillar_sequences(tree):
        if leaves[0] in seq and leaves[-1] in seq:
            return seq.index(leaves[0]) <= seq.index(leaves[-1])
    return True


def maximal_common_chains(t1, t2, min_len=2):
    """Maximal chains of length >= *min_len* common to both trees.

    A chain and its reversal are identified; the returned order follows the
    first tree's carrier orientation.
    """
    check_same_taxa(t1, t2)
    if min_len < 2:
        raise ValueError("min_len must be at least 2")
    if t1.n_leaves <= 3:
        found = [p for p in permutations(t1.taxa_order) if is_chain(t1, p) and is_chain(t2, p)]
    else:
        found = []
        for seq in caterpillar_sequences(t1):
            for var in _chain_variants(seq, t1):
                n = len(var)
                for i in range(n):
                    j = i + 1
                    while j < n and is_chain(t2, var[i:j + 1]):
                        j += 1
                    # var[i:j] is the longest common run starting at i
                    if j - i >= 2:
                        found.append(var[i:j])
    found = [c for c in found if len(c) >= min_len]

    # In a tree the leaf set of a chain fixes its order up to reversal and
    # swapping a pendant end pair, so chains are compared by leaf set.
    uniq = []
    sets = []
    for c in sorted(found, key=lambda c: (-len(c), tuple(map(taxon_key, c)))):
        cs = frozenset(c)
        if any(cs <= d for d in sets):
            continue
        sets.append(cs)
        uniq.append(c)
    out = []
    for c in uniq:
        o1, o2 = _orientation(t1, c), _orientation(t2, c)
        out.append(CommonChain(c, chain_in(t1, c), chain_in(t2, c), o1 != o2))
    out.sort(key=lambda cc: (set_key(cc.leaves), tuple(map(taxon_key, cc.leaves))))
    return out
