"""Unrooted binary phylogenetic networks, generators and tree display.

Networks are simple graphs whose leaves (degree 1) carry taxa and whose other
vertices have degree 3.  Generators are cubic multigraphs whose edges
("sides") carry stable integer ids so loops and parallel edges can be
addressed individually; each side stores an orientation ``(a, b)`` and
attachment sequences run from ``a`` to ``b``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations

from . import _graph
from .errors import BudgetExceeded, FormatError, PreconditionError
from .tree import UnrootedTree, is_chain, sort_taxa, taxon_key, valid_taxon

GENERATOR_K_LIMIT = 4


# ---------------------------------------------------------------------- networks


class UnrootedNetwork:
    """Simple connected graph; leaves labelled by taxa, internal degree 3."""

    def __init__(self, adjacency, labels):
        self._adj = {v: tuple(nb) for v, nb in adjacency.items()}
        self._labels = dict(labels)
        self._vertex = {}
        for v, t in self._labels.items():
            if t in self._vertex:
                raise ValueError(f"duplicate taxon {t!r}")
            if not valid_taxon(t, allow_reserved=True):
                raise ValueError(f"invalid taxon label {t!r}")
            self._vertex[t] = v
        self._validate()

    def _validate(self):
        if len(self._labels) < 2:
            raise ValueError("a network needs at least two leaves")
        for v, nb in self._adj.items():
            if v in nb:
                raise ValueError(f"loop at vertex {v}")
            if len(set(nb)) != len(nb):
                raise ValueError(f"parallel edges at vertex {v}")
            for w in nb:
                if v not in self._adj.get(w, ()):
                    raise ValueError(f"asymmetric adjacency {v}-{w}")
            d = len(nb)
            if d == 1 and v not in self._labels:
                raise ValueError(f"unlabelled leaf {v}")
            if d == 3 and v in self._labels:
                raise ValueError(f"labelled internal vertex {v}")
            if d not in (1, 3):
                raise ValueError(f"vertex {v} has degree {d}")
        if not _graph.is_connected(self._adj):
            raise ValueError("network is not connected")

    @classmethod
    def _build(cls, adj, labels):
        """Canonical renumbering: leaves in taxon order, then BFS order."""
        labels = {v: t for v, t in labels.items() if v in adj}
        leaves = sorted(labels, key=lambda v: taxon_key(labels[v]))
        order = {v: i for i, v in enumerate(leaves)}
        queue = deque(leaves[:1])
        seen = set(leaves[:1])
        while queue:
            v = queue.popleft()
            for w in sorted(adj[v], key=lambda x: (order.get(x, len(adj)), x)):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
                    order.setdefault(w, len(order))
        for v in sorted(adj):
            order.setdefault(v, len(order))
        return cls({order[v]: [order[w] for w in nb] for v, nb in adj.items()},
                   {order[v]: t for v, t in labels.items()})

    @classmethod
    def from_tree(cls, tree):
        adj, labels = tree.mutable()
        return cls(adj, labels)

    @classmethod
    def from_edges(cls, edges, labels):
        adj = {}
        for u, v in edges:
            _graph.add_edge(adj, u, v)
        return cls(adj, labels)

    def mutable(self):
        return _graph.copy_adj(self._adj), dict(self._labels)

    # basic accessors shared with UnrootedTree so chain predicates work on both
    @property
    def taxa(self):
        return frozenset(self._vertex)

    @property
    def taxa_order(self):
        return tuple(sort_taxa(self._vertex))

    @property
    def n_leaves(self):
        return len(self._labels)

    @property
    def vertices(self):
        return tuple(sorted(self._adj))

    @property
    def edges(self):
        return tuple(sorted((u, v) for u, nb in self._adj.items() for v in nb if u < v))

    def neighbors(self, v):
        return self._adj[v]

    def is_leaf(self, v):
        return v in self._labels

    def label(self, v):
        return self._labels[v]

    def vertex(self, taxon):
        return self._vertex[taxon]

    def parent(self, taxon):
        return self._adj[self._vertex[taxon]][0]

    def has_edge(self, u, v):
        return v in self._adj.get(u, ())

    @property
    def reticulation_number(self):
        n_edges = sum(len(nb) for nb in self._adj.values()) // 2
        return n_edges - (len(self._adj) - 1)

    def to_text(self):
        lines = ["UNET v1", f"V {len(self._adj)}"]
        lines += [f"E {u} {v}" for u, v in self.edges]
        lines += [f"L {v} {self._labels[v]}" for v in sorted(self._labels)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        n, edges, labels = _read_graph_text(text, "UNET v1", with_ids=False)
        adj = {v: [] for v in range(n)}
        for _, a, b in edges:
            if a == b:
                raise FormatError("loops are not allowed in UNET files")
            _graph.add_edge(adj, a, b)
        try:
            return cls(adj, labels)
        except ValueError as exc:
            raise FormatError(str(exc)) from None

    def __repr__(self):
        return f"UnrootedNetwork(leaves={self.n_leaves}, r={self.reticulation_number})"


def reticulation_number(net):
    return net.reticulation_number


def _read_graph_text(text, header, with_ids):
    lines = [l.strip() for l in text.splitlines()]
    lines = [(i, l) for i, l in enumerate(lines, 1) if l]
    if not lines or lines[0][1] != header:
        raise FormatError(f"missing '{header}' header", 1)
    n = None
    edges = []
    labels = {}
    for i, line in lines[1:]:
        parts = line.split()
        try:
            if parts[0] == "V" and len(parts) == 2:
                n = int(parts[1])
            elif parts[0] == "E" and len(parts) == (4 if with_ids else 3):
                nums = [int(x) for x in parts[1:]]
                edges.append(tuple(nums) if with_ids else (len(edges), *nums))
            elif parts[0] == "L" and len(parts) == 3 and not with_ids:
                labels[int(parts[1])] = parts[2]
            else:
                raise FormatError(f"unrecognised line {line!r}", i)
        except ValueError:
            raise FormatError(f"bad integer in {line!r}", i) from None
    if n is None:
        raise FormatError("missing 'V <count>' line")
    for _, a, b in edges:
        if not (0 <= a < n and 0 <= b < n):
            raise FormatError(f"vertex id out of range in edge {a} {b}")
    for v in labels:
        if not 0 <= v < n:
            raise FormatError(f"vertex id {v} out of range in label line")
    return n, edges, labels


def read_network(path):
    with open(path, encoding="utf-8") as fh:
        return UnrootedNetwork.from_text(fh.read())


def write_network(path, net):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(net.to_text())


# ---------------------------------------------------------------------- display


@dataclass(frozen=True)
class Embedding:
    """A subdivision of a tree inside a network plus a spanning extension."""

    subdivision: frozenset
    spanning: frozenset


@dataclass
class DisplayResult:
    displayed: bool
    embedding: Embedding | None = None
    nodes: int = 0

    def __bool__(self):
        return self.displayed


def _bridges(adj_edges, n_vertices, leaf_mask):
    """Bridges of a connected graph given as vertex -> [(nbr, edge id)].

    Returns (edge id, mask of taxa on the far side of the DFS tree edge).
    """
    disc = {}
    low = {}
    sub = {}
    out = []
    root = next(iter(adj_edges))
    disc[root] = low[root] = 0
    sub[root] = leaf_mask.get(root, 0)
    stack = [(root, None, iter(adj_edges[root]))]
    t = 1
    while stack:
        v, pe, it = stack[-1]
        advanced = False
        for w, eid in it:
            if eid == pe:
                continue
            if w in disc:
                if disc[w] < low[v]:
                    low[v] = disc[w]
            else:
                disc[w] = low[w] = t
                t += 1
                sub[w] = leaf_mask.get(w, 0)
                stack.append((w, eid, iter(adj_edges[w])))
                advanced = True
                break
        if not advanced:
            stack.pop()
            if stack:
                p = stack[-1][0]
                sub[p] |= sub[v]
                if low[v] < low[p]:
                    low[p] = low[v]
                if low[v] > disc[p]:
                    out.append((pe, sub[v]))
    return out


def _prune_to_subdivision(net, edge_set, taxa):
    """Drop dangling edges that do not lead to a taxon in *taxa*."""
    adj = {}
    for u, v in edge_set:
        _graph.add_edge(adj, u, v)
    labelled = {net.vertex(t) for t in taxa}
    _graph.prune_unlabeled_leaves(adj, labelled)
    return frozenset((u, v) for u in adj for v in adj[u] if u < v)


def is_subdivision_of(net, edge_set, tree):
    """Independent validator: does *edge_set* form a subdivision of *tree*?"""
    adj = {}
    for u, v in edge_set:
        if not net.has_edge(u, v):
            return False
        _graph.add_edge(adj, u, v)
    labels = {}
    for t in tree.taxa:
        v = net.vertex(t)
        if v not in adj:
            return False
        labels[v] = t
    for v, nb in adj.items():
        if len(nb) == 1 and v not in labels:
            return False
    n_edges = sum(len(nb) for nb in adj.values()) // 2
    if n_edges != len(adj) - 1 or not _graph.is_connected(adj):
        return False
    _graph.suppress_degree_two(adj)
    try:
        got = UnrootedTree._build(adj, labels)
    except ValueError:
        return False
    return got == tree


def displays(net, tree, budget=None):
    """Decide whether *net* displays *tree*; returns a :class:`DisplayResult`.

    Search over sets of ``r(N)`` deleted edges, one decision per cycle: each
    branch deletes one edge of a shortest remaining cycle.  A branch dies as
    soon as some bridge of the remaining graph induces a taxon split that the
    tree lacks.  A spanning tree all of whose splits belong to the tree is a
    subdivision of it once dangling unlabelled paths are pruned.
    """
    if not tree.taxa <= net.taxa:
        raise PreconditionError("tree has taxa that the network lacks")
    bit = {t: 1 << i for i, t in enumerate(tree.taxa_order)}
    full = (1 << tree.n_leaves) - 1
    allowed = set(tree.cluster_masks) | {0, full}
    leaf_mask = {net.vertex(t): b for t, b in bit.items()}
    edges = list(net.edges)
    eid_of = {}
    for i, (u, v) in enumerate(edges):
        eid_of[(u, v)] = eid_of[(v, u)] = i
    r = net.reticulation_number
    seen = set()
    nodes = 0

    def adjacency(deleted):
        adj = {v: [] for v in net.vertices}
        for i, (u, v) in enumerate(edges):
            if i not in deleted:
                adj[u].append((v, i))
                adj[v].append((u, i))
        return adj

    def shortest_cycle(adj, bridge_ids):
        best = None
        for i, (u, v) in enumerate(edges):
            if i in bridge_ids or (best is not None and len(best) <= 3):
                continue
            if not any(j == i for _, j in adj[u]):
                continue
            prev = {u: None}
            queue = deque([u])
            while queue and v not in prev:
                x = queue.popleft()
                for y, j in adj[x]:
                    if j != i and y not in prev:
                        prev[y] = (x, j)
                        queue.append(y)
            if v not in prev:
                continue
            cyc = [i]
            x = v
            while prev[x] is not None:
                x, j = prev[x]
                cyc.append(j)
            if best is None or len(cyc) < len(best):
                best = cyc
        return best

    def search(deleted):
        nonlocal nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExceeded("display search budget exceeded")
        adj = adjacency(deleted)
        bridges = _bridges(adj, len(adj), leaf_mask)
        for _, m in bridges:
            if m not in allowed and (full ^ m) not in allowed:
                return None
        if len(deleted) == r:
            return deleted
        cycle = shortest_cycle(adj, {i for i, _ in bridges})
        for i in sorted(cycle):
            nxt = deleted | {i}
            if nxt in seen:
                continue
            seen.add(nxt)
            res = search(nxt)
            if res is not None:
                return res
        return None

    found = search(frozenset())
    if found is None:
        return DisplayResult(False, None, nodes)
    spanning = frozenset(e for i, e in enumerate(edges) if i not in found)
    sub = _prune_to_subdivision(net, spanning, tree.taxa)
    return DisplayResult(True, Embedding(sub, spanning), nodes)


def embed(net, tree, budget=None):
    """Subdivision of *tree* in *net* with its spanning-tree extension."""
    res = displays(net, tree, budget)
    if not res:
        raise PreconditionError("the network does not display the tree")
    return res.embedding


def extend_to_spanning(net, subdivision):
    """Greedily add edges (in sorted order) until the edge set spans *net*."""
    parent = {v: v for v in net.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = set()
    for u, v in sorted(subdivision):
        parent[find(u)] = find(v)
        chosen.add((u, v))
    for u, v in net.edges:
        if (u, v) in chosen:
            continue
        a, b = find(u), find(v)
        if a != b:
            parent[a] = b
            chosen.add((u, v))
    return frozenset(chosen)


def embedding_from_deletions(net, tree, deleted):
    """Embedding obtained by deleting the given edges (used by builders)."""
    deleted = {tuple(sorted(e)) for e in deleted}
    spanning = frozenset(e for e in net.edges if e not in deleted)
    sub = _prune_to_subdivision(net, spanning, tree.taxa)
    if not is_subdivision_of(net, sub, tree):
        raise PreconditionError("deleting these edges does not yield the tree")
    return Embedding(sub, extend_to_spanning(net, sub))


def is_spanning_tree(net, edge_set):
    adj = {v: [] for v in net.vertices}
    for u, v in edge_set:
        if not net.has_edge(u, v):
            return False
        _graph.add_edge(adj, u, v)
    return len(edge_set) == len(adj) - 1 and _graph.is_connected(adj)


# ---------------------------------------------------------------------- generators


class Generator:
    """Connected cubic multigraph with identified, oriented sides.

    ``sides`` maps edge id -> (a, b).  A loop is ``(a, a)``.
    """

    def __init__(self, n_vertices, sides):
        self.n_vertices = n_vertices
        self.sides = {int(e): (int(a), int(b)) for e, (a, b) in dict(sides).items()}
        self._validate()

    def _validate(self):
        deg = [0] * self.n_vertices
        adj = {v: [] for v in range(self.n_vertices)}
        for a, b in self.sides.values():
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise ValueError("side endpoint out of range")
            deg[a] += 1
            deg[b] += 1
            _graph.add_edge(adj, a, b)
        if self.k == 1 and self.n_vertices == 1 and len(self.sides) == 1:
            return
        if any(d != 3 for d in deg):
            raise ValueError("generator vertices must have degree 3")
        if not _graph.is_connected(adj):
            raise ValueError("generator is not connected")
        if self.k < 2:
            raise ValueError("a k-generator needs k >= 2 (or the 1-generator)")

    @property
    def k(self):
        return len(self.sides) - self.n_vertices + 1

    @property
    def side_ids(self):
        return tuple(sorted(self.sides))

    def loops(self):
        return [e for e, (a, b) in self.sides.items() if a == b]

    def parallel_classes(self):
        groups = {}
        for e, (a, b) in self.sides.items():
            if a != b:
                groups.setdefault((min(a, b), max(a, b)), []).append(e)
        return [sorted(g) for g in groups.values() if len(g) > 1]

    def canonical_form(self):
        """Edge multiset minimised over all vertex relabellings."""
        best = None
        for perm in permutations(range(self.n_vertices)):
            enc = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in self.sides.values()))
            if best is None or enc < best:
                best = enc
        return best

    def is_isomorphic(self, other):
        return self.n_vertices == other.n_vertices and self.canonical_form() == other.canonical_form()

    def to_text(self):
        lines = ["GEN v1", f"V {self.n_vertices}"]
        lines += [f"E {e} {a} {b}" for e, (a, b) in sorted(self.sides.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        n, edges, _ = _read_graph_text(text, "GEN v1", with_ids=True)
        sides = {}
        for e, a, b in edges:
            if e in sides:
                raise FormatError(f"duplicate edge id {e}")
            sides[e] = (a, b)
        try:
            return cls(n, sides)
        except ValueError as exc:
            raise FormatError(str(exc)) from None

    def __repr__(self):
        return f"Generator(k={self.k}, vertices={self.n_vertices}, sides={len(self.sides)})"


def one_generator():
    return Generator(1, {0: (0, 0)})


def count_sides(gen):
    if gen.k < 2:
        raise PreconditionError("side counting applies to k >= 2")
    return len(gen.sides)


def enumerate_generators(k, limit=GENERATOR_K_LIMIT):
    """All k-generators up to isomorphism, in canonical-form order."""
    if k < 1:
        raise PreconditionError("k must be positive")
    if k > limit:
        raise PreconditionError(f"k = {k} exceeds the configured bound {limit}")
    return list(_generators(k))


@lru_cache(maxsize=None)
def _generators(k):
    if k == 1:
        return (one_generator(),)
    n = 2 * (k - 1)
    found = {}

    def fill(rem, edges):
        i = next((v for v in range(n) if rem[v] > 0), None)
        if i is None:
            gen_adj = {v: [] for v in range(n)}
            for a, b in edges:
                _graph.add_edge(gen_adj, a, b)
            if _graph.is_connected(gen_adj):
                # refinement-based form: exact and much cheaper than permutations
                found.setdefault(_graph.canonical_form(edges, {}), tuple(edges))
            return
        last = max((b for a, b in edges if a == i), default=i)
        for j in range(last, n):
            need = 2 if j == i else 1
            if rem[j] < need or (j == i and rem[i] < 2):
                continue
            rem[i] -= 1
            rem[j] -= 1
            edges.append((i, j))
            fill(rem, edges)
            edges.pop()
            rem[i] += 1
            rem[j] += 1

    fill([3] * n, [])
    gens = (Generator(n, dict(enumerate(edges))) for edges in found.values())
    forms = sorted(g.canonical_form() for g in gens)
    return tuple(Generator(n, dict(enumerate(form))) for form in forms)


@dataclass
class Attachment:
    """Per-side ordered taxa, running from the side's first endpoint."""

    sequences: dict = field(default_factory=dict)

    def on(self, side):
        return tuple(self.sequences.get(side, ()))

    @property
    def taxa(self):
        return [t for seq in self.sequences.values() for t in seq]


def check_attachment(gen, att):
    """Raise PreconditionError unless attaching yields a simple network."""
    unknown = set(att.sequences) - set(gen.sides)
    if unknown:
        raise PreconditionError(f"attachment refers to unknown sides {sorted(unknown)}")
    taxa = att.taxa
    if len(taxa) != len(set(taxa)):
        raise PreconditionError("a taxon is attached twice")
    if len(taxa) < 2:
        raise PreconditionError("at least two taxa must be attached")
    if gen.k == 1:
        if len(taxa) < 3:
            raise PreconditionError("the 1-generator needs at least three taxa to give a simple network")
        return
    for e in gen.loops():
        if len(att.on(e)) < 2:
            raise PreconditionError(f"loop side {e} needs at least two taxa")
    for group in gen.parallel_classes():
        bare = [e for e in group if not att.on(e)]
        if len(bare) > 1:
            raise PreconditionError(f"parallel sides {bare} would stay parallel")


def attach(gen, att):
    """Build the network obtained by attaching taxa to the sides of *gen*."""
    check_attachment(gen, att)
    adj = {v: [] for v in range(gen.n_vertices)}
    labels = {}
    nxt = gen.n_vertices
    for e in gen.side_ids:
        a, b = gen.sides[e]
        prev = a
        for t in att.on(e):
            w, leaf = nxt, nxt + 1
            nxt += 2
            _graph.add_edge(adj, prev, w)
            _graph.add_edge(adj, w, leaf)
            labels[leaf] = t
            prev = w
        _graph.add_edge(adj, prev, b)
    if gen.k == 1:
        _graph.suppress_vertex(adj, 0)
    return UnrootedNetwork._build(adj, labels)


@dataclass
class SideStructure:
    """How a network decomposes over its generator.

    ``paths`` maps side id -> vertex path in the network from the side's
    first endpoint to its second; ``vertex_map`` maps generator vertices to
    network vertices.
    """

    generator: Generator
    attachment: Attachment
    paths: dict
    vertex_map: dict

    def path_edges(self, side):
        p = self.paths[side]
        return [tuple(sorted(e)) for e in zip(p, p[1:])]


def has_large_pendant_subtree(net):
    """True if deleting one edge splits off a tree with >= 2 leaves."""
    edges = list(net.edges)
    adj_e = {v: [] for v in net.vertices}
    for i, (u, v) in enumerate(edges):
        adj_e[u].append((v, i))
        adj_e[v].append((u, i))
    leaf_mask = {net.vertex(t): 1 << i for i, t in enumerate(net.taxa_order)}
    for eid, _ in _bridges(adj_e, len(adj_e), leaf_mask):
        u, v = edges[eid]
        adj, _ = net.mutable()
        _graph.remove_edge(adj, u, v)
        for comp in _graph.components(adj):
            n_e = sum(len(adj[x]) for x in comp) // 2
            n_leaves = sum(1 for x in comp if net.is_leaf(x))
            if n_e == len(comp) - 1 and n_leaves >= 2:
                return True
    return False


def side_structure(net):
    """Decompose *net* over its underlying generator (leaf deletion plus
    suppression), keeping side orientation and leaf order."""
    if net.reticulation_number < 1:
        raise PreconditionError("a tree has no underlying generator")
    if has_large_pendant_subtree(net):
        raise PreconditionError("network has a pendant subtree with at least two leaves")
    holders = {net.parent(t): t for t in net.taxa}
    branch = [v for v in net.vertices if not net.is_leaf(v) and v not in holders]
    if not branch:
        # single cycle: the 1-generator; start at the smallest taxon
        first = net.parent(net.taxa_order[0])
        nbrs = [w for w in net.neighbors(first) if not net.is_leaf(w)]
        nxt = min(nbrs, key=lambda w: taxon_key(holders[w]))
        path = [first, nxt]
        while path[-1] != first:
            path.append(next(w for w in net.neighbors(path[-1])
                              if not net.is_leaf(w) and w != path[-2]))
        seq = tuple(holders[v] for v in path[:-1])
        gen = one_generator()
        return SideStructure(gen, Attachment({0: seq}), {0: path}, {})
    vmap = {v: i for i, v in enumerate(branch)}
    raw = []
    used = set()
    for a in branch:
        for x in net.neighbors(a):
            path = [a, x]
            while path[-1] not in vmap:
                path.append(next(w for w in net.neighbors(path[-1])
                                 if not net.is_leaf(w) and w != path[-2]))
            key = frozenset(tuple(sorted(e)) for e in zip(path, path[1:]))
            if key in used:
                continue
            used.add(key)
            raw.append(path)
    raw.sort(key=lambda p: (vmap[p[0]], vmap[p[-1]], len(p), p))
    sides, seqs, paths = {}, {}, {}
    for e, p in enumerate(raw):
        sides[e] = (vmap[p[0]], vmap[p[-1]])
        seqs[e] = tuple(holders[v] for v in p[1:-1])
        paths[e] = p
    gen = Generator(len(branch), sides)
    return SideStructure(gen, Attachment({e: s for e, s in seqs.items() if s}), paths,
                         {i: v for v, i in vmap.items()})


def extract_generator(net):
    """The generator underlying *net* together with the induced attachment."""
    st = side_structure(net)
    return st.generator, st.attachment


def network_chains(net):
    """Maximal chains of *net*: the leaf sequence of every decorated side."""
    st = side_structure(net)
    return {e: seq for e, seq in st.attachment.sequences.items() if seq}


# ---------------------------------------------------------------------- chains and cut counts


@dataclass(frozen=True)
class Breakpoints:
    count: int
    first: int | None
    second: int | None


def _split_point(tree, chain):
    for i in range(1, len(chain)):
        if is_chain(tree, chain[:i]) and is_chain(tree, chain[i:]):
            return i
    return None


def chain_breakpoints(net, chain, t1, t2):
    """Number of trees among t1, t2 that cut *chain*, with cut positions.

    Position ``i`` means the chain splits into leaves ``1..i`` and
    ``i+1..n`` in that tree.
    """
    chain = tuple(getattr(chain, "leaves", chain))
    if not is_chain(net, chain):
        raise PreconditionError(f"{chain} is not a chain of the network")
    pos = []
    for tree in (t1, t2):
        if is_chain(tree, chain):
            pos.append(None)
            continue
        i = _split_point(tree, chain)
        if i is None:
            raise PreconditionError("chain is cut more than once; is the tree displayed?")
        pos.append(i)
    return Breakpoints(sum(p is not None for p in pos), pos[0], pos[1])


def chain_cap(breakpoints, cluster_reduced=False):
    """Largest chain length allowed for a reduced displayed pair."""
    caps = (3, 6, 7 if cluster_reduced else 9)
    return caps[breakpoints]


def cut_counts(net, b1, b2, structure=None):
    """Per-side cut counts for two spanning embeddings.

    A side counts one for each of the two spanning trees that misses an edge
    of the side's path.  The counts depend on the embeddings; their sum is
    always ``2 r(N)``.
    """
    k = net.reticulation_number
    if k < 2:
        raise PreconditionError("cut counts need r(N) >= 2")
    spans = []
    for b in (b1, b2):
        span = b.spanning if isinstance(b, Embedding) else frozenset(b)
        span = frozenset(tuple(sorted(e)) for e in span)
        if not is_spanning_tree(net, span):
            raise PreconditionError("embedding extension is not a spanning tree")
        spans.append(span)
    st = structure if structure is not None else side_structure(net)
    out = {}
    for e in st.generator.side_ids:
        pe = st.path_edges(e)
        out[e] = sum(1 for span in spans if any(x not in span for x in pe))
    return out
