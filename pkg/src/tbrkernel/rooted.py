"""Rooted trees and networks: reducedness, display, unrooting, kernel bounds.

The rooted hybridization number h is not computed exactly.  It is
bracketed by a witness network from above and, after unrooting, by a
parsimony certificate from below; when the two meet, h is certified.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from itertools import product

from . import _graph
from .errors import BudgetExceeded, FormatError, PreconditionError, VerificationError
from .networks import UnrootedNetwork
from .parsimony import mp_lower_bound, parsimony_score
from .tree import UnrootedTree, _newick_graph, sort_taxa, taxon_key, valid_taxon

PLAIN, CLUSTER_REDUCED = "plain", "cluster"


class RootedNetwork:
    """Rooted binary phylogenetic network given by child lists.

    The root has out-degree two, leaves are in-1/out-0 and labelled, every
    other vertex is in-1/out-2 (tree vertex) or in-2/out-1 (reticulation).
    No parallel edges, no directed cycles.
    """

    def __init__(self, children, labels):
        self._children = {v: tuple(cs) for v, cs in children.items()}
        for cs in list(self._children.values()):
            for c in cs:
                self._children.setdefault(c, ())
        self._labels = dict(labels)
        self._vertex = {}
        for v, t in self._labels.items():
            if t in self._vertex:
                raise ValueError(f"duplicate taxon {t!r}")
            if not valid_taxon(t, allow_reserved=True):
                raise ValueError(f"invalid taxon label {t!r}")
            self._vertex[t] = v
        self._parents = {v: [] for v in self._children}
        for v, cs in self._children.items():
            for c in cs:
                self._parents[c].append(v)
        self._validate()

    def _validate(self):
        roots = [v for v, ps in self._parents.items() if not ps]
        if len(roots) != 1:
            raise ValueError(f"expected one root, found {len(roots)}")
        self.root = roots[0]
        if len(self._children[self.root]) != 2:
            raise ValueError("the root must have out-degree two")
        for v, cs in self._children.items():
            if len(set(cs)) != len(cs):
                raise ValueError(f"parallel edges out of {v}")
            indeg, outdeg = len(self._parents[v]), len(cs)
            if v == self.root:
                continue
            if outdeg == 0:
                if indeg != 1 or v not in self._labels:
                    raise ValueError(f"leaf {v} must be labelled with in-degree one")
            elif v in self._labels:
                raise ValueError(f"labelled vertex {v} is not a leaf")
            elif (indeg, outdeg) not in ((1, 2), (2, 1)):
                raise ValueError(f"vertex {v} has in/out degree {indeg}/{outdeg}")
        if len(self._labels) < 2:
            raise ValueError("a rooted network needs at least two leaves")
        self._topo = self._topological_order()

    def _topological_order(self):
        indeg = {v: len(ps) for v, ps in self._parents.items()}
        queue = deque([self.root])
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(order) != len(self._children):
            raise ValueError("the network has a directed cycle")
        return order

    @classmethod
    def from_edges(cls, edges, labels):
        children = {}
        for p, c in edges:
            children.setdefault(p, []).append(c)
            children.setdefault(c, [])
        return cls(children, labels)

    @classmethod
    def _build(cls, children, labels):
        """Renumber canonically: leaves in taxon order, then BFS from the root."""
        parents = {v: 0 for v in children}
        for cs in children.values():
            for c in cs:
                parents[c] += 1
        root = next(v for v, d in parents.items() if d == 0)
        labels = {v: t for v, t in labels.items() if v in children}
        leaves = sorted(labels, key=lambda v: taxon_key(labels[v]))
        order = {v: i for i, v in enumerate(leaves)}
        queue, seen = deque([root]), {root}
        bfs = []
        while queue:
            v = queue.popleft()
            bfs.append(v)
            for c in children[v]:
                if c not in seen:
                    seen.add(c)
                    queue.append(c)
        for v in bfs:
            order.setdefault(v, len(order))
        new = {order[v]: [order[c] for c in cs] for v, cs in children.items()}
        return cls(new, {order[v]: t for v, t in labels.items()})

    # ------------------------------------------------------------------ queries

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
        return tuple(sorted(self._children))

    @property
    def edges(self):
        return tuple(sorted((p, c) for p, cs in self._children.items() for c in cs))

    def children(self, v):
        return self._children[v]

    def parents(self, v):
        return tuple(self._parents[v])

    def is_leaf(self, v):
        return v in self._labels

    def label(self, v):
        return self._labels[v]

    def vertex(self, taxon):
        return self._vertex[taxon]

    def parent(self, taxon):
        return self._parents[self._vertex[taxon]][0]

    @property
    def reticulations(self):
        return tuple(v for v in self.vertices if len(self._parents[v]) == 2)

    @property
    def reticulation_number(self):
        return len(self.reticulations)

    def topological_order(self):
        return tuple(self._topo)

    def child_lists(self):
        return {v: list(cs) for v, cs in self._children.items()}, dict(self._labels)

    def to_text(self):
        lines = ["RNET v1", f"V {len(self._children)}"]
        lines += [f"E {p} {c}" for p, c in self.edges]
        lines += [f"L {v} {self._labels[v]}" for v in sorted(self._labels)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        edges, labels, n = _read_rnet(text)
        children = {v: [] for v in range(n)}
        for p, c in edges:
            children[p].append(c)
        try:
            return cls(children, labels)
        except ValueError as exc:
            raise FormatError(str(exc)) from None

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n_leaves}, r={self.reticulation_number})"


class RootedTree(RootedNetwork):
    """Rooted binary phylogenetic tree (a rooted network without reticulations)."""

    def _validate(self):
        super()._validate()
        if self.reticulations:
            raise ValueError("a rooted tree has no reticulations")

    @property
    def cluster_map(self):
        """Vertex -> frozenset of descendant taxa."""
        cached = getattr(self, "_cluster_map", None)
        if cached is None:
            cached = {}
            for v in reversed(self._topo):
                if v in self._labels:
                    cached[v] = frozenset([self._labels[v]])
                else:
                    cached[v] = frozenset().union(*(cached[c] for c in self._children[v]))
            self._cluster_map = cached
        return cached

    def clusters(self):
        return frozenset(self.cluster_map.values())

    def nontrivial_clusters(self):
        n = self.n_leaves
        return frozenset(c for c in self.cluster_map.values() if 2 <= len(c) < n)

    def cluster_vertex(self, taxa):
        taxa = frozenset(taxa)
        for v, c in self.cluster_map.items():
            if c == taxa:
                return v
        return None

    def subclusters(self, v):
        """Clusters of the subtree below *v* with at least two taxa, *v* excluded."""
        out = []
        stack = list(self._children[v])
        while stack:
            w = stack.pop()
            if not self.is_leaf(w):
                out.append(self.cluster_map[w])
                stack.extend(self._children[w])
        return frozenset(out)

    def __eq__(self, other):
        if not isinstance(other, RootedTree):
            return NotImplemented
        return self.taxa == other.taxa and self.clusters() == other.clusters()

    def __hash__(self):
        return hash((self.taxa, self.clusters()))


def _read_rnet(text):
    lines = [l.strip() for l in text.splitlines()]
    lines = [(i, l) for i, l in enumerate(lines, 1) if l and not l.startswith("#")]
    if not lines or lines[0][1] != "RNET v1":
        raise FormatError("missing 'RNET v1' header", 1)
    n = None
    edges, labels = [], {}
    for i, line in lines[1:]:
        parts = line.split()
        try:
            if parts[0] == "V" and len(parts) == 2:
                n = int(parts[1])
            elif parts[0] == "E" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "L" and len(parts) == 3:
                labels[int(parts[1])] = parts[2]
            else:
                raise FormatError(f"unrecognised line {line!r}", i)
        except ValueError:
            raise FormatError(f"bad integer in {line!r}", i) from None
    if n is None:
        raise FormatError("missing 'V <count>' line")
    for p, c in edges:
        if not (0 <= p < n and 0 <= c < n):
            raise FormatError(f"edge {p} {c} refers to a vertex outside 0..{n - 1}")
    return edges, labels, n


def read_rooted_network(path):
    with open(path, encoding="utf-8") as fh:
        return RootedNetwork.from_text(fh.read())


def write_rooted_network(path, net):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(net.to_text())


# ---------------------------------------------------------------------- rooted Newick


def parse_rooted_newick(text, allow_reserved=False):
    """Parse rooted binary Newick; the outermost pair is the root."""
    adj, labels = _newick_graph(text, allow_reserved, 2)
    children = {v: [] for v in adj}
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                children[v].append(w)
                queue.append(w)
    return RootedTree._build(children, labels)


def serialize_rooted_newick(tree):
    """Deterministic rooted Newick; children ordered by their smallest taxon."""
    key = {}
    for v in reversed(tree.topological_order()):
        if tree.is_leaf(v):
            key[v] = taxon_key(tree.label(v))
        else:
            key[v] = min(key[c] for c in tree.children(v))

    def write(v):
        if tree.is_leaf(v):
            return tree.label(v)
        kids = sorted(tree.children(v), key=key.get)
        return "(" + ",".join(write(c) for c in kids) + ")"

    return write(tree.root) + ";"


def read_rooted_newick(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read().strip()
    return parse_rooted_newick(text)


# ---------------------------------------------------------------------- reducedness


def _check_same(t1, t2):
    if t1.taxa != t2.taxa:
        raise PreconditionError("rooted trees must have the same taxa")


def common_pendant_subtrees(t1, t2):
    """Maximal taxon sets below a non-root vertex with identical rooted subtrees."""
    _check_same(t1, t2)
    found = []
    for v, c in t1.cluster_map.items():
        if v == t1.root or len(c) < 2:
            continue
        w = t2.cluster_vertex(c)
        if w is None or w == t2.root:
            continue
        if t1.subclusters(v) == t2.subclusters(w):
            found.append(c)
    maximal = [c for c in found if not any(c < d for d in found)]
    return sorted((sort_taxa(c) for c in maximal), key=lambda s: [taxon_key(t) for t in s])


def is_rooted_chain(tree, leaves):
    """(l1, ..., ln) with p1 = p2 or p1 a child of p2, and p_i a child of p_{i+1}."""
    if len(leaves) < 2 or len(set(leaves)) != len(leaves):
        return False
    if any(t not in tree.taxa for t in leaves):
        return False
    ps = [tree.parent(t) for t in leaves]

    def child_of(a, b):
        return b in tree.parents(a)

    if not (ps[0] == ps[1] or child_of(ps[0], ps[1])):
        return False
    return all(child_of(ps[i], ps[i + 1]) for i in range(1, len(ps) - 1))


def rooted_three_chains(tree):
    """Every 3-chain of *tree*; any longer chain starts with one of these."""
    out = []
    for l2 in tree.taxa:
        p2 = tree.parent(l2)
        if p2 == tree.root:
            continue
        (p3,) = tree.parents(p2)
        l3s = [tree.label(c) for c in tree.children(p3) if tree.is_leaf(c)]
        firsts = [tree.label(c) for c in tree.children(p2) if tree.is_leaf(c) and tree.label(c) != l2]
        for c in tree.children(p2):
            if not tree.is_leaf(c):
                firsts += [tree.label(g) for g in tree.children(c) if tree.is_leaf(g)]
        for l1 in firsts:
            for l3 in l3s:
                if len({l1, l2, l3}) == 3:
                    out.append((l1, l2, l3))
    return sorted(out, key=lambda c: [taxon_key(t) for t in c])


def common_rooted_chains(t1, t2):
    """Common 3-chains (every common n-chain with n >= 3 contains one)."""
    _check_same(t1, t2)
    return [c for c in rooted_three_chains(t1) if is_rooted_chain(t2, c)]


def common_rooted_clusters(t1, t2):
    _check_same(t1, t2)
    common = t1.nontrivial_clusters() & t2.nontrivial_clusters()
    return sorted((sort_taxa(c) for c in common), key=lambda s: (len(s), [taxon_key(t) for t in s]))


def rooted_reducedness_report(t1, t2):
    return {
        "subtree": common_pendant_subtrees(t1, t2),
        "chain": common_rooted_chains(t1, t2),
        "cluster": common_rooted_clusters(t1, t2),
    }


def rooted_is_reduced(t1, t2, rules=("subtree", "chain")):
    if isinstance(rules, str):
        rules = [r.strip() for r in rules.split(",") if r.strip()]
    bad = set(rules) - {"subtree", "chain", "cluster"}
    if bad:
        raise ValueError(f"unknown reduction rules {sorted(bad)}")
    report = rooted_reducedness_report(t1, t2)
    return not any(report[r] for r in rules)


# ---------------------------------------------------------------------- display


@dataclass
class RootedDisplayResult:
    displayed: bool
    kept_parents: dict = field(default_factory=dict)
    switchings: int = 0

    def __bool__(self):
        return self.displayed


def switching_tree(net, kept_parents):
    """Tree obtained by keeping one parent edge per reticulation, then cleaning up."""
    children, labels = net.child_lists()
    for r in net.reticulations:
        for p in net.parents(r):
            if p != kept_parents[r]:
                children[p].remove(r)
    parents = {v: [] for v in children}
    for v, cs in children.items():
        for c in cs:
            parents[c].append(v)
    # prune unlabelled leaves
    stack = [v for v, cs in children.items() if not cs and v not in labels]
    while stack:
        v = stack.pop()
        if v not in children:
            continue
        for p in parents[v]:
            children[p].remove(v)
            if not children[p] and p not in labels:
                stack.append(p)
        del children[v]
        del parents[v]
    # suppress in-1/out-1 vertices and a root of out-degree one
    root = net.root
    while len(children[root]) == 1:
        (c,) = children[root]
        del children[root]
        parents[c] = []
        root = c
    for v in list(children):
        if v == root or v not in children:
            continue
        if len(children[v]) == 1 and len(parents[v]) == 1:
            (p,), (c,) = parents[v], children[v]
            children[p] = [c if x == v else x for x in children[p]]
            parents[c] = [p if x == v else x for x in parents[c]]
            del children[v], parents[v]
    return RootedTree._build(children, labels)


def rooted_displays(net, tree, budget=None):
    """Whether *net* displays *tree*, by trying all 2^r switchings."""
    if net.taxa != tree.taxa:
        raise PreconditionError("network and tree must have the same taxa")
    rets = net.reticulations
    if budget is not None and 2 ** len(rets) > budget:
        raise BudgetExceeded(f"{2 ** len(rets)} switchings exceed the budget {budget}")
    count = 0
    for choice in product(*(net.parents(r) for r in rets)):
        count += 1
        kept = dict(zip(rets, choice))
        if switching_tree(net, kept) == tree:
            return RootedDisplayResult(True, kept, count)
    return RootedDisplayResult(False, {}, count)


def displayed_trees(net):
    out = []
    for choice in product(*(net.parents(r) for r in net.reticulations)):
        t = switching_tree(net, dict(zip(net.reticulations, choice)))
        if t not in out:
            out.append(t)
    return out


# ---------------------------------------------------------------------- unrooting


def _unrooted_graph(net):
    adj = {}
    for p, c in net.edges:
        _graph.add_edge(adj, p, c)
    labels = {net.vertex(t): t for t in net.taxa}
    a, b = net.children(net.root)
    if b in adj[a]:
        raise VerificationError("unroot", "suppressing the root would create parallel edges")
    _graph.suppress_vertex(adj, net.root)
    return adj, labels


def unroot(tree):
    """Suppress the root and forget directions."""
    adj, labels = _unrooted_graph(tree)
    return UnrootedTree._build(adj, labels)


def unroot_network(net):
    adj, labels = _unrooted_graph(net)
    out = UnrootedNetwork._build(adj, labels)
    if out.reticulation_number != net.reticulation_number:
        raise VerificationError("unroot", "unrooting changed the reticulation number")
    return out


# ---------------------------------------------------------------------- bounds


def rooted_kernel_bound(k, cluster_reduced=False):
    return 9 * k - (4 if cluster_reduced else 2)


@dataclass
class BoundReport:
    n_leaves: int
    k: int
    bound: int
    cluster_reduced: bool

    @property
    def slack(self):
        return self.bound - self.n_leaves

    @property
    def ok(self):
        return self.n_leaves <= self.bound


def check_rooted_bound(t1, t2, k, cluster_reduced=False):
    """Check |X| <= 9k - 2 (or 9k - 4 when also cluster reduced).

    *k* must be a certified value of h for the pair.  Raises
    :class:`PreconditionError` if the pair is not reduced under the
    applicable rules and :class:`VerificationError` if the bound is breached.
    """
    if k < 1:
        raise PreconditionError("the rooted kernel bound needs h >= 1")
    rules = ("subtree", "chain", "cluster") if cluster_reduced else ("subtree", "chain")
    if not rooted_is_reduced(t1, t2, rules):
        raise PreconditionError(f"pair is not reduced under {', '.join(rules)}")
    rep = BoundReport(t1.n_leaves, k, rooted_kernel_bound(k, cluster_reduced), cluster_reduced)
    if not rep.ok:
        name = "rooted-cluster-kernel-bound" if cluster_reduced else "rooted-kernel-bound"
        raise VerificationError(name, f"{rep.n_leaves} taxa exceed {rep.bound} for h = {k}", {"report": rep})
    return rep


# ---------------------------------------------------------------------- candidate families


@dataclass
class RootedCandidate:
    """A claimed tight rooted instance: trees, witness network and claimed h."""

    s: RootedTree
    s_prime: RootedTree
    network: RootedNetwork
    k: int
    variant: str = PLAIN


def claim_text(cand):
    return f"ROOTED-FAMILY v1\nvariant {cand.variant}\nk {cand.k}\n"


def export_candidate(cand, directory):
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "s.nwk"), "w", encoding="utf-8") as fh:
        fh.write(serialize_rooted_newick(cand.s) + "\n")
    with open(os.path.join(directory, "s_prime.nwk"), "w", encoding="utf-8") as fh:
        fh.write(serialize_rooted_newick(cand.s_prime) + "\n")
    write_rooted_network(os.path.join(directory, "network.rnet"), cand.network)
    with open(os.path.join(directory, "claim.txt"), "w", encoding="utf-8") as fh:
        fh.write(claim_text(cand))


def load_candidate(directory):
    with open(os.path.join(directory, "claim.txt"), encoding="utf-8") as fh:
        lines = [l.split() for l in fh.read().splitlines() if l.strip()]
    if not lines or lines[0] != ["ROOTED-FAMILY", "v1"]:
        raise FormatError("missing 'ROOTED-FAMILY v1' header", 1)
    claim = {}
    for i, parts in enumerate(lines[1:], 2):
        if len(parts) != 2 or parts[0] not in ("variant", "k"):
            raise FormatError(f"unrecognised claim line {' '.join(parts)!r}", i)
        claim[parts[0]] = parts[1]
    if claim.get("variant") not in (PLAIN, CLUSTER_REDUCED) or not claim.get("k", "").isdigit():
        raise FormatError("claim needs 'variant plain|cluster' and an integer 'k'")
    s = read_rooted_newick(os.path.join(directory, "s.nwk"))
    sp = read_rooted_newick(os.path.join(directory, "s_prime.nwk"))
    net = read_rooted_network(os.path.join(directory, "network.rnet"))
    return RootedCandidate(s, sp, net, int(claim["k"]), claim["variant"])


def verify_rooted_family(cand):
    """Certify or refute a claimed tight rooted instance.

    Checks the leaf count (9k - 2, or 9k - 4 for the cluster-reduced
    variant), rooted reducedness, that the witness displays both trees with
    r = k, and the lower bound k <= d_MP of the unrooted pair.  Together
    these give h = k with the leaf count on the bound.
    """
    from .families import VerificationReport

    if isinstance(cand, (str, os.PathLike)):
        cand = load_candidate(cand)
    k, variant = cand.k, cand.variant
    rep = VerificationReport(f"rooted-{variant}", k, quantity="h")
    s, sp, net = cand.s, cand.s_prime, cand.network
    if not (s.taxa == sp.taxa == net.taxa):
        rep.add("leaf-sets", False, "trees and network have different taxa")
        return rep
    cluster = variant == CLUSTER_REDUCED
    bound = rooted_kernel_bound(k, cluster)
    rep.add("leaf-count", k >= 1 and s.n_leaves == bound, f"{s.n_leaves} taxa, expected {bound}")
    red = rooted_reducedness_report(s, sp)
    rep.add("rooted-subtree-reduced", not red["subtree"], f"common pendant subtrees {red['subtree'][:3]}")
    rep.add("rooted-chain-reduced", not red["chain"], f"common 3-chains {red['chain'][:3]}")
    if cluster:
        rep.add("rooted-cluster-reduced", not red["cluster"], f"common clusters {red['cluster'][:3]}")
    r = net.reticulation_number
    rep.add("reticulation-number", r == k, f"r(witness) = {r}")
    for name, tree in (("display-s", s), ("display-s-prime", sp)):
        res = rooted_displays(net, tree)
        rep.add(name, bool(res), f"{res.switchings} switchings tried")
    u, up = unroot(s), unroot(sp)
    lower, ch = mp_lower_bound(u, up)
    rep.add("unrooted-lower-bound", lower >= k, f"parsimony bound {lower}, character scores "
            f"({parsimony_score(u, ch)}, {parsimony_score(up, ch)})")
    if rep.ok:
        rep.distance = k
    return rep


# A computer-searched k = 1 instance on 7 taxa.  Both trees contain the
# cluster {1..5}; removing taxa 6 and 7 and their parents gives the
# cluster-reduced instance on 5 taxa.
_K1_S = "(7,(6,((1,2),(3,(4,5)))));"
_K1_S_PRIME = "(7,(6,(((1,4),2),(3,5))));"
_K1_NETWORK = """RNET v1
V 15
E 7 6
E 7 8
E 8 5
E 8 9
E 9 10
E 9 11
E 10 1
E 10 12
E 11 2
E 11 13
E 12 0
E 12 14
E 13 4
E 13 14
E 14 3
L 0 1
L 1 2
L 2 3
L 3 4
L 4 5
L 5 6
L 6 7
"""
_R1_S = "((1,2),(3,(4,5)));"
_R1_S_PRIME = "(((1,4),2),(3,5));"
_R1_NETWORK = """RNET v1
V 11
E 5 6
E 5 7
E 6 1
E 6 8
E 7 2
E 7 9
E 8 0
E 8 10
E 9 4
E 9 10
E 10 3
L 0 1
L 1 2
L 2 3
L 3 4
L 4 5
"""


def example_candidate(variant=PLAIN):
    """Shipped certified candidate for k = 1 (7 taxa, or 5 when cluster reduced)."""
    if variant == PLAIN:
        s, sp, net = _K1_S, _K1_S_PRIME, _K1_NETWORK
    elif variant == CLUSTER_REDUCED:
        s, sp, net = _R1_S, _R1_S_PRIME, _R1_NETWORK
    else:
        raise PreconditionError(f"unknown rooted variant {variant!r}")
    return RootedCandidate(parse_rooted_newick(s), parse_rooted_newick(sp),
                           RootedNetwork.from_text(net), 1, variant)
