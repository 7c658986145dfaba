"""Exact unrooted hybridization number for tiny instances.

Every network that displays t1 can be grown from t1 by repeatedly adding
one edge: subdivide two edges (possibly the same one) and join the new
vertices, or subdivide one edge and hang a looped pendant vertex from it.
Intermediate graphs may be multigraphs; only the final network must be
simple.  Growing level by level with exact isomorphism dedup gives an
exhaustive search: the first level containing a network that also
displays t2 is h^u(t1, t2).
"""

from __future__ import annotations

from ._graph import canonical_form
from .errors import BudgetExceeded, PreconditionError
from .networks import UnrootedNetwork, displays
from .tree import check_same_taxa

UHN_LEAF_LIMIT = 7


class _Multigraph:
    __slots__ = ("edges", "labels", "next_id")

    def __init__(self, edges, labels, next_id):
        self.edges = edges
        self.labels = labels
        self.next_id = next_id

    @classmethod
    def of_tree(cls, tree):
        return cls(tuple(tree.edges), {tree.vertex(t): t for t in tree.taxa}, max(tree.vertices) + 1)

    def grow(self):
        """All graphs with one more independent cycle."""
        es, x, y = self.edges, self.next_id, self.next_id + 1
        m = len(es)
        for i in range(m):
            a, b = es[i]
            rest_i = es[:i] + es[i + 1:]
            yield _Multigraph(rest_i + ((a, x), (x, b), (x, y), (y, y)), self.labels, y + 1)
            yield _Multigraph(rest_i + ((a, x), (x, y), (y, b), (x, y)), self.labels, y + 1)
            for j in range(i + 1, m):
                c, d = es[j]
                rest = es[:i] + es[i + 1:j] + es[j + 1:]
                yield _Multigraph(rest + ((a, x), (x, b), (c, y), (y, d), (x, y)), self.labels, y + 1)

    def is_simple(self):
        seen = set()
        for u, v in self.edges:
            key = (min(u, v), max(u, v))
            if u == v or key in seen:
                return False
            seen.add(key)
        return True

    def network(self):
        return UnrootedNetwork.from_edges(self.edges, self.labels)

    def canonical(self):
        return canonical_form(self.edges, self.labels)


def uhn_exact(t1, t2, k_max=None, budget=None, leaf_limit=UHN_LEAF_LIMIT):
    """Minimum reticulation number of a network displaying both trees.

    Returns ``(r, network)``.  Raises :class:`BudgetExceeded` when more than
    *budget* candidate networks would be examined, and
    :class:`PreconditionError` when no network with ``r <= k_max`` exists or
    the instance is larger than *leaf_limit*.
    """
    check_same_taxa(t1, t2)
    n = t1.n_leaves
    if leaf_limit is not None and n > leaf_limit:
        raise PreconditionError(f"uhn_exact is limited to {leaf_limit} taxa (got {n})")
    if t1 == t2:
        return 0, UnrootedNetwork.from_tree(t1)
    if k_max is None:
        k_max = max(n - 3, 1)
    work = 0
    level = [_Multigraph.of_tree(t1)]
    for k in range(1, k_max + 1):
        seen = set()
        nxt = []
        for g in level:
            for h in g.grow():
                work += 1
                if budget is not None and work > budget:
                    raise BudgetExceeded(f"uhn search exceeded {budget} candidates", k, None)
                key = h.canonical()
                if key in seen:
                    continue
                seen.add(key)
                if h.is_simple():
                    net = h.network()
                    if displays(net, t2):
                        return k, net
                if k < k_max:
                    nxt.append(h)
        level = nxt
    raise PreconditionError(f"no network with r <= {k_max} displays both trees")
