"""Low-level multigraph helpers shared by trees, reductions and networks.

Graphs here are plain ``dict[int, list[int]]`` adjacency maps.  Lists (not
sets) are used so that parallel edges and loops survive; a loop at ``v``
appears twice in ``adj[v]``.  All helpers mutate in place.
"""

from __future__ import annotations


def add_edge(adj, u, v):
    adj.setdefault(u, []).append(v)
    adj.setdefault(v, []).append(u)


def remove_edge(adj, u, v):
    adj[u].remove(v)
    adj[v].remove(u)


def remove_vertex(adj, v):
    for w in list(adj[v]):
        if w != v:
            adj[w].remove(v)
    del adj[v]


def suppress_vertex(adj, v):
    """Replace the path ``a - v - b`` by the single edge ``a - b``."""
    a, b = adj[v]
    if a == v:
        raise ValueError(f"vertex {v} carries an isolated loop")
    adj[a].remove(v)
    adj[b].remove(v)
    del adj[v]
    adj[a].append(b)
    adj[b].append(a)


def suppress_degree_two(adj, keep=()):
    """Suppress every degree-2 vertex not listed in *keep*.

    A vertex whose only edge is a loop (the single-vertex 1-generator) is left
    alone since there is nothing to suppress it into.
    """
    keep = set(keep)
    stack = [v for v, nb in adj.items() if len(nb) == 2 and v not in keep]
    while stack:
        v = stack.pop()
        if v not in adj or len(adj[v]) != 2 or v in keep:
            continue
        a, b = adj[v]
        if a == v:
            continue
        suppress_vertex(adj, v)
        for w in (a, b):
            if len(adj[w]) == 2 and w not in keep:
                stack.append(w)
    return adj


def prune_unlabeled_leaves(adj, labeled):
    """Repeatedly delete degree-<=1 vertices that are not in *labeled*."""
    stack = [v for v, nb in adj.items() if len(nb) <= 1 and v not in labeled]
    while stack:
        v = stack.pop()
        if v not in adj or v in labeled or len(adj[v]) > 1:
            continue
        nbrs = list(adj[v])
        remove_vertex(adj, v)
        for w in nbrs:
            if w in adj and len(adj[w]) <= 1 and w not in labeled:
                stack.append(w)
    return adj


def components(adj):
    """Connected components as a list of vertex sets."""
    seen = set()
    out = []
    for s in adj:
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        out.append(comp)
    return out


def is_connected(adj):
    return len(adj) <= 1 or len(components(adj)) == 1


def copy_adj(adj):
    return {v: list(nb) for v, nb in adj.items()}


def _refine(colors, nbrs):
    while True:
        sig = {v: (colors[v], tuple(sorted(colors[w] for w in nbrs[v]))) for v in colors}
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: ranks[sig[v]] for v in colors}
        if len(ranks) == len(set(colors.values())):
            return new
        colors = new


def canonical_form(edges, labels):
    """Isomorphism-invariant key of a leaf-labelled multigraph (exact).

    Colour refinement, then individualisation of the first non-singleton
    cell with minimum over the choices.
    """
    nbrs = {}
    for u, v in edges:
        nbrs.setdefault(u, []).append(v)
        nbrs.setdefault(v, []).append(u)
    start = {v: (labels[v],) if v in labels else ("",) for v in nbrs}
    order = {c: i for i, c in enumerate(sorted(set(start.values())))}
    colors = _refine({v: order[start[v]] for v in nbrs}, nbrs)

    def encode(col):
        leaves = tuple(sorted((col[v], t) for v, t in labels.items()))
        return leaves + tuple(sorted(tuple(sorted((col[u], col[v]))) for u, v in edges))

    def search(col):
        cells = {}
        for v, c in col.items():
            cells.setdefault(c, []).append(v)
        multi = [c for c, vs in cells.items() if len(vs) > 1]
        if not multi:
            return encode(col)
        target = min(multi)
        best = None
        for v in sorted(cells[target]):
            # split the cell: v keeps the smaller colour
            nxt = {w: 2 * c + (1 if c == target and w != v else 0) for w, c in col.items()}
            got = search(_refine(nxt, nbrs))
            if best is None or got < best:
                best = got
        return best

    return search(colors)
