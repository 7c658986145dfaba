"""Fitch small-parsimony scoring and parsimony-distance lower bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .errors import FormatError, PreconditionError
from .tree import check_same_taxa, sort_taxa

EXHAUSTIVE_LIMIT = 12


class Character:
    """A map taxon -> state.  States are arbitrary hashable values."""

    def __init__(self, assignment):
        self.assignment = dict(assignment)

    def __getitem__(self, taxon):
        return self.assignment[taxon]

    def __eq__(self, other):
        return isinstance(other, Character) and self.assignment == other.assignment

    def __hash__(self):
        return hash(frozenset(self.assignment.items()))

    def __repr__(self):
        body = ", ".join(f"{t}:{self.assignment[t]}" for t in sort_taxa(self.assignment))
        return f"Character({body})"

    @property
    def taxa(self):
        return frozenset(self.assignment)

    @property
    def states(self):
        return sorted(set(self.assignment.values()), key=str)

    def to_text(self):
        return "".join(f"{t}\t{self.assignment[t]}\n" for t in sort_taxa(self.assignment))

    @classmethod
    def from_text(cls, text):
        out = {}
        for i, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise FormatError("expected 'taxon<TAB>state'", i)
            if parts[0] in out:
                raise FormatError(f"duplicate taxon {parts[0]!r}", i)
            out[parts[0]] = parts[1]
        return cls(out)


def read_character(path):
    with open(path, encoding="utf-8") as fh:
        return Character.from_text(fh.read())


def write_character(path, character):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(character.to_text())


@dataclass
class FitchResult:
    score: int
    extension: dict = field(repr=False)

    def changed_edges(self, tree):
        return [(u, v) for u, v in tree.edges if self.extension[u] != self.extension[v]]


def _assignment(tree, f):
    f = f.assignment if isinstance(f, Character) else f
    missing = [t for t in tree.taxa if t not in f]
    if missing:
        raise PreconditionError(f"character has no state for {sort_taxa(missing)}")
    return f


def _rooting(tree):
    """Traversal used by Fitch, cached on the (immutable) tree.

    The tree is rooted at the internal endpoint of the smallest taxon's edge.
    """
    cached = tree.__dict__.get("_fitch_rooting")
    if cached is None:
        first = tree.vertex(tree.taxa_order[0])
        root = tree.neighbors(first)[0]
        parent = {root: None}
        order = [root]
        for v in order:
            for w in tree.neighbors(v):
                if w not in parent:
                    parent[w] = v
                    order.append(w)
        kids = {v: tuple(w for w in tree.neighbors(v) if w != parent[v]) for v in order}
        leaf = {v: tree.label(v) for v in order if tree.is_leaf(v)}
        cached = (order, parent, kids, leaf)
        tree.__dict__["_fitch_rooting"] = cached
    return cached


def _fitch_sets(tree, f):
    """Bottom-up pass: state sets as bitmasks, the score, and the state list."""
    order, _, kids, leaf = _rooting(tree)
    bit = {}
    states = []
    sets = {}
    score = 0
    for v in reversed(order):
        t = leaf.get(v)
        if t is not None:
            st = f[t]
            b = bit.get(st)
            if b is None:
                b = bit[st] = 1 << len(states)
                states.append(st)
            sets[v] = b
            continue
        ks = kids[v]
        if len(ks) == 2:
            x, y = sets[ks[0]], sets[ks[1]]
            if x & y:
                sets[v] = x & y
            else:
                sets[v] = x | y
                score += 1
            continue
        # Hartigan's rule at the three-child root: keep the most frequent states
        counts = {}
        for w in ks:
            m = sets[w]
            while m:
                low = m & -m
                counts[low] = counts.get(low, 0) + 1
                m ^= low
        best = max(counts.values())
        sets[v] = sum(b for b, c in counts.items() if c == best)
        score += len(ks) - best
    return sets, score, states


def fitch_score(tree, f):
    """Optimal parsimony score of character *f* on *tree* with a witness.

    Bottom-up state sets follow Fitch (Hartigan's rule at the three-child
    root); the top-down pass keeps the parent's state whenever the child's set
    allows it.
    """
    f = _assignment(tree, f)
    if tree.n_leaves == 2:
        a, b = tree.taxa_order
        ext = {tree.vertex(a): f[a], tree.vertex(b): f[b]}
        return FitchResult(int(f[a] != f[b]), ext)
    sets, score, states = _fitch_sets(tree, f)
    order, parent, _, _ = _rooting(tree)
    index = {st: i for i, st in enumerate(states)}
    ext = {}
    for v in order:
        p = parent[v]
        if p is not None and sets[v] >> index[ext[p]] & 1:
            ext[v] = ext[p]
        else:
            ext[v] = min((st for i, st in enumerate(states) if sets[v] >> i & 1), key=str)
    return FitchResult(score, ext)


def parsimony_score(tree, f):
    f = _assignment(tree, f)
    if tree.n_leaves == 2:
        a, b = tree.taxa_order
        return int(f[a] != f[b])
    return _fitch_sets(tree, f)[1]


def bipartition_character(tree, edge):
    """Binary character: "0" on the side of *edge* holding the smallest taxon."""
    u, v = edge
    if not tree.has_edge(u, v):
        raise PreconditionError(f"{edge} is not an edge of the tree")
    side = tree.side_taxa(u, v)
    one = side if tree.taxa_order[0] not in side else tree.taxa - side
    return Character({t: ("1" if t in one else "0") for t in tree.taxa})


def split_character(taxa, side):
    side = frozenset(side)
    first = sort_taxa(taxa)[0]
    if first in side:
        side = frozenset(taxa) - side
    return Character({t: ("1" if t in side else "0") for t in taxa})


def _binary_characters(taxa):
    order = sort_taxa(taxa)
    for bits in product("01", repeat=len(order) - 1):
        yield Character(dict(zip(order, ("0",) + bits)))


def mp_lower_bound(t1, t2, exhaustive=False):
    """Certified lower bound on the parsimony distance (and so on d_TBR).

    Returns ``(value, character)`` where the character attains
    ``|l_f(t1) - l_f(t2)| = value``.  The search covers the bipartition
    characters of both trees; with *exhaustive* it also covers every binary
    character, allowed only for at most ``EXHAUSTIVE_LIMIT`` taxa.
    """
    check_same_taxa(t1, t2)
    best, witness = 0, Character({t: "0" for t in t1.taxa})
    seen = set()

    def consider(ch):
        nonlocal best, witness
        key = frozenset(t for t, s in ch.assignment.items() if s == "1")
        if key in seen:
            return
        seen.add(key)
        gap = abs(parsimony_score(t1, ch) - parsimony_score(t2, ch))
        if gap > best:
            best, witness = gap, ch

    for tree in (t1, t2):
        for m in sorted(tree.nontrivial_split_masks):
            consider(split_character(tree.taxa, tree.taxa_of(m)))
    if exhaustive:
        if t1.n_leaves > EXHAUSTIVE_LIMIT:
            raise PreconditionError(f"exhaustive mode is limited to {EXHAUSTIVE_LIMIT} taxa")
        for ch in _binary_characters(t1.taxa):
            consider(ch)
    return best, witness

