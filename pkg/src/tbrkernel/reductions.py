"""Subtree, chain and cluster reductions with an auditable, replayable trace."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import FormatError, PreconditionError
from .tree import (
    check_same_taxa,
    common_nontrivial_clusters,
    maximal_common_chains,
    maximal_common_pendant_subtrees,
    sort_taxa,
)

SUBTREE, CHAIN, CLUSTER = "subtree", "chain", "cluster"
ALL_RULES = (SUBTREE, CHAIN, CLUSTER)
DEFAULT_RULES = (SUBTREE, CHAIN)
_CHAIN_FLAGS = ("head1", "tail1", "head2", "tail2", "reversed")


def parse_rules(rules):
    if isinstance(rules, str):
        rules = [r.strip() for r in rules.split(",") if r.strip()]
    rules = frozenset(rules)
    bad = rules - set(ALL_RULES)
    if bad:
        raise ValueError(f"unknown reduction rules {sorted(bad)}")
    return rules


@dataclass
class ReductionStep:
    """One application of a reduction rule.

    For chain steps ``flags`` records the pendant ends in each tree and
    whether the second tree meets the chain reversed.  For cluster steps
    ``parts`` holds the split-off pair (the cluster side with its marker).
    """

    kind: str
    removed: tuple
    introduced: tuple
    flags: dict = field(default_factory=dict)
    parts: tuple = ()

    def to_line(self):
        flags = ";".join(f"{k}={int(v)}" for k, v in self.flags.items()) or "-"
        return f"{self.kind}\t{','.join(self.removed)}\t{','.join(self.introduced)}\t{flags}"

    @classmethod
    def from_line(cls, line, lineno=None):
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 4 or parts[0] not in ALL_RULES:
            raise FormatError("expected 'kind<TAB>removed<TAB>introduced<TAB>flags'", lineno)
        flags = {}
        if parts[3] != "-":
            for item in parts[3].split(";"):
                k, _, v = item.partition("=")
                flags[k] = bool(int(v))
        return cls(parts[0], tuple(parts[1].split(",")), tuple(parts[2].split(",")), flags)


@dataclass
class ReductionTrace:
    steps: list = field(default_factory=list)
    counter: int = 0

    def fresh(self, taken, prefix="$R"):
        while True:
            self.counter += 1
            label = f"{prefix}{self.counter}"
            if label not in taken:
                return label

    def __len__(self):
        return len(self.steps)

    def to_text(self):
        return "TRACE v1\n" + "".join(s.to_line() + "\n" for s in self.steps)

    @classmethod
    def from_text(cls, text):
        lines = text.splitlines()
        if not lines or lines[0].strip() != "TRACE v1":
            raise FormatError("missing 'TRACE v1' header", 1)
        steps = [ReductionStep.from_line(l, i) for i, l in enumerate(lines[1:], 2) if l.strip()]
        return cls(steps, 0)

    def count(self, kind):
        return sum(1 for s in self.steps if s.kind == kind)


# ---------------------------------------------------------------------- single steps


def apply_subtree_step(t1, t2, ys, label):
    return t1.replace_cluster(ys, label), t2.replace_cluster(ys, label)


def apply_chain_step(t1, t2, leaves, labels):
    """Replace chain *leaves* by the 3-chain *labels* in both trees.

    Deleting leaves 4..n and renaming leaves 1..3 keeps the pendant ends and
    the direction of the chain in each tree exactly as they were.
    """
    keep = t1.taxa - frozenset(leaves[3:])
    mapping = dict(zip(leaves[:3], labels))
    return t1.restrict(keep).relabel(mapping), t2.restrict(keep).relabel(mapping)


def _subtree_reduced(t1, t2):
    return not maximal_common_pendant_subtrees(t1, t2)


def _chain_reduced(t1, t2):
    return not maximal_common_chains(t1, t2, min_len=4)


def reduce_subtrees(t1, t2, trace=None):
    """Collapse maximal common pendant subtrees until none remain."""
    check_same_taxa(t1, t2)
    trace = trace if trace is not None else ReductionTrace()
    while True:
        found = maximal_common_pendant_subtrees(t1, t2)
        if not found:
            return t1, t2
        for ys in found:
            label = trace.fresh(t1.taxa)
            t1, t2 = apply_subtree_step(t1, t2, ys, label)
            trace.steps.append(ReductionStep(SUBTREE, tuple(sort_taxa(ys)), (label,)))


def reduce_chains(t1, t2, trace=None):
    """Replace maximal common n-chains (n >= 4) by fresh 3-chains.

    The pair must already be subtree reduced: a chain pendant in both trees
    is a common pendant subtree and belongs to the other rule.
    """
    check_same_taxa(t1, t2)
    if not _subtree_reduced(t1, t2):
        raise PreconditionError("chain reduction requires a subtree-reduced pair")
    trace = trace if trace is not None else ReductionTrace()
    return _chain_pass(t1, t2, trace)


def cluster_decompose(t1, t2, cluster=None, marker=None):
    """Split the pair along a common nontrivial cluster Y.

    Returns ``[(t1|Y + m, t2|Y + m), (t1/Y, t2/Y)]`` where ``m`` is a marker
    leaf standing for the other side in each part.  Without *cluster* the
    first common cluster (smallest, then taxon order) is used.
    """
    check_same_taxa(t1, t2)
    common = common_nontrivial_clusters(t1, t2)
    if cluster is None:
        if not common:
            raise PreconditionError("the trees have no common nontrivial cluster")
        cluster = common[0]
    cluster = frozenset(cluster)
    if not (2 <= len(cluster) <= t1.n_leaves - 2 and t1.is_cluster(cluster) and t2.is_cluster(cluster)):
        raise PreconditionError(f"{sort_taxa(cluster)} is not a common nontrivial cluster")
    if marker is None:
        marker = ReductionTrace().fresh(t1.taxa, prefix="$C")
    rest = t1.taxa - cluster
    inside = (t1.replace_cluster(rest, marker), t2.replace_cluster(rest, marker))
    outside = (t1.replace_cluster(cluster, marker), t2.replace_cluster(cluster, marker))
    return [inside, outside]


def cluster_reduce_all(t1, t2):
    """Recursively decompose into cluster-reduced pairs."""
    todo = [(t1, t2)]
    out = []
    counter = ReductionTrace()
    while todo:
        a, b = todo.pop()
        if not common_nontrivial_clusters(a, b):
            out.append((a, b))
            continue
        marker = counter.fresh(a.taxa, prefix="$C")
        todo.extend(reversed(cluster_decompose(a, b, marker=marker)))
    return out


# ---------------------------------------------------------------------- fixpoint


def kernelize(t1, t2, rules=DEFAULT_RULES):
    """Apply the enabled rules to a global fixpoint.

    Order: subtree to fixpoint, then chain, repeated until neither fires;
    then, if enabled, one cluster split (the split-off side is kept in the
    step's ``parts``) followed by another round on the remainder.

    Returns ``(s1, s2, trace)``.
    """
    check_same_taxa(t1, t2)
    rules = parse_rules(rules)
    trace = ReductionTrace()
    while True:
        while True:
            before = len(trace)
            if SUBTREE in rules:
                t1, t2 = reduce_subtrees(t1, t2, trace)
            if CHAIN in rules and (SUBTREE not in rules or _subtree_reduced(t1, t2)):
                t1, t2 = _chain_pass(t1, t2, trace)
            if len(trace) == before:
                break
        if CLUSTER not in rules:
            return t1, t2, trace
        common = common_nontrivial_clusters(t1, t2)
        if not common:
            return t1, t2, trace
        ys = common[0]
        marker = trace.fresh(t1.taxa, prefix="$C")
        inside, outside = cluster_decompose(t1, t2, ys, marker)
        trace.steps.append(ReductionStep(CLUSTER, tuple(sort_taxa(ys)), (marker,), parts=(inside,)))
        t1, t2 = outside


def _chain_pass(t1, t2, trace):
    """Chain rule without the subtree precondition (used inside kernelize)."""
    chains = maximal_common_chains(t1, t2, min_len=4)
    while chains:
        c = chains[0]
        labels = []
        for _ in range(3):
            labels.append(trace.fresh(t1.taxa | set(labels)))
        flags = {
            "head1": c.first.pendant_head,
            "tail1": c.first.pendant_tail,
            "head2": c.second.pendant_head,
            "tail2": c.second.pendant_tail,
            "reversed": c.reversed_in_second,
        }
        t1, t2 = apply_chain_step(t1, t2, c.leaves, labels)
        trace.steps.append(ReductionStep(CHAIN, tuple(c.leaves), tuple(labels), flags))
        chains = maximal_common_chains(t1, t2, min_len=4)
    return t1, t2


def kernelize_components(t1, t2, rules=ALL_RULES):
    """Kernelize, recursing into every cluster split; returns reduced pairs."""
    rules = parse_rules(rules)
    s1, s2, trace = kernelize(t1, t2, rules)
    out = [(s1, s2)]
    for step in trace.steps:
        for a, b in step.parts:
            out.extend(kernelize_components(a, b, rules))
    return out


def is_reduced(t1, t2, rules=DEFAULT_RULES):
    """True iff none of the enabled rules applies to the pair."""
    check_same_taxa(t1, t2)
    rules = parse_rules(rules)
    if SUBTREE in rules and not _subtree_reduced(t1, t2):
        return False
    if CHAIN in rules and not _chain_reduced(t1, t2):
        return False
    if CLUSTER in rules and common_nontrivial_clusters(t1, t2):
        return False
    return True


def reducedness_report(t1, t2):
    """Which rules still apply, with the offending structures."""
    return {
        SUBTREE: [sort_taxa(y) for y in maximal_common_pendant_subtrees(t1, t2)],
        CHAIN: [list(c.leaves) for c in maximal_common_chains(t1, t2, min_len=4)],
        CLUSTER: [sort_taxa(y) for y in common_nontrivial_clusters(t1, t2)],
    }


def replay(t1, t2, trace):
    """Re-apply recorded steps to the original pair."""
    for step in trace.steps if isinstance(trace, ReductionTrace) else trace:
        if step.kind == SUBTREE:
            t1, t2 = apply_subtree_step(t1, t2, step.removed, step.introduced[0])
        elif step.kind == CHAIN:
            t1, t2 = apply_chain_step(t1, t2, step.removed, step.introduced)
        else:
            t1, t2 = t1.replace_cluster(step.removed, step.introduced[0]), t2.replace_cluster(
                step.removed, step.introduced[0])
    return t1, t2


def kernel_bound(k):
    """Largest leaf count of a subtree+chain reduced pair at TBR distance k >= 2."""
    return 15 * k - 9


def check_kernel_bound(n_leaves, k):
    """True when the reduced size respects the bound (vacuous for k < 2)."""
    return k < 2 or n_leaves <= kernel_bound(k)
