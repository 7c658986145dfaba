"""Tight instances for the 15k - 9 kernel bound, with self-checking certificates.

Two families are built from ladder-shaped generators:

* ``sc`` (k >= 2): subtree and chain reduced, with k common 3-clusters.
  The generator is a ladder on vertex pairs (u_i, v_i), i = 1..k-1, with
  rungs u_i - v_i, rails u_i - u_{i+1} and v_i - v_{i+1}, and one extra
  rung parallel to the first and one parallel to the last.  For k = 2 this
  is the theta graph.
* ``scc`` (k >= 4): additionally cluster reduced.  The generator is a ladder
  with k - 1 rungs and two crossing sides u_1 - v_{k-1} and v_1 - u_{k-1}.

Horizontal sides run left (u) to right (v); rails run top to bottom; the
crossing sides run from their top endpoint.  Taxa are attached in
increasing order along each side.  The two trees are obtained by deleting
one edge inside each long chain ("breaking" it between two blocks of three
leaves) and suppressing.

Every builder re-verifies its output and raises :class:`VerificationError`
if any certificate item fails, so a wrong generator reconstruction can
never be returned silently.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import _graph
from .errors import FormatError, PreconditionError, VerificationError
from .networks import (
    Attachment,
    Generator,
    attach,
    displays,
    embedding_from_deletions,
    is_subdivision_of,
    read_network,
    side_structure,
    write_network,
)
from .parsimony import parsimony_score, split_character
from .reductions import reducedness_report
from .tbr import tbr_distance_maf
from .tree import UnrootedTree, parse_newick, serialize_newick, sort_taxa

SC, SCC = "sc", "scc"


def _u(i):
    return 2 * (i - 1)


def _v(i):
    return 2 * (i - 1) + 1


def sc_generator(k):
    """Ladder generator of the subtree+chain family with named sides."""
    if k < 2:
        raise PreconditionError("the sc family needs k >= 2")
    sides, roles = {}, {}

    def add(role, a, b):
        e = len(sides)
        sides[e] = (a, b)
        roles[role] = e

    add(("top",), _u(1), _v(1))
    for i in range(1, k):
        add(("rung", i), _u(i), _v(i))
    add(("bottom",), _u(k - 1), _v(k - 1))
    for i in range(1, k - 1):
        add(("left", i), _u(i), _u(i + 1))
        add(("right", i), _v(i), _v(i + 1))
    return Generator(2 * (k - 1), sides), roles


def scc_generator(k):
    """Crossed-ladder generator of the cluster-reduced family."""
    if k < 4:
        raise PreconditionError("the scc family needs k >= 4")
    sides, roles = {}, {}

    def add(role, a, b):
        e = len(sides)
        sides[e] = (a, b)
        roles[role] = e

    for i in range(1, k):
        add(("rung", i), _u(i), _v(i))
    for i in range(1, k - 1):
        add(("left", i), _u(i), _u(i + 1))
        add(("right", i), _v(i), _v(i + 1))
    add(("cross-down",), _u(1), _v(k - 1))
    add(("cross-up",), _v(1), _u(k - 1))
    return Generator(2 * (k - 1), sides), roles


def _labels(lo, hi):
    return tuple(str(x) for x in range(lo, hi + 1))


def sc_schedule(k):
    """Side role -> attached taxa, following the construction order."""
    sched = {("top",): _labels(1, 3)}
    for i in range(1, k - 1):
        sched[("rung", i)] = _labels(15 * i - 11, 15 * i - 3)
        sched[("left", i)] = _labels(15 * i - 2, 15 * i)
        sched[("right", i)] = _labels(15 * i + 1, 15 * i + 3)
    sched[("rung", k - 1)] = _labels(15 * k - 26, 15 * k - 18)
    sched[("bottom",)] = _labels(15 * k - 17, 15 * k - 9)
    return sched


def scc_schedule(k):
    sched = {
        ("rung", 1): _labels(1, 6),
        ("left", 1): _labels(7, 12),
        ("right", 1): _labels(13, 18),
    }
    for i in range(2, k - 1):
        sched[("rung", i)] = _labels(15 * i - 11, 15 * i - 6)
        sched[("left", i)] = _labels(15 * i - 5, 15 * i)
        sched[("right", i)] = _labels(15 * i + 1, 15 * i + 3)
    base = 15 * (k - 2)
    sched[("rung", k - 1)] = _labels(base + 4, base + 9)
    sched[("cross-down",)] = _labels(base + 10, base + 15)
    sched[("cross-up",)] = _labels(base + 16, base + 21)
    return sched


def _break_roles(variant, k):
    """Which chains each tree breaks, and after how many leaves."""
    if variant == SC:
        nine = [("rung", i) for i in range(1, k)] + [("bottom",)]
        if k == 2:
            nine = [("rung", 1), ("bottom",)]
        return [(r, 3) for r in nine], [(r, 6) for r in nine]
    first = [("rung", i) for i in range(1, k)] + [("cross-down",)]
    second = [("left", i) for i in range(1, k - 1)] + [("right", 1), ("cross-up",)]
    return [(r, 3) for r in first], [(r, 3) for r in second]


def tree_after_deletions(net, edges):
    """Delete *edges* from *net*, prune, suppress, and read off the tree."""
    adj, labels = net.mutable()
    for u, v in edges:
        _graph.remove_edge(adj, u, v)
    if not _graph.is_connected(adj):
        raise VerificationError("tree-derivation", "deleting the breaking edges disconnects the network")
    _graph.prune_unlabeled_leaves(adj, labels)
    _graph.suppress_degree_two(adj)
    return UnrootedTree._build(adj, labels)


def breaking_edge(net, chain, after):
    """Edge between the parents of leaves ``after`` and ``after + 1``."""
    a, b = net.parent(chain[after - 1]), net.parent(chain[after])
    if not net.has_edge(a, b):
        raise VerificationError("block-boundary", f"no edge between blocks at {chain[after - 1]}|{chain[after]}")
    return (min(a, b), max(a, b))


@dataclass
class TightInstance:
    k: int
    variant: str
    s: UnrootedTree
    s_prime: UnrootedTree
    witness: object
    generator: Generator | None = None
    schedule: dict = field(default_factory=dict)
    breaks: tuple = ((), ())
    certificate: dict = field(default_factory=dict)

    @property
    def taxa(self):
        return self.s.taxa

    def chains(self):
        return [seq for seq in self.schedule.values()]

    def canonical_embeddings(self):
        """Embeddings of s and s' given by the construction's breaking edges."""
        return (embedding_from_deletions(self.witness, self.s, self.breaks[0]),
                embedding_from_deletions(self.witness, self.s_prime, self.breaks[1]))


def _build(variant, k, verify=True):
    gen, roles = (sc_generator if variant == SC else scc_generator)(k)
    sched = (sc_schedule if variant == SC else scc_schedule)(k)
    att = Attachment({roles[r]: seq for r, seq in sched.items()})
    net = attach(gen, att)
    plan_s, plan_sp = _break_roles(variant, k)
    breaks_s = tuple(breaking_edge(net, sched[r], n) for r, n in plan_s)
    breaks_sp = tuple(breaking_edge(net, sched[r], n) for r, n in plan_sp)
    s = tree_after_deletions(net, breaks_s)
    sp = tree_after_deletions(net, breaks_sp)
    inst = TightInstance(k, variant, s, sp, net, gen, sched, (breaks_s, breaks_sp))
    split, scores = find_fitch_certificate(s, sp, k)
    inst.certificate = {
        "leaves": len(s.taxa),
        "reticulation": net.reticulation_number,
        "fitch-split": split,
        "fitch-scores": scores,
        "mp-lower-bound": abs(scores[1] - scores[0]) if scores else None,
        "distance": k,
    }
    if verify:
        report = verify_instance(inst, solver=False)
        if not report.ok:
            first = report.failures[0]
            raise VerificationError(first.name, first.detail, {"report": report})
    return inst


def build_sc(k, verify=True):
    """The subtree+chain reduced tight pair at distance *k* (k >= 2)."""
    if k < 2:
        raise PreconditionError("the sc family needs k >= 2")
    return _build(SC, k, verify)


def build_scc(k, verify=True):
    """The subtree+chain+cluster reduced tight pair at distance *k* (k >= 4)."""
    if k < 4:
        raise PreconditionError("the scc family needs k >= 4")
    return _build(SCC, k, verify)


def build(variant, k, verify=True):
    if variant == SC:
        return build_sc(k, verify)
    if variant == SCC:
        return build_scc(k, verify)
    raise PreconditionError(f"unknown family {variant!r}")


def find_fitch_certificate(s, sp, k):
    """Search the edges of *s* for a split character scoring (1, k+1).

    Returns ``(side, (score_s, score_sp))`` where *side* is the state-1
    taxa, or ``(None, None)`` when no edge works.
    """
    for m in sorted(s.nontrivial_split_masks):
        side = s.taxa_of(m)
        ch = split_character(s.taxa, side)
        a, b = parsimony_score(s, ch), parsimony_score(sp, ch)
        if a == 1 and b == k + 1:
            return tuple(sort_taxa(side)), (a, b)
    return None, None


# ---------------------------------------------------------------------- verification


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    variant: str
    k: int
    checks: list = field(default_factory=list)
    distance: int | None = None
    quantity: str = "d_TBR"

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))
        return passed

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_text(self):
        lines = [f"family {self.variant} k={self.k}"]
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else ""))
        if self.ok:
            lines.append(f"concluded {self.quantity} = {self.distance}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "variant": self.variant,
            "k": self.k,
            "ok": self.ok,
            "distance": self.distance,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def verify_instance(inst, solver=None, display_budget=None):
    """Re-derive every certificate item of *inst* from scratch.

    Checks leaf count, reducedness for the variant, r(witness) = k, that the
    witness displays both trees (by search, with an independent subdivision
    check), and the parsimony certificate; together these pin d_TBR = k.
    With *solver* (default: k <= 3) the MAF solver confirms the distance.
    """
    k, variant = inst.k, inst.variant
    rep = VerificationReport(variant, k)
    s, sp, net = inst.s, inst.s_prime, inst.witness
    if s.taxa != sp.taxa or s.taxa != net.taxa:
        rep.add("leaf-sets", False, "trees and witness have different taxa")
        return rep
    n = len(s.taxa)
    rep.add("leaf-count", n == 15 * k - 9, f"{n} taxa, expected {15 * k - 9}")
    red = reducedness_report(s, sp)
    rep.add("subtree-reduced", not red["subtree"], f"common pendant subtrees {red['subtree'][:3]}")
    rep.add("chain-reduced", not red["chain"], f"common chains of length >= 4 {red['chain'][:3]}")
    if variant == SCC:
        rep.add("cluster-reduced", not red["cluster"], f"common clusters {red['cluster'][:3]}")
    else:
        threes = [c for c in red["cluster"] if len(c) == 3]
        expected = sorted([sorted(_labels(15 * i - 8, 15 * i - 6)) for i in range(1, k)]
                          + [sorted(_labels(15 * k - 14, 15 * k - 12))])
        rep.add("cluster-pattern", sorted(sorted(c) for c in threes) == expected
                and len(red["cluster"]) == k, f"{len(red['cluster'])} common clusters")
    r = net.reticulation_number
    rep.add("reticulation-number", r == k, f"r(witness) = {r}")
    for name, tree in (("display-s", s), ("display-s-prime", sp)):
        res = displays(net, tree, budget=display_budget)
        ok = bool(res) and is_subdivision_of(net, res.embedding.subdivision, tree)
        rep.add(name, ok, f"search nodes {res.nodes}")
    split = inst.certificate.get("fitch-split")
    if split:
        ch = split_character(s.taxa, split)
        scores = (parsimony_score(s, ch), parsimony_score(sp, ch))
    else:
        split, scores = find_fitch_certificate(s, sp, k)
    ok = scores is not None and scores[0] == 1 and scores[1] == k + 1
    rep.add("fitch-certificate", ok, f"scores {scores}")
    if rep.ok:
        lower = abs(scores[1] - scores[0])
        rep.add("distance-sandwich", lower == k == r, f"{lower} <= d_TBR <= {r}")
        rep.distance = k
    if solver is None:
        solver = k <= 3
    if solver:
        res = tbr_distance_maf(s, sp)
        rep.add("maf-distance", res.exact and res.distance == k, f"solver {res.distance}")
    return rep


# ---------------------------------------------------------------------- files


def certificate_text(inst):
    c = inst.certificate
    lines = ["TIGHT-INSTANCE v1", f"variant {inst.variant}", f"k {inst.k}",
             f"leaves {c.get('leaves')}", f"reticulation {c.get('reticulation')}"]
    if c.get("fitch-split"):
        lines.append("fitch-split " + ",".join(c["fitch-split"]))
        lines.append(f"fitch-scores {c['fitch-scores'][0]} {c['fitch-scores'][1]}")
        lines.append(f"mp-lower-bound {c['mp-lower-bound']}")
    lines.append(f"distance {c.get('distance')}")
    return "\n".join(lines) + "\n"


def parse_certificate(text):
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "TIGHT-INSTANCE v1":
        raise FormatError("missing 'TIGHT-INSTANCE v1' header", 1)
    out = {}
    for i, line in enumerate(lines[1:], 2):
        key, _, val = line.partition(" ")
        if key in ("k", "leaves", "reticulation", "mp-lower-bound", "distance"):
            try:
                out[key] = int(val)
            except ValueError:
                raise FormatError(f"bad integer for {key}", i) from None
        elif key == "variant":
            out[key] = val
        elif key == "fitch-split":
            out[key] = tuple(val.split(","))
        elif key == "fitch-scores":
            out[key] = tuple(int(x) for x in val.split())
        else:
            raise FormatError(f"unknown key {key!r}", i)
    if "k" not in out or out.get("variant") not in (SC, SCC):
        raise FormatError("certificate needs 'variant' (sc|scc) and 'k'")
    return out


def export_instance(inst, directory):
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "s.nwk"), "w", encoding="utf-8") as fh:
        fh.write(serialize_newick(inst.s) + "\n")
    with open(os.path.join(directory, "s_prime.nwk"), "w", encoding="utf-8") as fh:
        fh.write(serialize_newick(inst.s_prime) + "\n")
    write_network(os.path.join(directory, "witness.unet"), inst.witness)
    with open(os.path.join(directory, "certificate.txt"), "w", encoding="utf-8") as fh:
        fh.write(certificate_text(inst))


def load_instance(directory):
    def read(name):
        with open(os.path.join(directory, name), encoding="utf-8") as fh:
            return fh.read()

    cert = parse_certificate(read("certificate.txt"))
    s = parse_newick(read("s.nwk").strip())
    sp = parse_newick(read("s_prime.nwk").strip())
    net = read_network(os.path.join(directory, "witness.unet"))
    return TightInstance(cert["k"], cert["variant"], s, sp, net, certificate=cert)


def witness_side_structure(inst):
    return side_structure(inst.witness)


__all__ = [
    "SC",
    "SCC",
    "TightInstance",
    "VerificationReport",
    "build",
    "build_sc",
    "build_scc",
    "export_instance",
    "find_fitch_certificate",
    "load_instance",
    "sc_generator",
    "scc_generator",
    "verify_instance",
]
