"""Acceptance criteria 1-11, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py``; the summary lines appear in
the "acceptance criteria" section at the end of the run.
"""

import functools
import random
import time

import pytest

import conftest
from conftest import taxa
from oracles import all_labelled_trees, brute_force_scores
from test_rooted import REDUCEDNESS
from tbrkernel.errors import PreconditionError, VerificationError
from tbrkernel.families import SC, SCC, build, build_sc, build_scc, verify_instance
from tbrkernel.networks import (
    chain_breakpoints,
    chain_cap,
    count_sides,
    cut_counts,
    enumerate_generators,
    network_chains,
)
from tbrkernel.parsimony import parsimony_score
from tbrkernel.reductions import (
    CHAIN,
    SUBTREE,
    apply_chain_step,
    apply_subtree_step,
    is_reduced,
    kernel_bound,
    kernelize,
)
from tbrkernel.rooted import (
    CLUSTER_REDUCED,
    PLAIN,
    RootedCandidate,
    RootedNetwork,
    check_rooted_bound,
    common_pendant_subtrees,
    common_rooted_chains,
    common_rooted_clusters,
    example_candidate,
    is_rooted_chain,
    parse_rooted_newick,
    rooted_is_reduced,
    verify_rooted_family,
)
from tbrkernel.tbr import random_tbr_walk, random_tree, tbr_distance_bfs, tbr_distance_maf
from tbrkernel.tree import parse_newick
from tbrkernel.uhn import uhn_exact


def criterion(number, title):
    """Record PASS/FAIL for the wrapped test under the criterion number."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                conftest.CRITERIA[number] = f"criterion {number:2d} FAIL  {title}: {type(exc).__name__}: {exc}"
                raise
            took = time.perf_counter() - start
            note = f" ({detail})" if detail else ""
            conftest.CRITERIA[number] = f"criterion {number:2d} PASS  {title}{note} [{took:.1f}s]"

        return run

    return wrap


def _pair_stream(seed, n_range, steps_range):
    rng = random.Random(seed)
    while True:
        n = rng.randint(*n_range)
        t1 = random_tree(taxa(n), rng)
        yield t1, random_tbr_walk(t1, rng.randint(*steps_range), rng)


@criterion(1, "SC family k=2..6 certified tight")
def test_sc_family():
    start = time.perf_counter()
    sizes = []
    for k in range(2, 7):
        inst = build_sc(k)
        rep = verify_instance(inst, solver=False)
        assert rep.ok, rep.to_text()
        names = {c.name for c in rep.checks}
        assert {"subtree-reduced", "chain-reduced", "display-s", "display-s-prime", "fitch-certificate"} <= names
        assert len(inst.taxa) == 15 * k - 9
        assert inst.witness.reticulation_number == k
        assert inst.certificate["fitch-scores"] == (1, k + 1)
        assert rep.distance == k
        sizes.append(len(inst.taxa))
    assert sizes == [21, 36, 51, 66, 81]
    elapsed = time.perf_counter() - start
    assert elapsed < 60
    return f"taxa {sizes}"


@criterion(2, "SCC family k=4..6 certified tight")
def test_scc_family():
    start = time.perf_counter()
    sizes = []
    for k in range(4, 7):
        inst = build_scc(k)
        rep = verify_instance(inst, solver=False)
        assert rep.ok, rep.to_text()
        assert any(c.name == "cluster-reduced" and c.passed for c in rep.checks)
        assert is_reduced(inst.s, inst.s_prime, ("subtree", "chain", "cluster"))
        assert len(inst.taxa) == 15 * k - 9
        assert inst.witness.reticulation_number == k
        assert rep.distance == k
        sizes.append(len(inst.taxa))
    assert time.perf_counter() - start < 60
    return f"taxa {sizes}"


@criterion(3, "MAF solver gives d_TBR = k on SC k=2,3")
def test_solver_on_sc():
    nodes = []
    for k in (2, 3):
        inst = build_sc(k)
        res = tbr_distance_maf(inst.s, inst.s_prime, budget=10**7)
        assert res.exact and res.distance == k
        nodes.append(res.nodes)
    return f"branching nodes {nodes}"


@criterion(4, "kernel bound 15k-9 on 200 solver-certified kernels")
def test_kernel_bound():
    seen = {2: 0, 3: 0, 4: 0}
    total = 0
    for t1, t2 in _pair_stream(404, (6, 12), (2, 5)):
        d = tbr_distance_maf(t1, t2).distance
        if d not in seen:
            continue
        s1, s2, _ = kernelize(t1, t2, (SUBTREE, CHAIN))
        assert is_reduced(s1, s2, (SUBTREE, CHAIN))
        assert tbr_distance_maf(s1, s2).distance == d
        assert s1.n_leaves <= kernel_bound(d) == 15 * d - 9
        seen[d] += 1
        total += 1
        if total >= 200 and all(seen.values()):
            break
    return f"instances by k {seen}"


@criterion(5, "each reduction step preserves d_TBR on 200 pairs")
def test_reduction_safety():
    pairs = steps = chain_steps = 0
    for t1, t2 in _pair_stream(505, (4, 10), (1, 4)):
        target = tbr_distance_maf(t1, t2).distance
        s1, s2, trace = kernelize(t1, t2, (SUBTREE, CHAIN))
        a, b = t1, t2
        for step in trace.steps:
            if step.kind == SUBTREE:
                a, b = apply_subtree_step(a, b, step.removed, step.introduced[0])
            else:
                a, b = apply_chain_step(a, b, step.removed, step.introduced)
                chain_steps += 1
            assert tbr_distance_maf(a, b).distance == target
            steps += 1
        assert (a, b) == (s1, s2)
        assert tbr_distance_maf(s1, s2).distance == target
        pairs += 1
        if pairs >= 200 and chain_steps >= 20:
            break
    return f"{pairs} pairs, {steps} steps, {chain_steps} chain steps"


@criterion(6, "generator side and vertex counts")
def test_generator_counts():
    assert len(enumerate_generators(1)) == 1
    counts = []
    for k in (2, 3, 4):
        gens = enumerate_generators(k)
        for g in gens:
            assert count_sides(g) == 3 * (k - 1)
            assert g.n_vertices == 2 * (k - 1)
        counts.append(len(gens))
    return f"generators for k=2,3,4: {counts}"


@criterion(7, "exact h^u equals d_TBR on 50 pairs with n <= 6")
def test_uhn_equals_tbr():
    checked = 0
    by_d = {}
    for t1, t2 in _pair_stream(707, (4, 6), (0, 3)):
        r, net = uhn_exact(t1, t2)
        d = tbr_distance_bfs(t1, t2)
        assert r == d
        assert net.reticulation_number == r
        by_d[d] = by_d.get(d, 0) + 1
        checked += 1
        if checked >= 50 and by_d.get(2, 0) >= 5:
            break
    return f"{checked} pairs, by distance {dict(sorted(by_d.items()))}"


def _family_instances():
    return [build(SC, k) for k in range(2, 7)] + [build(SCC, k) for k in range(4, 7)]


@criterion(8, "cut counts sum to 2k; no count 2 on SCC")
def test_cut_counts():
    for inst in _family_instances():
        counts = cut_counts(inst.witness, *inst.canonical_embeddings())
        assert sum(counts.values()) == 2 * inst.k
        if inst.variant == SCC:
            assert 2 not in counts.values()
    return "8 witnesses"


@criterion(9, "chain caps by breakpoint count")
def test_chain_caps():
    chains = 0
    for inst in _family_instances():
        for chain in network_chains(inst.witness).values():
            bp = chain_breakpoints(inst.witness, chain, inst.s, inst.s_prime)
            assert len(chain) <= chain_cap(bp.count, cluster_reduced=inst.variant == SCC)
            chains += 1
    return f"{chains} chains"


@criterion(10, "Fitch equals brute force on all trees n <= 8, 500 characters")
def test_fitch_oracle():
    rng = random.Random(1010)
    checked = 0
    for n in range(3, 9):
        names = taxa(n)
        # 250 binary and 250 ternary characters, shared by every tree on n taxa
        groups = []
        for n_states in (2, 3):
            cols = {t: [rng.randrange(n_states) for _ in range(250)] for t in names}
            groups.append((n_states, cols))
        for text in all_labelled_trees(names):
            tree = parse_newick(text)
            for n_states, cols in groups:
                expected = brute_force_scores(tree, cols, n_states)
                for j in range(250):
                    f = {t: cols[t][j] for t in names}
                    assert parsimony_score(tree, f) == expected[j], (text, f)
                    checked += 1
    return f"{checked} tree-character pairs, 0 mismatches"


ROOTED_CHAIN_CASES = [
    ("((((1,2),3),4),5);", ("1", "2", "3", "4", "5"), True),
    ("((((1,2),3),4),5);", ("1", "3", "2"), False),
    ("((1,(2,3)),4);", ("2", "1", "4"), True),
    ("((1,2),(3,4));", ("1", "2", "3"), False),
]
BOUND_PAIRS = {
    # (taxa, rules) -> reduced rooted pair
    6: ("((3,2),(5,(4,(6,1))));", "((6,(1,2)),(5,(3,4)));"),
    14: ("(8,(9,(((((7,2),((10,(11,14)),12)),(1,4)),((5,6),13)),3)));",
         "(((((2,5),(8,13)),(12,9)),((((10,4),1),(3,11)),(7,6))),14);"),
    15: ("(((5,4),8),(((9,10),(((2,15),14),(11,12))),((6,3),(7,(1,13)))));",
         "(((6,8),((2,(14,(5,(7,((10,11),12))))),((13,4),9))),((15,3),1));"),
    16: ("((4,(7,(8,12))),(((((13,11),((2,6),10)),14),(1,15)),(5,(3,(16,9)))));",
         "(((((16,11),6),((3,14),(13,8))),((2,(12,15)),(9,7))),((1,10),(5,4)));"),
    17: ("((17,7),(10,((3,5),(((13,8),(((2,4),14),(11,(15,12)))),((16,9),(6,1))))));",
         "(((10,5),(7,1)),((14,3),((17,(15,(11,(9,8)))),((4,16),((13,2),(12,6))))));"),
}


def _bound_holds(n, k, cluster):
    t1, t2 = (parse_rooted_newick(x) for x in BOUND_PAIRS[n])
    try:
        check_rooted_bound(t1, t2, k, cluster_reduced=cluster)
    except VerificationError:
        return False
    return True


@criterion(11, "rooted reducedness corpus, 9k-2 / 9k-4 bounds, candidate and tampers")
def test_rooted_bounds():
    cases = 0
    for a, b, subtrees, chain, clusters in REDUCEDNESS:
        t1, t2 = parse_rooted_newick(a), parse_rooted_newick(b)
        assert common_pendant_subtrees(t1, t2) == subtrees
        assert bool(common_rooted_chains(t1, t2)) == chain
        assert common_rooted_clusters(t1, t2) == clusters
        cases += 3
    for tree, leaves, expected in ROOTED_CHAIN_CASES:
        assert is_rooted_chain(parse_rooted_newick(tree), leaves) == expected
        cases += 1
    assert cases >= 20

    # the plain bound 9k - 2 is met exactly and never exceeded
    cand = example_candidate(PLAIN)
    assert check_rooted_bound(cand.s, cand.s_prime, 1).slack == 0
    p8 = REDUCEDNESS[-1]
    with pytest.raises(VerificationError):
        check_rooted_bound(parse_rooted_newick(p8[0]), parse_rooted_newick(p8[1]), 1)
    assert _bound_holds(16, 2, False) and not _bound_holds(17, 2, False)
    # the cluster-reduced bound 9k - 4
    small = example_candidate(CLUSTER_REDUCED)
    assert check_rooted_bound(small.s, small.s_prime, 1, cluster_reduced=True).slack == 0
    assert not _bound_holds(6, 1, True)
    assert _bound_holds(14, 2, True) and not _bound_holds(15, 2, True)
    with pytest.raises(PreconditionError):
        t = parse_rooted_newick("((1,2),(3,4));")
        check_rooted_bound(t, t, 1)

    # candidates certify; each tampered variant is rejected
    for variant in (PLAIN, CLUSTER_REDUCED):
        rep = verify_rooted_family(example_candidate(variant))
        assert rep.ok, rep.to_text()
    c = example_candidate(PLAIN)
    tampered = [
        RootedCandidate(c.s, parse_rooted_newick("(1,(6,(((7,4),2),(3,5))));"), c.network, 1, PLAIN),
        RootedCandidate(c.s, c.s_prime, c.network, 2, PLAIN),
        RootedCandidate(c.s, c.s_prime, c.network, 1, CLUSTER_REDUCED),
        RootedCandidate(c.s, c.s, c.network, 1, PLAIN),
        RootedCandidate(c.s, c.s_prime, RootedNetwork.from_text(c.s.to_text()), 1, PLAIN),
    ]
    for bad in tampered:
        assert not verify_rooted_family(bad).ok
    # a rooted pair that is not reduced cannot be certified either
    assert not rooted_is_reduced(parse_rooted_newick("((1,2),3);"), parse_rooted_newick("((1,2),3);"))
    return f"{cases} predicate cases, {len(tampered)} tampers rejected"


def test_all_criteria_reported():
    """Runs last in this module: every criterion produced a line."""
    if len(conftest.CRITERIA) < 11:
        pytest.skip("run the whole acceptance module to collect every criterion")
    assert sorted(conftest.CRITERIA) == list(range(1, 12))
