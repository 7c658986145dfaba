import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_rooted_network, random_rooted_newick, rooted_trees
from oracles import brute_rooted_displays
from tbrkernel.errors import BudgetExceeded, FormatError, NewickError, PreconditionError, VerificationError
from tbrkernel.networks import UnrootedNetwork
from tbrkernel.rooted import (
    CLUSTER_REDUCED,
    PLAIN,
    RootedCandidate,
    RootedNetwork,
    check_rooted_bound,
    common_pendant_subtrees,
    common_rooted_chains,
    common_rooted_clusters,
    displayed_trees,
    example_candidate,
    export_candidate,
    is_rooted_chain,
    load_candidate,
    parse_rooted_newick,
    rooted_displays,
    rooted_is_reduced,
    rooted_kernel_bound,
    rooted_three_chains,
    serialize_rooted_newick,
    unroot,
    unroot_network,
    verify_rooted_family,
)
from tbrkernel.tree import parse_newick


def rt(text):
    return parse_rooted_newick(text)


# (t1, t2, common pendant subtrees, has common 3-chain, common clusters)
REDUCEDNESS = [
    ("((1,2),(3,4));", "((1,2),(3,4));", [["1", "2"], ["3", "4"]], False, [["1", "2"], ["3", "4"]]),
    ("((1,2),(3,4));", "((1,3),(2,4));", [], False, []),
    ("(((1,2),3),4);", "(((1,2),4),3);", [["1", "2"]], False, [["1", "2"]]),
    ("((1,(2,3)),4);", "(((2,3),1),4);", [["1", "2", "3"]], True, [["2", "3"], ["1", "2", "3"]]),
    ("(((1,2),3),(4,5));", "((1,(2,3)),(4,5));", [["4", "5"]], False, [["4", "5"], ["1", "2", "3"]]),
    ("((((4,1),2),3),5);", "((((5,1),2),3),4);", [], True, []),
    ("(((1,2),3),((4,5),6));", "(((1,3),2),((4,6),5));", [], False, [["1", "2", "3"], ["4", "5", "6"]]),
    ("((1,2),3);", "((1,3),2);", [], False, []),
    ("((1,2),3);", "((2,1),3);", [["1", "2"]], True, [["1", "2"]]),
    ("(((1,2),(3,4)),5);", "(((1,3),(2,4)),5);", [], False, [["1", "2", "3", "4"]]),
    ("((((1,2),3),4),5);", "((((2,1),3),5),4);", [["1", "2", "3"]], True, [["1", "2"], ["1", "2", "3"]]),
    ("((7,8),((5,2),(6,(1,(4,3)))));", "((8,(5,4)),((1,7),((6,3),2)));", [], False, []),
]


class TestReducedness:
    @pytest.mark.parametrize("a,b,subtrees,chain,clusters", REDUCEDNESS)
    def test_pendant_subtrees(self, a, b, subtrees, chain, clusters):
        assert common_pendant_subtrees(rt(a), rt(b)) == subtrees

    @pytest.mark.parametrize("a,b,subtrees,chain,clusters", REDUCEDNESS)
    def test_chains(self, a, b, subtrees, chain, clusters):
        assert bool(common_rooted_chains(rt(a), rt(b))) == chain

    @pytest.mark.parametrize("a,b,subtrees,chain,clusters", REDUCEDNESS)
    def test_clusters_and_verdict(self, a, b, subtrees, chain, clusters):
        t1, t2 = rt(a), rt(b)
        assert common_rooted_clusters(t1, t2) == clusters
        assert rooted_is_reduced(t1, t2) == (not subtrees and not chain)
        assert rooted_is_reduced(t1, t2, "subtree,chain,cluster") == (not subtrees and not chain and not clusters)

    @pytest.mark.parametrize(
        "tree,chain,expected",
        [
            ("((((1,2),3),4),5);", ("1", "2", "3", "4", "5"), True),
            ("((((1,2),3),4),5);", ("2", "1", "3"), True),
            ("((((1,2),3),4),5);", ("1", "3", "2"), False),
            ("((1,2),(3,4));", ("1", "2", "3"), False),
            ("((1,(2,3)),4);", ("2", "1", "4"), True),
            ("((1,(2,3)),4);", ("1", "1", "4"), False),
            ("((1,(2,3)),4);", ("1",), False),
            ("((1,(2,3)),4);", ("1", "9"), False),
        ],
    )
    def test_is_rooted_chain(self, tree, chain, expected):
        assert is_rooted_chain(rt(tree), chain) == expected

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            rooted_is_reduced(rt("((1,2),3);"), rt("((1,3),2);"), "subtree,magic")


def _rooted_subtree_text(tree, v):
    if tree.is_leaf(v):
        return tree.label(v)
    return "(" + ",".join(sorted(_rooted_subtree_text(tree, c) for c in tree.children(v))) + ")"


@given(rooted_trees(3, 9))
def test_three_chains_match_definition(t):
    import itertools

    brute = sorted((c for c in itertools.permutations(sorted(t.taxa), 3) if is_rooted_chain(t, c)))
    assert sorted(rooted_three_chains(t)) == brute


@given(rooted_trees(3, 8), st.integers(0, 2**32 - 1))
def test_pendant_subtrees_match_text_comparison(t1, seed):
    t2 = rt(random_rooted_newick(sorted(t1.taxa), random.Random(seed)))
    shapes2 = {_rooted_subtree_text(t2, v) for v in t2.vertices if v != t2.root}
    common = [t1.cluster_map[v] for v in t1.vertices
              if v != t1.root and not t1.is_leaf(v) and _rooted_subtree_text(t1, v) in shapes2]
    maximal = {frozenset(c) for c in common if not any(c < d for d in common)}
    assert {frozenset(c) for c in common_pendant_subtrees(t1, t2)} == maximal


class TestNewickAndText:
    def test_round_trip(self):
        t = rt("((3,(1,2)),(5,4));")
        assert serialize_rooted_newick(t) == "(((1,2),3),(4,5));"
        assert rt(serialize_rooted_newick(t)) == t

    @given(rooted_trees(2, 12))
    def test_serialize_parse_identity(self, t):
        assert rt(serialize_rooted_newick(t)) == t

    @pytest.mark.parametrize("bad", ["(1,2,3);", "((1,2),(3,4)", "((1,1),2);", "(1);"])
    def test_malformed(self, bad):
        with pytest.raises(NewickError):
            rt(bad)

    def test_rnet_round_trip(self):
        net = example_candidate(PLAIN).network
        back = RootedNetwork.from_text(net.to_text())
        assert back.to_text() == net.to_text()
        assert back.reticulation_number == net.reticulation_number

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "RNET v1\nE 0 1\n",
            "RNET v1\nV 3\nE 0 1\nE 0 5\nL 1 a\nL 2 b\n",
            "RNET v1\nV 3\nE 0 1\nE 0 2\nL 1 a\n",
            "RNET v1\nV 3\nE 0 1\nE 1 2\nL 2 a\n",
            "RNET v1\nV 3\nE 0 1\nE 0 2\nE 2 0\nL 1 a\nL 2 b\n",
            "RNET v1\nV 3\nX 0 1\n",
        ],
    )
    def test_bad_rnet(self, text):
        with pytest.raises(FormatError):
            RootedNetwork.from_text(text)


class TestDisplay:
    @pytest.mark.parametrize("variant", [PLAIN, CLUSTER_REDUCED])
    def test_examples_against_brute_force(self, variant):
        cand = example_candidate(variant)
        for t in (cand.s, cand.s_prime):
            assert rooted_displays(cand.network, t)
            assert brute_rooted_displays(cand.network, t)

    def test_budget(self):
        net = example_candidate(PLAIN).network
        with pytest.raises(BudgetExceeded):
            rooted_displays(net, example_candidate(PLAIN).s, budget=1)

    def test_taxa_mismatch(self):
        net = example_candidate(PLAIN).network
        with pytest.raises(PreconditionError):
            rooted_displays(net, rt("((1,2),3);"))


@given(rooted_trees(3, 7), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_display_matches_edge_deletion(t, k, seed):
    rng = random.Random(seed)
    net = random_rooted_network(t, k, rng)
    assert net.reticulation_number == k
    shown = displayed_trees(net)
    assert t in shown
    for tree in shown:
        assert brute_rooted_displays(net, tree)
    other = rt(random_rooted_newick(sorted(t.taxa), rng))
    assert bool(rooted_displays(net, other)) == brute_rooted_displays(net, other)


class TestUnroot:
    def test_tree(self):
        assert unroot(rt("((1,2),(3,4));")) == parse_newick("((1,2),(3,4));")
        assert unroot(rt("(1,(2,(3,4)));")) == parse_newick("((1,2),(3,4));")

    @pytest.mark.parametrize("variant", [PLAIN, CLUSTER_REDUCED])
    def test_network_keeps_reticulation_number(self, variant):
        cand = example_candidate(variant)
        u = unroot_network(cand.network)
        assert isinstance(u, UnrootedNetwork)
        assert u.reticulation_number == cand.network.reticulation_number

    def test_parallel_edges_rejected(self):
        net = RootedNetwork.from_edges([(0, 1), (0, 2), (1, 2), (1, 3), (2, 4)], {3: "a", 4: "b"})
        with pytest.raises(VerificationError):
            unroot_network(net)


class TestBounds:
    def test_values(self):
        assert [rooted_kernel_bound(k) for k in (1, 2, 3)] == [7, 16, 25]
        assert [rooted_kernel_bound(k, True) for k in (1, 2, 3)] == [5, 14, 23]

    def test_example_is_on_the_bound(self):
        cand = example_candidate(PLAIN)
        rep = check_rooted_bound(cand.s, cand.s_prime, 1)
        assert rep.ok and rep.slack == 0

    def test_unreduced_pair(self):
        t = rt("((1,2),(3,4));")
        with pytest.raises(PreconditionError):
            check_rooted_bound(t, t, 1)

    def test_violation(self):
        t1 = rt("((7,8),((5,2),(6,(1,(4,3)))));")
        t2 = rt("((8,(5,4)),((1,7),((6,3),2)));")
        with pytest.raises(VerificationError) as exc:
            check_rooted_bound(t1, t2, 1)
        assert exc.value.check == "rooted-kernel-bound"
        assert check_rooted_bound(t1, t2, 2).slack == 8


class TestCandidates:
    @pytest.mark.parametrize("variant,n", [(PLAIN, 7), (CLUSTER_REDUCED, 5)])
    def test_examples_verify(self, variant, n):
        cand = example_candidate(variant)
        assert cand.s.n_leaves == n
        rep = verify_rooted_family(cand)
        assert rep.ok, rep.to_text()
        assert "concluded h = 1" in rep.to_text()

    def test_export_load(self, tmp_path):
        cand = example_candidate(PLAIN)
        export_candidate(cand, tmp_path / "c")
        assert (tmp_path / "c" / "claim.txt").read_text() == "ROOTED-FAMILY v1\nvariant plain\nk 1\n"
        assert verify_rooted_family(str(tmp_path / "c")).ok

    def _tampered(self, **changes):
        cand = example_candidate(PLAIN)
        fields = dict(s=cand.s, s_prime=cand.s_prime, network=cand.network, k=cand.k, variant=cand.variant)
        fields.update(changes)
        return RootedCandidate(**fields)

    def test_swapped_leaves(self):
        # taxa 1 and 7 exchanged in the second tree
        rep = verify_rooted_family(self._tampered(s_prime=rt("(1,(6,(((7,4),2),(3,5))));")))
        assert not rep.ok

    def test_wrong_k(self):
        rep = verify_rooted_family(self._tampered(k=2))
        assert {c.name for c in rep.failures} >= {"leaf-count", "reticulation-number"}

    def test_wrong_variant(self):
        rep = verify_rooted_family(self._tampered(variant=CLUSTER_REDUCED))
        assert {c.name for c in rep.failures} >= {"leaf-count", "rooted-cluster-reduced"}

    def test_identical_trees(self):
        cand = example_candidate(PLAIN)
        rep = verify_rooted_family(self._tampered(s_prime=cand.s))
        assert {c.name for c in rep.failures} >= {"rooted-subtree-reduced", "unrooted-lower-bound"}

    def test_network_that_misses_a_tree(self):
        cand = example_candidate(CLUSTER_REDUCED)
        tree_net = RootedNetwork.from_text(cand.s.to_text())
        rep = verify_rooted_family(RootedCandidate(cand.s, cand.s_prime, tree_net, 1, CLUSTER_REDUCED))
        assert {c.name for c in rep.failures} == {"reticulation-number", "display-s-prime"}

    @pytest.mark.parametrize("claim", ["", "ROOTED-FAMILY v1\nvariant plain\n", "ROOTED-FAMILY v1\nvariant x\nk 1\n",
                                       "ROOTED-FAMILY v1\nvariant plain\nk 1\nextra 2\n"])
    def test_bad_claim(self, tmp_path, claim):
        export_candidate(example_candidate(PLAIN), tmp_path / "c")
        (tmp_path / "c" / "claim.txt").write_text(claim)
        with pytest.raises(FormatError):
            load_candidate(tmp_path / "c")
