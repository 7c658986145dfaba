import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import taxa, tree_pairs
from oracles import brute_displays
from tbrkernel.errors import BudgetExceeded, PreconditionError
from tbrkernel.tbr import random_tree, tbr_distance_maf
from tbrkernel.tree import parse_newick
from tbrkernel.uhn import canonical_form, uhn_exact


class TestExamples:
    def test_equal_trees(self):
        t = parse_newick("((1,2),(3,4),(5,6));")
        r, net = uhn_exact(t, t)
        assert r == 0 and net.reticulation_number == 0

    def test_quartet(self):
        t1, t2 = parse_newick("((a,b),(c,d));"), parse_newick("((a,c),(b,d));")
        r, net = uhn_exact(t1, t2)
        assert r == 1
        assert net.reticulation_number == 1
        assert brute_displays(net, t1) and brute_displays(net, t2)

    def test_six_taxa_at_distance_two(self):
        t1 = parse_newick("(1,((2,3),(4,6)),5);")
        t2 = parse_newick("(1,(2,(3,4)),(5,6));")
        r, net = uhn_exact(t1, t2)
        assert r == 2 == tbr_distance_maf(t1, t2).distance
        assert brute_displays(net, t1) and brute_displays(net, t2)

    def test_leaf_limit(self):
        rng = random.Random(2)
        t1, t2 = random_tree(taxa(8), rng), random_tree(taxa(8), rng)
        with pytest.raises(PreconditionError):
            uhn_exact(t1, t2)

    def test_k_max_and_budget(self):
        t1 = parse_newick("((1,2),(3,4),(5,6));")
        t2 = parse_newick("((1,3),(5,2),(4,6));")
        assert tbr_distance_maf(t1, t2).distance >= 2
        with pytest.raises(PreconditionError):
            uhn_exact(t1, t2, k_max=1)
        with pytest.raises(BudgetExceeded):
            uhn_exact(t1, t2, budget=3)


class TestCanonicalForm:
    EDGES = ((0, 4), (1, 4), (4, 5), (5, 2), (5, 6), (6, 3), (6, 6))
    LABELS = {0: "a", 1: "b", 2: "c", 3: "d"}

    @given(st.permutations(range(7)))
    def test_invariant_under_renumbering(self, perm):
        edges = tuple((perm[u], perm[v]) for u, v in self.EDGES)
        labels = {perm[v]: t for v, t in self.LABELS.items()}
        assert canonical_form(edges, labels) == canonical_form(self.EDGES, self.LABELS)

    def test_labels_matter(self):
        swapped = {0: "a", 1: "c", 2: "b", 3: "d"}
        assert canonical_form(self.EDGES, swapped) != canonical_form(self.EDGES, self.LABELS)

    def test_structure_matters(self):
        moved = ((0, 4), (1, 4), (4, 5), (5, 2), (5, 6), (6, 3), (4, 4))
        assert canonical_form(moved, self.LABELS) != canonical_form(self.EDGES, self.LABELS)


@settings(max_examples=25)
@given(tree_pairs(4, 6, max_moves=3))
def test_agrees_with_tbr_distance(pair):
    t1, t2 = pair
    r, net = uhn_exact(t1, t2)
    assert r == tbr_distance_maf(t1, t2).distance
    assert net.reticulation_number == r
    assert brute_displays(net, t1) and brute_displays(net, t2)
