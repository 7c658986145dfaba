import pytest

from tbrkernel.errors import FormatError, PreconditionError
from tbrkernel.families import (
    SC,
    SCC,
    TightInstance,
    build,
    build_sc,
    build_scc,
    export_instance,
    find_fitch_certificate,
    load_instance,
    parse_certificate,
    sc_generator,
    scc_generator,
    verify_instance,
)
from tbrkernel.networks import (
    chain_breakpoints,
    chain_cap,
    count_sides,
    cut_counts,
    is_spanning_tree,
    network_chains,
)
from tbrkernel.reductions import is_reduced


@pytest.fixture(scope="module")
def sc2():
    return build_sc(2)


@pytest.fixture(scope="module")
def scc4():
    return build_scc(4)


class TestGenerators:
    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_sc_generator_is_cubic(self, k):
        gen, roles = sc_generator(k)
        assert gen.k == k and count_sides(gen) == 3 * (k - 1)
        assert len(roles) == len(gen.sides)

    @pytest.mark.parametrize("k", [4, 5])
    def test_scc_generator_is_cubic(self, k):
        gen, _ = scc_generator(k)
        assert gen.k == k and count_sides(gen) == 3 * (k - 1)

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            build_sc(1)
        with pytest.raises(PreconditionError):
            build_scc(3)
        with pytest.raises(PreconditionError):
            build("xyz", 4)


@pytest.mark.parametrize("variant,k", [(SC, 2), (SC, 3), (SC, 4), (SCC, 4), (SCC, 5)])
def test_instances_verify(variant, k):
    inst = build(variant, k)
    rep = verify_instance(inst)
    assert rep.ok, rep.to_text()
    assert rep.distance == k
    assert len(inst.taxa) == 15 * k - 9
    assert inst.witness.reticulation_number == k
    rules = ("subtree", "chain", "cluster") if variant == SCC else ("subtree", "chain")
    assert is_reduced(inst.s, inst.s_prime, rules)
    assert "concluded d_TBR = %d" % k in rep.to_text()


@pytest.mark.parametrize("variant,k", [(SC, 2), (SC, 3), (SCC, 4)])
def test_solver_confirms_distance(variant, k):
    rep = verify_instance(build(variant, k), solver=True)
    assert any(c.name == "maf-distance" and c.passed for c in rep.checks)


@pytest.mark.parametrize("variant,k", [(SC, 3), (SCC, 4), (SCC, 6)])
def test_cut_counts_and_chain_caps(variant, k):
    inst = build(variant, k)
    b1, b2 = inst.canonical_embeddings()
    assert is_spanning_tree(inst.witness, b1.spanning)
    counts = cut_counts(inst.witness, b1, b2)
    assert sum(counts.values()) == 2 * k
    assert set(counts.values()) <= ({0, 1, 2} if variant == SC else {0, 1})
    for chain in network_chains(inst.witness).values():
        bp = chain_breakpoints(inst.witness, chain, inst.s, inst.s_prime)
        assert len(chain) <= chain_cap(bp.count, cluster_reduced=variant == SCC)


class TestCertificate:
    def test_fitch_certificate(self, sc2):
        side, scores = find_fitch_certificate(sc2.s, sc2.s_prime, 2)
        assert side and scores == (1, 3)

    def test_export_load_round_trip(self, sc2, tmp_path):
        export_instance(sc2, tmp_path / "sc2")
        back = load_instance(tmp_path / "sc2")
        assert back.s == sc2.s and back.s_prime == sc2.s_prime
        assert back.witness.to_text() == sc2.witness.to_text()
        assert verify_instance(back).ok
        text = (tmp_path / "sc2" / "certificate.txt").read_text()
        assert text.startswith("TIGHT-INSTANCE v1\nvariant sc\nk 2\n")

    @pytest.mark.parametrize(
        "text",
        ["", "TIGHT-INSTANCE v2\n", "TIGHT-INSTANCE v1\nk 2\n", "TIGHT-INSTANCE v1\nvariant sc\nk x\n",
         "TIGHT-INSTANCE v1\nvariant sc\nk 2\ncolour blue\n"],
    )
    def test_bad_certificate(self, text):
        with pytest.raises(FormatError):
            parse_certificate(text)


class TestTampering:
    def _with(self, inst, **changes):
        fields = dict(k=inst.k, variant=inst.variant, s=inst.s, s_prime=inst.s_prime,
                      witness=inst.witness, certificate=dict(inst.certificate))
        fields.update(changes)
        return TightInstance(**fields)

    def test_swapped_leaves_fail(self, scc4):
        # exchanging two leaves from different chains keeps every file well formed
        swapped_tree = scc4.s_prime.relabel({"1": "20", "20": "1"})
        rep = verify_instance(self._with(scc4, s_prime=swapped_tree))
        assert not rep.ok
        assert "concluded" not in rep.to_text()

    def test_wrong_k_fails(self, sc2):
        rep = verify_instance(self._with(sc2, k=3))
        assert not rep.ok
        assert {c.name for c in rep.failures} >= {"leaf-count", "reticulation-number"}

    def test_bad_fitch_split_fails(self, sc2):
        cert = dict(sc2.certificate)
        cert["fitch-split"] = tuple(sorted(sc2.taxa))[:2]
        rep = verify_instance(self._with(sc2, certificate=cert))
        assert [c.name for c in rep.failures] == ["fitch-certificate"]

    def test_leaf_set_mismatch(self, sc2):
        t = sc2.s.relabel({sc2.s.taxa_order[0]: "zz"})
        rep = verify_instance(self._with(sc2, s=t))
        assert [c.name for c in rep.failures] == ["leaf-sets"]
