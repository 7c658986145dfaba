"""Build the tight families, print their certificates and the side cut counts."""

from tbrkernel.families import SC, SCC, build, verify_instance
from tbrkernel.networks import chain_breakpoints, cut_counts, network_chains

for variant, k in ((SC, 2), (SC, 3), (SCC, 4)):
    inst = build(variant, k)
    print(verify_instance(inst).to_text())

    counts = cut_counts(inst.witness, *inst.canonical_embeddings())
    print("cut counts per side:", [counts[e] for e in sorted(counts)], "sum", sum(counts.values()))
    for side, chain in sorted(network_chains(inst.witness).items()):
        bp = chain_breakpoints(inst.witness, chain, inst.s, inst.s_prime)
        print(f"  side {side}: chain of {len(chain)} taxa cut {bp.count} time(s)")
    print()
