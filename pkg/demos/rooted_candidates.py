"""Certify the shipped rooted k = 1 candidates and show the rooted bounds."""

from tbrkernel.rooted import (
    CLUSTER_REDUCED,
    PLAIN,
    check_rooted_bound,
    displayed_trees,
    example_candidate,
    rooted_kernel_bound,
    serialize_rooted_newick,
    verify_rooted_family,
)

for variant in (PLAIN, CLUSTER_REDUCED):
    cand = example_candidate(variant)
    print(f"{variant}: s  = {serialize_rooted_newick(cand.s)}")
    print(f"{variant}: s' = {serialize_rooted_newick(cand.s_prime)}")
    shown = displayed_trees(cand.network)
    print(f"witness has r = {cand.network.reticulation_number} and displays {len(shown)} trees")
    print(verify_rooted_family(cand).to_text())
    rep = check_rooted_bound(cand.s, cand.s_prime, cand.k, cluster_reduced=variant == CLUSTER_REDUCED)
    print(f"bound {rep.bound}, taxa {rep.n_leaves}, slack {rep.slack}\n")

print("bounds for k = 1..4:", [rooted_kernel_bound(k) for k in range(1, 5)],
      [rooted_kernel_bound(k, True) for k in range(1, 5)])
