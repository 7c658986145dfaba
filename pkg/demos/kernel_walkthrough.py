"""Kernelize a tree pair step by step and check the distance never moves."""

import random

from tbrkernel import kernelize, tbr_distance_maf
from tbrkernel.reductions import SUBTREE, apply_chain_step, apply_subtree_step
from tbrkernel.tbr import random_tbr_walk, random_tree
from tbrkernel.tree import serialize_newick

rng = random.Random(2025)
names = [str(i) for i in range(1, 19)]
t1 = random_tree(names, rng)
t2 = random_tbr_walk(t1, 3, rng)
print("t1:", serialize_newick(t1))
print("t2:", serialize_newick(t2))

d = tbr_distance_maf(t1, t2).distance
print(f"d_TBR = {d} on {t1.n_leaves} taxa")

s1, s2, trace = kernelize(t1, t2)
a, b = t1, t2
for step in trace.steps:
    if step.kind == SUBTREE:
        a, b = apply_subtree_step(a, b, step.removed, step.introduced[0])
    else:
        a, b = apply_chain_step(a, b, step.removed, step.introduced)
    now = tbr_distance_maf(a, b).distance
    print(f"{step.kind:8s} removed {len(step.removed):2d} taxa -> {a.n_leaves:2d} left, d_TBR = {now}")

print("kernel s1:", serialize_newick(s1))
print("kernel s2:", serialize_newick(s2))
print(f"kernel size {s1.n_leaves}, bound 15k-9 = {15 * d - 9}")
