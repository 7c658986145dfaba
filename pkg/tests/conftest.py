import os
import random
import sys

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from tbrkernel.tbr import random_tbr_walk, random_tree  # noqa: E402

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def taxa(n):
    return [str(i) for i in range(1, n + 1)]


@st.composite
def trees(draw, min_n=4, max_n=8):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_tree(taxa(n), random.Random(seed))


@st.composite
def tree_pairs(draw, min_n=4, max_n=8, max_moves=3):
    """Pairs related by a short random TBR walk, so they share structure."""
    t1 = draw(trees(min_n, max_n))
    steps = draw(st.integers(0, max_moves))
    seed = draw(st.integers(0, 2**32 - 1))
    return t1, random_tbr_walk(t1, steps, random.Random(seed))


def random_rooted_newick(names, rng):
    """Rooted binary Newick string by merging random pairs."""
    parts = list(names)
    while len(parts) > 1:
        a = parts.pop(rng.randrange(len(parts)))
        b = parts.pop(rng.randrange(len(parts)))
        parts.append(f"({a},{b})")
    return parts[0] + ";"


def random_rooted_network(tree, k, rng):
    """Add k reticulation edges to a rooted tree, keeping the graph acyclic."""
    from tbrkernel.rooted import RootedNetwork

    children, labels = tree.child_lists()
    nxt = max(children) + 1
    while k:
        edges = [(p, c) for p, cs in children.items() for c in cs]
        (u, v), (x, y) = rng.sample(edges, 2)
        # reject if y reaches u: the new edge a -> b would close a cycle
        stack, seen = [y], set()
        while stack:
            w = stack.pop()
            if w not in seen:
                seen.add(w)
                stack.extend(children[w])
        if u in seen:
            continue
        a, b = nxt, nxt + 1
        nxt += 2
        children[u] = [a if w == v else w for w in children[u]]
        children[x] = [b if w == y else w for w in children[x]]
        children[a] = [v, b]
        children[b] = [y]
        k -= 1
    return RootedNetwork._build(children, labels)


@st.composite
def rooted_trees(draw, min_n=3, max_n=8):
    from tbrkernel.rooted import parse_rooted_newick

    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return parse_rooted_newick(random_rooted_newick(taxa(n), random.Random(seed)))


# one PASS/FAIL line per acceptance criterion, printed after the run
CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
