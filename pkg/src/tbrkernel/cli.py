"""Command-line interface.

Exit codes: 0 success, 1 a checked property failed, 2 unreadable or
invalid input, 3 work budget exhausted.  Every command prints a text
report; ``--json FILE`` also writes a structured report.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from .errors import BudgetExceeded, FormatError, PreconditionError, VerificationError
from .families import SC, SCC, build, export_instance, load_instance, verify_instance
from .networks import count_sides, displays, enumerate_generators, read_network
from .parsimony import mp_lower_bound, parsimony_score, write_character
from .reductions import CLUSTER, kernel_bound, kernelize, kernelize_components, parse_rules
from .rooted import CLUSTER_REDUCED, PLAIN, example_candidate, export_candidate, verify_rooted_family
from .tbr import tbr_distance, tbr_distance_bfs, tbr_distance_maf
from .tree import NewickError, parse_newick, serialize_newick
from .uhn import uhn_exact

OK, VIOLATION, BAD_INPUT, OVER_BUDGET = 0, 1, 2, 3


class Report:
    def __init__(self, command, argv):
        self.data = {"command": command, "argv": list(argv), "inputs": {}, "results": {}, "files": []}
        self.lines = []

    def input(self, path):
        with open(path, "rb") as fh:
            self.data["inputs"][path] = hashlib.sha256(fh.read()).hexdigest()

    def say(self, line):
        self.lines.append(line)
        print(line)

    def result(self, key, value):
        self.data["results"][key] = value

    def file(self, path):
        self.data["files"].append(path)

    def finish(self, status, json_path=None):
        self.data["exit_status"] = status
        if json_path:
            with open(json_path, "w", encoding="utf-8") as fh:
                json.dump(self.data, fh, indent=2, sort_keys=True)
                fh.write("\n")
        return status


def _read_tree(path, report):
    report.input(path)
    with open(path, encoding="utf-8") as fh:
        lines = [l for l in fh.read().splitlines() if l.strip()]
    if not lines:
        raise FormatError(f"{path}: no tree found")
    return parse_newick(lines[0], allow_reserved=True)


def _write(path, text, report):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    report.file(path)


# ---------------------------------------------------------------------- commands


def cmd_kernelize(args, rep):
    t1, t2 = _read_tree(args.tree1, rep), _read_tree(args.tree2, rep)
    rules = parse_rules(args.rules)
    s1, s2, trace = kernelize(t1, t2, rules)
    rep.say(f"leaves before: {t1.n_leaves}")
    rep.say(f"leaves after: {s1.n_leaves}")
    rep.say(f"steps: {len(trace)}")
    if not trace.steps:
        rep.say("already reduced")
    rep.result("leaves_before", t1.n_leaves)
    rep.result("leaves_after", s1.n_leaves)
    rep.result("steps", len(trace))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write(os.path.join(args.out, "s1.nwk"), serialize_newick(s1) + "\n", rep)
        _write(os.path.join(args.out, "s2.nwk"), serialize_newick(s2) + "\n", rep)
        _write(os.path.join(args.out, "trace.txt"), trace.to_text(), rep)
    if not args.solve:
        return OK
    before = tbr_distance_maf(t1, t2, budget=args.budget)
    if not before.exact:
        rep.say(f"distance before: in [{before.lower}, {before.upper}] (budget exhausted)")
        return OVER_BUDGET
    rep.say(f"distance before: {before.distance}")
    rep.result("distance_before", before.distance)
    if CLUSTER in rules:
        parts = kernelize_components(t1, t2, rules)
        ds = []
        for a, b in parts:
            res = tbr_distance_maf(a, b, budget=args.budget)
            if not res.exact:
                return OVER_BUDGET
            ds.append(res.distance)
        rep.say(f"component distances: {ds}")
        rep.result("component_distances", ds)
        return OK
    after = tbr_distance_maf(s1, s2, budget=args.budget)
    if not after.exact:
        rep.say(f"distance after: in [{after.lower}, {after.upper}] (budget exhausted)")
        return OVER_BUDGET
    rep.say(f"distance after: {after.distance}")
    rep.result("distance_after", after.distance)
    status = OK
    if after.distance != before.distance:
        rep.say("VIOLATION: reduction changed the distance")
        status = VIOLATION
    k = after.distance
    if k >= 2:
        ok = s1.n_leaves <= kernel_bound(k)
        rep.say(f"kernel bound 15k-9 = {kernel_bound(k)}: {'ok' if ok else 'VIOLATION'}")
        rep.result("kernel_bound_ok", ok)
        if not ok:
            status = VIOLATION
    return status


def cmd_tbr(args, rep):
    t1, t2 = _read_tree(args.tree1, rep), _read_tree(args.tree2, rep)
    if args.method == "bfs":
        try:
            d = tbr_distance_bfs(t1, t2, budget=args.budget)
        except BudgetExceeded as exc:
            rep.say(f"distance >= {exc.lower} (budget exhausted)")
            rep.result("lower", exc.lower)
            return OVER_BUDGET
        rep.say(f"distance: {d}")
        rep.result("distance", d)
        return OK
    res = tbr_distance(t1, t2, budget=args.budget)
    if args.cert:
        _write(args.cert, res.certificate_text(), rep)
    if not res.exact:
        rep.say(f"distance in [{res.lower}, {res.upper}] (budget exhausted)")
        rep.result("lower", res.lower)
        rep.result("upper", res.upper)
        return OVER_BUDGET
    rep.say(f"distance: {res.distance}")
    rep.result("distance", res.distance)
    if args.method != "sandwich":
        return OK
    lower, ch = mp_lower_bound(t1, t2)
    rep.say(f"parsimony lower bound: {lower} (scores {parsimony_score(t1, ch)}, {parsimony_score(t2, ch)})")
    rep.result("mp_lower_bound", lower)
    status = OK
    if lower > res.distance:
        rep.say("VIOLATION: parsimony bound exceeds the solver value")
        status = VIOLATION
    if args.witness:
        rep.input(args.witness)
        net = read_network(args.witness)
        r = net.reticulation_number
        shown = bool(displays(net, t1, budget=args.budget)) and bool(displays(net, t2, budget=args.budget))
        rep.say(f"witness r: {r}, displays both trees: {shown}")
        rep.result("witness_r", r)
        if not shown or res.distance > r:
            rep.say("VIOLATION: witness does not bound the distance from above")
            status = VIOLATION
    rep.say(f"h^u = d_TBR = {res.distance}")
    return status


def cmd_uhn(args, rep):
    t1, t2 = _read_tree(args.tree1, rep), _read_tree(args.tree2, rep)
    r, net = uhn_exact(t1, t2, k_max=args.k_max, budget=args.budget)
    rep.say(f"h^u: {r}")
    rep.result("h_u", r)
    if args.out:
        _write(args.out, net.to_text(), rep)
    return OK


def cmd_family(args, rep):
    inst = build(args.variant, args.k)
    export_instance(inst, args.out)
    for name in ("s.nwk", "s_prime.nwk", "witness.unet", "certificate.txt"):
        rep.file(os.path.join(args.out, name))
    rep.say(f"family {args.variant} k={args.k}: {len(inst.taxa)} taxa, written to {args.out}")
    rep.result("taxa", len(inst.taxa))
    rep.result("k", args.k)
    return OK


def cmd_verify(args, rep):
    for name in ("s.nwk", "s_prime.nwk", "witness.unet", "certificate.txt"):
        rep.input(os.path.join(args.dir, name))
    inst = load_instance(args.dir)
    report = verify_instance(inst, solver=args.solver)
    for line in report.to_text().splitlines():
        rep.say(line)
    rep.result("verification", report.to_dict())
    if not report.ok:
        rep.say(f"first failed check: {report.failures[0].name}")
        return VIOLATION
    return OK


def cmd_generators(args, rep):
    gens = enumerate_generators(args.k)
    rep.say(f"{len(gens)} generator(s) for k={args.k}")
    rep.result("count", len(gens))
    status = OK
    for g in gens:
        if args.k >= 2 and (count_sides(g) != 3 * (args.k - 1) or g.n_vertices != 2 * (args.k - 1)):
            rep.say(f"VIOLATION: generator with {count_sides(g)} sides and {g.n_vertices} vertices")
            status = VIOLATION
    if args.out:
        _write(args.out, "".join(g.to_text() for g in gens), rep)
    return status


def cmd_display(args, rep):
    rep.input(args.network)
    net = read_network(args.network)
    tree = _read_tree(args.tree, rep)
    res = displays(net, tree, budget=args.budget)
    rep.say(f"displayed: {str(res.displayed).lower()}")
    rep.result("displayed", res.displayed)
    if res.displayed:
        emb = sorted(res.embedding.subdivision)
        rep.say("embedding: " + " ".join(f"{u}-{v}" for u, v in emb))
        rep.result("embedding", [list(e) for e in emb])
        return OK
    return VIOLATION


def cmd_mp(args, rep):
    t1, t2 = _read_tree(args.tree1, rep), _read_tree(args.tree2, rep)
    lower, ch = mp_lower_bound(t1, t2, exhaustive=args.exhaustive)
    rep.say(f"parsimony lower bound: {lower}")
    rep.say(f"scores: {parsimony_score(t1, ch)} {parsimony_score(t2, ch)}")
    rep.result("mp_lower_bound", lower)
    if args.character_out:
        write_character(args.character_out, ch)
        rep.file(args.character_out)
    return OK


def cmd_rooted_verify(args, rep):
    for name in ("s.nwk", "s_prime.nwk", "network.rnet", "claim.txt"):
        rep.input(os.path.join(args.dir, name))
    report = verify_rooted_family(args.dir)
    for line in report.to_text().splitlines():
        rep.say(line)
    rep.result("verification", report.to_dict())
    if not report.ok:
        rep.say(f"first failed check: {report.failures[0].name}")
        return VIOLATION
    return OK


def cmd_rooted_example(args, rep):
    export_candidate(example_candidate(args.variant), args.out)
    rep.say(f"rooted {args.variant} candidate written to {args.out}")
    return OK


# ---------------------------------------------------------------------- entry point


def build_parser():
    p = argparse.ArgumentParser(prog="tbrkernel", description="TBR kernels, tight families and certificates")
    p.add_argument("--budget", type=int, default=None, help="cap on solver work (branching nodes, candidates)")
    p.add_argument("--json", default=None, help="also write a structured report to this file")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("kernelize", help="apply reduction rules to a tree pair")
    s.add_argument("tree1")
    s.add_argument("tree2")
    s.add_argument("--rules", default="subtree,chain")
    s.add_argument("--out", default=None)
    s.add_argument("--solve", action="store_true", help="compare distances before and after")
    s.set_defaults(func=cmd_kernelize)

    s = sub.add_parser("tbr", help="TBR distance")
    s.add_argument("tree1")
    s.add_argument("tree2")
    s.add_argument("--method", choices=("maf", "bfs", "sandwich"), default="maf")
    s.add_argument("--cert", default=None, help="write the solver certificate here")
    s.add_argument("--witness", default=None, help="UNET network bounding the distance (sandwich)")
    s.set_defaults(func=cmd_tbr)

    s = sub.add_parser("uhn", help="exact unrooted hybridization number (tiny inputs)")
    s.add_argument("tree1")
    s.add_argument("tree2")
    s.add_argument("--k-max", type=int, default=None)
    s.add_argument("--out", default=None, help="write the minimal network (UNET)")
    s.set_defaults(func=cmd_uhn)

    s = sub.add_parser("family", help="build a tight instance")
    s.add_argument("variant", choices=(SC, SCC))
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("verify", help="verify a tight-instance directory")
    s.add_argument("dir")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--solver", dest="solver", action="store_true", default=None)
    g.add_argument("--no-solver", dest="solver", action="store_false")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("generators", help="enumerate k-generators")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out", default=None, help="write all generators (GEN v1)")
    s.set_defaults(func=cmd_generators)

    s = sub.add_parser("display", help="does a network display a tree")
    s.add_argument("network")
    s.add_argument("tree")
    s.set_defaults(func=cmd_display)

    s = sub.add_parser("mp", help="parsimony lower bound on d_TBR")
    s.add_argument("tree1")
    s.add_argument("tree2")
    s.add_argument("--exhaustive", action="store_true")
    s.add_argument("--character-out", default=None)
    s.set_defaults(func=cmd_mp)

    s = sub.add_parser("rooted-verify", help="verify a rooted candidate directory")
    s.add_argument("dir")
    s.set_defaults(func=cmd_rooted_verify)

    s = sub.add_parser("rooted-example", help="write the shipped k = 1 rooted candidate")
    s.add_argument("variant", choices=(PLAIN, CLUSTER_REDUCED))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_rooted_example)
    return p


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    rep = Report(args.command, argv)
    try:
        status = args.func(args, rep)
    except (NewickError, FormatError, PreconditionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        rep.result("error", str(exc))
        status = BAD_INPUT
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        rep.result("error", str(exc))
        status = OVER_BUDGET
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        rep.result("error", str(exc))
        status = VIOLATION
    return rep.finish(status, args.json)


if __name__ == "__main__":
    sys.exit(main())
