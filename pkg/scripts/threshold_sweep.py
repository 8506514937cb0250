"""Sweep the injection rate across the coloring-schedule stability
threshold and report the backlog trend at each rate.

The threshold for a schedule with x colors sits at rate 1/x: below it
backlog stays flat, above it the slope turns positive.  Rates are swept
as fractions of 1/x so the crossing lands mid-sweep.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from radiosched.graphs import build_conflict_graph, greedy_coloring, random_network
from radiosched.schedules import schedule_from_coloring
from radiosched.sim import run, stability_verdict
from radiosched.traffic import AdversaryConfig, gen_leaky_bucket, random_routes, validate_trace


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=6)
    ap.add_argument("--edges", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rounds", type=int, default=30_000)
    ap.add_argument("--burst", type=int, default=2)
    ap.add_argument("--scales", default="8/16,12/16,15/16,17/16,20/16,24/16",
                    help="comma separated multiples of the threshold 1/x")
    args = ap.parse_args(argv)

    g = random_network(args.nodes, args.edges, seed=args.seed)
    h = build_conflict_graph(g)
    coloring = greedy_coloring(h)
    sched = schedule_from_coloring(coloring)
    x = coloring.color_count
    print(f"network: {len(g.nodes)} nodes, {g.link_count} links, {x} colors, threshold 1/{x}")
    print("scale rho admissible slope max_backlog stable")
    for token in args.scales.split(","):
        scale = Fraction(token)
        rho = scale * Fraction(1, x)
        if rho >= 1:
            print(f"{token} {rho} skipped (rate >= 1)")
            continue
        adv = AdversaryConfig(rho, args.burst)
        routes = random_routes(g, 4, 3, seed=args.seed)
        tr = gen_leaky_bucket(g, routes, adv, args.rounds, seed=args.seed)
        admissible = validate_trace(tr, adv, g.link_count).admissible
        metrics = run(g, sched, "lis", tr, args.rounds)
        v = stability_verdict(metrics)
        print(f"{token} {rho} {admissible} {v.slope:.2e} {v.max_backlog} {v.stable}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
