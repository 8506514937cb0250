"""Compare a coloring schedule against a selector schedule on the same
network and traffic.

The coloring schedule needs the whole conflict graph; the selector
schedule only needs a bound on its in-degree, at the price of a longer
period and a lower guaranteed success rate.  Both are run under the same
admissible trace for all four queue policies.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from radiosched.bounds import coloring_threshold, uss_threshold
from radiosched.graphs import build_conflict_graph, greedy_coloring, random_network
from radiosched.schedules import schedule_from_coloring, schedule_from_selector
from radiosched.selectors import poly_uss
from radiosched.sim import POLICIES, run, stability_verdict
from radiosched.traffic import AdversaryConfig, gen_leaky_bucket, random_routes


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=5)
    ap.add_argument("--edges", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--rounds", type=int, default=40_000)
    args = ap.parse_args(argv)

    g = random_network(args.nodes, args.edges, seed=args.seed)
    h = build_conflict_graph(g)
    coloring = greedy_coloring(h)
    delta = h.max_in_degree
    col = schedule_from_coloring(coloring)
    sel = poly_uss(g.link_count, delta + 1)
    ssched = schedule_from_selector(sel, g, delta_bound=delta)

    col_rho, col_T = col.claimed_frequency
    sel_rho, sel_T = ssched.claimed_frequency
    print(f"network: {len(g.nodes)} nodes, {g.link_count} links, conflict in-degree {delta}")
    print(f"coloring schedule: period {col_T}, guaranteed rate {col_rho}")
    print(f"selector schedule: period {sel_T}, guaranteed rate {sel_rho}")
    print(f"thresholds: coloring {coloring_threshold(coloring.color_count)},"
          f" selector {uss_threshold(delta, eps=sel.claimed_eps)}")

    # load both schedules can carry: half the selector guarantee
    rho = sel_rho / 2
    adv = AdversaryConfig(rho, 2)
    routes = random_routes(g, 4, 2, seed=args.seed)
    tr = gen_leaky_bucket(g, routes, adv, args.rounds, seed=args.seed)
    print(f"trace: {len(tr)} packets at rate {rho}")
    print("schedule policy delivered max_latency max_backlog slope")
    for name, sched in (("coloring", col), ("selector", ssched)):
        for policy in sorted(POLICIES):
            metrics = run(g, sched, policy, tr, args.rounds)
            v = stability_verdict(metrics)
            print(f"{name} {policy} {metrics.delivered_count} {metrics.max_latency}"
                  f" {v.max_backlog} {v.slope:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
