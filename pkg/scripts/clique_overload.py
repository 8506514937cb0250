"""Drive the overloaded-clique scenario and watch backlog outgrow every
schedule.

At most one link of a clique network can succeed per round, while the
trace injects slightly more than one packet per round on average, so the
queue total climbs linearly no matter the schedule.  The run prints the
measured backlog against the exact predicted floor at each full period.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from radiosched.graphs import build_conflict_graph, exact_chromatic
from radiosched.schedules import schedule_from_coloring
from radiosched.selectors import parse_fraction
from radiosched.sim import run
from radiosched.traffic import gen_clique_scenario


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=3)
    ap.add_argument("--epsilon", default="1/32", help="rate excess above 1/chi, as p/q")
    ap.add_argument("--periods", type=int, default=50, help="how many chi-round periods to run")
    ap.add_argument("--policy", default="lis")
    args = ap.parse_args(argv)

    eps = parse_fraction(args.epsilon)
    sc = gen_clique_scenario(args.nodes, eps, args.periods * (args.nodes**2 - args.nodes))
    chi = sc.chi
    rounds = args.periods * chi
    h = build_conflict_graph(sc.g)
    sched = schedule_from_coloring(exact_chromatic(h))
    metrics = run(sc.g, sched, args.policy, sc.trace, rounds)

    print(f"clique on {args.nodes} nodes: {sc.g.link_count} links, chi={chi}, eps={eps}")
    print(f"injected {len(sc.trace)} packets over {rounds} rounds (horizon inclusive)")
    print("round backlog")
    step = max(1, args.periods // 10) * chi
    for r in range(step - 1, rounds, step):
        print(f"{r + 1} {metrics.per_round_backlog[r]}")
    undelivered = metrics.undelivered_count
    print(f"undelivered after {rounds} rounds: {undelivered}")
    print(f"predicted floor: {sc.predicted_backlog(rounds)}")
    per_round = metrics.success.sum(axis=0)
    print(f"max successes in any round: {int(per_round.max())} (ceiling 1)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
