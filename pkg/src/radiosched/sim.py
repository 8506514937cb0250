"""Synchronous round simulation of packet routing under a transmission
schedule.

Each round has three phases: the adversary's packets for that round enter
their first link's queue, every active link with a nonempty queue attempts
transmission and the radio rule decides which succeed, then each successful
link forwards one queued packet chosen by the scheduling policy.  Forwarded
packets only become selectable in the next round.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .errors import ParameterError
from .graphs import NetworkGraph, successful_links
from .schedules import TransmissionSchedule
from .traffic import AdversaryConfig, InjectionTrace, Packet, check_routes

POLICIES: dict[str, Callable[[Packet], tuple]] = {
    # longest-in-system: oldest injection first
    "lis": lambda p: (p.injection_round, p.id),
    # shortest-in-system: newest injection first
    "sis": lambda p: (-p.injection_round, p.id),
    # nearest-from-source: fewest completed hops first
    "nfs": lambda p: (p.hops_done, p.id),
    # furthest-to-go: most remaining hops first
    "ftg": lambda p: (p.hops_done - len(p.route), p.id),
}


class DeliveryRecord(NamedTuple):
    id: int
    injection_round: int
    delivered_round: int


@dataclass(frozen=True)
class RunMetrics:
    """Per-round telemetry of one simulation.

    Boolean arrays have shape (link_count, rounds).  `attempted` marks
    active links with a nonempty queue; `collided` is attempted without
    success.  `backlogged` marks links whose queue was nonempty after the
    injection phase.  `per_round_backlog` is the total queued packet count
    at the end of each round.  `undelivered_count` counts trace packets
    not delivered within the simulated rounds, including any whose
    injection round was never reached.
    """

    rounds: int
    active: np.ndarray
    attempted: np.ndarray
    success: np.ndarray
    backlogged: np.ndarray
    per_round_backlog: np.ndarray
    per_round_max_queue: np.ndarray
    delivered: tuple[DeliveryRecord, ...]
    undelivered_count: int
    final_queues: tuple[tuple[int, ...], ...]

    @property
    def collided(self) -> np.ndarray:
        return self.attempted & ~self.success

    @property
    def delivered_count(self) -> int:
        return len(self.delivered)

    @property
    def max_backlog(self) -> int:
        return int(self.per_round_backlog.max(initial=0))

    @property
    def max_latency(self) -> int:
        """Largest delivered_round - injection_round over delivered packets."""
        return max((d.delivered_round - d.injection_round for d in self.delivered), default=0)


def run(
    g: NetworkGraph,
    schedule: TransmissionSchedule,
    policy: str,
    trace: InjectionTrace,
    rounds: int,
) -> RunMetrics:
    key = POLICIES.get(policy.lower())
    if key is None:
        raise ParameterError(f"unknown policy {policy!r}; choose from {sorted(POLICIES)}")
    if schedule.link_count > g.link_count:
        raise ParameterError("schedule names more links than the network has")
    if rounds < 1:
        raise ParameterError("need at least one round")
    check_routes(trace, g)

    m = g.link_count
    by_round: dict[int, list[Packet]] = {}
    for r, pkt in trace.injections:
        by_round.setdefault(r, []).append(Packet(pkt.id, pkt.injection_round, pkt.route))

    queues: list[list[Packet]] = [[] for _ in range(m)]
    active = np.zeros((m, rounds), dtype=bool)
    attempted = np.zeros((m, rounds), dtype=bool)
    success = np.zeros((m, rounds), dtype=bool)
    backlogged = np.zeros((m, rounds), dtype=bool)
    per_round_backlog = np.zeros(rounds, dtype=np.int64)
    per_round_max_queue = np.zeros(rounds, dtype=np.int64)
    delivered: list[DeliveryRecord] = []
    queued = 0

    for r in range(rounds):
        for pkt in by_round.get(r, ()):
            queues[pkt.route[0]].append(pkt)
            queued += 1
        for e in range(m):
            if queues[e]:
                backlogged[e, r] = True

        act = schedule.active_at(r)
        active[list(act), r] = True
        candidates = [e for e in act if queues[e]]
        attempted[candidates, r] = True
        winners = successful_links(g, candidates)
        success[list(winners), r] = True

        moves = [(e, min(range(len(queues[e])), key=lambda i: key(queues[e][i]))) for e in winners]
        for e, i in moves:
            pkt = queues[e].pop(i)
            pkt.hops_done += 1
            if pkt.hops_done == len(pkt.route):
                delivered.append(DeliveryRecord(pkt.id, pkt.injection_round, r))
                queued -= 1
            else:
                queues[pkt.route[pkt.hops_done]].append(pkt)
        per_round_backlog[r] = queued
        per_round_max_queue[r] = max(map(len, queues), default=0)

    return RunMetrics(
        rounds=rounds,
        active=active,
        attempted=attempted,
        success=success,
        backlogged=backlogged,
        per_round_backlog=per_round_backlog,
        per_round_max_queue=per_round_max_queue,
        delivered=tuple(delivered),
        undelivered_count=len(trace) - len(delivered),
        final_queues=tuple(tuple(p.id for p in q) for q in queues),
    )


class FailureWindow(NamedTuple):
    link: int
    start: int
    count: int


class FailureReport(NamedTuple):
    holds: bool
    bound: Fraction
    window: int
    max_count: int
    max_ratio: Fraction
    witness: FailureWindow | None


def failure_accounting(
    metrics: RunMetrics, adv: AdversaryConfig, rho_prime: Fraction, window: int
) -> FailureReport:
    """Check that per-link failures stay under (1 + rho - rho') * T + b in
    every window of T consecutive rounds.

    A link fails in a round when its queue is nonempty after injections but
    the link does not succeed.  The witness is the fullest window.
    """
    rho_prime = Fraction(rho_prime)
    if not 0 < rho_prime <= 1:
        raise ParameterError("service rate rho' must lie in (0, 1]")
    if window < 1:
        raise ParameterError("window must be positive")
    if metrics.rounds < window:
        raise ParameterError("run is shorter than one window")
    bound = (1 + adv.rho - rho_prime) * window + adv.b
    fails = (metrics.backlogged & ~metrics.success).astype(np.int64)
    cum = np.cumsum(fails, axis=1)
    padded = np.concatenate([np.zeros((fails.shape[0], 1), dtype=np.int64), cum], axis=1)
    counts = padded[:, window:] - padded[:, :-window]
    flat = int(np.argmax(counts))
    link, start = divmod(flat, counts.shape[1])
    max_count = int(counts[link, start])
    holds = Fraction(max_count) <= bound
    witness = None if holds else FailureWindow(link, start, max_count)
    return FailureReport(holds, bound, window, max_count, Fraction(max_count) / bound, witness)


class StabilityVerdict(NamedTuple):
    stable: bool
    slope: float
    mean_backlog: float
    max_backlog: int


def stability_verdict(metrics: RunMetrics, threshold: float = 1e-3) -> StabilityVerdict:
    """Fit a line to the second half of the backlog curve; a slope under
    `threshold` packets per round counts as stable."""
    series = metrics.per_round_backlog
    if series.size < 10:
        raise ParameterError("need at least 10 rounds for a stability verdict")
    tail = series[series.size // 2 :]
    slope = float(np.polyfit(np.arange(tail.size), tail.astype(float), 1)[0])
    return StabilityVerdict(slope < threshold, slope, float(tail.mean()), metrics.max_backlog)
