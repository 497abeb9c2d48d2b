"""Read-latency analysis of a code on a server latency graph.

Fetching from several servers costs the maximum of the individual link
latencies, so the best read latency of object k at server s is the minimum
over k's recovery sets of that maximum (zero when s can decode alone).  The
replication baseline searches every placement of whole objects under a
per-server capacity to get the best achievable worst case and average.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from itertools import combinations, product
from typing import Dict, List, Mapping, Optional, Tuple

from .coding import LinearCode

MS = 1000  # virtual-time ticks per latency unit; keeps time rational


def to_ms(x) -> int:
    """Latency value -> integer tick count, exact for <= 3 decimals."""
    d = Decimal(str(x)) * MS
    if d != d.to_integral_value():
        raise ValueError(f"latency {x} finer than 1/{MS} time units")
    return int(d)


def format_ms(t: int) -> str:
    whole, frac = divmod(t, MS)
    if frac == 0:
        return str(whole)
    return f"{whole}.{frac:03d}".rstrip("0")


class LatencyGraph:
    """Symmetric positive link latencies among n servers."""

    def __init__(self, n: int, weights: Mapping[Tuple[int, int], object]):
        if n < 1:
            raise ValueError("graph needs at least one server")
        self.n = n
        self._ms: Dict[Tuple[int, int], int] = {}
        for (i, j), w in weights.items():
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise ValueError(f"bad edge ({i},{j}) for n={n}")
            ms = to_ms(w)
            if ms <= 0:
                raise ValueError(f"edge ({i},{j}) must have positive latency")
            key = (min(i, j), max(i, j))
            if key in self._ms and self._ms[key] != ms:
                raise ValueError(f"edge ({i},{j}) given twice with different weights")
            self._ms[key] = ms
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if (i, j) not in self._ms:
                    raise ValueError(f"missing edge ({i},{j}); the graph must be complete")

    @classmethod
    def from_json(cls, doc: dict) -> "LatencyGraph":
        if "n" not in doc or "edges" not in doc:
            raise ValueError("latency graph needs fields 'n' and 'edges'")
        return cls(doc["n"], {(int(i), int(j)): w for i, j, w in doc["edges"]})

    def to_json(self) -> dict:
        return {"n": self.n,
                "edges": [[i, j, float(Decimal(ms) / MS)] for (i, j), ms in sorted(self._ms.items())]}

    def delay_ms(self, i: int, j: int) -> int:
        if i == j:
            return 0
        return self._ms[(min(i, j), max(i, j))]

    def weight(self, i: int, j: int) -> float:
        return self.delay_ms(i, j) / MS


@dataclass
class LatencyReport:
    per_pair: Dict[Tuple[int, int], float]  # (server, object) -> best read latency
    worst: float
    average: float


def analyze_latency(graph: LatencyGraph, code: LinearCode) -> LatencyReport:
    """Best-recovery-set read latency for every (server, object) pair."""
    if graph.n != code.n:
        raise ValueError(f"graph has {graph.n} servers but code has {code.n}")
    code.check_recoverable()
    per_pair: Dict[Tuple[int, int], float] = {}
    for obj in range(1, code.k + 1):
        sets = code.minimal_recovery_sets(obj)
        for s in range(1, graph.n + 1):
            best = min(
                max((graph.weight(s, j) for j in rs.members if j != s), default=0.0)
                for rs in sets)
            per_pair[(s, obj)] = best
    vals = list(per_pair.values())
    return LatencyReport(per_pair, max(vals), sum(vals) / len(vals))


def all_recovery_latency(graph: LatencyGraph, code: LinearCode) -> LatencyReport:
    """Brute-force variant minimising over *every* recovery set, not just
    the minimal ones; agreement with analyze_latency is a test oracle."""
    per_pair: Dict[Tuple[int, int], float] = {}
    servers = range(1, code.n + 1)
    for obj in range(1, code.k + 1):
        sets = []
        for size in range(1, code.n + 1):
            for S in combinations(servers, size):
                if code.is_recovery_set(S, obj) is not None:
                    sets.append(S)
        if not sets:
            raise ValueError(f"object {obj} unrecoverable")
        for s in servers:
            per_pair[(s, obj)] = min(
                max((graph.weight(s, j) for j in S if j != s), default=0.0)
                for S in sets)
    vals = list(per_pair.values())
    return LatencyReport(per_pair, max(vals), sum(vals) / len(vals))


@dataclass
class ReplicationReport:
    best_worst: float
    best_average: float
    worst_placement: Tuple[Tuple[int, ...], ...]    # objects stored per server
    average_placement: Tuple[Tuple[int, ...], ...]


def replication_baseline(graph: LatencyGraph, k: int, capacity: int = 1) -> ReplicationReport:
    """Exhaustive search over placements of whole objects, <= capacity per server.

    latency(s, obj) is 0 when obj is stored at s, else the nearest replica's
    link latency.  Returns the placements minimising worst case and average
    (independently).
    """
    n = graph.n
    if k > n * capacity:
        raise ValueError(f"cannot place {k} objects on {n} servers of capacity {capacity}")
    per_server_choices: List[Tuple[Tuple[int, ...], ...]] = []
    choices: List[Tuple[int, ...]] = [()]
    for size in range(1, capacity + 1):
        choices.extend(combinations(range(1, k + 1), size))
    if len(choices) ** n > 2_000_000:
        raise ValueError("placement space too large for exhaustive search")
    best_worst: Optional[float] = None
    best_avg: Optional[float] = None
    arg_worst = arg_avg = None
    for placement in product(choices, repeat=n):
        holders: List[List[int]] = [[] for _ in range(k)]
        for s, objs in enumerate(placement, start=1):
            for obj in objs:
                holders[obj - 1].append(s)
        if any(not h for h in holders):
            continue
        worst = 0.0
        total = 0.0
        for obj in range(1, k + 1):
            hs = holders[obj - 1]
            for s in range(1, n + 1):
                c = 0.0 if s in hs else min(graph.weight(s, h) for h in hs)
                if c > worst:
                    worst = c
                total += c
        if best_worst is None or worst < best_worst:
            best_worst, arg_worst = worst, placement
        avg = total / (n * k)
        if best_avg is None or avg < best_avg:
            best_avg, arg_avg = avg, placement
    if best_worst is None:
        raise ValueError("no feasible placement")
    return ReplicationReport(best_worst, best_avg, arg_worst, arg_avg)
