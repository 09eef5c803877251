"""Exact offline optimum for small instances.

Feasibility of a job set on one preemptive machine is decided by earliest
deadline first. The optimum is found by depth-first subset search over jobs in
deadline order, pruning infeasible partial sets and branches whose optimistic
value cannot beat the incumbent.
"""

from __future__ import annotations

import heapq
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .core import Instance, Job, fmt

DEFAULT_CAP = 22
CAP_ENV = "REGION_SCHED_ORACLE_CAP"


class CapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleResult:
    value: Fraction
    subset: tuple[int, ...]
    witness: tuple[tuple[int, Fraction, Fraction], ...]
    weighted: bool = False

    def to_json(self) -> dict[str, Any]:
        return {
            "value": fmt(self.value),
            "weighted": self.weighted,
            "subset": list(self.subset),
            "witness": [{"job": j, "start": fmt(s), "end": fmt(e)} for j, s, e in self.witness],
        }


def oracle_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    return int(raw) if raw else DEFAULT_CAP


def _edf_int(jobs: Sequence[tuple[int, int, int, int]], want_witness: bool = False):
    """Preemptive EDF over integer-scaled ``(r, p, d, key)`` tuples.

    Returns ``(feasible, segments)`` where segments are ``(key, start, end)``.
    """
    order = sorted(jobs, key=lambda j: j[0])
    heap: list[tuple[int, int, int]] = []
    segs: list[tuple[int, int, int]] = []
    t = 0
    i = 0
    n = len(order)
    remaining: dict[int, int] = {}
    while i < n or heap:
        if not heap:
            t = max(t, order[i][0])
        while i < n and order[i][0] <= t:
            r, p, d, key = order[i]
            remaining[key] = p
            heapq.heappush(heap, (d, key, p))
            i += 1
        d, key, _ = heap[0]
        nxt = order[i][0] if i < n else None
        run = remaining[key]
        if nxt is not None and t + run > nxt:
            run = nxt - t
        if want_witness:
            if segs and segs[-1][0] == key and segs[-1][2] == t:
                segs[-1] = (key, segs[-1][1], t + run)
            else:
                segs.append((key, t, t + run))
        t += run
        remaining[key] -= run
        if remaining[key] == 0:
            heapq.heappop(heap)
            if t > d:
                return False, segs
    return True, segs


def _scale(jobs: Sequence[Job]) -> tuple[int, list[tuple[int, int, int, int]]]:
    den = 1
    for j in jobs:
        den = math.lcm(den, j.r.denominator, j.p.denominator, j.d.denominator)
    return den, [(int(j.r * den), int(j.p * den), int(j.d * den), j.id) for j in jobs]


def edf_schedule(jobs: Sequence[Job]) -> tuple[bool, list[tuple[int, Fraction, Fraction]]]:
    """Run preemptive EDF (ties by id); returns feasibility and the schedule segments."""
    if not jobs:
        return True, []
    den, scaled = _scale(jobs)
    ok, segs = _edf_int(scaled, want_witness=True)
    return ok, [(k, Fraction(s, den), Fraction(e, den)) for k, s, e in segs]


def edf_feasible(jobs: Sequence[Job]) -> bool:
    if not jobs:
        return True
    _, scaled = _scale(jobs)
    return _edf_int(scaled)[0]


def max_throughput_subset(instance: Instance, weighted: bool = False, cap: int | None = None) -> OracleResult:
    jobs = sorted(instance.jobs, key=lambda j: (j.d, j.r, j.id))
    value_of = (lambda j: j.w) if weighted else (lambda j: Fraction(1))
    if edf_feasible(jobs):
        return _result(jobs, weighted, value_of)
    cap = oracle_cap() if cap is None else cap
    if len(jobs) > cap:
        raise CapExceeded(f"{len(jobs)} jobs exceed the subset-search cap of {cap}")

    _, scaled = _scale(jobs)
    values = [value_of(j) for j in jobs]
    suffix = [Fraction(0)] * (len(jobs) + 1)
    for k in range(len(jobs) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + values[k]

    # greedy incumbent: admit in deadline order while feasible
    best: list[int] = []
    for k in range(len(jobs)):
        if _edf_int([scaled[x] for x in best + [k]])[0]:
            best.append(k)
    best_value = sum((values[k] for k in best), Fraction(0))

    chosen: list[int] = []

    def search(k: int, current: Fraction) -> None:
        nonlocal best, best_value
        if current + suffix[k] <= best_value:
            return
        if k == len(jobs):
            best, best_value = list(chosen), current
            return
        chosen.append(k)
        if _edf_int([scaled[x] for x in chosen])[0]:
            search(k + 1, current + values[k])
        chosen.pop()
        search(k + 1, current)

    search(0, Fraction(0))
    return _result([jobs[k] for k in best], weighted, value_of)


def _result(subset: Sequence[Job], weighted: bool, value_of) -> OracleResult:
    ok, segs = edf_schedule(subset)
    assert ok, "oracle subset must be EDF-feasible"
    return OracleResult(
        value=sum((value_of(j) for j in subset), Fraction(0)),
        subset=tuple(sorted(j.id for j in subset)),
        witness=tuple(segs),
        weighted=weighted,
    )

