"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import math
from fractions import Fraction

from regionsched.core import AlgoParams, Instance
from regionsched.oracle import edf_feasible


def exhaustive_optimum(instance: Instance, weighted: bool = False) -> Fraction:
    """Unpruned enumeration of all 2^n subsets."""
    jobs = list(instance.jobs)
    best = Fraction(0)
    for mask in range(1 << len(jobs)):
        subset = [jobs[k] for k in range(len(jobs)) if mask >> k & 1]
        value = sum((j.w if weighted else Fraction(1) for j in subset), Fraction(0))
        if value > best and edf_feasible(subset):
            best = value
    return best


def check_witness(jobs, segs) -> None:
    """Assert that ``segs`` is a single-machine schedule finishing every job inside its window."""
    by_id = {j.id: j for j in jobs}
    done = {j: Fraction(0) for j in by_id}
    for (a, s0, e0), (b, s1, e1) in zip(segs, segs[1:]):
        assert e0 <= s1
    for k, s, e in segs:
        assert s < e
        assert by_id[k].r <= s and e <= by_id[k].d
        done[k] += e - s
    assert all(done[k] == by_id[k].p for k in by_id)


def brute_edf_feasible(jobs) -> bool:
    """Necessary-and-sufficient demand test: every window [r_i, d_k] holds its contained volume."""
    for a in jobs:
        for b in jobs:
            lo, hi = a.r, b.d
            if hi <= lo:
                continue
            demand = sum((j.p for j in jobs if lo <= j.r and j.d <= hi), Fraction(0))
            if demand > hi - lo:
                return False
    return True


def grid_simulate(instance: Instance, params: AlgoParams) -> dict:
    """Tick-by-tick simulation of the region algorithm on an integer grid.

    Regions are kept per job as interval lists and updated with the literal
    split-and-delay rule; decisions are taken at releases and at the final
    end of any region. One tick is 1/(2 D L) time units, where D is the
    instance denominator and L the lcm of the parameter denominators.
    """
    D = instance.denominator()
    L = math.lcm(params.alpha.denominator, params.beta.denominator, params.delta.denominator)
    S = 2 * D * L

    def tick(q: Fraction) -> int:
        v = q * S
        assert v.denominator == 1
        return int(v)

    jobs = {j.id: (tick(j.r), tick(j.p), tick(j.d)) for j in instance.jobs}
    region: dict[int, list[list[int]]] = {}
    admitted_at: dict[int, int] = {}
    remaining: dict[int, int] = {}
    completion: dict[int, int] = {}
    admitted_parent: dict[int, object] = {}
    horizon = max((d for _, _, d in jobs.values()), default=0)

    t = 0
    while True:
        released_now = any(r == t for r, _, _ in jobs.values())
        region_ends = any(max(e for _, e in iv) == t for iv in region.values())
        if released_now or region_ends:
            avail = [
                j for j, (r, p, d) in jobs.items()
                if j not in admitted_at and r <= t and d - t >= (1 + params.delta) * p
            ]
            if avail:
                i = min(avail, key=lambda j: (jobs[j][1], j))
                owner = None
                for k, iv in region.items():
                    if any(s <= t < e for s, e in iv):
                        owner = k
                if owner is None or jobs[i][1] < params.beta * jobs[owner][1]:
                    length = tick(params.alpha * Fraction(jobs[i][1], S))
                    for k, iv in region.items():
                        new = []
                        for s, e in iv:
                            if s <= t < e:
                                if s < t:
                                    new.append([s, t])
                                new.append([t + length, e + length])
                            elif s >= t:
                                new.append([s + length, e + length])
                            else:
                                new.append([s, e])
                        region[k] = new
                    region[i] = [[t, t + length]]
                    admitted_at[i] = t
                    admitted_parent[i] = owner
                    remaining[i] = jobs[i][1]
        running = [j for j in remaining if remaining[j] > 0]
        if running:
            j = min(running, key=lambda j: (jobs[j][1], admitted_at[j], j))
            remaining[j] -= 1
            if remaining[j] == 0:
                completion[j] = t + 1
        elif t > horizon:
            break
        t += 1

    return {
        "admitted": {j: Fraction(a, S) for j, a in admitted_at.items()},
        "parent": admitted_parent,
        "completions": {j: Fraction(c, S) for j, c in completion.items()},
        "on_time": sum(1 for j, c in completion.items() if c <= jobs[j][2]),
    }
