"""The region algorithm as an event-driven online scheduler.

Decision points are job releases and region ends. At each one the preemption
routine runs once: the shortest available job is admitted if it is smaller
than ``beta`` times the owner of the current instant, which reserves a region
of length ``alpha * p`` and pushes every later region back. Between decision
points the machine runs the shortest admitted unfinished job.
"""

from __future__ import annotations

import copy
import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .core import AlgoParams, Instance, Job, fmt, rat
from .timeline import M, InterruptionTree, Owner, Segment, Timeline, finalize_tree, owner_from_json, owner_json


@dataclass(frozen=True)
class ExecSegment:
    job: int
    start: Fraction
    end: Fraction

    def to_json(self) -> dict[str, Any]:
        return {"job": self.job, "start": fmt(self.start), "end": fmt(self.end)}


@dataclass
class Trace:
    params: AlgoParams
    instance: Instance
    events: list[dict[str, Any]]
    execution: list[ExecSegment]
    admissions: dict[int, tuple[Fraction, Owner]]
    completions: dict[int, Fraction]
    commitments: dict[int, Fraction]
    timeline: list[Segment]
    tree: InterruptionTree

    @property
    def on_time(self) -> list[int]:
        jobs = self.instance.by_id()
        return sorted(j for j, c in self.completions.items() if c <= jobs[j].d)

    @property
    def late(self) -> list[int]:
        jobs = self.instance.by_id()
        return sorted(j for j, c in self.completions.items() if c > jobs[j].d)

    def summary(self) -> dict[str, int]:
        late = set(self.late)
        return {
            "released": len(self.instance.jobs),
            "admitted": len(self.admissions),
            "completed": len(self.completions),
            "on_time": len(self.on_time),
            "late": len(late),
            "commitments_broken": sum(1 for j in self.commitments if j in late or j not in self.completions),
        }

    def to_json(self) -> dict[str, Any]:
        return {
            "instance": self.instance.to_json(),
            "params": self.params.to_json(),
            "events": self.events,
            "execution": [s.to_json() for s in self.execution],
            "segments": [s.to_json() for s in self.timeline],
            "tree": self.tree.to_json(),
            "summary": self.summary(),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Trace:
        from .core import instance_from_json

        instance = instance_from_json(data["instance"])
        params = AlgoParams.from_json(data["params"])
        admissions: dict[int, tuple[Fraction, Owner]] = {}
        completions: dict[int, Fraction] = {}
        commitments: dict[int, Fraction] = {}
        for ev in data["events"]:
            kind = ev["event"]
            if kind == "admit":
                admissions[ev["job"]] = (rat(ev["t"]), owner_from_json(ev["parent"]))
            elif kind == "complete":
                completions[ev["job"]] = rat(ev["t"])
            elif kind == "commit":
                commitments[ev["job"]] = rat(ev["t"])
        execution = [ExecSegment(s["job"], rat(s["start"]), rat(s["end"])) for s in data["execution"]]
        segments = [Segment.from_json(s) for s in data["segments"]]
        tree = InterruptionTree.from_parents(
            {j: par for j, (_, par) in admissions.items()}, {j: a for j, (a, _) in admissions.items()}
        )
        return cls(params, instance, list(data["events"]), execution, admissions, completions, commitments, segments, tree)


class RegionScheduler:
    """Online region-algorithm state machine.

    Jobs are handed over with :meth:`add_job` no earlier than the current
    clock; :meth:`advance_to` processes every event up to a time. The
    scheduler never looks at jobs before their release date.
    """

    def __init__(self, params: AlgoParams) -> None:
        self.params = params
        self.clock: Fraction | None = None
        self.timeline = Timeline()
        self.jobs: dict[int, Job] = {}
        self._future: list[tuple[Fraction, int]] = []
        self.pool: set[int] = set()
        self.remaining: dict[int, Fraction] = {}
        self.unfinished: set[int] = set()
        self.completions: dict[int, Fraction] = {}
        self.commitments: dict[int, Fraction] = {}
        self.events: list[dict[str, Any]] = []
        self.execution: list[ExecSegment] = []

    # online interface

    def add_job(self, job: Job) -> None:
        if job.id in self.jobs:
            raise ValueError(f"job {job.id} already known")
        if self.clock is not None and job.r <= self.clock:
            raise ValueError(f"job {job.id} released at {fmt(job.r)}, not after clock {fmt(self.clock)}")
        self.jobs[job.id] = job
        heapq.heappush(self._future, (job.r, job.id))

    def advance_to(self, until: Fraction) -> None:
        while True:
            t = self._next_event()
            if t is None or t > until:
                return
            self._step(t)

    def run_to_quiescence(self) -> None:
        while True:
            t = self._next_event()
            if t is None:
                return
            self._step(t)

    def snapshot(self) -> RegionScheduler:
        return copy.deepcopy(self)

    def counterfactual(self) -> dict[int, Fraction]:
        """Completion times reached if nothing beyond the current clock is released."""
        shadow = self.snapshot()
        for _, jid in shadow._future:
            del shadow.jobs[jid]
        shadow._future = []
        shadow.run_to_quiescence()
        return dict(shadow.completions)

    def on_time_count(self) -> int:
        return sum(1 for j, c in self.completions.items() if c <= self.jobs[j].d)

    # engine

    def spt_pick(self) -> int | None:
        return spt_pick({j: self.jobs[j].p for j in self.unfinished}, self.timeline.admitted_at)

    def _next_event(self) -> Fraction | None:
        candidates = []
        if self._future:
            candidates.append(self._future[0][0])
        if self.clock is not None:
            nb = self.timeline.next_boundary(self.clock)
            if nb is not None and (self.pool or self._future):
                candidates.append(nb)
            running = self.spt_pick()
            if running is not None:
                candidates.append(self.clock + self.remaining[running])
        return min(candidates) if candidates else None

    def _step(self, t: Fraction) -> None:
        if self.clock is not None and t > self.clock:
            self._execute(self.clock, t)
        boundary = self.clock is not None and any(s.end == t for s in self.timeline.segments)
        self.clock = t
        released = False
        while self._future and self._future[0][0] == t:
            _, jid = heapq.heappop(self._future)
            self.pool.add(jid)
            self.events.append({"event": "release", "t": fmt(t), "job": jid})
            released = True
        if released or boundary:
            self._preempt_routine(t)

    def _execute(self, start: Fraction, end: Fraction) -> None:
        job = self.spt_pick()
        if job is None:
            return
        self.remaining[job] -= end - start
        if self.execution and self.execution[-1].job == job and self.execution[-1].end == start:
            self.execution[-1] = ExecSegment(job, self.execution[-1].start, end)
        else:
            self.execution.append(ExecSegment(job, start, end))
        if self.remaining[job] == 0:
            self.unfinished.discard(job)
            self.completions[job] = end
            self.events.append({"event": "complete", "t": fmt(end), "job": job, "on_time": end <= self.jobs[job].d})

    def available(self, t: Fraction) -> list[int]:
        delta = self.params.delta
        self.pool = {j for j in self.pool if self.jobs[j].d - t >= (1 + delta) * self.jobs[j].p}
        return sorted(self.pool, key=lambda j: (self.jobs[j].p, j))

    def _preempt_routine(self, t: Fraction) -> bool:
        cands = self.available(t)
        if not cands:
            return False
        i = cands[0]
        owner = self.timeline.owner_at(t)
        p_i = self.jobs[i].p
        if owner is not M and not p_i < self.params.beta * self.jobs[owner].p:
            return False
        parent = self.timeline.reserve_region(i, self.params.alpha * p_i, t)
        self.pool.discard(i)
        self.remaining[i] = p_i
        self.unfinished.add(i)
        self.events.append({"event": "admit", "t": fmt(t), "job": i, "parent": owner_json(parent)})
        if self.params.model.commits:
            self.commitments[i] = t
            self.events.append({"event": "commit", "t": fmt(t), "job": i})
        return True

    def trace(self, instance: Instance) -> Trace:
        admissions = {j: (a, self.timeline.parent[j]) for j, a in self.timeline.admitted_at.items()}
        return Trace(
            self.params,
            instance,
            list(self.events),
            list(self.execution),
            admissions,
            dict(self.completions),
            dict(self.commitments),
            list(self.timeline.segments),
            finalize_tree(self.timeline),
        )


def spt_pick(processing: dict[int, Fraction], admitted_at: dict[int, Fraction]) -> int | None:
    """Shortest admitted unfinished job; ties go to the earlier admission, then the smaller id."""
    if not processing:
        return None
    return min(processing, key=lambda j: (processing[j], admitted_at[j], j))


def run(instance: Instance, params: AlgoParams) -> Trace:
    sched = RegionScheduler(params)
    for job in sorted(instance.jobs, key=lambda j: (j.r, j.id)):
        sched.add_job(job)
    sched.run_to_quiescence()
    return sched.trace(instance)


def verify_commitments(trace: Trace) -> list[int]:
    """Admitted jobs that missed their deadline (or never finished)."""
    jobs = trace.instance.by_id()
    return sorted(
        j for j in trace.admissions if j not in trace.completions or trace.completions[j] > jobs[j].d
    )
