"""Trace verification, competitive ratios, and seeded benchmark sweeps."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable

from .core import AlgoParams, Instance, Model, ceil_div_half, check_condition1, default_params, fmt, lam
from .oracle import CapExceeded, max_throughput_subset
from .scheduler import Trace, run, verify_commitments
from .timeline import M, InterruptionTree


class TraceMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def to_json(self) -> dict[str, str]:
        return {"kind": self.kind, "detail": self.detail}


def _is_default(params: AlgoParams, epsilon: Fraction) -> bool:
    try:
        if params.model is Model.DELTA_COMMITMENT:
            ref = default_params(params.model, epsilon, params.delta)
        else:
            ref = default_params(params.model, epsilon)
    except ValueError:
        return False
    return ref == params


def verify_trace(trace: Trace, instance: Instance | None = None, params: AlgoParams | None = None) -> list[Violation]:
    """Check a finished trace against every structural and guarantee invariant."""
    if instance is not None and instance.to_json()["jobs"] != trace.instance.to_json()["jobs"]:
        raise TraceMismatch("trace was produced for a different instance")
    if params is not None and params != trace.params:
        raise TraceMismatch("trace was produced with different parameters")
    instance, params = trace.instance, trace.params
    jobs = instance.by_id()
    p = {j: job.p for j, job in jobs.items()}
    out: list[Violation] = []

    def bad(kind: str, detail: str) -> None:
        out.append(Violation(kind, detail))

    segs = trace.timeline
    for a, b in zip(segs, segs[1:]):
        if a.end > b.start:
            bad("Disjointness", f"segments [{fmt(a.start)},{fmt(a.end)}) and [{fmt(b.start)},{fmt(b.end)}) overlap")
    size: dict[int, Fraction] = {}
    first: dict[int, Fraction] = {}
    last: dict[int, Fraction] = {}
    for s in segs:
        if not s.start < s.end:
            bad("Disjointness", f"empty segment for job {s.owner}")
        if s.owner not in trace.admissions:
            bad("SizeConservation", f"segment owned by non-admitted job {s.owner}")
            continue
        size[s.owner] = size.get(s.owner, Fraction(0)) + (s.end - s.start)
        first.setdefault(s.owner, s.start)
        last[s.owner] = s.end
    for j, (a_j, _) in trace.admissions.items():
        if size.get(j) != params.alpha * p[j]:
            bad("SizeConservation", f"job {j}: region size {fmt(size.get(j, Fraction(0)))} != {fmt(params.alpha * p[j])}")
        if first.get(j) != a_j:
            bad("RegionStart", f"job {j}: region starts at {first.get(j)} but admitted at {fmt(a_j)}")

    # admission guard and parent consistency with the final regions
    admit_times = [a for a, _ in trace.admissions.values()]
    if len(set(admit_times)) != len(admit_times):
        bad("AdmissionGuard", "two admissions at the same instant")
    for j, (a_j, parent) in trace.admissions.items():
        job = jobs[j]
        if job.r > a_j:
            bad("AdmissionGuard", f"job {j} admitted before release")
        if job.d - a_j < (1 + params.delta) * job.p:
            bad("AdmissionGuard", f"job {j} admitted too close to its deadline")
        if parent is not M and not job.p < params.beta * p[parent]:
            bad("AdmissionGuard", f"job {j}: p={fmt(job.p)} not < beta * p_{parent}={fmt(params.beta * p[parent])}")
        # spans are laminar, so the innermost span strictly containing a_j is the interrupted owner
        enclosing = [k for k in first if k != j and first[k] < a_j < last[k]]
        expected = max(enclosing, key=lambda k: first[k]) if enclosing else M
        if expected != parent:
            bad("TreeParent", f"job {j}: recorded parent {parent}, regions imply {expected}")

    tree = InterruptionTree.from_parents(
        {j: par for j, (_, par) in trace.admissions.items()}, {j: a for j, (a, _) in trace.admissions.items()}
    )
    for msg in tree.decay_report(p, params.beta):
        bad("PathDecay", msg)

    # execution
    executed: dict[int, Fraction] = {}
    for a, b in zip(trace.execution, trace.execution[1:]):
        if a.end > b.start:
            bad("ExecutionOverlap", f"jobs {a.job} and {b.job} overlap at {fmt(b.start)}")
    for s in trace.execution:
        if s.job not in trace.admissions:
            bad("ExecutionOverlap", f"job {s.job} ran without admission")
            continue
        if s.start < trace.admissions[s.job][0]:
            bad("ExecutionOverlap", f"job {s.job} ran before admission")
        executed[s.job] = executed.get(s.job, Fraction(0)) + (s.end - s.start)
    for j, vol in executed.items():
        if vol > p[j]:
            bad("ExecutedVolume", f"job {j} ran {fmt(vol)} > p={fmt(p[j])}")
    for j in trace.admissions:
        done = executed.get(j, Fraction(0)) == p[j]
        if done != (j in trace.completions):
            bad("Completion", f"job {j}: completion entry inconsistent with executed volume")
        elif done:
            end = max(s.end for s in trace.execution if s.job == j)
            if end != trace.completions[j]:
                bad("Completion", f"job {j}: completion time {fmt(trace.completions[j])} != last run end {fmt(end)}")
    _check_spt(trace, p, bad)
    _check_region_priority(trace, bad)

    if params.alpha == 1:
        for j, c in trace.completions.items():
            if c != last.get(j):
                bad("AlphaOneCompletion", f"job {j} completed at {fmt(c)}, region ends at {fmt(last.get(j, Fraction(0)))}")

    admitted = len(trace.admissions)
    if params.model is Model.NO_COMMITMENT and _is_default(params, instance.epsilon):
        if len(trace.on_time) < ceil_div_half(admitted):
            bad("HalfCompletion", f"{len(trace.on_time)} on time < ceil({admitted}/2)")
    if params.model.commits and check_condition1(params.alpha, params.beta, params.delta):
        for j in verify_commitments(trace):
            bad("CommitmentSafety", f"committed job {j} missed its deadline")
    return out


def _timepoints(trace: Trace) -> list[Fraction]:
    pts = {s.start for s in trace.execution} | {s.end for s in trace.execution}
    pts |= {a for a, _ in trace.admissions.values()} | set(trace.completions.values())
    return sorted(pts)


def _check_spt(trace: Trace, p: dict[int, Fraction], bad) -> None:
    """Between consecutive decision instants the running job is the shortest unfinished admitted job."""
    pts = _timepoints(trace)
    for lo, hi in zip(pts, pts[1:]):
        active = [
            j for j, (a, _) in trace.admissions.items() if a <= lo and trace.completions.get(j, hi + 1) >= hi
        ]
        seg = next((s for s in trace.execution if s.start <= lo and hi <= s.end), None)
        if not active:
            if seg is not None:
                bad("SPTOrder", f"job {seg.job} ran in [{fmt(lo)},{fmt(hi)}) with nothing admitted")
            continue
        want = min(active, key=lambda j: (p[j], trace.admissions[j][0], j))
        if seg is None:
            bad("SPTOrder", f"machine idle in [{fmt(lo)},{fmt(hi)}) while job {want} was unfinished")
        elif seg.job != want:
            bad("SPTOrder", f"job {seg.job} ran in [{fmt(lo)},{fmt(hi)}) instead of {want}")


def _check_region_priority(trace: Trace, bad) -> None:
    """While j owns the region, j runs unless it has already finished."""
    if trace.params.alpha < 1:
        return
    for s in trace.timeline:
        done = trace.completions.get(s.owner)
        stop = s.end if done is None else min(s.end, done)
        if stop <= s.start:
            continue
        covered = Fraction(0)
        for e in trace.execution:
            if e.job == s.owner:
                lo, hi = max(e.start, s.start), min(e.end, stop)
                if hi > lo:
                    covered += hi - lo
        if covered != stop - s.start:
            bad("RegionPriority", f"job {s.owner} did not run throughout its own segment [{fmt(s.start)},{fmt(stop)})")


def competitive_ratio(instance: Instance, params: AlgoParams, weighted: bool = False) -> tuple[Fraction, bool]:
    """Exact OPT / on-time ratio; the flag is set when the algorithm finished nothing but OPT > 0."""
    trace = run(instance, params)
    opt = max_throughput_subset(instance, weighted=weighted).value
    jobs = instance.by_id()
    alg = sum((jobs[j].w if weighted else Fraction(1)) for j in trace.on_time)
    if alg == 0:
        return (opt, True) if opt > 0 else (Fraction(1), False)
    return opt / alg, False


ROW_FIELDS = [
    "instance", "model", "alpha", "beta", "delta", "epsilon", "admitted", "on_time",
    "opt", "ratio", "lambda", "lambda_bound_ok", "half_ok", "commit_ok", "violations",
]


def evaluate_instance(instance: Instance, params: AlgoParams, with_oracle: bool = True) -> dict[str, Any]:
    trace = run(instance, params)
    admitted = len(trace.admissions)
    on_time = len(trace.on_time)
    eps = min(instance.epsilon, Fraction(1))
    lmb = lam(eps, params) if params.delta < eps else None
    opt: Fraction | None = None
    if with_oracle:
        try:
            opt = max_throughput_subset(instance).value
        except CapExceeded:
            opt = None
    violations = verify_trace(trace)
    row: dict[str, Any] = {
        "instance": instance.meta.get("id", instance.meta.get("seed", 0)),
        "model": params.model.value,
        "alpha": fmt(params.alpha),
        "beta": fmt(params.beta),
        "delta": fmt(params.delta),
        "epsilon": fmt(instance.epsilon),
        "admitted": admitted,
        "on_time": on_time,
        "opt": fmt(opt) if opt is not None else "CapExceeded",
        "ratio": None,
        "lambda": fmt(lmb) if lmb is not None else None,
        "lambda_bound_ok": None,
        "half_ok": on_time >= ceil_div_half(admitted),
        "commit_ok": not verify_commitments(trace),
        "violations": [v.to_json() for v in violations],
    }
    if opt is not None:
        if on_time:
            row["ratio"] = fmt(opt / on_time)
        else:
            row["ratio"] = fmt(opt) if opt > 0 else "1"
        if lmb is not None:
            row["lambda_bound_ok"] = opt <= (lmb + 1) * admitted
    return row


@dataclass
class ExperimentReport:
    rows: list[dict[str, Any]]

    def aggregate(self) -> dict[str, Any]:
        ratios = [Fraction(r["ratio"]) for r in self.rows if r["ratio"] is not None]
        mean = sum(ratios, Fraction(0)) / len(ratios) if ratios else None
        return {
            "instances": len(self.rows),
            "max_ratio": fmt(max(ratios)) if ratios else None,
            "mean_ratio": fmt(mean) if mean is not None else None,
            "lambda_violations": sum(1 for r in self.rows if r["lambda_bound_ok"] is False),
            "half_completion_violations": sum(
                1 for r in self.rows if any(v["kind"] == "HalfCompletion" for v in r["violations"])
            ),
            "commitment_violations": sum(
                1 for r in self.rows if any(v["kind"] == "CommitmentSafety" for v in r["violations"])
            ),
            "invariant_violations": sum(len(r["violations"]) for r in self.rows),
            "oracle_cap_exceeded": sum(1 for r in self.rows if r["opt"] == "CapExceeded"),
        }

    def to_json(self) -> dict[str, Any]:
        return {"rows": self.rows, "aggregate": self.aggregate()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for r in self.rows:
            cells = []
            for key in ROW_FIELDS:
                v = r[key]
                if key == "ratio" and v is not None:
                    v = f"{float(Fraction(v)):.6f}"
                elif key == "violations":
                    v = len(v)
                cells.append("" if v is None else v)
            writer.writerow(cells)
        return buf.getvalue()


def _bench_task(task: tuple[Instance, AlgoParams, bool]) -> dict[str, Any]:
    instance, params, with_oracle = task
    return evaluate_instance(instance, params, with_oracle)


def bench(
    instances: Iterable[Instance],
    params_for: Any,
    with_oracle: bool = True,
    workers: int = 1,
) -> ExperimentReport:
    """Evaluate every instance; ``params_for`` maps an instance to its AlgoParams."""
    tasks = [(inst, params_for(inst) if callable(params_for) else params_for, with_oracle) for inst in instances]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_bench_task(t) for t in tasks]
    rows.sort(key=lambda r: (str(type(r["instance"])), r["instance"], r["model"]))
    return ExperimentReport(rows)
