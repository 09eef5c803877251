"""Lower-bound instance families and adaptive adversaries.

Static generators return an :class:`Instance`. The adaptive levels adversary
drives a :class:`RegionScheduler` (or anything exposing the same online
interface) job by job and scores it on every prefix of the release sequence.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .core import AlgoParams, Instance, Job, ParameterError, fmt, rat
from .oracle import max_throughput_subset
from .scheduler import RegionScheduler, run


def _ratio(opt: Fraction, alg: int) -> Fraction:
    if alg == 0:
        return opt if opt > 0 else Fraction(1)
    return opt / alg


@dataclass
class AdversaryOutcome:
    instance: Instance
    prefix_opt: list[Fraction]
    prefix_alg: list[int]
    algorithm_value: int
    levels_reached: int = 0
    log: list[dict[str, Any]] = field(default_factory=list)

    @property
    def ratio(self) -> Fraction:
        return max((_ratio(o, a) for o, a in zip(self.prefix_opt, self.prefix_alg)), default=Fraction(1))

    def to_json(self) -> dict[str, Any]:
        return {
            "instance": self.instance.to_json(),
            "prefix_opt": [fmt(v) for v in self.prefix_opt],
            "prefix_alg": self.prefix_alg,
            "algorithm_value": self.algorithm_value,
            "levels_reached": self.levels_reached,
            "ratio": fmt(self.ratio),
            "log": self.log,
        }


def gen_random_slack(
    n: int,
    epsilon: Any,
    horizon: Any = 10,
    seed: int = 0,
    p_range: tuple[Any, Any] = (Fraction(1, 4), 4),
    scales: int = 8,
    max_stretch: Any = 2,
    denominator: int = 8,
) -> Instance:
    """Seeded random jobs that all satisfy the declared slack.

    Releases are uniform on a ``1/denominator`` grid over ``[0, horizon]``.
    A processing time is a grid value from ``p_range`` divided by ``2**k``
    with ``k`` uniform in ``0..scales``, so sizes span several orders of
    magnitude and nested admissions actually occur. The window is
    ``(1 + eps) * u * p`` with ``u`` uniform on ``[1, max_stretch]``.
    """
    if n < 0:
        raise ParameterError("n must be >= 0")
    eps = rat(epsilon)
    rng = random.Random(seed)
    lo, hi = (rat(x) for x in p_range)
    stretch = rat(max_stretch)
    D = denominator
    jobs = []
    for k in range(n):
        r = Fraction(rng.randint(0, int(rat(horizon) * D)), D)
        base = Fraction(rng.randint(max(1, math.ceil(lo * D)), int(hi * D)), D)
        p = base / 2 ** rng.randint(0, scales)
        u = 1 + Fraction(rng.randint(0, int((stretch - 1) * D)), D)
        jobs.append(Job(k, r, p, r + (1 + eps) * u * p))
    return Instance.build(jobs, eps, {"family": "random", "seed": seed})


def gen_grid_instance(n: int, epsilon: Any, seed: int, denominator: int = 16, horizon: int = 6) -> Instance:
    """Random slack instance whose releases, sizes, and deadlines share one denominator.

    Sizes are shrunk by a random power of four so that nested admissions occur.
    """
    eps = rat(epsilon)
    rng = random.Random(seed)
    D = denominator
    jobs = []
    for k in range(n):
        r = Fraction(rng.randint(0, horizon * D), D)
        p = Fraction(max(1, rng.randint(1, 3 * D) >> (2 * rng.randint(0, 2))), D)
        window = (1 + eps) * p * (1 + Fraction(rng.randint(0, D), D))
        d = r + Fraction(math.ceil(window * D), D)
        jobs.append(Job(k, r, p, d))
    return Instance.build(jobs, eps, {"family": "grid", "seed": seed})


def gen_alpha_beta_lb(epsilon: Any, alpha: Any, beta: Any, phi: Any) -> Instance:
    """One unit job with a long window plus ``floor(alpha/beta)`` jobs of size beta inside its region."""
    eps, a, b, ph = (rat(x) for x in (epsilon, alpha, beta, phi))
    if not 0 < ph < b < 1:
        raise ParameterError("need 0 < phi < beta < 1")
    if a < 1 or a < eps:
        raise ParameterError("need alpha >= 1 and alpha >= epsilon")
    jobs = [Job(0, Fraction(0), Fraction(1), a + 1)]
    for j in range(1, math.floor(a / b) + 1):
        r = (j - 1) * b + ph
        jobs.append(Job(j, r, b, r + (1 + eps) * b))
    meta = {"family": "alpha_beta_lb", "epsilon": fmt(eps), "alpha": fmt(a), "beta": fmt(b), "phi": fmt(ph)}
    return Instance.build(jobs, eps, meta)


def commit_block_count(alpha: Fraction, beta: Fraction) -> int:
    """The positive integer c with 1/(beta(c+1)) < alpha <= 1/(beta c)."""
    c = math.floor(1 / (alpha * beta))
    if c < 1:
        raise ParameterError("alpha * beta > 1: no positive integer c satisfies the bracketing")
    return c


def gen_commit_tight_family(epsilon: Any, delta: Any, alpha: Any, beta: Any, m: int, phi: Any) -> Instance:
    """Job 0 squeezed by a block of c tight jobs and a geometric tail of m jobs.

    Ids: the auxiliary job is -1, job 0 is the squeezed job, the block uses
    1..c and the geometric tail uses c+1..c+m.
    """
    eps, dl, a, b, ph = (rat(x) for x in (epsilon, delta, alpha, beta, phi))
    if not 0 < b < dl < eps:
        raise ParameterError("need 0 < beta < delta < epsilon")
    if not 0 < ph < b:
        raise ParameterError("need 0 < phi < beta")
    if m < 0:
        raise ParameterError("m must be >= 0")
    c = commit_block_count(a, b)
    jobs = [Job(-1, Fraction(0), Fraction(1), 1 + eps)]
    d0 = a + 1 + dl
    jobs.append(Job(0, a - (eps - dl), Fraction(1), d0))
    for i in range(c):
        r = a + Fraction(i, c) + ph
        p = b - ph
        jobs.append(Job(1 + i, r, p, r + (1 + eps) * p))
    tail_start = d0 - b / (1 - b)
    offset = Fraction(0)
    for j in range(1, m + 1):
        offset += b**j
        r = tail_start + offset
        p = (b - ph) ** j
        jobs.append(Job(c + j, r, p, r + (1 + eps) * p))
    meta = {"family": "commit_tight", "c": c, "m": m}
    return Instance.build(jobs, eps, meta)


def gen_waves(epsilon: Any, gamma: Any, k: int) -> list[Instance]:
    """Prefix instances of the wave construction; wave i (1-based) is released at ((i-1)/k) * gamma."""
    eps, g = rat(epsilon), rat(gamma)
    if not 0 < g < 1:
        raise ParameterError("gamma must lie in (0, 1)")
    if k < 1 or eps <= 0:
        raise ParameterError("need k >= 1 and epsilon > 0")
    jobs: list[Job] = []
    prefixes = []
    for i in range(1, k + 1):
        r = Fraction(i - 1, k) * g
        p = Fraction(1, 2**i) * (1 - g) / (1 + eps)
        for _ in range(2**i):
            jobs.append(Job(len(jobs), r, p, Fraction(1)))
        meta = {"family": "waves", "waves": i, "release_rule": "wave i (1-based) released at ((i-1)/k)*gamma"}
        prefixes.append(Instance.build(list(jobs), eps, meta))
    return prefixes


def gen_weighted_chain(epsilon: Any, delta: Any, n: int, c: Any) -> Instance:
    """Tight jobs with a common deadline, each released at the previous job's latest commitment time."""
    eps, dl, cc = rat(epsilon), rat(delta), rat(c)
    if not (0 < dl <= eps < 1 + dl):
        raise ParameterError("need 0 < delta <= epsilon < 1 + delta")
    if n < 1 or cc <= 0:
        raise ParameterError("need n >= 1 and c > 0")
    d = 1 + eps
    jobs = [Job(1, Fraction(0), Fraction(1), d, cc + 1)]
    for j in range(1, n):
        prev = jobs[-1]
        r = d - (1 + dl) * prev.p
        p = ((1 + dl) / (1 + eps)) ** j
        jobs.append(Job(j + 1, r, p, d, (cc + 1) ** (j + 1)))
    return Instance.build(jobs, eps, {"family": "weighted_chain"})


def gen_unitweight_commit_lb(epsilon: Any) -> Instance:
    eps = rat(epsilon)
    if not 0 < eps < Fraction(1, 4):
        raise ParameterError("need 0 < epsilon < 1/4")
    jobs = [Job(1, Fraction(0), Fraction(1), 1 + eps)]
    for k in range(math.floor((1 - eps) / eps)):
        jobs.append(Job(2 + k, 2 * eps, eps, Fraction(1)))
    return Instance.build(jobs, eps, {"family": "unitweight_commit_lb"})


def gen_levels_adaptive(
    epsilon: Any,
    max_levels: int,
    scheduler: RegionScheduler | Callable[[], RegionScheduler],
) -> AdversaryOutcome:
    """Adaptive level adversary against an online scheduler.

    Each level releases back-to-back tight jobs of size ``2 eps`` times the
    previous level's size. After every release the adversary asks whether the
    scheduler would finish that job if nothing else arrived; on the first yes
    the next level starts two thirds of the way through that job's size. A
    level that reaches ``floor(1/(8 eps))`` releases without a yes ends the run.
    """
    eps = rat(epsilon)
    if not 0 < eps < 1:
        raise ParameterError("epsilon must lie in (0, 1)")
    if max_levels < 1:
        raise ParameterError("max_levels must be >= 1")
    sched = scheduler() if callable(scheduler) else scheduler
    if not hasattr(sched, "counterfactual"):
        raise ParameterError("scheduler does not support counterfactual queries")
    cap = max(1, math.floor(1 / (8 * eps)))

    released: list[Job] = []
    log: list[dict[str, Any]] = []
    prefix_opt: list[Fraction] = []
    prefix_alg: list[int] = []
    size = Fraction(1)
    t = Fraction(0)
    levels = 0

    for level in range(max_levels):
        if level > 0:
            size *= 2 * eps
        levels = level + 1
        finished = False
        count = 1 if level == 0 else cap
        for _ in range(count):
            job = Job(len(released), t, size, t + (1 + eps) * size)
            sched.add_job(job)
            sched.advance_to(job.r)
            released.append(job)
            completions = sched.counterfactual()
            finishes = job.id in completions and completions[job.id] <= job.d
            prefix = Instance.build(list(released), eps)
            prefix_opt.append(max_throughput_subset(prefix).value)
            prefix_alg.append(sum(1 for j in released if j.id in completions and completions[j.id] <= j.d))
            log.append({"level": level, "job": job.id, "r": fmt(job.r), "p": fmt(size), "finishes": finishes})
            if finishes:
                finished = True
                t = job.r + Fraction(2, 3) * size
                break
            t = job.d
        if not finished:
            break

    sched.run_to_quiescence()
    instance = Instance.build(released, eps, {"family": "levels", "max_levels": max_levels})
    return AdversaryOutcome(instance, prefix_opt, prefix_alg, sched.on_time_count(), levels, log)


def region_scheduler_factory(params: AlgoParams) -> Callable[[], RegionScheduler]:
    return lambda: RegionScheduler(params)


def evaluate_static(instance: Instance, params: AlgoParams, weighted: bool = False) -> AdversaryOutcome:
    """Score a static instance by its full prefix only."""
    trace = run(instance, params)
    opt = max_throughput_subset(instance, weighted=weighted).value
    return AdversaryOutcome(instance, [opt], [len(trace.on_time)], len(trace.on_time))
