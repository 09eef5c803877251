"""Domain types, exact time arithmetic, and the JSON instance format.

All time quantities are :class:`fractions.Fraction` values. ``Fraction`` keeps
numerator and denominator in lowest terms with a positive denominator, so
every sum, difference, and rational scaling performed by the engine is exact.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

Time = Fraction


class InstanceError(ValueError):
    """Base class for instance validation and parsing failures."""

    code = "InstanceError"


class MalformedInstance(InstanceError):
    code = "MalformedInstance"


class NonPositiveProcessing(InstanceError):
    code = "NonPositiveProcessing"


class DeadlineNotAfterRelease(InstanceError):
    code = "DeadlineNotAfterRelease"


class WindowTooShort(InstanceError):
    code = "WindowTooShort"


class NonPositiveWeight(InstanceError):
    code = "NonPositiveWeight"


class DuplicateJobId(InstanceError):
    code = "DuplicateJobId"


class ParameterError(ValueError):
    """Raised for algorithm or generator parameters outside their domain."""


def rat(value: Any) -> Fraction:
    """Parse an int, Fraction, or ``"num/den"`` string into a Fraction.

    Floats are rejected; they would silently introduce rounding.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def fmt(q: Fraction) -> str:
    """Serialize a rational as ``"n"`` or ``"n/d"``."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def ceil_div_half(n: int) -> int:
    """Return ceil(n / 2) for a non-negative integer."""
    return (n + 1) // 2


@dataclass(frozen=True, order=True)
class Job:
    id: int
    r: Fraction
    p: Fraction
    d: Fraction
    w: Fraction = Fraction(1)

    @property
    def laxity(self) -> Fraction:
        return self.d - self.r - self.p

    def satisfies_slack(self, eps: Fraction) -> bool:
        return self.d - self.r >= (1 + eps) * self.p

    def validate(self) -> None:
        if self.p <= 0:
            raise NonPositiveProcessing(f"job {self.id}: processing time {fmt(self.p)} must be > 0")
        if self.d <= self.r:
            raise DeadlineNotAfterRelease(f"job {self.id}: deadline {fmt(self.d)} <= release {fmt(self.r)}")
        if self.d - self.r < self.p:
            raise WindowTooShort(f"job {self.id}: window {fmt(self.d - self.r)} shorter than p={fmt(self.p)}")
        if self.w <= 0:
            raise NonPositiveWeight(f"job {self.id}: weight must be > 0")

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"id": self.id, "r": fmt(self.r), "p": fmt(self.p), "d": fmt(self.d)}
        if self.w != 1:
            out["w"] = fmt(self.w)
        return out


def make_job(id: int, r: Any, p: Any, d: Any, w: Any = 1) -> Job:
    return Job(int(id), rat(r), rat(p), rat(d), rat(w))


@dataclass(frozen=True)
class Instance:
    """A validated job set. Slack violations are reported, not rejected."""

    jobs: tuple[Job, ...]
    epsilon: Fraction
    slack_violations: tuple[int, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def build(cls, jobs: Iterable[Job], epsilon: Any, meta: dict[str, Any] | None = None) -> Instance:
        eps = rat(epsilon)
        if eps <= 0:
            raise MalformedInstance("epsilon must be > 0")
        jobs = tuple(jobs)
        seen: set[int] = set()
        for job in jobs:
            if job.id in seen:
                raise DuplicateJobId(f"duplicate job id {job.id}")
            seen.add(job.id)
            job.validate()
        violations = tuple(j.id for j in jobs if not j.satisfies_slack(eps))
        return cls(jobs, eps, violations, dict(meta or {}))

    def __len__(self) -> int:
        return len(self.jobs)

    def by_id(self) -> dict[int, Job]:
        return {j.id: j for j in self.jobs}

    def prefix(self, count: int) -> Instance:
        """Instance formed by the first ``count`` jobs in release order."""
        ordered = sorted(self.jobs, key=lambda j: (j.r, j.id))
        return Instance.build(ordered[:count], self.epsilon, self.meta)

    def denominator(self) -> int:
        """Least common denominator of every release, processing time, and deadline."""
        den = 1
        for j in self.jobs:
            for q in (j.r, j.p, j.d):
                den = math.lcm(den, q.denominator)
        return den

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"epsilon": fmt(self.epsilon), "jobs": [j.to_json() for j in self.jobs]}
        if self.meta:
            out["meta"] = self.meta
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def instance_from_json(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise MalformedInstance("instance must be a JSON object")
    if "epsilon" not in data or "jobs" not in data:
        raise MalformedInstance("instance requires 'epsilon' and 'jobs'")
    if not isinstance(data["jobs"], list):
        raise MalformedInstance("'jobs' must be a list")
    try:
        eps = rat(data["epsilon"])
        jobs = []
        for raw in data["jobs"]:
            if not isinstance(raw, dict):
                raise MalformedInstance("each job must be an object")
            if not isinstance(raw.get("id"), int) or isinstance(raw.get("id"), bool):
                raise MalformedInstance(f"job id must be an integer: {raw.get('id')!r}")
            jobs.append(make_job(raw["id"], raw["r"], raw["p"], raw["d"], raw.get("w", 1)))
    except KeyError as exc:
        raise MalformedInstance(f"job missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise MalformedInstance(str(exc)) from exc
    meta = data.get("meta") if isinstance(data.get("meta"), dict) else None
    return Instance.build(jobs, eps, meta)


def parse_instance(text: str | bytes) -> Instance:
    """Parse the JSON instance format; raises an :class:`InstanceError` subclass."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInstance(f"invalid JSON: {exc}") from exc
    return instance_from_json(data)


class Model(enum.Enum):
    NO_COMMITMENT = "none"
    COMMIT_ON_ADMISSION = "admission"
    DELTA_COMMITMENT = "delta"

    @property
    def commits(self) -> bool:
        return self is not Model.NO_COMMITMENT


@dataclass(frozen=True)
class AlgoParams:
    alpha: Fraction
    beta: Fraction
    delta: Fraction
    model: Model

    def __post_init__(self) -> None:
        if self.alpha < 1:
            raise ParameterError("alpha must be >= 1")
        if not 0 < self.beta < 1:
            raise ParameterError("beta must lie in (0, 1)")
        if self.delta <= 0:
            raise ParameterError("delta must be > 0")

    def to_json(self) -> dict[str, str]:
        return {
            "model": self.model.value,
            "alpha": fmt(self.alpha),
            "beta": fmt(self.beta),
            "delta": fmt(self.delta),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> AlgoParams:
        return cls(rat(data["alpha"]), rat(data["beta"]), rat(data["delta"]), Model(data["model"]))


def default_params(model: Model, epsilon: Any, delta: Any = None) -> AlgoParams:
    """Parameter choices of the region algorithm for each commitment model.

    Slackness above 1 is clamped to 1 before the parameters are derived.
    """
    eps = rat(epsilon)
    if eps <= 0:
        raise ParameterError("epsilon must be > 0")
    eps = min(eps, Fraction(1))
    if model is Model.DELTA_COMMITMENT:
        if delta is None:
            raise ParameterError("delta-commitment requires delta")
        dl = rat(delta)
        if not 0 < dl < eps:
            raise ParameterError("delta-commitment requires 0 < delta < epsilon")
        return AlgoParams(8 / dl, dl / 4, dl, model)
    if delta is not None:
        raise ParameterError("delta is only accepted for the delta-commitment model")
    if model is Model.NO_COMMITMENT:
        return AlgoParams(Fraction(1), eps / 4, eps / 2, model)
    return AlgoParams(4 / eps, eps / 8, eps / 2, model)


def condition1_value(alpha: Fraction, beta: Fraction, delta: Fraction) -> Fraction:
    """Left-hand side ((a-1)/a) * (1 + d - b/(1-b)) of the on-time guarantee."""
    alpha, beta, delta = rat(alpha), rat(beta), rat(delta)
    return (alpha - 1) / alpha * (1 + delta - beta / (1 - beta))


def check_condition1(alpha: Any, beta: Any, delta: Any) -> bool:
    """True iff every admitted job is guaranteed to finish by its deadline."""
    return condition1_value(rat(alpha), rat(beta), rat(delta)) >= 1


def lam(epsilon: Fraction, params: AlgoParams) -> Fraction:
    """Per-admitted-job charge factor (eps/(eps-delta)) * (alpha/beta)."""
    eps = min(rat(epsilon), Fraction(1))
    if params.delta >= eps:
        raise ParameterError("lambda is defined only for delta < epsilon")
    return eps / (eps - params.delta) * (params.alpha / params.beta)
