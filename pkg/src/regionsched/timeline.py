"""Region bookkeeping: one global sorted list of disjoint ownership segments."""

from __future__ import annotations

import bisect
import copy
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, Union

from .core import fmt, rat


class _MachineRoot:
    """The virtual machine job: infinite processing time, admitted at -inf."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "M"

    def __reduce__(self):
        return (_MachineRoot, ())

    def __deepcopy__(self, memo):
        return self


M = _MachineRoot()
Owner = Union[int, _MachineRoot]


def owner_json(owner: Owner) -> int | str:
    return "M" if owner is M else owner


def owner_from_json(value: int | str) -> Owner:
    return M if value == "M" else int(value)


@dataclass(frozen=True)
class Segment:
    start: Fraction
    end: Fraction
    owner: int

    @property
    def length(self) -> Fraction:
        return self.end - self.start

    def to_json(self) -> dict[str, Any]:
        return {"start": fmt(self.start), "end": fmt(self.end), "owner": owner_json(self.owner)}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Segment:
        return cls(rat(data["start"]), rat(data["end"]), owner_from_json(data["owner"]))


class Timeline:
    """Disjoint regions realized as sorted half-open segments ``[start, end)``.

    Reserving a region at ``t`` splits the segment containing ``t`` (if any)
    and shifts every later piece right by the new region's length.
    """

    def __init__(self) -> None:
        self.segments: list[Segment] = []
        self.admitted_at: dict[int, Fraction] = {}
        self.parent: dict[int, Owner] = {}
        self.reserved: dict[int, Fraction] = {}
        self._starts: list[Fraction] = []

    def copy(self) -> Timeline:
        return copy.deepcopy(self)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    def _index_containing(self, t: Fraction) -> int | None:
        i = bisect.bisect_right(self._starts, t) - 1
        if i >= 0 and self.segments[i].start <= t < self.segments[i].end:
            return i
        return None

    def owner_at(self, t: Fraction) -> Owner:
        i = self._index_containing(t)
        return M if i is None else self.segments[i].owner

    def next_boundary(self, t: Fraction) -> Fraction | None:
        """Smallest segment end strictly after ``t``."""
        i = bisect.bisect_right(self._starts, t) - 1
        for seg in self.segments[max(i, 0):]:
            if seg.end > t:
                return seg.end
        return None

    def region_end(self, job: int) -> Fraction:
        return max(s.end for s in self.segments if s.owner == job)

    def region_of(self, job: int) -> list[Segment]:
        return [s for s in self.segments if s.owner == job]

    def reserve_region(self, job: int, length: Fraction, t: Fraction) -> Owner:
        """Reserve ``[t, t + length)`` for ``job`` and return the interrupted owner."""
        if job in self.admitted_at:
            raise AssertionError(f"job {job} already holds a region")
        if length <= 0:
            raise AssertionError("region length must be positive")
        idx = self._index_containing(t)
        parent: Owner = M
        before: list[Segment]
        after: list[Segment]
        if idx is None:
            cut = bisect.bisect_left(self._starts, t)
            before, after = self.segments[:cut], self.segments[cut:]
        else:
            seg = self.segments[idx]
            parent = seg.owner
            before = self.segments[:idx]
            after = self.segments[idx + 1 :]
            if seg.start < t:
                before = before + [Segment(seg.start, t, seg.owner)]
            after = [Segment(t, seg.end, seg.owner)] + after
        shifted = [Segment(s.start + length, s.end + length, s.owner) for s in after]
        self.segments = before + [Segment(t, t + length, job)] + shifted
        self._starts = [s.start for s in self.segments]
        self.admitted_at[job] = t
        self.parent[job] = parent
        self.reserved[job] = length
        return parent

    def to_json(self) -> list[dict[str, Any]]:
        return [s.to_json() for s in self.segments]

    def check(self) -> list[str]:
        """Full-scan structural check: ordering, disjointness, sizes, fixed starts."""
        problems = []
        for a, b in zip(self.segments, self.segments[1:]):
            if a.end > b.start:
                problems.append(f"segments overlap: {a} / {b}")
        for s in self.segments:
            if not s.start < s.end:
                problems.append(f"empty segment {s}")
        totals: dict[int, Fraction] = {}
        firsts: dict[int, Fraction] = {}
        for s in self.segments:
            totals[s.owner] = totals.get(s.owner, Fraction(0)) + s.length
            firsts.setdefault(s.owner, s.start)
        for job, size in self.reserved.items():
            if totals.get(job) != size:
                problems.append(f"job {job}: region size {totals.get(job)} != {size}")
            if firsts.get(job) != self.admitted_at[job]:
                problems.append(f"job {job}: region start moved")
        return problems


@dataclass
class InterruptionTree:
    """Parent links between admitted jobs, rooted at the machine job ``M``."""

    parent: dict[int, Owner]
    children: dict[Owner, list[int]] = field(default_factory=dict)
    tau: dict[Owner, int] = field(default_factory=dict)

    @classmethod
    def from_parents(cls, parent: dict[int, Owner], admitted_at: dict[int, Fraction]) -> InterruptionTree:
        children: dict[Owner, list[int]] = {M: []}
        for job in sorted(parent, key=lambda j: (admitted_at[j], j)):
            children.setdefault(job, [])
            children.setdefault(parent[job], []).append(job)
        tree = cls(dict(parent), children)
        tree.tau = {node: tree._count_below(node) for node in children}
        return tree

    def _count_below(self, node: Owner) -> int:
        stack = list(self.children.get(node, []))
        n = 0
        while stack:
            n += 1
            stack.extend(self.children.get(stack.pop(), []))
        return n

    def edges(self) -> Iterator[tuple[Owner, int]]:
        for child, par in self.parent.items():
            yield par, child

    def depth(self, job: Owner) -> int:
        n = 0
        while job is not M:
            job = self.parent[job]
            n += 1
        return n

    def heaviest_path_below(self, node: Owner, p: dict[int, Fraction]) -> Fraction:
        """Largest total processing time on a downward path starting at a child of ``node``."""
        best = Fraction(0)
        for c in self.children.get(node, []):
            best = max(best, p[c] + self.heaviest_path_below(c, p))
        return best

    def decay_report(self, p: dict[int, Fraction], beta: Fraction) -> list[str]:
        """Geometric decay along root-to-leaf paths; returns violation messages."""
        problems = []
        for par, child in self.edges():
            if par is not M and not p[child] < beta * p[par]:
                problems.append(f"edge {par}->{child}: p={fmt(p[child])} not < beta*{fmt(p[par])}")
        bound = beta / (1 - beta)
        for node in self.children:
            if node is M:
                continue
            below = self.heaviest_path_below(node, p)
            if below and not below < bound * p[node]:
                problems.append(f"path below {node}: volume {fmt(below)} not < {fmt(bound * p[node])}")
        return problems

    def to_json(self) -> dict[str, Any]:
        return {
            "parent": {str(j): owner_json(k) for j, k in sorted(self.parent.items())},
            "tau": {str(owner_json(k)): v for k, v in sorted(self.tau.items(), key=lambda kv: (kv[0] is not M, kv[0] if kv[0] is not M else 0))},
        }


def finalize_tree(timeline: Timeline) -> InterruptionTree:
    return InterruptionTree.from_parents(timeline.parent, timeline.admitted_at)
