"""Domain types and schedule metrics for power-aware speed scaling.

The model: a processor runs at a chosen speed, consuming power speed**alpha
for some alpha > 1. A job with work w run at constant speed s takes w/s time
and uses w * s**(alpha-1) energy. Everything downstream (block solvers, the
energy/makespan frontier, flow approximation) is built on the types here plus
the canonical-schedule checker used as the test backbone.

All values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

REL_TOL = 1e-9
ABS_TOL = 1e-12


def is_close(a: float, b: float) -> bool:
    """Equality under the package-wide tolerance policy."""
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=ABS_TOL)


class SchedulingError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(SchedulingError, ValueError):
    """An operation was called with out-of-domain arguments."""


class InvalidInstanceError(SchedulingError, ValueError):
    """Instance data (file or dict) failed validation."""


class DegenerateReleaseError(SchedulingError):
    """A forced block speed would divide by a zero release span."""


class UnsupportedInstanceError(SchedulingError):
    """The instance shape is outside the operation's contract."""


class InfeasibleError(SchedulingError):
    """No schedule can meet the request (e.g. deadline at or before r_n)."""


class ConvergenceError(SchedulingError):
    """An iterative solve ran out of iterations. Carries the best value."""

    def __init__(self, message: str, best: float | None = None):
        super().__init__(message)
        self.best = best


class TooLargeError(SchedulingError):
    """Brute-force enumeration refused an instance above its cap."""


class InternalError(SchedulingError):
    """A solver invariant failed numerically; carries diagnostics."""


@dataclass(frozen=True, slots=True)
class Job:
    """One job: release time, work requirement, and 1-based input index."""

    release: float
    work: float
    id: int

    def __post_init__(self) -> None:
        if not (self.work > 0):
            raise InvalidArgumentError(f"job {self.id}: work must be > 0, got {self.work}")
        if self.release < 0:
            raise InvalidArgumentError(f"job {self.id}: release must be >= 0, got {self.release}")


@dataclass(frozen=True, slots=True)
class PowerModel:
    """Power-law power function, power = speed**alpha with alpha > 1."""

    alpha: float

    def __post_init__(self) -> None:
        if not (self.alpha > 1):
            raise InvalidArgumentError(f"alpha must be > 1, got {self.alpha}")


@dataclass(frozen=True)
class Instance:
    """A scheduling instance: jobs sorted by (release, id), exponent, processors."""

    jobs: tuple[Job, ...]
    alpha: float
    processors: int = 1

    def __post_init__(self) -> None:
        if not self.jobs:
            raise InvalidInstanceError("instance must contain at least one job")
        if not (self.alpha > 1):
            raise InvalidInstanceError(f"alpha must be > 1, got {self.alpha}")
        if self.processors < 1:
            raise InvalidInstanceError(f"processors must be >= 1, got {self.processors}")
        prev = self.jobs[0]
        for job in self.jobs[1:]:
            if (job.release, job.id) < (prev.release, prev.id):
                raise InvalidInstanceError(
                    "jobs must be sorted by release time with ties in input order"
                )
            prev = job

    @cached_property
    def releases(self) -> tuple[float, ...]:
        return tuple(j.release for j in self.jobs)

    @cached_property
    def works(self) -> tuple[float, ...]:
        return tuple(j.work for j in self.jobs)

    @cached_property
    def model(self) -> PowerModel:
        return PowerModel(self.alpha)

    @property
    def n(self) -> int:
        return len(self.jobs)


def make_instance(
    releases: Sequence[float],
    works: Sequence[float],
    alpha: float,
    processors: int = 1,
) -> Instance:
    """Build an Instance from parallel release/work sequences.

    Ids follow the input order (1-based); jobs are then sorted by release
    with ties kept in input order.
    """
    if len(releases) != len(works):
        raise InvalidInstanceError("releases and works must have the same length")
    jobs = [Job(float(r), float(w), i + 1) for i, (r, w) in enumerate(zip(releases, works))]
    jobs.sort(key=lambda j: (j.release, j.id))
    return Instance(tuple(jobs), float(alpha), processors)


@dataclass(frozen=True, slots=True)
class ScheduledJob:
    """One timed execution: the job, its start, its (single) speed, processor."""

    job: Job
    start: float
    speed: float
    processor: int = 1

    def __post_init__(self) -> None:
        if not (self.speed > 0):
            raise InvalidArgumentError(f"job {self.job.id}: speed must be > 0")
        if self.start < self.job.release - max(ABS_TOL, REL_TOL * abs(self.job.release)):
            raise InvalidArgumentError(
                f"job {self.job.id}: start {self.start} precedes release {self.job.release}"
            )

    @property
    def completion(self) -> float:
        return self.start + self.job.work / self.speed


@dataclass(frozen=True, slots=True)
class BlockRun:
    """A contiguous run of jobs at one speed. Indices are 0-based into instance.jobs."""

    first: int
    last: int
    start: float
    speed: float


class Schedule:
    """A schedule: per-processor timed executions over an instance.

    Construct either from explicit items or from a block list (as produced by
    the block-merging solver); block-based schedules materialize their items
    lazily so metric queries on very large instances stay cheap.
    """

    def __init__(
        self,
        instance: Instance,
        items: Sequence[ScheduledJob] | None = None,
        blocks: Sequence[BlockRun] | None = None,
    ):
        if (items is None) == (blocks is None):
            raise InvalidArgumentError("provide exactly one of items or blocks")
        self.instance = instance
        self._blocks = tuple(blocks) if blocks is not None else None
        self._items = tuple(items) if items is not None else None

    @property
    def blocks(self) -> tuple[BlockRun, ...] | None:
        return self._blocks

    @property
    def items(self) -> tuple[ScheduledJob, ...]:
        if self._items is None:
            self._items = tuple(self._materialize())
        return self._items

    def _materialize(self) -> Iterator[ScheduledJob]:
        jobs = self.instance.jobs
        for block in self._blocks:  # type: ignore[union-attr]
            t = block.start
            speed = block.speed
            for k in range(block.first, block.last + 1):
                job = jobs[k]
                yield ScheduledJob(job, t, speed)
                t += job.work / speed

    def validate(self) -> None:
        """Raise unless every job appears once and per-processor runs do not overlap."""
        seen: set[int] = set()
        by_proc: dict[int, list[ScheduledJob]] = {}
        for item in self.items:
            if item.job.id in seen:
                raise InvalidArgumentError(f"job {item.job.id} scheduled more than once")
            seen.add(item.job.id)
            by_proc.setdefault(item.processor, []).append(item)
        if len(seen) != self.instance.n:
            raise InvalidArgumentError(
                f"schedule covers {len(seen)} of {self.instance.n} jobs"
            )
        for proc, runs in by_proc.items():
            runs.sort(key=lambda it: it.start)
            for a, b in zip(runs, runs[1:]):
                gap = b.start - a.completion
                if gap < -max(ABS_TOL, REL_TOL * abs(a.completion)):
                    raise InvalidArgumentError(
                        f"processor {proc}: jobs {a.job.id} and {b.job.id} overlap"
                    )


def energy_of_run(work: float, speed: float, model: PowerModel) -> float:
    """Energy of running `work` units at constant `speed`: work * speed**(alpha-1)."""
    if not (work > 0) or not (speed > 0):
        raise InvalidArgumentError("work and speed must be positive")
    return work * speed ** (model.alpha - 1.0)


def speed_for_energy(work: float, energy: float, model: PowerModel) -> float:
    """Speed at which `work` units consume exactly `energy`; inverse of energy_of_run."""
    if not (work > 0) or not (energy > 0):
        raise InvalidArgumentError("work and energy must be positive")
    return (energy / work) ** (1.0 / (model.alpha - 1.0))


def makespan(schedule: Schedule) -> float:
    """Latest completion time over all scheduled jobs."""
    if schedule.blocks is not None and schedule._items is None:
        blocks = schedule.blocks
        if not blocks:
            raise InvalidArgumentError("makespan of an empty schedule")
        best = -math.inf
        works = schedule.instance.works
        for block in blocks:
            span = sum(works[block.first : block.last + 1]) / block.speed
            best = max(best, block.start + span)
        return best
    if not schedule.items:
        raise InvalidArgumentError("makespan of an empty schedule")
    return max(item.completion for item in schedule.items)


def total_flow(schedule: Schedule) -> float:
    """Sum over jobs of completion minus release."""
    if schedule.blocks is not None and schedule._items is None:
        blocks = schedule.blocks
        if not blocks:
            raise InvalidArgumentError("total_flow of an empty schedule")
        jobs = schedule.instance.jobs
        acc = 0.0
        for block in blocks:
            t = block.start
            for k in range(block.first, block.last + 1):
                t += jobs[k].work / block.speed
                acc += t - jobs[k].release
        return acc
    if not schedule.items:
        raise InvalidArgumentError("total_flow of an empty schedule")
    return sum(item.completion - item.job.release for item in schedule.items)


def total_energy(schedule: Schedule) -> float:
    """Total energy: sum of energy_of_run over all executions."""
    model = schedule.instance.model
    if schedule.blocks is not None and schedule._items is None:
        works = schedule.instance.works
        return sum(
            energy_of_run(sum(works[b.first : b.last + 1]), b.speed, model)
            for b in schedule.blocks
        )
    if not schedule.items:
        raise InvalidArgumentError("total_energy of an empty schedule")
    return sum(energy_of_run(item.job.work, item.speed, model) for item in schedule.items)


@dataclass(frozen=True, slots=True)
class CanonicalReport:
    """Pass/fail for the five structural properties of the canonical schedule.

    1. every job runs exactly once at a single speed
    2. jobs run in release order
    3. no unforced idle: each start equals max(previous completion, release)
    4. jobs of the same block (strict overlap with the successor's release)
       run at the same speed
    5. block speeds never decrease across block boundaries
    """

    single_speed: bool
    release_order: bool
    no_idle: bool
    block_constant_speed: bool
    nondecreasing_block_speeds: bool

    @property
    def all_ok(self) -> bool:
        return (
            self.single_speed
            and self.release_order
            and self.no_idle
            and self.block_constant_speed
            and self.nondecreasing_block_speeds
        )


def _time_tol(*values: float) -> float:
    return max(ABS_TOL, REL_TOL * max(abs(v) for v in values))


def check_canonical(schedule: Schedule) -> CanonicalReport:
    """Check the five canonical properties of a uniprocessor schedule.

    Property 3 is checked as "no unforced idle": a job may start at its
    release after a genuine gap (the releases force it), but never later than
    max(previous completion, own release). Property 4 couples a consecutive
    pair only when the earlier job completes strictly after the later one's
    release; completion within tolerance of the next release is a permissible
    block boundary, where only property 5 (non-decreasing speeds) applies.
    """
    items = schedule.items
    if any(item.processor != items[0].processor for item in items):
        raise InvalidArgumentError(
            "check_canonical expects a uniprocessor schedule; apply it per processor"
        )
    if not items:
        raise InvalidArgumentError("check_canonical of an empty schedule")

    order = sorted(items, key=lambda it: (it.start, it.job.release, it.job.id))

    ids = [it.job.id for it in order]
    single_speed = len(set(ids)) == len(ids) and len(ids) == schedule.instance.n

    release_order = True
    for a, b in zip(order, order[1:]):
        if a.job.release > b.job.release + _time_tol(a.job.release, b.job.release):
            release_order = False
            break

    no_idle = True
    first = order[0]
    if abs(first.start - first.job.release) > _time_tol(first.start, first.job.release):
        no_idle = False
    for a, b in zip(order, order[1:]):
        expected = max(a.completion, b.job.release)
        if abs(b.start - expected) > _time_tol(b.start, expected, 1.0):
            no_idle = False
            break

    block_constant_speed = True
    nondecreasing_block_speeds = True
    for a, b in zip(order, order[1:]):
        tol = _time_tol(a.completion, b.job.release, 1.0)
        overlap = a.completion - b.job.release
        if overlap > tol:
            # same block: speeds must match
            if not math.isclose(a.speed, b.speed, rel_tol=REL_TOL, abs_tol=ABS_TOL):
                block_constant_speed = False
        else:
            # boundary (gap or knife-edge): speeds must not decrease
            if a.speed > b.speed and not math.isclose(
                a.speed, b.speed, rel_tol=REL_TOL, abs_tol=ABS_TOL
            ):
                nondecreasing_block_speeds = False

    return CanonicalReport(
        single_speed=single_speed,
        release_order=release_order,
        no_idle=no_idle,
        block_constant_speed=block_constant_speed,
        nondecreasing_block_speeds=nondecreasing_block_speeds,
    )


# --- JSON interchange -------------------------------------------------------

def instance_from_jsonable(data: Mapping) -> Instance:
    """Build an Instance from a parsed JSON object.

    Expected shape: {"alpha": number, "processors": int, "jobs": [{"release":
    number, "work": number}, ...]}. Jobs may appear unsorted; alpha defaults
    to 3 and processors to 1 when absent.
    """
    if not isinstance(data, Mapping):
        raise InvalidInstanceError("instance JSON must be an object")
    try:
        jobs_raw = data["jobs"]
    except KeyError:
        raise InvalidInstanceError("instance JSON missing 'jobs'") from None
    if not isinstance(jobs_raw, Sequence) or isinstance(jobs_raw, (str, bytes)):
        raise InvalidInstanceError("'jobs' must be an array")
    releases = []
    works = []
    for idx, entry in enumerate(jobs_raw):
        if not isinstance(entry, Mapping):
            raise InvalidInstanceError(f"job {idx + 1} must be an object")
        try:
            releases.append(float(entry["release"]))
            works.append(float(entry["work"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInstanceError(f"job {idx + 1}: {exc}") from None
    alpha = data.get("alpha", 3.0)
    processors = data.get("processors", 1)
    try:
        alpha = float(alpha)
        processors = int(processors)
    except (TypeError, ValueError) as exc:
        raise InvalidInstanceError(str(exc)) from None
    try:
        return make_instance(releases, works, alpha, processors)
    except InvalidArgumentError as exc:
        raise InvalidInstanceError(str(exc)) from None


def load_instance(path: str) -> Instance:
    """Load an instance from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInstanceError(f"{path}: {exc}") from None
    return instance_from_jsonable(data)


def instance_to_jsonable(instance: Instance) -> dict:
    return {
        "alpha": instance.alpha,
        "processors": instance.processors,
        "jobs": [{"release": j.release, "work": j.work} for j in instance.jobs],
    }


def schedule_to_jsonable(schedule: Schedule) -> dict:
    """Schedule as per-processor arrays plus a metrics summary."""
    per_proc: dict[int, list[dict]] = {}
    for item in schedule.items:
        per_proc.setdefault(item.processor, []).append(
            {
                "job": item.job.id,
                "start": item.start,
                "speed": item.speed,
                "completion": item.completion,
            }
        )
    m = max(per_proc) if per_proc else 1
    processors = []
    for p in range(1, m + 1):
        runs = sorted(per_proc.get(p, []), key=lambda d: d["start"])
        processors.append(runs)
    return {
        "processors": processors,
        "makespan": makespan(schedule),
        "total_flow": total_flow(schedule),
        "energy": total_energy(schedule),
    }


def format_float(value: float) -> str:
    """A float as a JSON number with 17 significant digits (lossless)."""
    if math.isnan(value) or math.isinf(value):
        raise InvalidArgumentError(f"non-finite float {value} is not serializable")
    text = format(value, ".17g")
    if not any(c in text for c in ".eE"):
        text += ".0"
    return text


def dumps_canonical(obj, indent: int = 2) -> str:
    """Serialize to JSON with every float at 17 significant digits.

    The standard library encoder always formats floats with repr (the C
    encoder ignores float-subclass overrides), so this walks the structure
    itself. Only the types the CLI emits are supported.
    """
    parts: list[str] = []
    _emit_json(obj, parts, indent, 0)
    return "".join(parts)


def _emit_json(obj, parts: list[str], indent: int, depth: int) -> None:
    pad = " " * (indent * (depth + 1))
    close_pad = " " * (indent * depth)
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, Mapping):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise InvalidArgumentError(f"JSON object keys must be strings, got {key!r}")
            parts.append(pad)
            parts.append(json.dumps(key))
            parts.append(": ")
            _emit_json(value, parts, indent, depth + 1)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(close_pad + "}")
    elif isinstance(obj, Iterable):
        seq = list(obj)
        if not seq:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, value in enumerate(seq):
            parts.append(pad)
            _emit_json(value, parts, indent, depth + 1)
            parts.append(",\n" if i < len(seq) - 1 else "\n")
        parts.append(close_pad + "]")
    else:
        raise InvalidArgumentError(f"cannot serialize {type(obj).__name__}")
