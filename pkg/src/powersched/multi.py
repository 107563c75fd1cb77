"""Multiprocessor scheduling for equal-work jobs, plus the partition reduction.

With equal works the assignment that spreads jobs round-robin by release
order is optimal for both makespan and flow, and the per-processor solves
couple through a single shared parameter: a common finish time for makespan,
a common final speed for flow. Either parameter is monotone in the consumed
energy, so the budget is met by bisection.

The partition reduction maps numbers a_1..a_k to a two-processor makespan
instance (all released at zero, work a_i, cubic power) with budget B = sum.
A processor with work W finishing at T spends W**3/T**2, so the best finish
time over assignments is sqrt(min(W_1**3 + W_2**3)/B) >= B/2, with equality
exactly when the works split evenly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .core import (
    ConvergenceError,
    Instance,
    InvalidArgumentError,
    Schedule,
    ScheduledJob,
    TooLargeError,
    UnsupportedInstanceError,
    make_instance,
    makespan,
    total_energy,
    total_flow,
)
from .curve import build_frontier, invert_deadline
from .flow_uni import FlowSolverConfig, min_flow_for_energy, schedule_for_tail_speed
from .makespan_uni import inc_merge


@dataclass(frozen=True, slots=True)
class Assignment:
    """mapping[i] is the 1-based processor of the i-th job in release order."""

    mapping: tuple[int, ...]
    processors: int

    def __post_init__(self) -> None:
        for p in self.mapping:
            if not 1 <= p <= self.processors:
                raise InvalidArgumentError(f"processor {p} out of range 1..{self.processors}")


@dataclass(frozen=True, slots=True)
class PartitionInstance:
    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.elements:
            raise InvalidArgumentError("a partition instance needs at least one element")
        for a in self.elements:
            if not isinstance(a, int) or a <= 0:
                raise InvalidArgumentError("partition elements must be positive integers")

    @property
    def total(self) -> int:
        return sum(self.elements)


def cyclic_assign(n: int, m: int) -> tuple[int, ...]:
    """Round-robin assignment by release order: job i goes to (i mod m) + 1."""
    if n < 1 or m < 1:
        raise InvalidArgumentError("need n >= 1 jobs and m >= 1 processors")
    return tuple(i % m + 1 for i in range(1, n + 1))


def _split(instance: Instance, mapping: tuple[int, ...], m: int) -> list[Instance | None]:
    """Per-processor single-processor sub-instances; None where a processor is idle."""
    if len(mapping) != instance.n:
        raise InvalidArgumentError("assignment length must match the job count")
    groups: list[list[int]] = [[] for _ in range(m)]
    for idx, proc in enumerate(mapping):
        if not 1 <= proc <= m:
            raise InvalidArgumentError(f"processor {proc} out of range 1..{m}")
        groups[proc - 1].append(idx)
    subs: list[Instance | None] = []
    for members in groups:
        if not members:
            subs.append(None)
            continue
        subs.append(
            Instance(
                jobs=tuple(instance.jobs[k] for k in members),
                alpha=instance.alpha,
                processors=1,
            )
        )
    return subs


def _require_equal_work(instance: Instance) -> float:
    w0 = instance.works[0]
    for w in instance.works:
        if abs(w - w0) > 1e-12 * w0:
            raise UnsupportedInstanceError(
                "multiprocessor scheduling here requires equal-work jobs"
            )
    return w0


def _energy_at_deadline(subs: list[Instance | None], frontiers: list, deadline: float) -> float:
    needed = 0.0
    for sub, frontier in zip(subs, frontiers):
        if sub is None:
            continue
        needed += invert_deadline(frontier, deadline)
    return needed


def solve_common_deadline(
    subs: list[Instance | None], energy_budget: float, rel_tol: float = 1e-9
) -> tuple[float, list[float]]:
    """Finish time T with sum of per-processor energies equal to the budget.

    Each processor's energy requirement falls strictly as T grows, so the sum
    does too. Returns (T, per-processor energies; 0.0 for idle processors).
    """
    live = [s for s in subs if s is not None]
    if not live:
        raise InvalidArgumentError("no jobs assigned to any processor")
    if all(all(r == 0.0 for r in s.releases) for s in live):
        # single block per processor: energy W**a / T**(a-1), solvable directly
        alpha = live[0].alpha
        num = sum(sum(s.works) ** alpha for s in live)
        deadline = (num / energy_budget) ** (1.0 / (alpha - 1.0))
        energies = [
            0.0 if s is None else sum(s.works) ** s.alpha / deadline ** (s.alpha - 1.0)
            for s in subs
        ]
        return deadline, energies
    frontiers = [None if s is None else build_frontier(s) for s in subs]
    base = max(s.releases[-1] for s in live)
    span = max(1.0, base)
    for _ in range(300):
        if _energy_at_deadline(subs, frontiers, base + span) < energy_budget:
            break
        span *= 2.0
    else:
        raise InvalidArgumentError("energy budget too small to bracket a finish time")
    lo, hi = base, base + span
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid <= base:
            break
        needed = _energy_at_deadline(subs, frontiers, mid)
        if abs(needed - energy_budget) <= rel_tol * energy_budget:
            lo = hi = mid
            break
        if needed > energy_budget:
            lo = mid
        else:
            hi = mid
    deadline = 0.5 * (lo + hi)
    energies = [
        0.0 if s is None else invert_deadline(f, deadline)
        for s, f in zip(subs, frontiers)
    ]
    return deadline, energies


def combined_schedule(instance: Instance, schedules: list[Schedule | None]) -> Schedule:
    """Merge per-processor schedules into one, tagging items with processors."""
    items = []
    for proc, sched in enumerate(schedules, start=1):
        if sched is None:
            continue
        for it in sched.items:
            items.append(ScheduledJob(it.job, it.start, it.speed, processor=proc))
    return Schedule(instance, items=items)


def multi_makespan_equal_work(
    instance: Instance, energy_budget: float
) -> tuple[list[Schedule | None], float]:
    """Minimum makespan on m processors under one shared energy budget.

    Jobs are assigned round-robin by release order and every busy processor
    finishes at the common time T chosen to spend the budget exactly.
    """
    if not (energy_budget > 0):
        raise InvalidArgumentError("energy budget must be positive")
    m = instance.processors
    if m == 1:
        schedule = inc_merge(instance, energy_budget)
        return [schedule], makespan(schedule)
    _require_equal_work(instance)
    mapping = cyclic_assign(instance.n, m)
    subs = _split(instance, mapping, m)
    deadline, energies = solve_common_deadline(subs, energy_budget)
    schedules: list[Schedule | None] = []
    for sub, energy in zip(subs, energies):
        if sub is None:
            schedules.append(None)
        else:
            schedules.append(inc_merge(sub, energy))
    return schedules, deadline


def multi_flow_equal_work(
    instance: Instance,
    energy_budget: float,
    config: FlowSolverConfig | None = None,
) -> tuple[list[Schedule | None], float]:
    """Minimum total flow on m processors under one shared energy budget.

    Processors share the final speed sigma; total energy rises strictly with
    it, so the budget pins sigma by bisection.
    """
    if not (energy_budget > 0):
        raise InvalidArgumentError("energy budget must be positive")
    cfg = config or FlowSolverConfig()
    m = instance.processors
    if m == 1:
        schedule, flow = min_flow_for_energy(instance, energy_budget, cfg)
        return [schedule], flow
    w = _require_equal_work(instance)
    mapping = cyclic_assign(instance.n, m)
    subs = _split(instance, mapping, m)

    def schedules_at(sigma: float) -> list[Schedule | None]:
        return [
            None if s is None else schedule_for_tail_speed(s, sigma, cfg) for s in subs
        ]

    def energy_at(sigma: float) -> float:
        return sum(total_energy(s) for s in schedules_at(sigma) if s is not None)

    alpha = instance.alpha
    sigma = (energy_budget / (instance.n * w)) ** (1.0 / (alpha - 1.0))
    lo = hi = sigma
    for _ in range(300):
        if energy_at(lo) <= energy_budget:
            break
        lo /= 2.0
    for _ in range(300):
        if energy_at(hi) >= energy_budget:
            break
        hi *= 2.0
    result = None
    for _ in range(cfg.max_iterations):
        mid = 0.5 * (lo + hi)
        result = schedules_at(mid)
        energy = sum(total_energy(s) for s in result if s is not None)
        if abs(energy - energy_budget) <= cfg.epsilon_energy * energy_budget:
            flow = sum(total_flow(s) for s in result if s is not None)
            return result, flow
        if energy < energy_budget:
            lo = mid
        else:
            hi = mid
    best = None
    if result is not None:
        best = sum(total_flow(s) for s in result if s is not None)
    raise ConvergenceError(
        f"common tail-speed bisection did not reach {cfg.epsilon_energy:g} "
        f"relative in {cfg.max_iterations} iterations",
        best=best,
    )


def assignment_value(
    instance: Instance,
    mapping: tuple[int, ...],
    energy_budget: float,
    metric: str,
    oracle_config=None,
) -> float:
    """Objective value of the best schedule for a fixed job-to-processor map.

    Used by the exhaustive-assignment referee. Makespan couples processors
    through a common finish time for any works; flow couples them through a
    common final speed when works are equal, and falls back to a golden-section
    budget split solved by the generic convex oracle otherwise.
    """
    if metric not in ("makespan", "flow"):
        raise InvalidArgumentError(f"unknown metric {metric!r}")
    m = instance.processors
    subs = _split(instance, tuple(mapping), m)
    live = [s for s in subs if s is not None]
    if not live:
        raise InvalidArgumentError("no jobs assigned to any processor")
    if metric == "makespan":
        deadline, _ = solve_common_deadline(subs, energy_budget)
        return deadline

    works = [w for s in live for w in s.works]
    equal = all(abs(w - works[0]) <= 1e-12 * works[0] for w in works)
    if equal:
        cfg = FlowSolverConfig()

        def energy_at(sigma: float) -> tuple[float, float]:
            e = f = 0.0
            for s in live:
                sched = schedule_for_tail_speed(s, sigma, cfg)
                e += total_energy(sched)
                f += total_flow(sched)
            return e, f

        alpha = instance.alpha
        sigma = (energy_budget / sum(works)) ** (1.0 / (alpha - 1.0))
        lo = hi = sigma
        for _ in range(300):
            if energy_at(lo)[0] <= energy_budget:
                break
            lo /= 2.0
        for _ in range(300):
            if energy_at(hi)[0] >= energy_budget:
                break
            hi *= 2.0
        flow = math.inf
        for _ in range(cfg.max_iterations):
            mid = 0.5 * (lo + hi)
            energy, flow = energy_at(mid)
            if abs(energy - energy_budget) <= cfg.epsilon_energy * energy_budget:
                break
            if energy < energy_budget:
                lo = mid
            else:
                hi = mid
        return flow

    # unequal works: split the budget between the first processor and the rest
    from .oracle import OracleConfig, oracle_best_value

    cfg = oracle_config or OracleConfig()

    def solo_flow(sub: Instance, budget: float) -> float:
        return oracle_best_value(sub, budget, "flow", cfg)

    def best_split(parts: list[Instance], budget: float) -> float:
        if len(parts) == 1:
            return solo_flow(parts[0], budget)
        inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
        lo_x, hi_x = 1e-6, 1.0 - 1e-6

        def value(x: float) -> float:
            return solo_flow(parts[0], x * budget) + best_split(parts[1:], (1.0 - x) * budget)

        a, b = lo_x, hi_x
        c = b - inv_phi * (b - a)
        d = a + inv_phi * (b - a)
        fc, fd = value(c), value(d)
        for _ in range(80):
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - inv_phi * (b - a)
                fc = value(c)
            else:
                a, c, fc = c, d, fd
                d = a + inv_phi * (b - a)
                fd = value(d)
            if b - a <= 1e-10:
                break
        return min(fc, fd)

    return best_split(live, energy_budget)


def partition_to_instance(p: PartitionInstance) -> tuple[Instance, float, float]:
    """The two-processor makespan instance encoding a partition question.

    Returns (instance, energy budget B, target finish time B/2).
    """
    instance = make_instance(
        releases=[0.0] * len(p.elements),
        works=[float(a) for a in p.elements],
        alpha=3.0,
        processors=2,
    )
    total = float(p.total)
    return instance, total, total / 2.0


def best_partition_makespan(
    p: PartitionInstance, cap: int = 16
) -> tuple[float, tuple[int, ...]]:
    """Best finish time of the encoding instance over all 2^n assignments,
    with the assignment achieving it."""
    n = len(p.elements)
    if n > cap:
        raise TooLargeError(f"{n} elements exceed the enumeration cap {cap}")
    instance, budget, _ = partition_to_instance(p)
    best = math.inf
    best_combo: tuple[int, ...] = (1,) * n
    for combo in itertools.product((1, 2), repeat=n):
        subs = _split(instance, combo, 2)
        deadline, _ = solve_common_deadline(subs, budget)
        if deadline < best:
            best = deadline
            best_combo = combo
    return best, best_combo


def decide_partition_via_schedule(p: PartitionInstance, cap: int = 16) -> bool:
    """Whether the elements split into two halves of equal sum, decided by
    checking if any assignment's best finish time reaches the target B/2."""
    if p.total % 2 == 1:
        return False
    _, _, target = partition_to_instance(p)
    best, _ = best_partition_makespan(p, cap)
    return best <= target * (1.0 + 1e-7)
