"""Total-flow minimization for equal-work jobs under an energy budget.

The optimal schedule is characterized by three relations between each job's
speed and the final job's speed sigma_n: a job finishing before its
successor's release runs at sigma_n; a job finishing after it satisfies
sigma_i**a = sigma_{i+1}**a + sigma_n**a; a job finishing exactly at it
(pinned) sits between those extremes. The whole schedule is therefore a
function of the single parameter sigma_n, and the energy budget is met by an
outer bisection on it (energy grows strictly with sigma_n).

The construction here closes the job range recursively. A range whose
back-to-back completion profile never dips below a successor's release is a
single chain. Otherwise the range splits: the left piece closes with a
genuine gap when even the slowest tail cannot reach the boundary release, and
pins to it when it can. A pin that comes out faster than the bound set by the
next piece's head speed is rejected, which folds the boundary back into the
piece and advances the candidate split to the next release; the wider window
slows the piece, lifting the completions that fell short in the first place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    ABS_TOL,
    REL_TOL,
    ConvergenceError,
    Instance,
    InternalError,
    InvalidArgumentError,
    Schedule,
    ScheduledJob,
    UnsupportedInstanceError,
    total_energy,
    total_flow,
)

# classification of completion-vs-release for relation reporting; looser than
# the core tolerance because completions come out of nested bisections
PIN_TOL = 1e-7


class _Unpinnable(Exception):
    """Raised when a piece is asked to pin to its own start time."""


@dataclass(frozen=True, slots=True)
class FlowSolverConfig:
    epsilon_energy: float = 1e-9
    epsilon_speed: float = 1e-12
    max_iterations: int = 200

    def __post_init__(self) -> None:
        if self.epsilon_energy <= 0 or self.epsilon_speed <= 0 or self.max_iterations <= 0:
            raise InvalidArgumentError("solver tolerances must be positive")


@dataclass(frozen=True, slots=True)
class FlowChain:
    """A maximal back-to-back run of jobs. Indices 0-based into instance.jobs."""

    first: int
    last: int
    start: float
    tail_speed: float
    pinned: bool

    @property
    def length(self) -> int:
        return self.last - self.first + 1


def chain_speeds(length: int, tail_speed: float, sigma_n: float, alpha: float) -> list[float]:
    """Member speeds of a chain, head first: (tail**a + t*sigma_n**a)**(1/a)."""
    if not (sigma_n > 0):
        raise InvalidArgumentError("sigma_n must be positive")
    if tail_speed < sigma_n and not math.isclose(
        tail_speed, sigma_n, rel_tol=REL_TOL, abs_tol=ABS_TOL
    ):
        raise InvalidArgumentError(
            f"tail speed {tail_speed} below the final speed {sigma_n}"
        )
    if length < 1:
        raise InvalidArgumentError("length must be >= 1")
    ta = tail_speed**alpha
    na = sigma_n**alpha
    return [(ta + t * na) ** (1.0 / alpha) for t in range(length - 1, -1, -1)]


def _require_equal_work(instance: Instance) -> float:
    w0 = instance.works[0]
    for w in instance.works:
        if abs(w - w0) > 1e-12 * w0:
            raise UnsupportedInstanceError("the flow solver requires equal-work jobs")
    return w0


class _Builder:
    """One construction pass for a fixed sigma_n."""

    def __init__(self, instance: Instance, sigma_n: float, cfg: FlowSolverConfig):
        self.r = instance.releases
        self.w = _require_equal_work(instance)
        self.n = instance.n
        self.alpha = instance.alpha
        self.sigma_n = sigma_n
        self.cfg = cfg
        self._memo: dict[tuple[int, int, float | None], list[FlowChain]] = {}

    def completion_profile(self, first: int, last: int, tail: float) -> list[float]:
        speeds = chain_speeds(last - first + 1, tail, self.sigma_n, self.alpha)
        out = []
        t = self.r[first]
        for s in speeds:
            t += self.w / s
            out.append(t)
        return out

    def pin_tail(self, first: int, last: int, target: float) -> float:
        """Tail speed at which the chain [first..last] completes at `target`."""
        if target - self.r[first] <= ABS_TOL:
            raise _Unpinnable(first, target)
        lo = self.sigma_n
        c_lo = self.completion_profile(first, last, lo)[-1]
        if abs(c_lo - target) <= PIN_TOL * max(1.0, target):
            return lo
        if c_lo < target:
            raise InternalError(
                f"pin target {target} unreachable: completion {c_lo} at the slowest tail"
            )
        hi = max(lo * 2.0, (last - first + 1) * self.w / (target - self.r[first]))
        for _ in range(200):
            if hi > 1e60:
                raise InternalError("pin bracket expansion failed")
            if self.completion_profile(first, last, hi)[-1] < target:
                break
            hi *= 2.0
        else:
            raise InternalError("pin bracket expansion failed")
        # construction must nail the pin regardless of the outer budget
        # loop's iteration cap; 200 halvings exhaust double precision
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.completion_profile(first, last, mid)[-1] > target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= self.cfg.epsilon_speed * max(1.0, hi):
                break
        return 0.5 * (lo + hi)

    def chain_completion(self, chain: FlowChain) -> float:
        return self.completion_profile(chain.first, chain.last, chain.tail_speed)[-1]

    def close_range(self, first: int, last: int, target: float | None) -> list[FlowChain]:
        """Close [first..last], splitting where a completion falls short of
        its successor's release. target is the pinned completion of the
        rightmost piece, or None to close it at sigma_n.

        The first shortfall marks where a split becomes necessary, but not
        necessarily where the correct one lies: pinning there can leave the
        left piece faster than the boundary bound allows, and the cure is to
        fold the boundary into the piece and pin one release later (the wider
        window slows the whole piece, which also lifts the completions that
        fell short). So candidate split points advance until one closes with
        a genuine gap or an in-bound pin."""
        key = (first, last, target)
        got = self._memo.get(key)
        if got is not None:
            return got
        tail = self.sigma_n if target is None else self.pin_tail(first, last, target)
        profile = self.completion_profile(first, last, tail)
        split = None
        for m in range(first, last):
            if profile[m - first] < self.r[m + 1] - PIN_TOL * max(1.0, self.r[m + 1]):
                split = m
                break
        if split is None:
            out = [FlowChain(first, last, self.r[first], tail, target is not None)]
            self._memo[key] = out
            return out
        for p in range(split, last):
            r_next = self.r[p + 1]
            tol = PIN_TOL * max(1.0, r_next)
            try:
                c_slowest = self.completion_profile(first, p, self.sigma_n)[-1]
                if c_slowest < r_next - tol:
                    left = self.close_range(first, p, None)
                    # a recursive split restarts pieces at their own releases,
                    # so re-check that the closure still ends in time
                    if self.chain_completion(left[-1]) >= r_next - tol:
                        continue
                else:
                    left = self.close_range(first, p, r_next)
                right = self.close_range(p + 1, last, target)
            except _Unpinnable:
                # tied releases leave no room to pin here; the boundary has
                # to stay backlogged, so fold it in and move on
                continue
            if left[-1].pinned and self.pin_bound_violated(left[-1], right[0]):
                continue
            out = left + right
            self._memo[key] = out
            return out
        if target is not None:
            # no split can honor this pin either; tell the caller to widen
            raise _Unpinnable(first, target)
        raise InternalError(
            f"no consistent split of jobs [{first}..{last}] at sigma_n={self.sigma_n}"
        )

    def head_speed(self, chain: FlowChain) -> float:
        ta = chain.tail_speed**self.alpha
        na = self.sigma_n**self.alpha
        return (ta + (chain.length - 1) * na) ** (1.0 / self.alpha)

    def pin_bound_violated(self, left: FlowChain, right: FlowChain) -> bool:
        if not left.pinned:
            return False
        bound = self.head_speed(right) ** self.alpha + self.sigma_n**self.alpha
        excess = left.tail_speed**self.alpha - bound
        return excess > REL_TOL * bound + ABS_TOL

    def build(self) -> list[FlowChain]:
        chains = self.close_range(0, self.n - 1, None)
        # every boundary must satisfy its relation: gaps end before the next
        # release, pins end on it within the bound
        for a, b in zip(chains, chains[1:]):
            r_next = self.r[b.first]
            slack = 8.0 * PIN_TOL * max(1.0, r_next)
            c = self.chain_completion(a)
            if a.pinned:
                if abs(c - r_next) > slack or self.pin_bound_violated(a, b):
                    raise InternalError(f"pinned boundary at job {a.last} inconsistent")
            elif c > r_next + slack:
                raise InternalError(f"gap boundary at job {a.last} overruns {r_next}")
        return chains


def chains_for_tail_speed(
    instance: Instance, sigma_n: float, config: FlowSolverConfig | None = None
) -> list[FlowChain]:
    """The chain decomposition consistent with the speed relations at this sigma_n."""
    if instance.processors != 1:
        raise UnsupportedInstanceError("the flow solver handles one processor at a time")
    if not (sigma_n > 0):
        raise InvalidArgumentError("sigma_n must be positive")
    cfg = config or FlowSolverConfig()
    return _Builder(instance, sigma_n, cfg).build()


def schedule_for_tail_speed(
    instance: Instance, sigma_n: float, config: FlowSolverConfig | None = None
) -> Schedule:
    """The unique schedule satisfying the speed relations for this sigma_n."""
    chains = chains_for_tail_speed(instance, sigma_n, config)
    alpha = instance.alpha
    items = []
    for chain in chains:
        speeds = chain_speeds(chain.length, chain.tail_speed, sigma_n, alpha)
        t = chain.start
        for k, speed in zip(range(chain.first, chain.last + 1), speeds):
            job = instance.jobs[k]
            # a boundary within pin tolerance can leave the running clock a
            # hair before the release; the job still starts at the release
            t = max(t, job.release)
            items.append(ScheduledJob(job, t, speed))
            t += job.work / speed
    return Schedule(instance, items=items)


def min_flow_for_energy(
    instance: Instance,
    energy_budget: float,
    config: FlowSolverConfig | None = None,
) -> tuple[Schedule, float]:
    """Minimize total flow subject to the energy budget.

    Outer bisection on sigma_n; the consumed energy is continuous and
    strictly increasing in it.
    """
    if not (energy_budget > 0):
        raise InvalidArgumentError("energy budget must be positive")
    cfg = config or FlowSolverConfig()
    w = _require_equal_work(instance)
    n = instance.n
    alpha = instance.alpha

    sigma = (energy_budget / (n * w)) ** (1.0 / (alpha - 1.0))
    lo = hi = sigma
    e_lo = total_energy(schedule_for_tail_speed(instance, lo, cfg))
    for _ in range(300):
        if e_lo <= energy_budget:
            break
        lo /= 2.0
        e_lo = total_energy(schedule_for_tail_speed(instance, lo, cfg))
    else:
        raise InternalError("could not bracket sigma_n from below")
    e_hi = total_energy(schedule_for_tail_speed(instance, hi, cfg))
    for _ in range(300):
        if e_hi >= energy_budget:
            break
        hi *= 2.0
        e_hi = total_energy(schedule_for_tail_speed(instance, hi, cfg))
    else:
        raise InternalError("could not bracket sigma_n from above")

    best: Schedule | None = None
    for _ in range(cfg.max_iterations):
        mid = 0.5 * (lo + hi)
        schedule = schedule_for_tail_speed(instance, mid, cfg)
        energy = total_energy(schedule)
        best = schedule
        if abs(energy - energy_budget) <= cfg.epsilon_energy * energy_budget:
            return schedule, total_flow(schedule)
        if energy < energy_budget:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"sigma_n bisection did not reach {cfg.epsilon_energy:g} relative "
        f"in {cfg.max_iterations} iterations",
        best=total_flow(best) if best is not None else None,
    )


def classify_relations(instance: Instance, schedule: Schedule) -> list[dict]:
    """Which speed relation each consecutive pair satisfies, with residuals.

    The case is decided by comparing the completion against the successor's
    release; the residual measures how far the pair is from satisfying its
    case's speed relation (0 when satisfied).
    """
    items = sorted(schedule.items, key=lambda it: it.start)
    alpha = instance.alpha
    sigma_n = items[-1].speed
    na = sigma_n**alpha
    rows = []
    for a, b in zip(items, items[1:]):
        c = a.completion
        r_next = b.job.release
        tol = PIN_TOL * max(1.0, abs(r_next))
        sa = a.speed**alpha
        if abs(c - r_next) <= tol:
            case = "pinned"
            low = max(0.0, (sigma_n - a.speed) / sigma_n)
            high = max(0.0, (sa - b.speed**alpha - na) / sa)
            residual = max(low, high)
        elif c < r_next:
            case = "gap"
            residual = abs(a.speed - sigma_n) / sigma_n
        else:
            case = "backlog"
            residual = abs(sa - b.speed**alpha - na) / sa
        rows.append(
            {
                "pair": [a.job.id, b.job.id],
                "case": case,
                "completion": c,
                "next_release": r_next,
                "residual": residual,
            }
        )
    return rows


def pinned_regime_bounds(
    instance: Instance, config: FlowSolverConfig | None = None
) -> tuple[float, float] | None:
    """Energy interval over which the middle job stays pinned to the last release.

    Defined for the three-job shape (two jobs released together, one later,
    equal works). Returns None when the instance has no such regime. The
    middle completion C_2(E) never increases with the budget: it sits above
    the last release at small budgets, on it across the pinned interval, and
    below it past that, so both edges come out of predicate bisections.
    """
    cfg = config or FlowSolverConfig()
    if instance.n != 3 or instance.processors != 1:
        return None
    try:
        w = _require_equal_work(instance)
    except UnsupportedInstanceError:
        return None
    r = instance.releases
    if not math.isclose(r[0], r[1], rel_tol=REL_TOL, abs_tol=ABS_TOL) or r[2] <= r[1]:
        return None
    target = r[2]

    def middle_completion(energy: float) -> float:
        schedule, _ = min_flow_for_energy(instance, energy, cfg)
        items = sorted(schedule.items, key=lambda it: it.start)
        return items[1].completion

    tol = PIN_TOL * max(1.0, target)
    e_back = 3.0 * w
    for _ in range(200):
        if middle_completion(e_back) > target + tol:
            break
        e_back /= 2.0
    else:
        return None
    e_gap = e_back
    for _ in range(200):
        if middle_completion(e_gap) < target - tol:
            break
        e_gap *= 2.0
    else:
        return None

    def edge(predicate) -> float:
        lo, hi = e_back, e_gap
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if predicate(middle_completion(mid)):
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-9 * hi:
                break
        return 0.5 * (lo + hi)

    # above e_lo the completion has come down to the release
    e_lo = edge(lambda c: c <= target + tol)
    # above e_hi it has dropped strictly below
    e_hi = edge(lambda c: c < target - tol)
    if e_hi - e_lo <= max(1e-6 * e_hi, 1e-9):
        return None
    mid_c = middle_completion(0.5 * (e_lo + e_hi))
    if abs(mid_c - target) > tol:
        return None
    return e_lo, e_hi
