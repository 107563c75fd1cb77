"""The non-dominated energy/makespan frontier as exact closed forms.

Within one block configuration only the final block reacts to the energy
budget, so makespan(E) = s + W**(a/(a-1)) * (E - F)**(-1/(a-1)) where s is the
final block's start, W its work, and F the energy consumed by the fixed
blocks before it. Lowering the budget slows the final block until it matches
its predecessor's forced speed; that energy is a breakpoint, the blocks
merge, and the next segment takes over. The curve is continuous with a
continuous first derivative; second derivatives jump at breakpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    REL_TOL,
    ABS_TOL,
    BlockRun,
    Instance,
    InvalidArgumentError,
)
from .makespan_uni import _scan_fixed_blocks


@dataclass(frozen=True, slots=True)
class CurveSegment:
    """One block configuration with its closed-form makespan(E).

    Valid on energies [e_lo, e_hi); the top segment has e_hi = inf and the
    bottom segment e_lo = 0 (exclusive). fixed_blocks carries the forced
    blocks of the configuration, the remaining fields the budget block.
    """

    fixed_blocks: tuple[BlockRun, ...]
    last_first: int
    last_start: float
    last_work: float
    e_fixed: float
    e_lo: float
    e_hi: float

    def contains(self, energy: float) -> bool:
        return self.e_lo <= energy < self.e_hi


@dataclass(frozen=True, slots=True)
class Frontier:
    """All segments of the frontier, ordered by decreasing energy."""

    instance: Instance
    segments: tuple[CurveSegment, ...]
    breakpoints: tuple[float, ...]

    def segment_index(self, energy: float) -> int:
        if not (energy > 0):
            raise InvalidArgumentError(f"energy must be positive, got {energy}")
        lo, hi = 0, len(self.breakpoints)
        # breakpoints are strictly decreasing; find how many are > energy
        while lo < hi:
            mid = (lo + hi) // 2
            if self.breakpoints[mid] > energy:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def segment_for(self, energy: float) -> CurveSegment:
        return self.segments[self.segment_index(energy)]


def build_frontier(instance: Instance) -> Frontier:
    """Enumerate every non-dominated block configuration of the instance.

    Starts from the configuration that an unbounded budget would produce (the
    scan with no budget merges) and repeatedly computes the energy at which
    the final block's speed drops to its predecessor's, merging downward. Two
    merges can fire at the same energy; the zero-width segment between them
    is dropped so breakpoints stay strictly decreasing.
    """
    if instance.processors != 1:
        raise InvalidArgumentError("build_frontier solves uniprocessor instances")
    stack, last_start, last_first, last_work, e_fixed, _ = _scan_fixed_blocks(instance)
    alpha = instance.alpha
    am1 = alpha - 1.0
    n = instance.n

    segments: list[CurveSegment] = []
    breakpoints: list[float] = []
    e_hi = math.inf

    def fixed_tuple() -> tuple[BlockRun, ...]:
        out = []
        for idx, entry in enumerate(stack):
            nxt = stack[idx + 1][1] if idx + 1 < len(stack) else last_first
            out.append(BlockRun(first=entry[1], last=nxt - 1, start=entry[0], speed=entry[3]))
        return tuple(out)

    while stack:
        pred = stack[-1]
        e_star = e_fixed + last_work * pred[3] ** am1
        if e_star < e_hi and not math.isclose(e_star, e_hi, rel_tol=REL_TOL, abs_tol=ABS_TOL):
            segments.append(
                CurveSegment(
                    fixed_blocks=fixed_tuple(),
                    last_first=last_first,
                    last_start=last_start,
                    last_work=last_work,
                    e_fixed=e_fixed,
                    e_lo=e_star,
                    e_hi=e_hi,
                )
            )
            breakpoints.append(e_star)
            e_hi = e_star
        # merge the final block with its predecessor
        stack.pop()
        e_fixed -= pred[4]
        last_start = pred[0]
        last_first = pred[1]
        last_work += pred[2]

    segments.append(
        CurveSegment(
            fixed_blocks=(),
            last_first=last_first,
            last_start=last_start,
            last_work=last_work,
            e_fixed=e_fixed,
            e_lo=0.0,
            e_hi=e_hi,
        )
    )
    assert len(breakpoints) <= n - 1 if n > 1 else not breakpoints
    return Frontier(instance, tuple(segments), tuple(breakpoints))


def _segment_value(segment: CurveSegment, alpha: float, energy: float) -> float:
    am1 = alpha - 1.0
    k = segment.last_work ** (alpha / am1)
    return segment.last_start + k * (energy - segment.e_fixed) ** (-1.0 / am1)


def eval_makespan(frontier: Frontier, energy: float) -> float:
    """Makespan of the optimal schedule at this energy budget."""
    segment = frontier.segment_for(energy)
    return _segment_value(segment, frontier.instance.alpha, energy)


def derivative(frontier: Frontier, energy: float) -> float:
    """Analytic d makespan / d energy. Continuous across breakpoints."""
    segment = frontier.segment_for(energy)
    alpha = frontier.instance.alpha
    am1 = alpha - 1.0
    k = segment.last_work ** (alpha / am1)
    return -k / am1 * (energy - segment.e_fixed) ** (-alpha / am1)


def second_derivative(frontier: Frontier, energy: float) -> float:
    """Analytic d2 makespan / d energy2. Jumps at breakpoints."""
    segment = frontier.segment_for(energy)
    alpha = frontier.instance.alpha
    am1 = alpha - 1.0
    k = segment.last_work ** (alpha / am1)
    return k * alpha / (am1 * am1) * (energy - segment.e_fixed) ** (-(2.0 * alpha - 1.0) / am1)


def segment_derivatives_at(
    frontier: Frontier, breakpoint: float
) -> tuple[tuple[float, float], tuple[float, float]]:
    """(d1, d2) one-sided pairs at a breakpoint: (from above, from below)."""
    alpha = frontier.instance.alpha
    am1 = alpha - 1.0
    idx = None
    for i, bp in enumerate(frontier.breakpoints):
        if math.isclose(bp, breakpoint, rel_tol=REL_TOL, abs_tol=ABS_TOL):
            idx = i
            break
    if idx is None:
        raise InvalidArgumentError(f"{breakpoint} is not a breakpoint of this frontier")

    def both(segment: CurveSegment) -> tuple[float, float]:
        k = segment.last_work ** (alpha / am1)
        gap = breakpoint - segment.e_fixed
        d1 = -k / am1 * gap ** (-alpha / am1)
        d2 = k * alpha / (am1 * am1) * gap ** (-(2.0 * alpha - 1.0) / am1)
        return d1, d2

    return both(frontier.segments[idx]), both(frontier.segments[idx + 1])


def sample_frontier(
    frontier: Frontier, e_lo: float, e_hi: float, count: int
) -> list[tuple[float, float]]:
    """Evenly spaced (energy, makespan) samples plus exact interior breakpoints."""
    if not (0 < e_lo < e_hi):
        raise InvalidArgumentError(f"need 0 < e_lo < e_hi, got ({e_lo}, {e_hi})")
    if count < 2:
        raise InvalidArgumentError(f"count must be >= 2, got {count}")
    step = (e_hi - e_lo) / (count - 1)
    energies = [e_lo + i * step for i in range(count - 1)]
    energies.append(e_hi)
    for bp in frontier.breakpoints:
        if e_lo < bp < e_hi:
            energies.append(bp)
    energies.sort()
    out: list[tuple[float, float]] = []
    for e in energies:
        if out and math.isclose(e, out[-1][0], rel_tol=REL_TOL, abs_tol=ABS_TOL):
            continue
        out.append((e, eval_makespan(frontier, e)))
    return out


def invert_deadline(frontier: Frontier, deadline: float) -> float:
    """Energy at which the frontier's makespan equals `deadline`.

    The caller guarantees deadline > r_n, so some segment covers it: segment
    values at their low-energy end increase down the list and the bottom
    segment is unbounded.
    """
    alpha = frontier.instance.alpha
    am1 = alpha - 1.0
    for segment in frontier.segments:
        if segment.e_lo > 0:
            reach = _segment_value(segment, alpha, segment.e_lo)
            if deadline > reach and not math.isclose(
                deadline, reach, rel_tol=REL_TOL, abs_tol=ABS_TOL
            ):
                continue
        span = deadline - segment.last_start
        if span <= 0:
            raise InvalidArgumentError(
                f"deadline {deadline} inside segment starting {segment.last_start}"
            )
        return segment.e_fixed + segment.last_work**alpha / span**am1
    raise AssertionError("unreachable: the bottom segment covers every deadline")
