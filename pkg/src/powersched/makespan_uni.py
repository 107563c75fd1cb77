"""Minimum-makespan scheduling under an energy budget, and its inverse.

The solver maintains a stack of blocks while scanning jobs in release order.
A block other than the last is pinned by releases: it spans from its first
job's release to its successor's release, so its speed is work/span. The last
block's speed comes from whatever energy remains. Whenever the last block is
strictly slower than its predecessor the two merge, which restores the
predecessor's energy to the pool. Each job stops being the first job of some
block at most once, so the whole scan is linear after sorting.

`energy_for_deadline` inverts the makespan-vs-energy relationship through the
curve module's closed forms.
"""

from __future__ import annotations

import math

from .core import (
    ABS_TOL,
    REL_TOL,
    BlockRun,
    DegenerateReleaseError,
    InfeasibleError,
    Instance,
    InvalidArgumentError,
    Schedule,
)


def fixed_block_speed(instance: Instance, i: int, j: int) -> float:
    """Forced speed of block (i, j), 1-based, j < n: sum of works over release span."""
    n = instance.n
    if not (1 <= i <= j):
        raise InvalidArgumentError(f"need 1 <= i <= j, got ({i}, {j})")
    if j >= n:
        raise InvalidArgumentError("the last block has no forced speed")
    r = instance.releases
    span = r[j] - r[i - 1]
    if span <= max(ABS_TOL, REL_TOL * abs(r[j])):
        raise DegenerateReleaseError(
            f"blocks ({i}, {j}): releases {r[i - 1]} and {r[j]} coincide"
        )
    return sum(instance.works[i - 1 : j]) / span


def _scan_fixed_blocks(instance: Instance):
    """Scan all jobs, merging as forced by releases and fixed-speed comparisons.

    Returns (stack, final_start, final_first, final_work, fixed_sum, merges)
    where `stack` is a list of settled blocks [start, first_index, work, speed]
    in schedule order, and the final (budget-driven) block is described by the
    scalars. No budget decisions are made here; the caller applies them.
    """
    r = instance.releases
    w = instance.works
    n = len(r)
    am1 = instance.alpha - 1.0

    # current top block, not yet on the stack
    top_start = r[0]
    top_first = 0
    top_work = w[0]
    top_speed = math.inf
    if n > 1:
        span = r[1] - r[0]
        top_speed = top_work / span if span > ABS_TOL + REL_TOL * r[1] else math.inf

    stack: list[list] = []  # [start, first, work, speed, energy]
    fixed_sum = 0.0
    merges = 0
    append = stack.append

    for k in range(1, n - 1):
        rk = r[k]
        r_next = r[k + 1]
        if rk - top_start <= ABS_TOL + REL_TOL * rk:
            # coincident releases: the top block would otherwise need an
            # infinite forced speed, so the job joins it directly
            top_work += w[k]
            span = r_next - top_start
            top_speed = top_work / span if span > ABS_TOL + REL_TOL * r_next else math.inf
            merges += 1
        else:
            energy = top_work * top_speed**am1
            fixed_sum += energy
            append([top_start, top_first, top_work, top_speed, energy])
            top_start = rk
            top_first = k
            top_work = w[k]
            span = r_next - rk
            top_speed = top_work / span if span > ABS_TOL + REL_TOL * r_next else math.inf
        # merge backward while the top is strictly slower than its predecessor
        while stack:
            prev = stack[-1]
            ps = prev[3]
            if top_speed < ps and abs(ps - top_speed) > ABS_TOL + REL_TOL * ps:
                stack.pop()
                fixed_sum -= prev[4]
                top_start = prev[0]
                top_first = prev[1]
                top_work += prev[2]
                top_speed = top_work / (r_next - top_start)
                merges += 1
            else:
                break

    # final job: budget-driven block (or absorbed into the top)
    if n > 1:
        k = n - 1
        rk = r[k]
        if rk - top_start <= ABS_TOL + REL_TOL * rk:
            top_work += w[k]
            merges += 1
        else:
            energy = top_work * top_speed**am1
            fixed_sum += energy
            append([top_start, top_first, top_work, top_speed, energy])
            top_start = rk
            top_first = k
            top_work = w[k]

    return stack, top_start, top_first, top_work, fixed_sum, merges


def inc_merge_with_stats(instance: Instance, energy_budget: float) -> tuple[Schedule, int]:
    """inc_merge plus the number of merge events performed (at most n)."""
    if instance.processors != 1:
        raise InvalidArgumentError("inc_merge solves uniprocessor instances")
    if not (energy_budget > 0):
        raise InvalidArgumentError(f"energy budget must be positive, got {energy_budget}")

    stack, last_start, last_first, last_work, fixed_sum, merges = _scan_fixed_blocks(instance)

    inv_am1 = 1.0 / (instance.alpha - 1.0)
    remaining = energy_budget - fixed_sum
    last_speed = (remaining / last_work) ** inv_am1 if remaining > 0 else 0.0
    while stack:
        prev = stack[-1]
        ps = prev[3]
        if remaining <= 0 or (
            last_speed < ps and abs(ps - last_speed) > ABS_TOL + REL_TOL * ps
        ):
            stack.pop()
            fixed_sum -= prev[4]
            remaining = energy_budget - fixed_sum
            last_start = prev[0]
            last_first = prev[1]
            last_work += prev[2]
            last_speed = (remaining / last_work) ** inv_am1 if remaining > 0 else 0.0
            merges += 1
        else:
            break

    blocks = []
    for idx, entry in enumerate(stack):
        nxt = stack[idx + 1][1] if idx + 1 < len(stack) else last_first
        blocks.append(BlockRun(first=entry[1], last=nxt - 1, start=entry[0], speed=entry[3]))
    blocks.append(
        BlockRun(first=last_first, last=instance.n - 1, start=last_start, speed=last_speed)
    )
    return Schedule(instance, blocks=blocks), merges


def inc_merge(instance: Instance, energy_budget: float) -> Schedule:
    """The unique canonical minimum-makespan schedule using exactly the budget."""
    schedule, _ = inc_merge_with_stats(instance, energy_budget)
    return schedule


def energy_for_deadline(instance: Instance, deadline: float) -> float:
    """Least energy with which the instance can finish by `deadline`.

    The achievable makespans are (r_n, infinity): even with unbounded energy
    the last job cannot complete before its release. Deadlines at or below
    r_n are infeasible.
    """
    from .curve import build_frontier, invert_deadline

    r_n = instance.releases[-1]
    if deadline <= r_n or math.isclose(deadline, r_n, rel_tol=REL_TOL, abs_tol=ABS_TOL):
        raise InfeasibleError(
            f"deadline {deadline} is not after the final release {r_n}"
        )
    return invert_deadline(build_frontier(instance), deadline)
