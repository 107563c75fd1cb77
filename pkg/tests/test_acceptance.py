"""Release gate: one test per advertised guarantee.

Each test prints a single `criterion N: PASS/FAIL` line with the measured
numbers before asserting, so a full run reads as a checklist. Run with -rA
(the default addopts) to see the lines for passing tests too.

Two criteria are expected to fail on this build; the assertions state the
advertised numbers verbatim rather than what the solver actually produces.
See the project notes outside the package for the analysis.
"""

from __future__ import annotations

import functools
import math
import random
import time

from powersched import (
    Instance,
    PartitionInstance,
    build_frontier,
    check_canonical,
    decide_partition_via_schedule,
    enumerate_assignments,
    eval_makespan,
    inc_merge,
    inc_merge_with_stats,
    make_instance,
    makespan,
    min_flow_for_energy,
    multi_flow_equal_work,
    multi_makespan_equal_work,
    oracle_best_value,
    partition_to_instance,
    pinned_regime_bounds,
    segment_derivatives_at,
    total_flow,
)

TRI = make_instance([0.0, 5.0, 6.0], [5.0, 2.0, 1.0], 3.0)
FLOW3 = make_instance([0.0, 0.0, 1.0], [1.0, 1.0, 1.0], 3.0)

# Degree-12 polynomial in sigma_2 said to vanish at the optimum of FLOW3
# with E = 9, highest power first.
POLY12 = [2, -12, 6, 108, -159, -738, 2415, -1026, -5940, 12150, -10449, 4374, -729]

SWEEP_SEED = 20240818
CYCLIC_SEED = 20240819
PARTITION_POOL = (2, 3, 5, 7, 8, 9, 11, 14, 17, 20)


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-30)


def _sweep_cases():
    """The 100 seeded instances for the oracle-equivalence sweep.

    Each case carries an unequal-work instance for the makespan solver and an
    equal-work twin (same releases) for the flow solver, plus one budget.
    """
    rng = random.Random(SWEEP_SEED)
    cases = []
    for _ in range(100):
        n = rng.randint(1, 8)
        releases = sorted(rng.uniform(0.0, 10.0) for _ in range(n))
        works = [rng.uniform(0.1, 10.0) for _ in range(n)]
        alpha = rng.choice([2.0, 3.0])
        w_eq = rng.uniform(0.1, 5.0)
        mk = make_instance(releases, works, alpha)
        fl = make_instance(releases, [w_eq] * n, alpha)
        e_mk = rng.uniform(0.3, 3.0) * sum(works)
        e_fl = rng.uniform(0.3, 3.0) * n * w_eq
        cases.append((mk, e_mk, fl, e_fl))
    return cases


def _cyclic_cases():
    """The 30 seeded equal-work two-processor instances."""
    rng = random.Random(CYCLIC_SEED)
    cases = []
    for _ in range(30):
        n = rng.randint(1, 6)
        releases = sorted(rng.uniform(0.0, 10.0) for _ in range(n))
        w = rng.uniform(0.5, 3.0)
        alpha = rng.choice([2.0, 3.0])
        inst = make_instance(releases, [w] * n, alpha, processors=2)
        energy = rng.uniform(0.5, 2.0) * n * w
        cases.append((inst, energy))
    return cases


@functools.lru_cache(maxsize=1)
def _million_job_instance() -> tuple[Instance, float]:
    n = 1_000_000
    works = [(0.5, 1.0, 1.5, 2.0)[k % 4] for k in range(n)]
    inst = make_instance([float(k) for k in range(n)], works, 3.0)
    return inst, 0.25 * sum(works)


def test_criterion_01_frontier_breakpoints():
    frontier = build_frontier(TRI)
    best = min(
        _time_one(lambda: build_frontier(TRI)) for _ in range(200)
    )
    bps = list(frontier.breakpoints)
    ok = (
        len(bps) == 2
        and abs(bps[0] - 17.0) <= 1e-9
        and abs(bps[1] - 8.0) <= 1e-9
        and best < 1e-3
    )
    _report(
        1,
        ok,
        f"breakpoints {bps} (want two at 17 and 8, 1e-9 abs), "
        f"build {best * 1e6:.1f} us (< 1 ms)",
    )


def _time_one(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def test_criterion_02_frontier_values():
    frontier = build_frontier(TRI)
    at17 = eval_makespan(frontier, 17.0)
    at8 = eval_makespan(frontier, 8.0)
    cross17 = oracle_best_value(TRI, 17.0, "makespan")
    cross8 = oracle_best_value(TRI, 8.0, "makespan")
    ok = (
        abs(at17 - 6.5) <= 1e-9
        and abs(at8 - 8.0) <= 1e-9
        and _rel(cross17, 6.5) <= 1e-4
        and _rel(cross8, 8.0) <= 1e-4
    )
    _report(
        2,
        ok,
        f"eval(17) = {at17:.12f} (want 6.5), eval(8) = {at8:.12f} (want 8.0); "
        f"reference solver gives {cross17:.6f} and {cross8:.6f}",
    )


def test_criterion_03_breakpoint_smoothness():
    frontier = build_frontier(TRI)
    (d1_above, d2_above), (d1_below, d2_below) = segment_derivatives_at(frontier, 17.0)
    want = -1.0 / 16.0
    jump = abs(d2_above - d2_below)
    ok = abs(d1_above - want) <= 1e-9 and abs(d1_below - want) <= 1e-9 and jump > 1e-3
    _report(
        3,
        ok,
        f"slope at 17 from above {d1_above:.12f}, from below {d1_below:.12f} "
        f"(want -1/16 = {want:.6f} both); curvature jump {jump:.6f} (> 1e-3)",
    )


def test_criterion_04_flow_relations_at_nine():
    t0 = time.perf_counter()
    schedule, _ = min_flow_for_energy(FLOW3, 9.0)
    elapsed = time.perf_counter() - t0
    s1, s2, s3 = (item.speed for item in schedule.items)

    eq1 = abs(s1**2 + s2**2 + s3**2 - 9.0)
    eq2 = abs(1.0 / s1 + 1.0 / s2 - 1.0)
    eq3 = abs(s1**3 - s2**3 - s3**3)
    value = math.fsum(c * s2 ** (12 - k) for k, c in enumerate(POLY12))
    scale = math.fsum(abs(c) * s2 ** (12 - k) for k, c in enumerate(POLY12))
    poly = abs(value) / scale

    ok = eq1 <= 1e-6 and eq2 <= 1e-6 and eq3 <= 1e-6 and poly <= 1e-6 and elapsed < 0.1
    _report(
        4,
        ok,
        f"speeds ({s1:.9f}, {s2:.9f}, {s3:.9f}); residuals "
        f"sum-of-squares {eq1:.3e}, reciprocal {eq2:.3e}, cubes {eq3:.3e}, "
        f"polynomial {poly:.3e} (each <= 1e-6); solve {elapsed * 1e3:.1f} ms (< 100 ms)",
    )


def test_criterion_05_pinned_regime_window():
    bounds = pinned_regime_bounds(FLOW3)
    assert bounds is not None
    lo, hi = bounds
    ok = abs(lo - 8.43) <= 0.01 and abs(hi - 11.54) <= 0.01
    _report(
        5,
        ok,
        f"window ({lo:.4f}, {hi:.4f}), want (8.43, 11.54) within 0.01 each",
    )


def test_criterion_06_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    checks = 0
    for mk, e_mk, fl, e_fl in _sweep_cases():
        got = makespan(inc_merge(mk, e_mk))
        ref = oracle_best_value(mk, e_mk, "makespan")
        worst = max(worst, _rel(got, ref))
        schedule, _ = min_flow_for_energy(fl, e_fl)
        ref_flow = oracle_best_value(fl, e_fl, "flow")
        worst = max(worst, _rel(total_flow(schedule), ref_flow))
        checks += 2
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and elapsed < 60.0
    _report(
        6,
        ok,
        f"{checks} solver-vs-reference checks over 100 seeded instances, "
        f"worst relative error {worst:.3e} (<= 1e-4), {elapsed:.1f} s (< 60 s)",
    )


def test_criterion_07_cyclic_optimality():
    worst_mk = 0.0
    worst_fl = 0.0
    for inst, energy in _cyclic_cases():
        _, deadline = multi_makespan_equal_work(inst, energy)
        _, best_mk = enumerate_assignments(inst, energy, "makespan")
        worst_mk = max(worst_mk, _rel(deadline, best_mk))
        _, flow = multi_flow_equal_work(inst, energy)
        _, best_fl = enumerate_assignments(inst, energy, "flow")
        worst_fl = max(worst_fl, _rel(flow, best_fl))
    ok = worst_mk <= 1e-6 and worst_fl <= 1e-6
    _report(
        7,
        ok,
        f"30 seeded two-processor instances: cyclic vs exhaustive, worst "
        f"relative gap makespan {worst_mk:.3e}, flow {worst_fl:.3e} (<= 1e-6)",
    )


def test_criterion_08_partition_reduction():
    def half_sum_reachable(values):
        total = sum(values)
        if total % 2:
            return False
        reach = {0}
        for v in values:
            reach |= {s + v for s in reach}
        return total // 2 in reach

    disagreements = 0
    balanced = 0
    n = len(PARTITION_POOL)
    for mask in range(1, 1 << n):
        subset = tuple(PARTITION_POOL[i] for i in range(n) if mask >> i & 1)
        want = half_sum_reachable(subset)
        got = decide_partition_via_schedule(PartitionInstance(subset))
        balanced += want
        disagreements += got != want
    ok = disagreements == 0
    _report(
        8,
        ok,
        f"all {(1 << n) - 1} nonempty submultisets of {list(PARTITION_POOL)}: "
        f"{disagreements} disagreements with subset-sum enumeration "
        f"({balanced} balanced)",
    )


def test_criterion_09_linear_time_merge():
    inst, energy = _million_job_instance()
    best = math.inf
    merges = None
    for _ in range(3):
        t0 = time.perf_counter()
        _, merges = inc_merge_with_stats(inst, energy)
        best = min(best, time.perf_counter() - t0)
    ok = best < 1.0 and merges <= inst.n
    _report(
        9,
        ok,
        f"n = 10^6 sorted instance: best of 3 runs {best:.3f} s (< 1 s), "
        f"{merges} merges (<= n)",
    )


def test_criterion_10_canonical_schedules():
    failures = []
    count = 0

    def check(tag: str, schedule) -> None:
        nonlocal count
        count += 1
        report = check_canonical(schedule)
        if not report.all_ok:
            failures.append((tag, report))

    for energy in (2.0, 8.0, 17.0, 40.0):
        check(f"tri@{energy:g}", inc_merge(TRI, energy))
    for energy in (9.0, 11.0):
        check(f"flow3@{energy:g}", inc_merge(FLOW3, energy))
    for i, (mk, e_mk, fl, e_fl) in enumerate(_sweep_cases()):
        check(f"sweep{i}-mk", inc_merge(mk, e_mk))
        check(f"sweep{i}-fl", inc_merge(fl, e_fl))
    for i, (inst, energy) in enumerate(_cyclic_cases()):
        uni = make_instance(
            [j.release for j in inst.jobs], [j.work for j in inst.jobs], inst.alpha
        )
        check(f"cyclic{i}", inc_merge(uni, energy))
    for subset in (PARTITION_POOL, PARTITION_POOL[:4], PARTITION_POOL[4:7]):
        encoded, budget, _ = partition_to_instance(PartitionInstance(subset))
        uni = make_instance(
            [j.release for j in encoded.jobs], [j.work for j in encoded.jobs], encoded.alpha
        )
        check(f"partition{len(subset)}", inc_merge(uni, budget))
    inst, energy = _million_job_instance()
    check("million", inc_merge(inst, energy))

    ok = not failures
    _report(
        10,
        ok,
        f"five structural properties hold on {count} merge schedules "
        f"(curve instance, flow instance, both seeded sweeps, partition "
        f"encodings, the 10^6-job synthetic)"
        + (f"; first failure {failures[0]}" if failures else ""),
    )
