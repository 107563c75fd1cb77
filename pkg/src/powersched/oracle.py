"""Slow, independent optimizers used to validate the fast solvers.

Everything here works on per-job durations. For a fixed job order with start
semantics S_i = max(r_i, C_{i-1}), both metrics and the energy constraint
sum w_i**alpha / d_i**(alpha-1) <= E are convex in the durations, so cyclic
coordinate descent with an exact line search converges to the global optimum.
These run at desk scale only; they exist to cross-check, not to be fast.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    ConvergenceError,
    Instance,
    InvalidArgumentError,
    TooLargeError,
)

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, slots=True)
class OracleConfig:
    duration_tolerance: float = 1e-10
    max_rounds: int = 200
    assignment_cap: int = 16

    def __post_init__(self) -> None:
        if self.duration_tolerance <= 0 or self.max_rounds <= 0:
            raise InvalidArgumentError("oracle tolerances must be positive")
        if self.assignment_cap > 16:
            raise InvalidArgumentError("assignment_cap is limited to 16")


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section search for the minimizer of a unimodal f on [lo, hi]."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a), abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _evaluate(releases, works, durations, metric: str, tau: float = 0.0) -> float:
    """Metric of the schedule induced by the durations.

    tau > 0 replaces the max() in the start-time semantics with a soft
    maximum of that temperature. The smoothed value upper-bounds the exact
    one and converges to it as tau drops; it exists so the coordinate
    descent never sits down on a kink of the exact objective.
    """
    t = -math.inf
    flow = 0.0
    for r, w, d in zip(releases, works, durations):
        if tau > 0.0 and t > -math.inf:
            m = t if t > r else r
            s = m + tau * math.log(math.exp((t - m) / tau) + math.exp((r - m) / tau))
        else:
            s = t if t > r else r
        t = s + d
        flow += t - r
    return t if metric == "makespan" else flow


def _project(works, durations, alpha: float, budget: float) -> list[float]:
    """Scale all durations uniformly so the energy equals the budget exactly."""
    energy = sum(w**alpha / d ** (alpha - 1.0) for w, d in zip(works, durations))
    c = (energy / budget) ** (1.0 / (alpha - 1.0))
    return [d * c for d in durations]


def convex_oracle(
    instance: Instance,
    order: Sequence[int],
    energy_budget: float,
    metric: str,
    config: OracleConfig | None = None,
) -> tuple[list[float], float]:
    """Minimize makespan or total flow over durations for a fixed job order.

    `order` lists 0-based indices into instance.jobs. Returns the optimal
    durations (in order) and the metric value. Raises convergence-error with
    the best value found if max_rounds is exhausted before the per-round
    improvement drops below duration_tolerance.
    """
    if metric not in ("makespan", "flow"):
        raise InvalidArgumentError(f"unknown metric {metric!r}")
    if not (energy_budget > 0):
        raise InvalidArgumentError("energy budget must be positive")
    cfg = config or OracleConfig()
    alpha = instance.alpha
    releases = [instance.jobs[i].release for i in order]
    works = [instance.jobs[i].work for i in order]
    n = len(order)

    share = energy_budget / n
    durations = [(w**alpha / share) ** (1.0 / (alpha - 1.0)) for w in works]
    durations = _project(works, durations, alpha, energy_budget)
    best = _evaluate(releases, works, durations, metric)
    best_durations = durations.copy()

    # anneal the soft-max temperature down to zero; the exact objective has
    # kinks wherever a completion meets a release, and descending on the
    # smoothed surface first keeps the coordinate steps from stalling there
    scale = sum(durations) / n
    taus = [scale * 0.1 * 0.125**k for k in range(10)] + [0.0]
    rounds_used = 0
    for tau in taus:
        stage_tol = max(cfg.duration_tolerance * max(1.0, abs(best)), tau * 1e-2)
        stage_prev = math.inf
        for _ in range(30):
            if rounds_used >= cfg.max_rounds:
                raise ConvergenceError(
                    f"coordinate descent did not settle in {cfg.max_rounds} rounds",
                    best=best,
                )
            rounds_used += 1
            for i in range(n):

                def trial(x: float, i=i) -> float:
                    cand = durations.copy()
                    cand[i] = x
                    cand = _project(works, cand, alpha, energy_budget)
                    return _evaluate(releases, works, cand, metric, tau)

                lo, hi = 1e-6, durations[i] * 64.0
                for _expand in range(8):
                    x = _golden_min(trial, lo, hi, 1e-12)
                    if x < lo * 1.5 and lo > 1e-18:
                        lo /= 64.0
                    elif x > hi / 1.5:
                        hi *= 64.0
                    else:
                        break
                durations[i] = x
                durations = _project(works, durations, alpha, energy_budget)
            # pair transfers rebalance two neighbors on the budget surface
            # without disturbing coordinates the projection would drag along
            for i in range(n - 1):
                wi_a = works[i] ** alpha
                wj_a = works[i + 1] ** alpha
                e_pair = (
                    wi_a / durations[i] ** (alpha - 1.0)
                    + wj_a / durations[i + 1] ** (alpha - 1.0)
                )

                def partner(x: float) -> float:
                    rest = e_pair - wi_a / x ** (alpha - 1.0)
                    return (wj_a / rest) ** (1.0 / (alpha - 1.0))

                def transfer(x: float, i=i) -> float:
                    cand = durations.copy()
                    cand[i] = x
                    cand[i + 1] = partner(x)
                    return _evaluate(releases, works, cand, metric, tau)

                x_min = (wi_a / e_pair) ** (1.0 / (alpha - 1.0))
                lo = x_min * (1.0 + 1e-9)
                hi = durations[i] * 8.0
                for _expand in range(8):
                    x = _golden_min(transfer, lo, hi, 1e-12)
                    if x > hi / 1.5:
                        hi *= 8.0
                    else:
                        break
                durations[i] = x
                durations[i + 1] = partner(x)
            durations = _project(works, durations, alpha, energy_budget)
            value = _evaluate(releases, works, durations, metric)
            if value < best:
                best = value
                best_durations = durations.copy()
            if stage_prev - value < stage_tol:
                break
            stage_prev = value
    return best_durations, best


def oracle_best_value(
    instance: Instance, energy_budget: float, metric: str, config: OracleConfig | None = None
) -> float:
    """Convenience wrapper: release order, value only."""
    order = list(range(instance.n))
    return convex_oracle(instance, order, energy_budget, metric, config)[1]


def enumerate_assignments(
    instance: Instance,
    energy_budget: float,
    metric: str,
    config: OracleConfig | None = None,
):
    """Exhaust all m**n job-to-processor assignments and return the best.

    Returns (mapping, value) where mapping[i] is the 1-based processor of the
    i-th job in release order. Makespan couples processors through a common
    finish time, flow through a common final speed (equal works) or an
    explicit budget split (unequal works, golden-section search).
    """
    from .multi import assignment_value

    cfg = config or OracleConfig()
    n = instance.n
    m = instance.processors
    if n > cfg.assignment_cap:
        raise TooLargeError(f"n={n} exceeds the enumeration cap {cfg.assignment_cap}")
    best_value = math.inf
    best_mapping: tuple[int, ...] | None = None
    for combo in itertools.product(range(1, m + 1), repeat=n):
        value = assignment_value(instance, combo, energy_budget, metric, cfg)
        if value < best_value:
            best_value = value
            best_mapping = combo
    assert best_mapping is not None
    return best_mapping, best_value
