"""Command-line front end.

Subcommands load a JSON instance, run the matching solver and emit JSON (or
CSV for the curve) to stdout or a file. Exit codes are part of the contract:
0 success, 1 verification found a disagreement, 2 malformed input or
arguments, 3 infeasible request, 4 convergence failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from . import __version__
from .core import (
    ConvergenceError,
    DegenerateReleaseError,
    InfeasibleError,
    Instance,
    InvalidArgumentError,
    InvalidInstanceError,
    Schedule,
    TooLargeError,
    UnsupportedInstanceError,
    dumps_canonical,
    format_float,
    instance_to_jsonable,
    load_instance,
    make_instance,
    makespan as schedule_makespan,
    schedule_to_jsonable,
)
from .curve import (
    build_frontier,
    derivative,
    sample_frontier,
    second_derivative,
)
from .flow_uni import FlowSolverConfig, classify_relations, min_flow_for_energy, pinned_regime_bounds
from .makespan_uni import energy_for_deadline, inc_merge
from .multi import (
    PartitionInstance,
    best_partition_makespan,
    combined_schedule,
    decide_partition_via_schedule,
    multi_flow_equal_work,
    multi_makespan_equal_work,
    partition_to_instance,
)
from .oracle import OracleConfig, oracle_best_value


@dataclass(frozen=True)
class CliRequest:
    """One parsed invocation; exactly one of energy/deadline is set per solve."""

    subcommand: str
    instance_path: str | None = None
    energy: float | None = None
    deadline: float | None = None
    epsilon: float | None = None
    processors: int | None = None
    sample_from: float | None = None
    sample_to: float | None = None
    samples: int | None = None
    output_format: str = "json"
    out_path: str | None = None
    plot_dir: str | None = None
    values: tuple[int, ...] | None = None
    seed: int = 0
    count: int = 20

    def __post_init__(self) -> None:
        if self.energy is not None and self.deadline is not None:
            raise InvalidArgumentError("give either an energy budget or a deadline, not both")
        if self.epsilon is not None and self.epsilon <= 0:
            raise InvalidArgumentError("epsilon must be positive")


def _load(request: CliRequest) -> Instance:
    if request.instance_path is None:
        raise InvalidArgumentError("an instance file is required")
    instance = load_instance(request.instance_path)
    if request.processors is not None:
        if request.processors < 1:
            raise InvalidArgumentError("processors must be >= 1")
        instance = Instance(
            jobs=instance.jobs, alpha=instance.alpha, processors=request.processors
        )
    return instance


def _emit_schedule(schedule: Schedule, extra: dict | None = None) -> str:
    payload = schedule_to_jsonable(schedule)
    if extra:
        payload.update(extra)
    return dumps_canonical(payload) + "\n"


def _run_makespan(request: CliRequest) -> str:
    instance = _load(request)
    if request.energy is None:
        raise InvalidArgumentError("makespan needs --energy")
    if instance.processors == 1:
        schedule = inc_merge(instance, request.energy)
        return _emit_schedule(schedule)
    schedules, finish = multi_makespan_equal_work(instance, request.energy)
    combined = combined_schedule(instance, schedules)
    return _emit_schedule(combined, {"common_finish": finish})


def _run_energy_for_deadline(request: CliRequest) -> str:
    instance = _load(request)
    if request.deadline is None:
        raise InvalidArgumentError("energy-for-deadline needs --deadline")
    if instance.processors != 1:
        raise UnsupportedInstanceError("deadline inversion is single-processor only")
    energy = energy_for_deadline(instance, request.deadline)
    return dumps_canonical({"deadline": request.deadline, "energy": energy}) + "\n"


def _run_curve(request: CliRequest) -> str:
    instance = _load(request)
    if instance.processors != 1:
        raise UnsupportedInstanceError("the trade-off curve is single-processor only")
    if request.sample_from is None or request.sample_to is None or request.samples is None:
        raise InvalidArgumentError("curve needs --from, --to and --samples")
    frontier = build_frontier(instance)
    points = sample_frontier(frontier, request.sample_from, request.sample_to, request.samples)
    rows = []
    for energy, value in points:
        segment = frontier.segment_index(energy)
        rows.append(
            (
                energy,
                value,
                derivative(frontier, energy),
                second_derivative(frontier, energy),
                segment,
            )
        )
    if request.plot_dir is not None:
        from .plotting import render_frontier_plots

        render_frontier_plots(frontier, points, request.plot_dir)
    if request.output_format == "csv":
        lines = ["energy,makespan,d1,d2,segment"]
        for energy, value, d1, d2, segment in rows:
            lines.append(
                ",".join(
                    (
                        format_float(energy),
                        format_float(value),
                        format_float(d1),
                        format_float(d2),
                        str(segment),
                    )
                )
            )
        return "\n".join(lines) + "\n"
    payload = [
        {"energy": e, "makespan": v, "d1": d1, "d2": d2, "segment": seg}
        for e, v, d1, d2, seg in rows
    ]
    return dumps_canonical(payload) + "\n"


def _run_flow(request: CliRequest) -> str:
    instance = _load(request)
    if request.energy is None:
        raise InvalidArgumentError("flow needs --energy")
    cfg = FlowSolverConfig()
    if request.epsilon is not None:
        cfg = FlowSolverConfig(epsilon_energy=request.epsilon)
    if instance.processors == 1:
        schedule, _ = min_flow_for_energy(instance, request.energy, cfg)
        items = sorted(schedule.items, key=lambda it: it.start)
        extra = {
            "sigma_n": items[-1].speed,
            "relations": classify_relations(instance, schedule),
        }
        return _emit_schedule(schedule, extra)
    schedules, _ = multi_flow_equal_work(instance, request.energy, cfg)
    tails = [
        sorted(s.items, key=lambda it: it.start)[-1].speed
        for s in schedules
        if s is not None
    ]
    combined = combined_schedule(instance, schedules)
    return _emit_schedule(combined, {"sigma_n": min(tails)})


def _run_pinned_range(request: CliRequest) -> str:
    instance = _load(request)
    bounds = pinned_regime_bounds(instance)
    if bounds is None:
        return dumps_canonical({"regime": None}) + "\n"
    return dumps_canonical({"regime": [bounds[0], bounds[1]]}) + "\n"


def _run_partition_demo(request: CliRequest) -> str:
    if not request.values:
        raise InvalidArgumentError("partition-demo needs --values")
    p = PartitionInstance(elements=request.values)
    instance, budget, target = partition_to_instance(p)
    best, combo = best_partition_makespan(p)
    balanced = decide_partition_via_schedule(p)
    witness = None
    if balanced:
        witness = [
            [a for a, proc in zip(p.elements, combo) if proc == side] for side in (1, 2)
        ]
    payload = {
        "elements": list(p.elements),
        "instance": instance_to_jsonable(instance),
        "budget": budget,
        "target": target,
        "best_makespan": best,
        "balanced": balanced,
        "witness": witness,
    }
    return dumps_canonical(payload) + "\n"


def _run_verify(request: CliRequest) -> tuple[str, int]:
    rng = random.Random(request.seed)
    oracle_cfg = OracleConfig()
    flow_cfg = FlowSolverConfig()
    worst = 0.0
    disagreements = 0
    checks = []
    for k in range(request.count):
        n = rng.randint(1, 6)
        alpha = rng.choice([2.0, 3.0])
        releases = sorted(round(rng.uniform(0.0, 10.0), 6) for _ in range(n))
        if rng.random() < 0.5:
            works = [round(rng.uniform(0.1, 10.0), 6) for _ in range(n)]
            metric = "makespan"
        else:
            works = [round(rng.uniform(0.1, 10.0), 6)] * n
            metric = "flow"
        instance = make_instance(releases=releases, works=works, alpha=alpha)
        budget = rng.uniform(0.3, 3.0) * sum(works)
        if metric == "makespan":
            ours = schedule_makespan(inc_merge(instance, budget))
        else:
            _, ours = min_flow_for_energy(instance, budget, flow_cfg)
        theirs = oracle_best_value(instance, budget, metric, oracle_cfg)
        rel = abs(ours - theirs) / max(abs(ours), abs(theirs), 1e-12)
        worst = max(worst, rel)
        ok = rel <= 1e-4
        if not ok:
            disagreements += 1
        checks.append(
            {
                "index": k,
                "metric": metric,
                "n": n,
                "alpha": alpha,
                "solver": ours,
                "reference": theirs,
                "rel_error": rel,
                "ok": ok,
            }
        )
    payload = {
        "seed": request.seed,
        "count": request.count,
        "max_rel_error": worst,
        "disagreements": disagreements,
        "checks": checks,
    }
    return dumps_canonical(payload) + "\n", 0 if disagreements == 0 else 1


def run(request: CliRequest) -> tuple[int, str]:
    """Execute one request; returns (exit status, emitted artifact)."""
    if request.subcommand == "makespan":
        return 0, _run_makespan(request)
    if request.subcommand == "energy-for-deadline":
        return 0, _run_energy_for_deadline(request)
    if request.subcommand == "curve":
        return 0, _run_curve(request)
    if request.subcommand == "flow":
        return 0, _run_flow(request)
    if request.subcommand == "pinned-range":
        return 0, _run_pinned_range(request)
    if request.subcommand == "partition-demo":
        return 0, _run_partition_demo(request)
    if request.subcommand == "verify":
        text, status = _run_verify(request)
        return status, text
    raise InvalidArgumentError(f"unknown subcommand {request.subcommand!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powersched",
        description="Power-aware scheduling: makespan and flow under an energy budget.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p: argparse.ArgumentParser, needs_instance: bool = True) -> None:
        if needs_instance:
            p.add_argument("--instance", required=True, help="instance JSON file")
        p.add_argument("--out", help="write the result here instead of stdout")

    p = sub.add_parser("makespan", help="minimize makespan under an energy budget")
    add_common(p)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--processors", type=int, help="override the instance's processor count")

    p = sub.add_parser("energy-for-deadline", help="energy needed to finish by a deadline")
    add_common(p)
    p.add_argument("--deadline", type=float, required=True)

    p = sub.add_parser("curve", help="sample the energy/makespan trade-off curve")
    add_common(p)
    p.add_argument("--from", dest="sample_from", type=float, required=True)
    p.add_argument("--to", dest="sample_to", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv")
    p.add_argument("--plot-dir", help="also render curve and derivative plots as PNGs here")

    p = sub.add_parser("flow", help="minimize total flow under an energy budget")
    add_common(p)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--epsilon", type=float, help="relative energy tolerance")
    p.add_argument("--processors", type=int, help="override the instance's processor count")

    p = sub.add_parser("pinned-range", help="energy range where the middle job stays pinned")
    add_common(p)

    p = sub.add_parser("partition-demo", help="decide an even split via the scheduler")
    add_common(p, needs_instance=False)
    p.add_argument("--values", required=True, help="comma-separated positive integers")

    p = sub.add_parser("verify", help="cross-check the solvers against a slow convex oracle")
    add_common(p, needs_instance=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=20)

    return parser


def _request_from_args(args: argparse.Namespace) -> CliRequest:
    values = None
    if getattr(args, "values", None) is not None:
        try:
            values = tuple(int(part) for part in args.values.split(",") if part.strip())
        except ValueError as exc:
            raise InvalidArgumentError(f"bad --values: {exc}") from exc
    return CliRequest(
        subcommand=args.subcommand,
        instance_path=getattr(args, "instance", None),
        energy=getattr(args, "energy", None),
        deadline=getattr(args, "deadline", None),
        epsilon=getattr(args, "epsilon", None),
        processors=getattr(args, "processors", None),
        sample_from=getattr(args, "sample_from", None),
        sample_to=getattr(args, "sample_to", None),
        samples=getattr(args, "samples", None),
        output_format=getattr(args, "output_format", "json"),
        out_path=getattr(args, "out", None),
        plot_dir=getattr(args, "plot_dir", None),
        values=values,
        seed=getattr(args, "seed", 0),
        count=getattr(args, "count", 20),
    )


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        request = _request_from_args(args)
        status, text = run(request)
    except (
        InvalidArgumentError,
        InvalidInstanceError,
        UnsupportedInstanceError,
        DegenerateReleaseError,
        TooLargeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"error: infeasible: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"error: did not converge: {exc}", file=sys.stderr)
        return 4
    if request.out_path is not None:
        with open(request.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
