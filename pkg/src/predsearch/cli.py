"""Command-line harness: audited single runs, (c, d) sweeps, adversarial
lower-bound experiments, and net diagnostics.

All outputs (CSV, JSON, SVG) are deterministic functions of the config and
seed. Exit codes: 0 success, 1 bound/assertion violation, 2 usage or config
error.

Examples:
    predsearch run --config run.json --out trace.csv --report report.json
    predsearch sweep --d 1 2 --c 2 4 --trials 25 --seed 1 --out sweep.csv
    predsearch lowerbound --c 16 --d 2 --strategy unknown_c --report lb.json
    predsearch net --d 2 --r 1.0 --eps 0.25 --check
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from hashlib import blake2b
from pathlib import Path

import numpy as np

from .geometry import Ball, Point, distance, origin
from .nets import (
    CandidateCapExceeded,
    build_net,
    check_covering,
    check_separation,
    net_size_lower_bound,
    net_size_upper_bound,
)
from .oracles import OracleSpec, PredictionOracle
from .strategies import (
    GuessTooSmallError,
    QueryBudgetExceeded,
    SearchTrace,
    StrategyConfig,
    run_strategy,
)
from .svg import render_svg
from .verification import audit_trace, build_adversarial_instance, replay_consistent

__all__ = ["main", "RunConfig", "parse_run_config", "trace_to_csv", "derive_seed"]


class ConfigError(ValueError):
    """Malformed experiment config (exit code 2)."""


def fmt12(x: float) -> str:
    """Fixed 12-significant-digit, locale-independent number formatting."""
    return format(float(x), ".12g")


def derive_seed(base: int, *parts) -> int:
    """Stable sub-seed derivation so every trial owns an independent stream."""
    h = blake2b(digest_size=8)
    h.update(repr((base,) + parts).encode())
    return int.from_bytes(h.digest(), "little") >> 1


@dataclass(frozen=True)
class RunConfig:
    d: int
    target: Point
    oracle_spec: OracleSpec
    strategy: StrategyConfig
    seed: int


def _sample_target(d: int, radius: float, seed: int) -> Point:
    """Uniform point in the closed ball B(o, radius)."""
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=d)
    norm = math.sqrt(float(direction @ direction))
    if norm == 0.0:
        direction = np.zeros(d)
        direction[0] = 1.0
        norm = 1.0
    r = radius * rng.uniform() ** (1.0 / d)
    return Point(tuple(direction / norm * r))


def parse_run_config(doc: dict) -> RunConfig:
    try:
        d = int(doc["d"])
        seed = int(doc.get("seed", 0))
        raw_target = doc["target"]
        oracle_doc = dict(doc["oracle"])
        strategy_doc = dict(doc["strategy"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config structure: {exc}") from exc
    if d < 1:
        raise ConfigError("d must be >= 1")
    if raw_target == "random":
        radius = float(doc.get("target_radius", 1.0))
        target = _sample_target(d, radius, derive_seed(seed, "target"))
    else:
        try:
            target = Point(tuple(float(x) for x in raw_target))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad target: {exc}") from exc
    if target.dimension != d:
        raise ConfigError(f"target dimension {target.dimension} != d = {d}")
    try:
        oracle_spec = OracleSpec(
            kind=oracle_doc.pop("kind"),
            target=target,
            c_hi=oracle_doc.pop("c_hi", 1.0),
            c_lo=oracle_doc.pop("c_lo", 1.0),
            seed=oracle_doc.pop("seed", derive_seed(seed, "oracle")),
            alpha=oracle_doc.pop("alpha", None),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad oracle config: {exc}") from exc
    if oracle_doc:
        raise ConfigError(f"unknown oracle keys: {sorted(oracle_doc)}")
    try:
        strategy = StrategyConfig(
            kind=strategy_doc.pop("kind"),
            c_guess=strategy_doc.pop("c_guess", 1.0),
            delta_stop=strategy_doc.pop("delta_stop", 1e-3),
            epsilon_ratio=strategy_doc.pop("epsilon_ratio", 0.01),
            snap_integral=strategy_doc.pop("snap_integral", False),
            max_queries=strategy_doc.pop("max_queries", 10_000_000),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad strategy config: {exc}") from exc
    if strategy_doc:
        raise ConfigError(f"unknown strategy keys: {sorted(strategy_doc)}")
    if strategy.kind == "exact_c1":
        exact = oracle_spec.kind == "exact" or (
            oracle_spec.c_lo == 1.0 and oracle_spec.c_hi == 1.0
        )
        if not exact:
            raise ConfigError("exact_c1 requires an exact oracle (c_lo = c_hi = 1)")
    return RunConfig(d=d, target=target, oracle_spec=oracle_spec, strategy=strategy, seed=seed)


def trace_to_csv(trace: SearchTrace) -> str:
    """Per-vertex trace table: step,j,i,x0..x{d-1},lambda,cum_length."""
    d = trace.dimension
    header = ["step", "j", "i"] + [f"x{k}" for k in range(d)] + ["lambda", "cum_length"]
    lines = [",".join(header)]
    cum = 0.0
    prev = None
    for step, (vertex, lam, (j, i)) in enumerate(
        zip(trace.vertices.vertices, trace.lambda_values, trace.phase_labels)
    ):
        if prev is not None:
            cum += distance(prev, vertex)
        prev = vertex
        row = [str(step), str(j), str(i)]
        row += [fmt12(x) for x in vertex.coords]
        row += [fmt12(lam), fmt12(cum)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _write(path: str | None, content: str) -> None:
    if path is not None:
        Path(path).write_text(content)


def _report_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _print_summary(report) -> None:
    ratio = "degenerate" if report.ratio is None else fmt12(report.ratio)
    print(
        f"strategy={report.strategy} d={report.d} c={fmt12(report.c)} "
        f"reached={report.reached} length={fmt12(report.total_length)} "
        f"dist_ot={fmt12(report.dist_ot)} ratio={ratio} queries={report.queries}"
    )
    for v in report.violations:
        print(f"VIOLATION: {v}", file=sys.stderr)


def cmd_run(args) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    cfg = parse_run_config(doc)
    oracle = PredictionOracle(cfg.oracle_spec)
    trace = run_strategy(oracle, cfg.strategy)
    report = audit_trace(trace, cfg.target, cfg.strategy, oracle)
    _write(args.out, trace_to_csv(trace))
    payload = report.to_dict()
    payload["target"] = list(cfg.target.coords)
    _write(args.report, _report_json(payload))
    if args.svg is not None:
        _write(args.svg, render_svg(trace, target=cfg.target))
    _print_summary(report)
    return 0 if report.reached and not report.violations else 1


SWEEP_COLUMNS = [
    "row_type",
    "d",
    "c",
    "trial",
    "strategy",
    "dist_ot",
    "total_length",
    "ratio",
    "bound",
    "doublings",
    "doubling_cap",
    "queries",
    "ok",
]


def _sweep_trial(d: int, c: float, trial: int, seed: int, delta: float):
    """One sweep cell trial: a fresh random target and noise oracle, searched
    with both the known-factor and the doubling strategy."""
    rng = np.random.default_rng(derive_seed(seed, "target", d, fmt12(c), trial))
    direction = rng.normal(size=d)
    norm = math.sqrt(float(direction @ direction))
    while norm == 0.0:
        direction = rng.normal(size=d)
        norm = math.sqrt(float(direction @ direction))
    radius = rng.uniform(0.5, 2.0)
    target = Point(tuple(direction / norm * radius))
    oracle_seed = derive_seed(seed, "oracle", d, fmt12(c), trial)
    rows = []
    for kind in ("known_c", "unknown_c"):
        spec = OracleSpec(kind="seeded_noise", target=target, c_hi=c, seed=oracle_seed)
        oracle = PredictionOracle(spec)
        config = StrategyConfig(
            kind=kind, c_guess=c if kind == "known_c" else 1.0, delta_stop=delta
        )
        trace = run_strategy(oracle, config)
        report = audit_trace(trace, target, config, oracle)
        bound = report.bound_upper_known if kind == "known_c" else report.bound_upper_unknown
        ok = report.reached and not report.violations
        rows.append(
            {
                "row_type": "trial",
                "d": str(d),
                "c": fmt12(c),
                "trial": str(trial),
                "strategy": kind,
                "dist_ot": fmt12(report.dist_ot),
                "total_length": fmt12(report.total_length),
                "ratio": fmt12(report.ratio),
                "bound": fmt12(bound),
                "doublings": "" if report.doublings is None else str(report.doublings),
                "doubling_cap": "" if report.doubling_cap is None else str(report.doubling_cap),
                "queries": str(report.queries),
                "ok": "true" if ok else "false",
            }
        )
    return rows


def cmd_sweep(args) -> int:
    if any(c < 1.0 for c in args.c):
        raise ConfigError("all sweep c values must be >= 1")
    if args.trials < 1:
        raise ConfigError("trials must be >= 1")
    rows = []
    for d in args.d:
        for c in args.c:
            cell = []
            for trial in range(args.trials):
                cell.extend(_sweep_trial(d, c, trial, args.seed, args.delta))
            rows.extend(cell)
            for kind in ("known_c", "unknown_c"):
                ratios = [float(r["ratio"]) for r in cell if r["strategy"] == kind]
                bound = next(r["bound"] for r in cell if r["strategy"] == kind)
                for stat, value in (
                    ("mean", sum(ratios) / len(ratios)),
                    ("max", max(ratios)),
                ):
                    rows.append(
                        {
                            "row_type": f"summary_{stat}",
                            "d": str(d),
                            "c": fmt12(c),
                            "trial": "",
                            "strategy": kind,
                            "dist_ot": "",
                            "total_length": "",
                            "ratio": fmt12(value),
                            "bound": bound,
                            "doublings": "",
                            "doubling_cap": "",
                            "queries": "",
                            "ok": "",
                        }
                    )
    lines = [",".join(SWEEP_COLUMNS)]
    lines += [",".join(r[col] for col in SWEEP_COLUMNS) for r in rows]
    _write(args.out, "\n".join(lines) + "\n")
    bad = [r for r in rows if r["ok"] == "false"]
    for r in bad:
        print(
            f"VIOLATION: d={r['d']} c={r['c']} trial={r['trial']} "
            f"strategy={r['strategy']} ratio={r['ratio']} bound={r['bound']}",
            file=sys.stderr,
        )
    print(f"sweep: {sum(1 for r in rows if r['row_type'] == 'trial')} trial rows, "
          f"{len(bad)} violations -> {args.out}")
    return 1 if bad else 0


def cmd_lowerbound(args) -> int:
    if not args.c > 4.0:
        raise ConfigError("the adversarial construction needs c > 4")
    if args.strategy not in ("known_c", "unknown_c"):
        raise ConfigError("strategy must be known_c or unknown_c")
    instance = build_adversarial_instance(args.c, args.d)
    config = StrategyConfig(
        kind=args.strategy,
        c_guess=args.c if args.strategy == "known_c" else 1.0,
        delta_stop=args.delta,
    )
    trace = run_strategy(instance, config)
    committed = instance.committed
    target = committed if committed is not None else instance.targets[instance.live[0]]
    report = audit_trace(trace, target, config, instance, instance=instance)
    violations = list(report.violations)
    replay_ok = replay_consistent(instance)
    if not replay_ok:
        violations.append("query log replay against the committed target mismatched")
    payload = report.to_dict()
    payload["replay_ok"] = replay_ok
    payload["committed_target"] = None if committed is None else list(committed.coords)
    payload["violations"] = violations
    _write(args.report, _report_json(payload))
    if args.svg is not None:
        _write(args.svg, render_svg(trace, target=target, instance=instance))
    _print_summary(report)
    print(
        f"adversary: {report.n_targets} candidate balls, visited={report.balls_visited}, "
        f"replay_ok={replay_ok}"
    )
    return 0 if report.reached and not violations else 1


def cmd_net(args) -> int:
    if not args.eps <= args.r:
        raise ConfigError("need eps <= r")
    net = build_net(Ball(origin(args.d), args.r), args.eps)
    lower = net_size_lower_bound(args.r, args.eps, args.d)
    upper = net_size_upper_bound(args.r, args.eps, args.d)
    print(f"|N| = {len(net)}")
    print(f"size lower bound (r/eps)^d = {fmt12(lower)}")
    print(f"size upper bound (4.5*r/eps)^d = {fmt12(upper)}")
    ok = lower <= len(net) <= upper
    print(f"size within bounds: {ok}")
    if args.check:
        cover = check_covering(net, args.samples, args.seed)
        sep = check_separation(net)
        print(
            f"covering: {'ok' if cover.ok else 'FAILED'} "
            f"(max_gap={fmt12(cover.max_gap)} vs eps={fmt12(args.eps)}, "
            f"{cover.samples} samples)"
        )
        print(f"separation: {'ok' if sep else 'FAILED'} (s={fmt12(net.separation)})")
        ok = ok and cover.ok and sep
    if args.dump is not None:
        header = ",".join(f"x{k}" for k in range(args.d))
        lines = [header] + [",".join(fmt12(x) for x in p.coords) for p in net.points]
        _write(args.dump, "\n".join(lines) + "\n")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="predsearch",
        description="Audited experiments for target search guided by distance predictions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one config-driven search, audited")
    p_run.add_argument("--config", required=True, help="JSON experiment config")
    p_run.add_argument("--out", default=None, help="trace CSV path")
    p_run.add_argument("--report", default=None, help="report JSON path")
    p_run.add_argument("--svg", default=None, help="SVG path (d=2 only)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="(d, c) grid of seeded trials")
    p_sweep.add_argument("--d", type=int, nargs="+", required=True)
    p_sweep.add_argument("--c", type=float, nargs="+", required=True)
    p_sweep.add_argument("--trials", type=int, required=True)
    p_sweep.add_argument("--seed", type=int, required=True)
    p_sweep.add_argument("--delta", type=float, default=1e-3)
    p_sweep.add_argument("--out", required=True, help="sweep CSV path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_lb = sub.add_parser("lowerbound", help="run a strategy against the adaptive adversary")
    p_lb.add_argument("--c", type=float, required=True)
    p_lb.add_argument("--d", type=int, required=True)
    p_lb.add_argument("--strategy", default="unknown_c")
    p_lb.add_argument("--delta", type=float, default=1e-3)
    p_lb.add_argument("--report", default=None, help="report JSON path")
    p_lb.add_argument("--svg", default=None, help="SVG path (d=2 only)")
    p_lb.set_defaults(func=cmd_lowerbound)

    p_net = sub.add_parser("net", help="build a net and certify its bounds")
    p_net.add_argument("--d", type=int, required=True)
    p_net.add_argument("--r", type=float, default=1.0)
    p_net.add_argument("--eps", type=float, required=True)
    p_net.add_argument("--check", action="store_true", help="run covering/separation checks")
    p_net.add_argument("--samples", type=int, default=10_000)
    p_net.add_argument("--seed", type=int, default=0)
    p_net.add_argument("--dump", default=None, help="net point CSV path")
    p_net.set_defaults(func=cmd_net)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CandidateCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GuessTooSmallError, QueryBudgetExceeded) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
