"""Command-line front end.

    quickdiag verify    --config CFG [--out certificate.json]
    quickdiag calibrate --config CFG [--theoretical]
    quickdiag delay     --config CFG [--calibration cal.json]
    quickdiag false     --config CFG [--calibration cal.json]
    quickdiag figure    --config CFG [--calibration cal.json] [--no-plot]

Exit codes: 0 success / verification passed, 1 verification failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .boundedness import check_dsb_direct, check_dsb_via_wsb, check_wsb, delta_star
from .config import ConfigError, ExperimentConfig, load_config
from .montecarlo import (
    GlrProcedure,
    McusumProcedure,
    Scenario,
    calibrate_threshold,
    estimate_delay,
    false_metrics,
    grid_distributions,
)
from .mcusum import upsilon_from_distributions
from .report import DELAY_COLUMNS, FALSE_COLUMNS, FIGURE_COLUMNS, write_csv, write_json

log = logging.getLogger("quickdiag")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


# ---------------------------------------------------------------------------
# helpers


def resolve_h(spec, calibration: dict | None) -> float:
    if spec.h is not None:
        return float(spec.h)
    if calibration and spec.id in calibration:
        return float(calibration[spec.id]["h"])
    return math.log(spec.gamma)


def build_procedure(cfg: ExperimentConfig, spec, nus, h: float):
    if spec.kind == "glr":
        return GlrProcedure(tuple(cfg.sets), spec.window, h, spec.id)
    if spec.pair_source == "oracle":
        return McusumProcedure(upsilon_from_distributions(nus), h, spec.id)
    return McusumProcedure(cfg.pairs[spec.pair_source], h, spec.id)


def false_cap(cfg: ExperimentConfig, spec, h: float) -> int:
    if cfg.false_cap is not None:
        return cfg.false_cap
    gamma = spec.gamma if spec.gamma is not None else math.exp(h)
    return int(20 * gamma)


def _load_calibration(path):
    if path is None:
        return None
    try:
        return json.loads(Path(path).read_text())["algorithms"]
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"calibration file {path}: {exc}") from None


def _out_path(args, cfg, default_name):
    if args.out:
        out = Path(args.out)
        return out / default_name if out.suffix == "" else out
    return Path(cfg.output) / default_name


def _out_dir(args, cfg):
    return Path(args.out) if args.out else Path(cfg.output)


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args, cfg: ExperimentConfig) -> int:
    model = cfg.model()
    wsb = {
        f"{i},{j}": check_wsb(model.sets[i], model.sets[j], model.candidate_pairs[i, j], f"{i},{j}").to_dict()
        for (i, j) in model.candidate_pairs
    }
    via = check_dsb_via_wsb(model)
    direct = check_dsb_direct(model)
    payload = {
        "passed": direct.passed,
        "delta_star": delta_star(model.lfds, model.candidate_pairs),
        "wsb": wsb,
        "dsb_via_wsb": via.to_dict(),
        "dsb_direct": direct.to_dict(),
        "warnings": model.disjointness_warnings(),
    }
    path = write_json(_out_path(args, cfg, "certificate.json"), payload)
    status = "passed" if direct.passed else "FAILED"
    print(f"dual stochastic boundedness {status}; Delta_* = {payload['delta_star']:.6g}; certificate: {path}")
    for w in direct.failed():
        print(f"  failed {w.condition}: value {w.value:.6g} {w.relation} {w.bound:.6g} at {w.point}")
    return EXIT_OK if direct.passed else EXIT_FAIL


def cmd_calibrate(args, cfg: ExperimentConfig) -> int:
    result = {}
    for spec in cfg.algorithms:
        if spec.h is not None or args.theoretical:
            h = resolve_h(spec, None)
            entry = {"h": h, "gamma": spec.gamma, "mode": "fixed" if spec.h is not None else "theoretical"}
            if not args.theoretical:
                proc = build_procedure(cfg, spec, cfg.lfds, h)
                comps = false_metrics(proc, cfg.lfds, cfg.runs, cfg.master_seed, false_cap(cfg, spec, h), args.threads)
                key = min(comps, key=lambda k: comps[k].mean)
                entry.update(F_mean=comps[key].mean, F_se=comps[key].se, F_component=list(key))
            result[spec.id] = entry
            continue
        proc = build_procedure(cfg, spec, cfg.lfds, math.log(spec.gamma))
        cal = calibrate_threshold(
            proc, cfg.lfds, spec.gamma, cfg.runs, cfg.master_seed, cfg.tolerance,
            false_cap(cfg, spec, 0.0), threads=args.threads,
        )
        key = min(cal.components, key=lambda k: cal.components[k].mean)
        result[spec.id] = {
            "h": cal.h,
            "gamma": spec.gamma,
            "mode": "monte-carlo",
            "status": cal.status,
            "F_mean": cal.F.mean,
            "F_se": cal.F.se,
            "F_component": list(key),
            "F_censored": cal.F.censored,
            "warnings": cal.warnings,
            "evaluations": [list(e) for e in cal.evaluations],
        }
        print(f"{spec.id}: h = {cal.h:.6g}, F = {cal.F.mean:.6g} +/- {cal.F.se:.3g} ({cal.status})")
    path = write_json(_out_path(args, cfg, "calibration.json"),
                      {"runs": cfg.runs, "master_seed": cfg.master_seed, "algorithms": result})
    if args.theoretical:
        for k, v in result.items():
            print(f"{k}: h = {v['h']:.6g} (log gamma)")
    print(f"calibration: {path}")
    return EXIT_OK


def cmd_delay(args, cfg: ExperimentConfig) -> int:
    calibration = _load_calibration(args.calibration)
    rows = []
    for spec in cfg.algorithms:
        h = resolve_h(spec, calibration)
        proc = build_procedure(cfg, spec, cfg.lfds, h)
        for j in range(1, cfg.J + 1):
            est = estimate_delay(proc, Scenario(cfg.lfds[0], cfg.lfds[j], 1, j), cfg.runs, cfg.master_seed,
                                 cfg.cap, args.threads)
            rows.append({
                "algorithm": spec.id, "mean": _params(cfg.lfds[j]), "change_type": j, "h": h,
                "delay_mean": est.mean, "delay_se": est.se, "misisolation_frac": est.misisolation,
                "censored": est.censored, "runs": est.runs,
            })
    path = write_csv(_out_path(args, cfg, "delays.csv"), DELAY_COLUMNS, rows)
    print(f"delays: {path}")
    return EXIT_OK


def cmd_false(args, cfg: ExperimentConfig) -> int:
    calibration = _load_calibration(args.calibration)
    rows = []
    for spec in cfg.algorithms:
        h = resolve_h(spec, calibration)
        proc = build_procedure(cfg, spec, cfg.lfds, h)
        comps = false_metrics(proc, cfg.lfds, cfg.runs, cfg.master_seed, false_cap(cfg, spec, h), args.threads)
        for (i, j), est in comps.items():
            rows.append({
                "algorithm": spec.id, "i": i, "j": j, "h": h, "false_mean": est.mean, "false_se": est.se,
                "censored": est.censored, "runs": est.runs, "lower_bound": est.lower_bound,
            })
    path = write_csv(_out_path(args, cfg, "false.csv"), FALSE_COLUMNS, rows)
    print(f"false alarm / false isolation times: {path}")
    return EXIT_OK


def figure_rows(cfg: ExperimentConfig, calibration=None, threads: int = 1) -> dict:
    """Per change type, one row per (grid point, algorithm)."""
    out = {}
    for change_type, mean in cfg.sweep:
        nus = grid_distributions(cfg.lfds, change_type, mean)
        scenario = Scenario(nus[0], nus[change_type], 1, change_type)
        for spec in cfg.algorithms:
            proc = build_procedure(cfg, spec, nus, resolve_h(spec, calibration))
            est = estimate_delay(proc, scenario, cfg.runs, cfg.master_seed, cfg.cap, threads)
            out.setdefault(change_type, []).append({
                "phi": float(mean[0]), "algorithm": spec.id, "delay_mean": est.mean,
                "delay_se": est.se, "misisolation_frac": est.misisolation,
            })
    return out


def cmd_figure(args, cfg: ExperimentConfig) -> int:
    if not cfg.sweep:
        raise ConfigError("sweep: figure needs a non-empty sweep grid")
    calibration = _load_calibration(args.calibration)
    out_dir = _out_dir(args, cfg)
    for change_type, rows in figure_rows(cfg, calibration, args.threads).items():
        path = write_csv(out_dir / f"delays_type{change_type}.csv", FIGURE_COLUMNS, rows)
        print(f"type {change_type}: {path}")
        if not args.no_plot:
            from .plotting import plot_delays

            print(f"type {change_type}: {plot_delays(rows, change_type, out_dir / f'delays_type{change_type}.png')}")
    return EXIT_OK


def _params(d):
    return tuple(float(x) for x in (d.mean if hasattr(d, "mean") else d.probs))


COMMANDS = {
    "verify": cmd_verify,
    "calibrate": cmd_calibrate,
    "delay": cmd_delay,
    "false": cmd_false,
    "figure": cmd_figure,
}


def _global_flags(parser, suppress: bool) -> None:
    # subcommand copies use SUPPRESS so they never clobber flags given before the subcommand
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--config", help="experiment configuration (JSON)", **kw)
    parser.add_argument("--seed", type=int, help="override master_seed", **kw)
    parser.add_argument("--runs", type=int, help="override the number of Monte Carlo runs", **kw)
    parser.add_argument("--out", help="output file or directory", **kw)
    parser.add_argument("--threads", type=int, help="worker threads for Monte Carlo runs",
                        **(kw or {"default": 1}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quickdiag", description=__doc__.split("\n")[0])
    _global_flags(parser, suppress=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, helptext):
        p = sub.add_parser(name, help=helptext)
        _global_flags(p, suppress=True)
        return p

    add("verify", "check weak/dual stochastic boundedness")
    add("calibrate", "choose thresholds for a target false metric").add_argument(
        "--theoretical", action="store_true", help="emit h = log gamma without simulation")
    for name, helptext in (("delay", "delays at the LFDs"), ("false", "false-alarm/false-isolation times"),
                           ("figure", "delay sweep CSVs and plots")):
        p = add(name, helptext)
        p.add_argument("--calibration", help="calibration.json written by 'calibrate'")
        if name == "figure":
            p.add_argument("--no-plot", action="store_true", help="write CSVs only")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if not args.config:
        parser.error("--config is required")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.master_seed = args.seed
        if args.runs is not None:
            if args.runs < 2:
                raise ConfigError("--runs must be >= 2")
            cfg.runs = args.runs
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
