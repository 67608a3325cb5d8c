"""femtocoop command line.

Exit codes: 0 success, 1 unexpected error, 2 configuration or usage error,
3 infeasible scenario (every round skipped). Diagnostics go to stderr; with
``--quiet`` stdout carries only the JSON summary. Every file is written under
``--out``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from .config import POLICY_ALIASES, ConfigError, ScenarioConfig, load_config, to_dict

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 1, 2, 3
MAX_ORACLE_PLAYERS = 8

log = logging.getLogger("femtocoop")


class Infeasible(RuntimeError):
    pass


def _policy(name: str | None) -> str | None:
    return POLICY_ALIASES.get(name, name) if name else None


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if getattr(args, "rounds", None) is not None:
        over["rounds"] = args.rounds
    return cfg.with_overrides(**over) if over else cfg


def _emit(summary: dict) -> None:
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")


def _progress(quiet: bool):
    if quiet:
        return None
    state = {"last": -1}

    def report(done: int, total: int) -> None:
        pct = 100 * done // max(1, total)
        if pct // 10 != state["last"]:
            state["last"] = pct // 10
            log.info("%d/%d rounds", done, total)

    return report


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# ----------------------------------------------------------------- commands
def cmd_run(args) -> int:
    from .experiments import build_round, report_timestamp, round_seeds, run_round, sweep

    cfg = _load(args)
    policy = _policy(args.policy)
    stamp = report_timestamp()
    if args.round is not None:
        seeds = round_seeds(cfg.seed, 0, args.round)
        res = run_round(cfg, seeds, policy, check_stability=args.check_stability)
        if res.skipped:
            raise Infeasible(f"round {args.round}: no feasible subchannel assignment")
        paths = {"metrics": _write(args.out, f"{cfg.name}_round{args.round}_{stamp}.json", res.to_json() + "\n")}
        if (policy or cfg.access_policy) == "cooperative":
            from .coalition import Partition, form_coalitions

            model = build_round(cfg, *seeds)
            part = Partition.from_state(form_coalitions(model).state, model.F)
            paths["partition"] = _write(args.out, f"{cfg.name}_round{args.round}_{stamp}_partition.csv", part.to_csv())
        _emit({"command": "run", "round": args.round, "seeds": list(seeds), "files": paths,
               "mue_gain": res.mue_gain, "fue_gain": res.fue_gain, "coalitions": res.coalition_count})
        return EXIT_OK
    if cfg.axes:
        log.info("ignoring axes %s; use 'sweep' to scan them", ", ".join(cfg.axes))
        cfg = cfg.with_overrides(axes={})
    report = sweep(cfg, policy, jobs=args.jobs, check_stability=args.check_stability, progress=_progress(args.quiet))
    metrics = report.points[0][1]
    skipped, _, total = metrics["skipped"]
    if total and skipped == total:
        raise Infeasible("every round was skipped: no feasible subchannel assignment")
    csv_path, json_path = report.write(args.out, stamp)
    _emit({"command": "run", "rounds": total, "skipped": int(skipped), "files": {"csv": csv_path, "json": json_path},
           "mue_gain": metrics["mue_gain"][0], "fue_gain": metrics["fue_gain"][0]})
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .experiments import report_timestamp, sweep

    cfg = _load(args)
    if not cfg.axes:
        raise ConfigError("axes", "sweep needs at least one axis")
    report = sweep(cfg, _policy(args.policy), jobs=args.jobs, check_stability=args.check_stability,
                   progress=_progress(args.quiet))
    skipped = sum(m["skipped"][0] for _, m, _, _ in report.points)
    total = sum(m["skipped"][2] for _, m, _, _ in report.points)
    if total and skipped == total:
        raise Infeasible("every round was skipped: no feasible subchannel assignment")
    csv_path, json_path = report.write(args.out, report_timestamp())
    _emit({"command": "sweep", "axes": report.axes, "points": len(report.points), "rounds": int(total),
           "skipped": int(skipped), "files": {"csv": csv_path, "json": json_path}})
    return EXIT_OK


def _sizes(text: str | None):
    if not text:
        return None
    out = []
    for part in text.split(","):
        try:
            n, m = part.lower().split("x")
            out.append((int(n), int(m)))
        except ValueError:
            raise ConfigError("--sizes", f"expected NxM pairs such as 2x3, got {part!r}") from None
    return out


def cmd_oracle_check(args) -> int:
    from .experiments import oracle_check, report_timestamp

    if args.max_players > MAX_ORACLE_PLAYERS:
        raise ConfigError("--max-players", f"refused: the exhaustive core is limited to {MAX_ORACLE_PLAYERS} players")
    cfg = _load(args)
    res = oracle_check(cfg, args.instances, args.max_players, args.optimistic, sizes=_sizes(args.sizes))
    path = _write(args.out, f"{cfg.name}_oracle_{report_timestamp()}.json", json.dumps(res, indent=2, sort_keys=True) + "\n")
    for c in res["counterexamples"]:
        log.info("counterexample: instance %d seeds %s (replay: run --round %d)", c["index"], c["seeds"], c["index"])
    summary = {k: v for k, v in res.items() if k != "counterexamples"}
    summary.update(command="oracle-check", counterexamples=len(res["counterexamples"]), file=path)
    _emit(summary)
    return EXIT_OK


def cmd_validate_config(args) -> int:
    cfg = _load(args)
    _emit({"command": "validate-config", "valid": True, "config": to_dict(cfg)})
    return EXIT_OK


def cmd_report(args) -> int:
    """Merge metric JSON reports into one long-format CSV."""
    from .experiments import report_timestamp

    wanted = set(args.metrics.split(",")) if args.metrics else None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "scenario", "point", "metric", "mean", "stderr", "n"])
    rows = 0
    for path in args.inputs:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(path, f"unreadable report: {exc}") from None
        for pt in data.get("points", []):
            label = ";".join(f"{k}={pt['axes'][k]!r}" for k in data.get("axes", [])) or "point"
            for name in sorted(pt["metrics"]):
                if wanted and name not in wanted:
                    continue
                m = pt["metrics"][name]
                w.writerow([os.path.basename(path), data.get("scenario", ""), label, name,
                            repr(float(m["mean"])), repr(float(m["stderr"])), m["n"]])
                rows += 1
    out = _write(args.out, f"report_{report_timestamp()}.csv", buf.getvalue())
    _emit({"command": "report", "inputs": len(args.inputs), "rows": rows, "file": out})
    return EXIT_OK


# ------------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--quiet", action="store_true", help="stdout carries only the JSON summary; no progress")
    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument("--config", required=True, help="scenario YAML file")
    scenario.add_argument("--seed", type=int, help="override the master seed")
    rounds = argparse.ArgumentParser(add_help=False)
    rounds.add_argument("--jobs", type=int, default=1, help="worker processes for rounds")
    rounds.add_argument("--rounds", type=int, help="rounds per point (overrides the config)")
    rounds.add_argument("--policy", choices=("closed", "open", "coop", "noncoop"), help="access policy override")
    rounds.add_argument("--check-stability", action="store_true", help="run the stability checker on every round")

    parser = argparse.ArgumentParser(prog="femtocoop", description="Femtocell/macrocell uplink cooperation simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common, scenario, rounds], help="rounds at the configured point")
    p.add_argument("--round", type=int, help="run only this round index (replays oracle counterexamples)")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", parents=[common, scenario, rounds], help="rounds over the configured axes")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("oracle-check", parents=[common, scenario], help="formation vs the exhaustive core")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--max-players", type=int, default=MAX_ORACLE_PLAYERS)
    p.add_argument("--sizes", help="comma-separated NxM pairs cycled over instances, e.g. 1x1,2x3")
    p.add_argument("--optimistic", action="store_true", help="optimistic residual-core deviations")
    p.set_defaults(func=cmd_oracle_check)
    p = sub.add_parser("validate-config", parents=[common, scenario], help="parse, validate and print a config")
    p.set_defaults(func=cmd_validate_config)
    p = sub.add_parser("report", parents=[common], help="merge metric JSON reports into one CSV")
    p.add_argument("inputs", nargs="+", help="report JSON files")
    p.add_argument("--metrics", help="comma-separated metric names to keep")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="femtocoop: %(message)s", stream=sys.stderr, force=True,
    )
    if getattr(args, "jobs", 1) < 1:
        log.error("--jobs must be >= 1")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except Infeasible as exc:
        log.error("infeasible: %s", exc)
        return EXIT_INFEASIBLE
    except Exception as exc:  # noqa: BLE001  top-level guard maps to exit 1
        log.exception("unexpected error: %s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
