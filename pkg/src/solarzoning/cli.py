"""Command-line interface.

Subcommands:

* ``run``            execute one scenario run and write its artifacts
* ``sweep``          run every scenario at several solar-share targets
* ``compare``        tabulate metric changes between two completed runs
* ``geometry-debug`` dump per-parcel developable geometry for one subdivision
* ``export-lp``      write the expansion model as an MPS file without solving

Exit codes: 0 success, 2 configuration problem, 3 infeasible plan,
4 internal error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ScenarioConfig, default_config_path, load_config
from .errors import ConfigError, InfeasiblePlanError, SolarZoningError
from .zoning import ScenarioKind

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config", type=Path, default=None,
        help="run configuration YAML (default: the packaged demo dataset)",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")


def _load(args) -> ScenarioConfig:
    config_path = args.config if args.config is not None else default_config_path()
    cfg = load_config(config_path)
    scenario = None
    if getattr(args, "scenario", None):
        scenario = ScenarioKind(args.scenario)
    target = getattr(args, "target", None)
    return cfg.with_overrides(seed=args.seed, scenario=scenario, solar_share_target=target)


def _cmd_run(args) -> int:
    from .pipeline import run

    cfg = _load(args)
    out_dir = args.out or Path(f"runs/{cfg.name}-{cfg.scenario.value}")
    artifacts = run(cfg, out_dir)
    result = artifacts.result
    print(f"scenario: {cfg.scenario.value}  seed: {cfg.seed}")
    print(f"unregulated supply: {artifacts.waterfall.unregulated_mw:.1f} MW")
    print(f"baseline supply:    {artifacts.waterfall.baseline_mw:.1f} MW")
    print(f"objective: {result.objective_usd:,.0f} USD/yr")
    print(f"solar built: {result.solar_built_mw:.1f} MW")
    print(f"artifacts: {Path(out_dir).resolve()}")
    return EXIT_OK


def _sweep_worker(payload):
    from .pipeline import run

    cfg, out_dir = payload
    try:
        artifacts = run(cfg, out_dir)
        return {
            "scenario": cfg.scenario.value,
            "target": cfg.solar_share_target,
            "status": "optimal",
            "objective_usd": artifacts.result.objective_usd,
            "solar_built_mw": artifacts.result.solar_built_mw,
            "out_dir": str(out_dir),
        }
    except InfeasiblePlanError as exc:
        return {
            "scenario": cfg.scenario.value,
            "target": cfg.solar_share_target,
            "status": "infeasible",
            "objective_usd": float("nan"),
            "solar_built_mw": float("nan"),
            "out_dir": str(out_dir),
            "message": str(exc),
        }


def _cmd_sweep(args) -> int:
    from .io import write_csv

    cfg = _load(args)
    targets = [float(t) for t in args.targets.split(",") if t.strip() != ""]
    if not targets:
        raise ConfigError("sweep needs at least one target (e.g. --targets 0.0,0.2)")
    out_root = Path(args.out or f"runs/{cfg.name}-sweep")
    jobs = []
    for scenario in ScenarioKind:
        for target in targets:
            job_cfg = cfg.with_overrides(scenario=scenario, solar_share_target=target)
            out_dir = out_root / f"{scenario.value}_t{target:g}"
            jobs.append((job_cfg, out_dir))

    rows = []
    if args.jobs == 1:
        results = [_sweep_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    for res in results:
        rows.append((
            res["scenario"], res["target"], res["status"],
            res["objective_usd"], res["solar_built_mw"], res["out_dir"],
        ))
        print(
            f"{res['scenario']:<12} target={res['target']:<5g} {res['status']:<10} "
            f"objective={res['objective_usd']:,.0f}"
        )
    write_csv(
        out_root / "sweep_summary.csv",
        ("scenario", "solar_share_target", "status", "objective_usd",
         "solar_built_mw", "out_dir"),
        rows,
    )
    print(f"summary: {out_root / 'sweep_summary.csv'}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    from .pipeline import compare_runs

    out_path = args.out or (Path(args.run_b) / "comparison.csv")
    rows = compare_runs(args.run_a, args.run_b, out_path)
    width = max(len(name) for name, *_ in rows)
    for name, value_a, value_b, delta in rows:
        print(f"{name:<{width}}  {value_a:>16.6g}  ->  {value_b:>16.6g}  ({delta:+.2f}%)")
    print(f"written: {out_path}")
    return EXIT_OK


def _cmd_geometry_debug(args) -> int:
    from .geometry import developable_area
    from .io import developable_to_geojson, parcels_to_geojson, write_json
    from .pipeline import build_parcels, load_inputs
    from .zoning import DEFAULT_UNZONED_RULE, scenario_rules

    cfg = _load(args)
    inputs = load_inputs(cfg)
    known = [s.subdivision_id for s in inputs.subdivisions]
    if args.subdivision not in known:
        raise ConfigError(
            f"unknown subdivision {args.subdivision!r}; choices: {', '.join(known)}"
        )
    inputs.subdivisions = [
        s for s in inputs.subdivisions if s.subdivision_id == args.subdivision
    ]
    parcels = build_parcels(inputs, cfg)[args.subdivision]
    rules = scenario_rules(inputs.records, cfg.scenario, cfg.seed, DEFAULT_UNZONED_RULE)
    rule = rules[args.subdivision]
    out_dir = Path(args.out or f"runs/geometry-{args.subdivision}")
    entries = []
    total_parcel = 0.0
    total_dev = 0.0
    for parcel in parcels:
        dev = developable_area(parcel, rule)
        entries.append((args.subdivision, parcel.parcel_id, dev))
        total_parcel += parcel.area_m2
        total_dev += dev.area_m2
        print(
            f"{parcel.parcel_id:<16} {parcel.area_m2:>12.1f} m2 -> "
            f"{dev.area_m2:>12.1f} m2  ({dev.limiting_rule.value})"
        )
    write_json(out_dir / "parcels.geojson", parcels_to_geojson(parcels))
    write_json(out_dir / "developable.geojson", developable_to_geojson(entries))
    if rule.banned:
        print(f"rule: banned under scenario {cfg.scenario.value}")
    else:
        print(
            f"rule: road={rule.road_setback_m} ppl={rule.ppl_setback_m} "
            f"nppl={rule.nppl_setback_m} min_lot={rule.min_lot_size_m2} "
            f"max_lot={rule.max_lot_size_m2}"
        )
    print(
        f"total: {total_parcel:.1f} m2 parcels, {total_dev:.1f} m2 developable "
        f"({100.0 * total_dev / total_parcel if total_parcel else 0.0:.1f}%)"
    )
    print(f"artifacts: {out_dir.resolve()}")
    return EXIT_OK


def _cmd_export_lp(args) -> int:
    from .expansion.model import assemble_lp
    from .expansion.mps import write_mps
    from .pipeline import prepare

    cfg = _load(args)
    exp = assemble_lp(prepare(cfg).problem)
    out_path = Path(args.out or f"runs/{cfg.name}-{cfg.scenario.value}.mps")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w") as handle:
        write_mps(exp.lp, handle)
    print(f"wrote {out_path} ({exp.lp.n_vars} variables, {exp.lp.n_rows} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solarzoning",
        description="Quantify how local zoning constrains utility-scale solar.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario run")
    _add_common(p_run)
    p_run.add_argument("--out", type=Path, default=None, help="output directory")
    p_run.add_argument(
        "--scenario", choices=[k.value for k in ScenarioKind], default=None,
        help="override the config scenario",
    )
    p_run.add_argument(
        "--target", type=float, default=None,
        help="override the solar energy-share target (fraction of demand)",
    )
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run all scenarios across share targets")
    _add_common(p_sweep)
    p_sweep.add_argument("--out", type=Path, default=None, help="output root directory")
    p_sweep.add_argument(
        "--targets", default="0.0,0.2",
        help="comma-separated solar share targets (default: 0.0,0.2)",
    )
    p_sweep.add_argument(
        "--jobs", type=int, default=3, help="parallel worker processes (default: 3)"
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cmp = sub.add_parser("compare", help="compare two completed runs")
    p_cmp.add_argument("run_a", type=Path, help="first run directory")
    p_cmp.add_argument("run_b", type=Path, help="second run directory")
    p_cmp.add_argument("--out", type=Path, default=None, help="comparison CSV path")
    p_cmp.set_defaults(func=_cmd_compare)

    p_geo = sub.add_parser(
        "geometry-debug", help="dump developable geometry for one subdivision"
    )
    _add_common(p_geo)
    p_geo.add_argument("--subdivision", required=True, help="subdivision id to inspect")
    p_geo.add_argument(
        "--scenario", choices=[k.value for k in ScenarioKind], default=None,
        help="override the config scenario",
    )
    p_geo.add_argument("--out", type=Path, default=None, help="output directory")
    p_geo.set_defaults(func=_cmd_geometry_debug)

    p_lp = sub.add_parser("export-lp", help="write the expansion LP as MPS")
    _add_common(p_lp)
    p_lp.add_argument(
        "--scenario", choices=[k.value for k in ScenarioKind], default=None,
        help="override the config scenario",
    )
    p_lp.add_argument(
        "--target", type=float, default=None,
        help="override the solar energy-share target",
    )
    p_lp.add_argument("--out", type=Path, default=None, help="MPS output path")
    p_lp.set_defaults(func=_cmd_export_lp)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasiblePlanError as exc:
        print(f"infeasible plan: {exc}", file=sys.stderr)
        for key, value in sorted(exc.diagnosis.items()):
            print(f"  {key}: {value}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolarZoningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
