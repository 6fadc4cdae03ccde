"""Command-line entry point: build, analyze, walk, export, all.

Every command loads a run config (and optional flag overrides), computes its
artifacts in a staging directory, and only moves them into the output
directory when everything succeeded — a failed run leaves no partial files.
Identical config and seed give byte-identical artifact trees.

Exit codes: 0 success, 2 config problem, 3 budget exceeded, 4 unsupported
operation, 5 internal/solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import shutil
import sys
import tempfile
from pathlib import Path

from . import graphio as io
from .config import RunConfig, apply_overrides, build_from_config, load_config
from .errors import (AugtreeError, BudgetExceededError,
                     ClassificationUnstableError, ConfigError,
                     UnsupportedOperationError)
from .lipschitz import lipschitz_report
from .metric import (delta_profile, geodesic_divergence, holder_report,
                     horizontal_run_profile)
from .randwalk import (TruncatedChain, compare_mc_solver, harmonic_profile,
                       horizon_comparison, martin_regression, naim_regression)
from .separation import separation_verdict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_UNSUPPORTED = 4
EXIT_INTERNAL = 5


# ---------------------------------------------------------------------------
# artifact producers (all write into a staging directory)
# ---------------------------------------------------------------------------


def _build_summary(g) -> dict:
    return {
        "kind": g.kind,
        "depth": g.depth,
        "vertices": g.n,
        "level_sizes": [len(l) for l in g.levels],
        "eh_edges": len(g.eh),
        "eh_uncertain": g.eh.n_uncertain,
        "es_edges": None if g.es is None else len(g.es),
        "is_quotient": g.is_quotient,
        "kappa": g.kappa,
        "base_ratio": g.base_ratio,
    }


def _stage_build(cfg: RunConfig, g, stage: Path) -> dict:
    io.write_graph_json(stage / "graph.json", g)
    io.write_dot(stage / "graph.dot", g)
    io.write_degree_csv(stage / "degrees.csv", g)
    return _build_summary(g)


def _metric_selection(cfg: RunConfig, g, chosen: str | None) -> list[str]:
    if chosen is not None:
        return [chosen]
    picks = ["delta", "L"]
    if g.maps is not None or g.is_quotient:
        picks.append("holder")
    if g.es is not None:
        picks.append("divergence")
    return picks


def _stage_metric(cfg: RunConfig, g, stage: Path, chosen: str | None) -> dict:
    summary: dict = {}
    picks = _metric_selection(cfg, g, chosen)
    sample = None if cfg.samples is None else cfg.samples
    for pick in picks:
        if pick == "delta":
            depths = list(range(2, min(g.depth, 6) + 1))
            deltas = delta_profile(
                lambda d: _rebuild_at(cfg, d), depths,
                sample=sample, seed=cfg.seed)
            io.write_delta_profile_csv(stage / "delta_profile.csv",
                                       depths, deltas)
            summary["delta"] = {"depths": depths, "values": deltas}
        elif pick == "L":
            prof = horizontal_run_profile(g)
            io.write_l_profile_csv(stage / "L_profile.csv", prof)
            summary["L"] = prof
        elif pick == "holder":
            reports = []
            for d in range(max(2, g.depth - 2), g.depth + 1):
                gd = _rebuild_at(cfg, d)
                reports.append((d, holder_report(gd, d, a=cfg.a)))
            io.write_holder_csv(stage / "holder_ratios.csv", reports)
            summary["holder"] = {
                "a": cfg.a,
                "implied_C": {str(d): rep["implied_C"]
                              for d, rep in reports},
            }
        elif pick == "divergence":
            div = geodesic_divergence(g)
            io.write_csv(stage / "divergence.csv", ["level", "divergence"],
                         list(enumerate(div["profile"])))
            summary["divergence"] = {"max": div["max"],
                                     "profile": div["profile"]}
    return summary


def _rebuild_at(cfg: RunConfig, depth: int):
    return build_from_config(dataclasses.replace(cfg, depth=depth))


def _stage_separation(cfg: RunConfig, g, stage: Path) -> dict:
    if cfg.builder == "moran":
        raise UnsupportedOperationError(
            "separation verdicts need the contraction system itself; "
            "a bare ratio/offset tree does not determine one")
    from .config import _load_spec
    kwargs = {} if cfg.trials is None else {"budget": cfg.trials}
    verdict = separation_verdict(_load_spec(cfg), cfg.depth, graph=g,
                                 **kwargs)
    io.write_verdicts_json(stage / "verdicts.json", verdict)
    return {"osc": verdict["osc"], "wsc": verdict["wsc"],
            "exact_coincidences": verdict["exact_coincidences"],
            "raw_slope": verdict["raw_slope"],
            "distinct_slope": verdict["distinct_slope"]}


def _stage_lipschitz(cfg: RunConfig, g, stage: Path) -> dict:
    rep = lipschitz_report(g, probe_depth=cfg.iso_depth)
    io.write_classes_json(stage / "classes.json", rep)
    out = {"class_count": rep["class_count"],
           "incidence_complete": rep["incidence_complete"]}
    if "simplicity" in rep:
        out["perron_root"] = rep["simplicity"]["perron_root"]
        out["primitive"] = rep["simplicity"]["primitive"]
    return out


def _stage_walk(cfg: RunConfig, g, stage: Path) -> dict:
    horizon = cfg.horizon if cfg.horizon is not None else g.depth
    chain = TruncatedChain(g, horizon)
    sim = chain.simulate(cfg.walks, cfg.seed)
    io.write_hitting_csv(stage / "hitting.csv", chain, sim["counts"])
    level = max(1, horizon // 2)
    io.write_kernels_csv(stage / "kernels.csv", chain, level=level,
                         max_pairs=cfg.pairs)
    mc = compare_mc_solver(chain, cfg.walks, cfg.seed)
    summary = {
        "horizon": horizon,
        "walks": cfg.walks,
        "seed": cfg.seed,
        "censored": sim["censored"],
        "integrity": chain.integrity(),
        "reversibility_defect": chain.reversibility_defect(),
        "mc_vs_solver": mc,
    }
    if horizon >= 3:
        try:
            summary["harmonic_tv"] = harmonic_profile(chain)["rows"]
        except UnsupportedOperationError:
            summary["harmonic_tv"] = None
    if 1 <= level < horizon:
        summary["martin"] = martin_regression(chain, level=level)
        try:
            summary["naim"] = naim_regression(chain, level=level)
        except UnsupportedOperationError:
            summary["naim"] = None
    if g.depth >= horizon + 2:
        summary["truncation"] = horizon_comparison(
            g, max(1, horizon - 2), horizon)
    io.write_report_json(stage / "report.json",
                         {"walk": summary, "config": _config_echo(cfg)})
    return summary


def _config_echo(cfg: RunConfig) -> dict:
    keep = ("builder", "preset_name", "depth", "kappa", "epsilon_net",
            "quotient", "slanted", "seed", "horizon", "walks", "a",
            "iso_depth")
    return {k: getattr(cfg, k) for k in keep}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_build(cfg: RunConfig, args, stage: Path) -> dict:
    g = build_from_config(cfg)
    summary = _stage_build(cfg, g, stage)
    io.write_report_json(stage / "report.json",
                         {"build": summary, "config": _config_echo(cfg)})
    return summary


def _cmd_analyze(cfg: RunConfig, args, stage: Path) -> dict:
    g = build_from_config(cfg)
    explicit = (args.separation or args.lipschitz
                or args.metric is not None)
    run_metric = args.metric is not None or (
        not explicit and "metric" in cfg.analyses)
    run_sep = args.separation or (
        not explicit and "separation" in cfg.analyses)
    run_lip = args.lipschitz or (
        not explicit and "lipschitz" in cfg.analyses)
    summary: dict = {"build": _build_summary(g)}
    if run_metric:
        chosen = args.metric if args.metric is not None else cfg.metric
        summary["metric"] = _stage_metric(cfg, g, stage, chosen)
    if run_sep:
        summary["separation"] = _stage_separation(cfg, g, stage)
    if run_lip:
        summary["lipschitz"] = _stage_lipschitz(cfg, g, stage)
    io.write_report_json(stage / "report.json",
                         {"analyze": summary, "config": _config_echo(cfg)})
    return summary


def _cmd_walk(cfg: RunConfig, args, stage: Path) -> dict:
    if args.graph is not None:
        g = io.read_graph_json(args.graph)
    else:
        g = build_from_config(cfg)
    return _stage_walk(cfg, g, stage)


def _cmd_export(cfg: RunConfig, args, stage: Path) -> dict:
    g = build_from_config(cfg)
    if args.format == "json":
        io.write_graph_json(stage / "graph.json", g)
    elif args.format == "dot":
        io.write_dot(stage / "graph.dot", g)
    else:
        io.write_degree_csv(stage / "degrees.csv", g)
    return {"format": args.format, "vertices": g.n}


def _cmd_all(cfg: RunConfig, args, stage: Path) -> dict:
    g = build_from_config(cfg)
    summary: dict = {"build": _stage_build(cfg, g, stage)}
    if "metric" in cfg.analyses:
        summary["metric"] = _stage_metric(cfg, g, stage, cfg.metric)
    if "separation" in cfg.analyses:
        try:
            summary["separation"] = _stage_separation(cfg, g, stage)
        except UnsupportedOperationError as e:
            summary["separation"] = {"skipped": str(e)}
    if "lipschitz" in cfg.analyses:
        try:
            summary["lipschitz"] = _stage_lipschitz(cfg, g, stage)
        except (UnsupportedOperationError, ClassificationUnstableError) as e:
            summary["lipschitz"] = {"skipped": str(e)}
    if "walk" in cfg.analyses:
        summary["walk"] = _stage_walk(cfg, g, stage)
    io.write_report_json(stage / "report.json",
                         {"all": summary, "config": _config_echo(cfg)})
    return summary


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *, config_required: bool = True):
    p.add_argument("--config", type=Path, required=config_required,
                   help="run config file (format = run/1)")
    p.add_argument("--out", type=Path, default=None,
                   help="output directory (overrides config)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None,
                   help="reserved; computations are vectorized internally")


def _add_build_flags(p: argparse.ArgumentParser):
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--epsilon-net", dest="epsilon_net", type=float,
                   default=None)
    p.add_argument("--quotient", action="store_true", default=None)
    p.add_argument("--slanted", action="store_true", default=None)
    p.add_argument("--budget", type=int, default=None)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="augtree",
        description="Augmented trees of contraction systems: build the "
                    "graph, run hyperbolicity/separation/classification "
                    "diagnostics, walk it, export it.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct the graph and export it")
    _add_common(p)
    _add_build_flags(p)

    p = sub.add_parser("analyze", help="metric / separation / lipschitz "
                                       "diagnostics")
    _add_common(p)
    _add_build_flags(p)
    p.add_argument("--metric", choices=["delta", "L", "holder", "divergence"],
                   default=None)
    p.add_argument("--a", type=float, default=None,
                   help="visual-metric parameter")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--separation", action="store_true")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--lipschitz", action="store_true")
    p.add_argument("--iso-depth", dest="iso_depth", type=int, default=None)

    p = sub.add_parser("walk", help="absorbing random walk and kernels")
    _add_common(p, config_required=False)
    _add_build_flags(p)
    p.add_argument("--graph", type=Path, default=None,
                   help="walk an exported graph.json instead of building")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--walks", type=int, default=None)
    p.add_argument("--pairs", type=int, default=None)

    p = sub.add_parser("export", help="write one serialization of the graph")
    _add_common(p)
    _add_build_flags(p)
    p.add_argument("--format", choices=["json", "dot", "csv"],
                   default="json")

    p = sub.add_parser("all", help="build + analyze + walk per the config")
    _add_common(p)
    _add_build_flags(p)
    return ap


_COMMANDS = {
    "build": _cmd_build,
    "analyze": _cmd_analyze,
    "walk": _cmd_walk,
    "export": _cmd_export,
    "all": _cmd_all,
}


def _load_effective_config(args) -> RunConfig:
    if getattr(args, "config", None) is not None:
        cfg = load_config(args.config)
    elif getattr(args, "graph", None) is not None:
        cfg = RunConfig()
    else:
        raise ConfigError("a --config file is required")
    overrides = {}
    for key in ("depth", "kappa", "epsilon_net", "quotient", "slanted",
                "budget", "seed", "out", "threads", "a", "samples",
                "trials", "iso_depth", "horizon", "walks", "pairs"):
        if hasattr(args, key):
            overrides[key] = getattr(args, key)
    if getattr(args, "metric", None) is not None:
        overrides["metric"] = args.metric
    apply_overrides(cfg, **overrides)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = _load_effective_config(args)
        out_dir = cfg.out
        if out_dir is None:
            raise ConfigError("no output directory: pass --out or set "
                              "'out =' in the config")
        stage = Path(tempfile.mkdtemp(prefix="augtree_stage_"))
        moved: list[str] = []
        try:
            _COMMANDS[args.command](cfg, args, stage)
            out_dir.mkdir(parents=True, exist_ok=True)
            for item in sorted(stage.iterdir()):
                shutil.move(str(item), out_dir / item.name)
                moved.append(item.name)
        finally:
            shutil.rmtree(stage, ignore_errors=True)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (UnsupportedOperationError, ClassificationUnstableError) as e:
        print(f"unsupported: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except AugtreeError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    print(f"{args.command}: wrote {', '.join(moved)} -> {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
