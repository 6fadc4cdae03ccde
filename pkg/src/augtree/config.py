"""Run configuration: a flat key = value text format (schema run/1).

A run file names a contraction system (a preset, an .ifs file, or inline
.ifs text), the builder and its parameters, the analyses to perform, and
walk settings.  Paths are resolved relative to the config file, '#' starts
a comment, and unknown keys are errors: a config that parses is a config
whose every line did something.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .cells import attractor_cell
from .errors import ConfigError
from .ifs import load_ifs, parse_ifs_text, parse_word
from .trees import (build_dyadic_tree, build_graph, build_moran_tree,
                    moran_from_stage_lines, quotient_graph)
from .exact import parse_scalar
from .presets import PRESETS, preset

CONFIG_SCHEMA = "run/1"

ANALYSES = ("metric", "separation", "lipschitz", "walk")
METRICS = ("delta", "L", "holder", "divergence")
BUILDERS = ("ifs", "moran", "dyadic")


@dataclass
class RunConfig:
    base_dir: Path = Path(".")
    source: str = ""
    builder: str = "ifs"
    preset_name: str | None = None
    ifs_path: Path | None = None
    ifs_text: str | None = None
    moran_path: Path | None = None
    depth: int = 4
    kappa: float | None = None
    epsilon_net: float | None = None
    quotient: bool = False
    slanted: bool = False
    horizontal: bool = True
    budget: int = 5_000_000
    extra_edges: str | None = None
    analyses: tuple[str, ...] = ("metric", "separation", "lipschitz", "walk")
    metric: str | None = None
    a: float = 0.2
    samples: int | None = None
    trials: int | None = None
    iso_depth: int = 2
    horizon: int | None = None
    walks: int = 100_000
    pairs: int | None = None
    seed: int = 0
    out: Path | None = None
    threads: int = 1


def _parse_bool(value: str, where: str) -> bool:
    v = value.lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {value!r}")


def _parse_int(value: str, where: str, minimum: int | None = None) -> int:
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and n < minimum:
        raise ConfigError(f"{where}: {n} is below the minimum {minimum}")
    return n


def _parse_float(value: str, where: str, positive: bool = False) -> float:
    try:
        x = float(parse_scalar(value))
    except Exception:
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if positive and not x > 0:
        raise ConfigError(f"{where}: {x} must be positive")
    return x


def parse_config(text: str, *, base_dir: Path | str = ".",
                 source: str = "<string>") -> RunConfig:
    cfg = RunConfig(base_dir=Path(base_dir), source=source)
    fmt_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{where}: empty key or value")
        if key == "format":
            if value != CONFIG_SCHEMA:
                raise ConfigError(
                    f"{where}: unsupported schema {value!r} "
                    f"(expected {CONFIG_SCHEMA})")
            fmt_seen = True
        elif key == "builder":
            if value not in BUILDERS:
                raise ConfigError(f"{where}: builder must be one of "
                                  f"{'/'.join(BUILDERS)}")
            cfg.builder = value
        elif key == "preset":
            if value not in PRESETS:
                raise ConfigError(f"{where}: unknown preset {value!r} "
                                  f"(have {', '.join(sorted(PRESETS))})")
            cfg.preset_name = value
        elif key == "ifs":
            cfg.ifs_path = (cfg.base_dir / value).resolve()
            if not cfg.ifs_path.is_file():
                raise ConfigError(f"{where}: ifs file not found: "
                                  f"{cfg.ifs_path}")
        elif key == "ifs_text":
            cfg.ifs_text = value.replace(";", "\n")
        elif key == "moran":
            cfg.moran_path = (cfg.base_dir / value).resolve()
            if not cfg.moran_path.is_file():
                raise ConfigError(f"{where}: moran file not found: "
                                  f"{cfg.moran_path}")
        elif key == "depth":
            cfg.depth = _parse_int(value, where, minimum=1)
        elif key == "kappa":
            cfg.kappa = _parse_float(value, where, positive=True)
        elif key == "epsilon_net":
            cfg.epsilon_net = _parse_float(value, where, positive=True)
        elif key == "quotient":
            cfg.quotient = _parse_bool(value, where)
        elif key == "slanted":
            cfg.slanted = _parse_bool(value, where)
        elif key == "horizontal":
            cfg.horizontal = _parse_bool(value, where)
        elif key == "budget":
            cfg.budget = _parse_int(value, where, minimum=1)
        elif key == "extra_edges":
            cfg.extra_edges = None if value == "none" else value
        elif key == "analyze":
            if value == "all":
                cfg.analyses = ANALYSES
            elif value == "none":
                cfg.analyses = ()
            else:
                parts = tuple(p.strip() for p in value.split(","))
                bad = [p for p in parts if p not in ANALYSES]
                if bad:
                    raise ConfigError(f"{where}: unknown analyses {bad} "
                                      f"(have {', '.join(ANALYSES)})")
                cfg.analyses = parts
        elif key == "metric":
            if value not in METRICS:
                raise ConfigError(f"{where}: metric must be one of "
                                  f"{'/'.join(METRICS)}")
            cfg.metric = value
        elif key == "a":
            cfg.a = _parse_float(value, where, positive=True)
        elif key == "samples":
            cfg.samples = _parse_int(value, where, minimum=1)
        elif key == "trials":
            cfg.trials = _parse_int(value, where, minimum=1)
        elif key == "iso_depth":
            cfg.iso_depth = _parse_int(value, where, minimum=1)
        elif key == "horizon":
            cfg.horizon = _parse_int(value, where, minimum=1)
        elif key == "walks":
            cfg.walks = _parse_int(value, where, minimum=1)
        elif key == "pairs":
            cfg.pairs = _parse_int(value, where, minimum=1)
        elif key == "seed":
            cfg.seed = _parse_int(value, where, minimum=0)
        elif key == "out":
            cfg.out = (cfg.base_dir / value).resolve()
        elif key == "threads":
            cfg.threads = _parse_int(value, where, minimum=1)
        else:
            raise ConfigError(f"{where}: unknown key {key!r}")
    if not fmt_seen:
        raise ConfigError(f"{source}: missing 'format = {CONFIG_SCHEMA}'")
    sources = [cfg.preset_name, cfg.ifs_path, cfg.ifs_text]
    if cfg.builder in ("ifs", "dyadic") and sum(
            s is not None for s in sources) != 1:
        raise ConfigError(f"{source}: builder {cfg.builder!r} needs exactly "
                          "one of preset / ifs / ifs_text")
    if cfg.builder == "moran" and cfg.moran_path is None:
        raise ConfigError(f"{source}: builder 'moran' needs a moran = <path>")
    if cfg.builder != "ifs" and cfg.slanted:
        raise ConfigError(f"{source}: slanted applies to the ifs builder only")
    if cfg.builder != "ifs" and not cfg.horizontal:
        raise ConfigError(f"{source}: horizontal = false applies to the ifs "
                          "builder only")
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    return parse_config(text, base_dir=path.parent, source=str(path))


def apply_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """CLI flags beat config values; None means 'not given'."""
    valid = {f.name for f in fields(RunConfig)}
    for key, value in overrides.items():
        if key not in valid:
            raise ConfigError(f"unknown override {key!r}")
        if value is not None:
            setattr(cfg, key, value)
    return cfg


# ---------------------------------------------------------------------------
# building from a config
# ---------------------------------------------------------------------------


def _parse_moran_text(text: str, source: str):
    """Stage lines 'ratio : offset offset ...' -> (ratio, offsets) pairs."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if ":" not in line:
            raise ConfigError(f"{where}: expected 'ratio : offsets'")
        ratio_s, offs_s = line.split(":", 1)
        ratio = _parse_float(ratio_s.strip(), where, positive=True)
        if not ratio < 1:
            raise ConfigError(f"{where}: stage ratio must be < 1")
        offsets = [_parse_float(tok, where) for tok in offs_s.split()]
        if not offsets:
            raise ConfigError(f"{where}: a stage needs at least one offset")
        lines.append((ratio, offsets))
    if not lines:
        raise ConfigError(f"{source}: no stages")
    return lines


def _load_spec(cfg: RunConfig):
    if cfg.preset_name is not None:
        return preset(cfg.preset_name)
    if cfg.ifs_path is not None:
        return load_ifs(cfg.ifs_path)
    return parse_ifs_text(cfg.ifs_text, name=f"{cfg.source}:ifs_text")


def _parse_extra_edges(cfg: RunConfig, n_letters: int):
    if cfg.extra_edges is None or cfg.extra_edges == "wrap":
        return cfg.extra_edges
    pairs = []
    for chunk in cfg.extra_edges.split(","):
        chunk = chunk.strip()
        if ":" not in chunk:
            raise ConfigError(
                f"extra_edges: expected 'word:word', got {chunk!r}")
        a, b = (parse_word(s.strip(), n_letters) for s in chunk.split(":", 1))
        pairs.append((a, b))
    return pairs


def build_from_config(cfg: RunConfig):
    """Construct the configured graph (quotient applied when asked)."""
    if cfg.builder == "ifs":
        spec = _load_spec(cfg)
        g = build_graph(spec, cfg.depth, kappa=cfg.kappa,
                        epsilon_net=cfg.epsilon_net, budget=cfg.budget,
                        slanted=cfg.slanted, horizontal=cfg.horizontal,
                        extra_edges=_parse_extra_edges(cfg, len(spec.maps)))
    elif cfg.builder == "moran":
        stage_lines = _parse_moran_text(
            cfg.moran_path.read_text(encoding="utf-8"), str(cfg.moran_path))
        mspec = moran_from_stage_lines(stage_lines, name=cfg.moran_path.stem)
        if cfg.extra_edges is not None:
            raise ConfigError("extra_edges is not supported for moran builds")
        g = build_moran_tree(mspec, cfg.depth, kappa=cfg.kappa,
                             budget=cfg.budget)
    else:
        spec = _load_spec(cfg)
        points = attractor_cell(spec).net
        if cfg.extra_edges is not None:
            raise ConfigError("extra_edges is not supported for dyadic builds")
        g = build_dyadic_tree(points, cfg.depth,
                              kappa=cfg.kappa if cfg.kappa is not None
                              else 0.5, budget=cfg.budget)
    if cfg.quotient:
        g = quotient_graph(g)
    return g
