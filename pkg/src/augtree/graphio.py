"""Deterministic serialization: graph JSON/DOT, report JSON, CSV tables.

Identical inputs must give byte-identical files, so everything funnels
through one writer: dictionary keys are emitted sorted, floats are printed
with 17 significant digits (enough to round-trip an IEEE double exactly),
and non-finite floats become the strings "inf"/"-inf"/"nan".

The graph JSON schema ("augtree-graph/1") carries structure only: levels,
words, parents, and the two horizontal edge lists with statuses.  An
imported graph therefore supports everything combinatorial (distances,
walks, degree reports) but has no geometry attached.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .trees import AugmentedGraph, EdgeSet
from .ifs import word_str

GRAPH_SCHEMA = "augtree-graph/1"
REPORT_SCHEMA = "augtree-report/1"


# ---------------------------------------------------------------------------
# deterministic JSON
# ---------------------------------------------------------------------------


def format_float(x: float) -> str:
    """17-significant-digit decimal form; exact double round-trip."""
    x = float(x)
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if math.isnan(x):
        return '"nan"'
    return format(x, ".17g")


def _encode(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, dict):
        keys = list(obj.keys())
        if not all(isinstance(k, str) for k in keys):
            raise ConfigError("JSON object keys must be strings")
        out.append("{")
        for i, k in enumerate(sorted(keys)):
            if i:
                out.append(",")
            out.append(json.dumps(k, ensure_ascii=True))
            out.append(":")
            _encode(obj[k], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for i, item in enumerate(seq):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise ConfigError(f"cannot serialize {type(obj).__name__} to JSON")


def json_text(obj) -> str:
    """Compact deterministic JSON with a trailing newline."""
    out: list[str] = []
    _encode(obj, out)
    return "".join(out) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json_text(obj), encoding="ascii")
    return path


# ---------------------------------------------------------------------------
# graph <-> JSON
# ---------------------------------------------------------------------------


def graph_to_json(g: AugmentedGraph) -> dict:
    def edges(eset: EdgeSet | None):
        if eset is None:
            return None
        return sorted([int(u), int(v), int(s)] for u, v, s in eset.pairs())

    flags = {k: v for k, v in g.flags.items()
             if isinstance(v, (bool, int, float, str))}
    return {
        "schema": GRAPH_SCHEMA,
        "kind": g.kind,
        "dim": int(g.dim),
        "depth": int(g.depth),
        "kappa": float(g.kappa),
        "base_ratio": float(g.base_ratio),
        "is_quotient": bool(g.is_quotient),
        "levels": [[int(i) for i in lvl] for lvl in g.levels],
        "words": [list(w) for w in g.words],
        "parents": [[int(p) for p in ps] for ps in g.parents],
        "eh": edges(g.eh),
        "es": edges(g.es),
        "flags": flags,
    }


def graph_from_json(d: dict) -> AugmentedGraph:
    if d.get("schema") != GRAPH_SCHEMA:
        raise ConfigError(f"unknown graph schema {d.get('schema')!r}")
    words = [tuple(w) for w in d["words"]]
    levels = [list(lvl) for lvl in d["levels"]]
    seen = sorted(i for lvl in levels for i in lvl)
    if seen != list(range(len(words))):
        raise ConfigError("levels do not partition the vertex ids")
    parents = [tuple(ps) for ps in d["parents"]]
    if len(parents) != len(words):
        raise ConfigError("parents and words disagree on vertex count")
    eh = EdgeSet()
    eh.extend((u, v, s) for u, v, s in d["eh"])
    es = None
    if d.get("es") is not None:
        es = EdgeSet()
        es.extend((u, v, s) for u, v, s in d["es"])
    flags = dict(d.get("flags") or {})
    flags["imported"] = True
    return AugmentedGraph(kind=d["kind"], dim=int(d["dim"]), levels=levels,
                          parents=parents, words=words, eh=eh,
                          kappa=float(d["kappa"]),
                          base_ratio=float(d["base_ratio"]), es=es,
                          is_quotient=bool(d.get("is_quotient", False)),
                          flags=flags)


def write_graph_json(path, g: AugmentedGraph) -> Path:
    return write_json(path, graph_to_json(g))


def read_graph_json(path) -> AugmentedGraph:
    return graph_from_json(json.loads(Path(path).read_text(encoding="ascii")))


def graphs_equal(a: AugmentedGraph, b: AugmentedGraph) -> bool:
    """Structural equality: levels, words, parents, edge lists + statuses."""
    def edges(eset):
        return None if eset is None else sorted(tuple(t) for t in eset.pairs())

    return (a.kind == b.kind and a.dim == b.dim
            and a.is_quotient == b.is_quotient
            and [list(l) for l in a.levels] == [list(l) for l in b.levels]
            and list(a.words) == list(b.words)
            and [tuple(p) for p in a.parents] == [tuple(p) for p in b.parents]
            and edges(a.eh) == edges(b.eh) and edges(a.es) == edges(b.es)
            and a.kappa == b.kappa and a.base_ratio == b.base_ratio)


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------


def _word_label(w) -> str:
    if all(isinstance(c, (int, np.integer)) for c in w):
        return word_str(tuple(int(c) for c in w))
    return ".".join(str(c) for c in w)


def graph_to_dot(g: AugmentedGraph, *, max_level: int | None = None) -> str:
    """DOT text: one rank per level, tree edges solid, same-level proximity
    edges dashed (gray when uncertain), extra edges dotted."""
    max_level = g.depth if max_level is None else max_level
    keep = g.level_of <= max_level
    lines = ["graph augmented_tree {",
             "  rankdir=TB;",
             '  node [shape=circle, fontsize=9, width=0.35];']
    for lv, ids in enumerate(g.levels[:max_level + 1]):
        names = " ".join(f"n{i};" for i in ids)
        lines.append(f"  {{ rank=same; {names} }}")
    for i in range(g.n):
        if keep[i]:
            lines.append(f'  n{i} [label="{_word_label(g.words[i])}"];')
    for j in range(g.n):
        if keep[j]:
            for p in g.parents[j]:
                lines.append(f"  n{p} -- n{j};")
    for u, v, s in sorted(tuple(t) for t in g.eh.pairs()):
        if keep[u] and keep[v]:
            style = "dashed" if s == 0 else "dashed, color=gray"
            lines.append(f"  n{u} -- n{v} [style={style}];")
    if g.es is not None:
        for u, v, _s in sorted(tuple(t) for t in g.es.pairs()):
            if keep[u] and keep[v]:
                lines.append(f"  n{u} -- n{v} [style=dotted];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(path, g: AugmentedGraph, **kw) -> Path:
    path = Path(path)
    path.write_text(graph_to_dot(g, **kw), encoding="ascii")
    return path


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _csv_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        s = format_float(x)
        return s.strip('"')
    s = str(x)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="ascii")
    return path


def degree_rows(g: AugmentedGraph, *, certified_only: bool = False):
    """One row per vertex: id, level, word, vertical/horizontal/extra
    degrees and their total."""
    deg_v, deg_h, deg_s = g.degree_arrays(certified_only=certified_only)
    for i in range(g.n):
        yield (i, int(g.level_of[i]), _word_label(g.words[i]),
               int(deg_v[i]), int(deg_h[i]), int(deg_s[i]),
               int(deg_v[i] + deg_h[i] + deg_s[i]))


def write_degree_csv(path, g: AugmentedGraph, **kw) -> Path:
    return write_csv(path, ["vertex", "level", "word", "deg_v", "deg_h",
                            "deg_s", "deg_total"], degree_rows(g, **kw))


def write_delta_profile_csv(path, depths, deltas) -> Path:
    rows = [(d, float(x)) for d, x in zip(depths, deltas)]
    return write_csv(path, ["depth", "delta"], rows)


def write_l_profile_csv(path, profile) -> Path:
    """profile: L(n) per level n (run-length diagnostic)."""
    rows = [(n, int(val)) for n, val in enumerate(profile)]
    return write_csv(path, ["level", "L"], rows)


def write_holder_csv(path, reports) -> Path:
    """reports: holder_report dicts keyed by truncation depth."""
    rows = [(depth, rep["min_ratio"], rep["max_ratio"], rep["implied_C"],
             int(rep["excluded_pairs"])) for depth, rep in reports]
    return write_csv(path, ["depth", "min_ratio", "max_ratio", "implied_C",
                            "excluded_pairs"], rows)


def write_hitting_csv(path, chain, counts=None) -> Path:
    """Absorbing states with simulated counts and solver frequencies."""
    nu = chain.hitting()
    g = chain.graph
    rows = []
    for pos, v in enumerate(chain.absorbing):
        c = 0 if counts is None else int(counts[pos])
        rows.append((int(v), _word_label(g.words[int(v)]), c, float(nu[pos])))
    return write_csv(path, ["vertex", "word", "count", "frequency"], rows)


def write_kernels_csv(path, chain, *, level: int | None = None,
                      rate: float | None = None,
                      max_pairs: int | None = None) -> Path:
    """Same-level interior pairs with Martin and Naim kernel values and the
    scaling prediction exp(rate * 2 (x|y)) they are compared against.
    `max_pairs` caps the table at the first pairs in word order."""
    from .randwalk import (default_growth_rate, martin_kernel, naim_kernel,
                           _gromov_to_set)
    g = chain.graph
    level = chain.horizon // 2 if level is None else level
    rate = default_growth_rate(chain) if rate is None else rate
    xs = [int(i) for i in g.levels[level]]
    rows = []
    for a in range(len(xs)):
        if max_pairs is not None and len(rows) >= max_pairs:
            break
        gp = _gromov_to_set(g, xs[a], xs[a + 1:], chain.horizon)
        for b in range(a + 1, len(xs)):
            if max_pairs is not None and len(rows) >= max_pairs:
                break
            x, y = xs[a], xs[b]
            pair = f"{_word_label(g.words[x])}:{_word_label(g.words[y])}"
            rows.append((pair, float(gp[y]),
                         float(martin_kernel(chain, x, y)),
                         float(naim_kernel(chain, x, y)),
                         float(np.exp(rate * 2.0 * gp[y]))))
    return write_csv(path, ["pair", "gromov_product", "K", "Theta",
                            "predicted"], rows)


# ---------------------------------------------------------------------------
# report shaping
# ---------------------------------------------------------------------------


def _jsonable(obj):
    """Normalize report payloads: numpy scalars/arrays, tuples, non-string
    dict keys."""
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {k if isinstance(k, str) else _word_label(k)
                if isinstance(k, tuple) else str(k): _jsonable(v)
                for k, v in obj.items()}
    return obj


def write_verdicts_json(path, verdict: dict) -> Path:
    """Separation evidence: slopes, witnesses, flags."""
    payload = {"schema": REPORT_SCHEMA, "report": "separation",
               **_jsonable(verdict)}
    return write_json(path, payload)


def write_classes_json(path, report: dict) -> Path:
    """Component classification (a lipschitz_report payload): class table,
    incidence matrix, per-level class counts."""
    counts: dict[str, list[int]] = {}
    for (lv, _ci), cls in report["class_of"].items():
        counts.setdefault(str(lv), [0] * report["class_count"])
        counts[str(lv)][cls] += 1
    payload = {
        "schema": REPORT_SCHEMA,
        "report": "classes",
        "probe_depth": report["probe_depth"],
        "class_count": report["class_count"],
        "class_sizes": _jsonable(report["class_sizes"]),
        "per_level_class_counts": counts,
        "incidence": _jsonable(report["incidence"]),
        "incidence_complete": report["incidence_complete"],
        "component_counts": {str(k): v
                             for k, v in report["component_counts"].items()},
        "heuristic": report["heuristic"],
        "simplicity": _jsonable(report.get("simplicity")),
    }
    return write_json(path, payload)


def write_report_json(path, payload: dict) -> Path:
    """Top-level run report; payload is shaped by the caller."""
    return write_json(path, {"schema": REPORT_SCHEMA, "report": "run",
                             **_jsonable(payload)})
