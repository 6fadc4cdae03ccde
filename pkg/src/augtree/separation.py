"""Separation evidence: how crowded the level sets of a contraction system are.

Three observable signals distinguish the separation regimes:

* exact word coincidences (two words composing to the same map) prove that
  cells overlap completely, ruling out disjoint open pieces;
* the growth of raw horizontal degrees counts how many same-level words crowd
  a cell, duplicates included;
* the growth of distinct-cell counts (fingerprint-deduplicated) measures
  crowding among geometrically different cells.

Bounded raw degrees point to strong separation; unbounded raw degrees with
bounded distinct counts are the signature of identifications of bounded
multiplicity; unbounded distinct counts put the system outside both regimes.
"""

from __future__ import annotations

import numpy as np

from .errors import UnsupportedOperationError
from .ifs import ContractionSpec
from .trees import AugmentedGraph, build_levels

#: ln-slope below which a per-level count profile is read as bounded
SLOPE_BOUNDED = 0.05
#: ln-slope above which it is read as growing
SLOPE_GROWING = 0.2


def degree_profile(g: AugmentedGraph, *, certified_only: bool = False) -> list[dict]:
    """Per level: vertex count, extreme and mean degrees by edge kind."""
    deg_v, deg_h, deg_s = g.degree_arrays(certified_only=certified_only)
    total = deg_v + deg_h + deg_s
    rows = []
    for n, ids in enumerate(g.levels):
        sl = np.asarray(ids)
        rows.append({
            "level": n,
            "count": len(ids),
            "max_h": int(deg_h[sl].max()),
            "mean_h": float(deg_h[sl].mean()),
            "max_v": int(deg_v[sl].max()),
            "max_total": int(total[sl].max()),
        })
    return rows


def truncated_degree_profile(g: AugmentedGraph, depth: int, *,
                             certified_only: bool = False) -> list[dict]:
    """Degree profile of the depth-`depth` truncation, derived from a deeper
    build.  Levels above the cut keep their degrees (horizontal edges stay
    within a level and children are still present); vertices on the cut level
    lose their children, so their vertical degree is just the parent count.
    """
    if depth > g.depth:
        raise UnsupportedOperationError(
            f"cannot derive depth {depth} from a depth-{g.depth} build")
    deg_v, deg_h, deg_s = g.degree_arrays(certified_only=certified_only)
    rows = degree_profile(g, certified_only=certified_only)[:depth + 1]
    ids = np.asarray(g.levels[depth])
    n_par = np.array([len(g.parents[i]) for i in ids])
    cut_total = deg_h[ids] + deg_s[ids] + n_par
    rows[depth] = {
        "level": depth,
        "count": len(ids),
        "max_h": int(deg_h[ids].max()),
        "mean_h": float(deg_h[ids].mean()),
        "max_v": int(n_par.max()),
        "max_total": int(cut_total.max()),
    }
    return rows


def _vertex_fingerprints(g: AugmentedGraph, grid: float):
    if g.maps is None:
        raise UnsupportedOperationError(
            f"graph kind {g.kind!r} carries no maps to fingerprint")
    keys: list = [None] * g.n
    heuristic = False
    for i, m in enumerate(g.maps):
        if m is None:
            keys[i] = ("root",)
        else:
            fp = m.fingerprint(grid)
            keys[i] = fp.key
            heuristic = heuristic or fp.heuristic
    return keys, heuristic


def ball_intersection_profile(g: AugmentedGraph, *, distinct: bool = False,
                              grid: float = 1e-9,
                              certified_only: bool = False) -> dict:
    """Per level, the largest closed horizontal neighborhood of a vertex.

    Raw mode counts vertices; distinct mode counts distinct cells among them
    (fingerprint-deduplicated), which stays bounded when identifications have
    bounded multiplicity.
    """
    adj = g.eh.adjacency(certified_only=certified_only)
    heuristic = False
    if distinct:
        keys, heuristic = _vertex_fingerprints(g, grid)
    per_level = []
    for ids in g.levels:
        worst = 0
        for i in ids:
            nb = adj.get(i, ())
            if distinct:
                size = len({keys[i], *(keys[j] for j in nb)})
            else:
                size = 1 + len(nb)
            worst = max(worst, size)
        per_level.append(worst)
    return {"per_level": per_level, "distinct": distinct,
            "heuristic": heuristic or bool(g.flags.get("heuristic", False))}


def coincidence_search(spec: ContractionSpec, depth: int, *,
                       grid: float = 1e-9, budget: int = 5_000_000) -> dict:
    """Groups of same-level words whose compositions are the same map.

    With exact map parameters the fingerprint comparison is a decision
    procedure and a reported group is a proof of overlap; float parameters
    make it a grid heuristic and the result is flagged.
    """
    levels_words, levels_maps, _, _ = build_levels(spec, depth, budget=budget)
    groups = []
    checked = 0
    heuristic = False
    for n in range(1, depth + 1):
        buckets: dict = {}
        for w, m in zip(levels_words[n], levels_maps[n]):
            fp = m.fingerprint(grid)
            heuristic = heuristic or fp.heuristic
            buckets.setdefault(fp.key, []).append(w)
            checked += 1
        for key, words in buckets.items():
            if len(words) > 1:
                groups.append({"level": n, "words": sorted(words),
                               "exact": key[0] == "exact"})
    return {
        "groups": groups,
        "words_checked": checked,
        "first_level": min((grp["level"] for grp in groups), default=None),
        "exact": spec.exact,
        "heuristic": heuristic,
    }


def growth_slope(values, *, tail: int | None = None) -> float:
    """Least-squares slope of ln(1 + value) against the level index.

    Fitted on the tail half by default, so start-up levels do not bias the
    asymptotic reading.
    """
    v = np.asarray(values, dtype=float)
    if tail is None:
        tail = max(2, len(v) // 2)
    if len(v) < 2:
        return 0.0
    tail = min(tail, len(v))
    y = np.log1p(v[-tail:])
    x = np.arange(len(v) - tail, len(v), dtype=float)
    if len(x) < 2:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def separation_verdict(spec: ContractionSpec, depth: int, *,
                       kappa: float | None = None,
                       epsilon_net: float | None = None,
                       grid: float = 1e-9,
                       budget: int = 5_000_000,
                       graph: AugmentedGraph | None = None) -> dict:
    """Joint reading of the three signals at one truncation depth.

    `osc` reports on disjoint-open-pieces separation: exact coincidences
    refute it; bounded raw crowding with no coincidences supports it.
    `wsc` reports on bounded-multiplicity identifications: bounded distinct
    crowding supports it, growing distinct crowding casts doubt.
    """
    from .trees import build_graph

    g = graph
    if g is None:
        g = build_graph(spec, depth, kappa=kappa, epsilon_net=epsilon_net)
    raw = ball_intersection_profile(g)
    dist = ball_intersection_profile(g, distinct=True, grid=grid)
    coin = coincidence_search(spec, depth, grid=grid, budget=budget)
    raw_slope = growth_slope(raw["per_level"])
    dist_slope = growth_slope(dist["per_level"])
    heuristic = (raw["heuristic"] or dist["heuristic"] or coin["heuristic"]
                 or not spec.exact)

    has_exact_coincidence = any(grp["exact"] for grp in coin["groups"])
    if has_exact_coincidence:
        osc = "fails"
    elif not coin["groups"] and raw_slope < SLOPE_BOUNDED:
        osc = "consistent"
    else:
        osc = "inconclusive"
    if dist_slope < SLOPE_BOUNDED:
        wsc = "consistent"
    elif dist_slope > SLOPE_GROWING:
        wsc = "doubtful"
    else:
        wsc = "inconclusive"

    return {
        "depth": depth,
        "raw_profile": raw["per_level"],
        "distinct_profile": dist["per_level"],
        "raw_slope": raw_slope,
        "distinct_slope": dist_slope,
        "coincidence_groups": len(coin["groups"]),
        "first_coincidence_level": coin["first_level"],
        "exact_coincidences": has_exact_coincidence,
        "osc": osc,
        "wsc": wsc,
        "heuristic": heuristic,
        "thresholds": (SLOPE_BOUNDED, SLOPE_GROWING),
        "uncertain_edges": g.eh.n_uncertain,
    }
