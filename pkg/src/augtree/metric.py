"""Metric geometry of augmented trees.

Distances use unit edge lengths over the chosen edge kinds.  For a graph
satisfying the parent axiom, geodesics have a canonical shape: ascend from x,
cross one horizontal run at a top level m, descend to y.  That gives the
bridge recursion

    D_m = min(H_m, 2 + D_{m-1}[parents]),

where H_m is the horizontal distance inside level m; same-level distance and
Gromov products follow from D_m, and the boundedness of horizontal runs that
are genuine geodesics (H_m = D_m) is the practical hyperbolicity test.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import BudgetExceededError, UnsupportedOperationError
from .trees import AugmentedGraph, verify_diamond

_INF = np.int64(2 ** 40)


# ---------------------------------------------------------------------------
# breadth-first distances
# ---------------------------------------------------------------------------


def _sparse_adjacency(g: AugmentedGraph, *, use_ev=True, use_eh=True,
                      use_es=False, certified_only=False, max_level=None):
    indptr, indices = g.adjacency(use_ev=use_ev, use_eh=use_eh, use_es=use_es,
                                  certified_only=certified_only,
                                  max_level=max_level)
    data = np.ones(len(indices), dtype=np.int8)
    return sp.csr_matrix((data, indices, indptr), shape=(g.n, g.n))


def bfs_distances(g: AugmentedGraph, sources, *, use_ev=True, use_eh=True,
                  use_es=False, certified_only=False, max_level=None) -> np.ndarray:
    """Hop distances from each source (rows); unreachable entries are +inf."""
    mat = _sparse_adjacency(g, use_ev=use_ev, use_eh=use_eh, use_es=use_es,
                            certified_only=certified_only, max_level=max_level)
    return csgraph.dijkstra(mat, unweighted=True, indices=sources)


def graph_distance(g: AugmentedGraph, x: int, y: int, *, restricted=True,
                   use_es=False, certified_only=False) -> float:
    """d(x, y).  With `restricted` the search stays in levels up to
    max(|x|, |y|); under the parent axiom that equals the distance in the
    untruncated graph, because any deeper detour projects level by level to a
    path that is no longer."""
    ml = int(max(g.level_of[x], g.level_of[y])) if restricted else None
    d = bfs_distances(g, [x], use_es=use_es, certified_only=certified_only,
                      max_level=ml)[0, y]
    return float(d)


def all_pairs_distances(g: AugmentedGraph, *, use_ev=True, use_eh=True,
                        use_es=False, certified_only=False,
                        max_vertices=4000) -> np.ndarray:
    if g.n > max_vertices:
        raise BudgetExceededError(
            f"all-pairs table for {g.n} vertices exceeds {max_vertices}")
    mat = _sparse_adjacency(g, use_ev=use_ev, use_eh=use_eh, use_es=use_es,
                            certified_only=certified_only)
    return csgraph.dijkstra(mat, unweighted=True)


def gromov_product(g: AugmentedGraph, x: int, y: int, *, restricted=True,
                   certified_only=False) -> float:
    """(x | y) with the root as base point: (|x| + |y| - d(x, y)) / 2."""
    d = graph_distance(g, x, y, restricted=restricted,
                       certified_only=certified_only)
    return (int(g.level_of[x]) + int(g.level_of[y]) - d) / 2.0


# ---------------------------------------------------------------------------
# canonical bridge distances
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _level_adjacency(g: AugmentedGraph, n: int, certified_only: bool):
    # cached per graph object: pair-at-a-time callers (canonical_geodesic)
    # would otherwise rescan the whole horizontal edge set per call
    ids = g.levels[n]
    local = {v: i for i, v in enumerate(ids)}
    adj: list[list[int]] = [[] for _ in ids]
    for u, v, s in g.eh.pairs(certified_only):
        lu = local.get(u)
        lv = local.get(v)
        if lu is not None and lv is not None:
            adj[lu].append(lv)
            adj[lv].append(lu)
    return ids, local, adj


def _bfs_row(adj, src, k):
    dist = np.full(k, _INF, dtype=np.int64)
    dist[src] = 0
    q = deque([src])
    while q:
        u = q.popleft()
        du = dist[u]
        for w in adj[u]:
            if dist[w] > du + 1:
                dist[w] = du + 1
                q.append(w)
    return dist


def level_matrices(g: AugmentedGraph, *, certified_only=False,
                   max_level=None, level_budget=4000):
    """(H, D) per level: horizontal distances and bridge distances.

    H[n][i, j] is the hop distance inside level n using horizontal edges
    only (large sentinel when disconnected); D[n] applies the bridge
    recursion, so D[n][i, j] is the same-level graph distance when geodesics
    have canonical shape.  Indices are local level positions.
    """
    top = g.depth if max_level is None else min(max_level, g.depth)
    H: list[np.ndarray] = []
    D: list[np.ndarray] = []
    for n in range(top + 1):
        ids, local, adj = _level_adjacency(g, n, certified_only)
        k = len(ids)
        if k > level_budget:
            raise BudgetExceededError(
                f"level {n} has {k} vertices > matrix budget {level_budget}")
        h = np.empty((k, k), dtype=np.int64)
        for i in range(k):
            h[i] = _bfs_row(adj, i, k)
        np.minimum(h, _INF, out=h)
        if n == 0:
            d = h.copy()
        else:
            prev_ids = g.levels[n - 1]
            prev_local = {v: i for i, v in enumerate(prev_ids)}
            plists = [[prev_local[p] for p in g.parents[v]] for v in ids]
            maxp = max(len(p) for p in plists)
            best = np.full((k, k), _INF, dtype=np.int64)
            for a in range(maxp):
                pa = np.array([p[min(a, len(p) - 1)] for p in plists])
                for b in range(maxp):
                    pb = np.array([p[min(b, len(p) - 1)] for p in plists])
                    np.minimum(best, D[n - 1][np.ix_(pa, pb)], out=best)
            d = np.minimum(h, best + 2)
            np.minimum(d, _INF, out=d)
        H.append(h)
        D.append(d)
    return H, D


def _ancestor_layers(g: AugmentedGraph, x: int) -> list[dict[int, int | None]]:
    """layers[k] maps each ancestor of x at level |x| - k to the child it was
    reached from (None for x itself).  Quotient vertices can have several
    parents, so a layer is a set, not a single vertex."""
    layers: list[dict[int, int | None]] = [{x: None}]
    for _ in range(int(g.level_of[x])):
        nxt: dict[int, int | None] = {}
        for v in layers[-1]:
            for p in g.parents[v]:
                nxt.setdefault(p, v)
        layers.append(nxt)
    return layers


def canonical_geodesic(g: AugmentedGraph, x: int, y: int, *,
                       certified_only=False) -> dict:
    """Distance through the best bridge level, with the realized path.

    Returns the top level m, the number of horizontal edges `bridge` there,
    the distance, and the Gromov product (|x| + |y| - d) / 2, which equals
    m - bridge / 2.
    """
    lx, ly = int(g.level_of[x]), int(g.level_of[y])
    m0 = min(lx, ly)
    lay_x = _ancestor_layers(g, x)
    lay_y = _ancestor_layers(g, y)

    best = None
    for m in range(m0, -1, -1):
        A = lay_x[lx - m]
        B = lay_y[ly - m]
        ids, local, adj = _level_adjacency(g, m, certified_only)
        b_locals = [local[b] for b in B]
        for a in A:
            row = _bfs_row(adj, local[a], len(ids))
            for b, bl in zip(B, b_locals):
                h = int(row[bl])
                if h >= _INF:
                    continue
                cost = (lx - m) + (ly - m) + h
                if best is None or cost < best["distance"]:
                    best = {"distance": cost, "top_level": m, "bridge": h,
                            "x_anchor": a, "y_anchor": b}
    if best is None:
        return {"distance": float("inf"), "top_level": None, "bridge": None,
                "gromov": float("-inf"), "path": []}

    m = best["top_level"]
    ax, ay = best["x_anchor"], best["y_anchor"]
    ids, local, adj = _level_adjacency(g, m, certified_only)
    row = _bfs_row(adj, local[ay], len(ids))
    bridge = [ax]
    cur = local[ax]
    while cur != local[ay]:
        for w in adj[cur]:
            if row[w] == row[cur] - 1:
                cur = w
                bridge.append(ids[cur])
                break
    up = []
    cur = ax
    for k in range(lx - m, 0, -1):
        cur = lay_x[k][cur]
        up.append(cur)
    down = []
    cur = ay
    for k in range(ly - m, 0, -1):
        cur = lay_y[k][cur]
        down.append(cur)
    path = list(reversed(up)) + bridge + down
    d = best["distance"]
    return {
        "distance": d,
        "top_level": m,
        "bridge": best["bridge"],
        "gromov": (lx + ly - d) / 2.0,
        "path": path,
    }


def horizontal_run_profile(g: AugmentedGraph, *, certified_only=False,
                           max_level=None, level_budget=4000) -> list[int]:
    """Per level: the longest horizontal run that is itself a geodesic.

    These are the horizontal stretches canonical geodesics can use, so a
    bounded profile is the workable hyperbolicity certificate and a growing
    one witnesses its failure.
    """
    H, D = level_matrices(g, certified_only=certified_only,
                          max_level=max_level, level_budget=level_budget)
    out = []
    for h, d in zip(H, D):
        geodesic = (h < _INF) & (h == d)
        out.append(int(h[geodesic].max(initial=0)))
    return out


# ---------------------------------------------------------------------------
# four-point hyperbolicity
# ---------------------------------------------------------------------------


def _maxmin_defect(G2: np.ndarray) -> int:
    """max over x, y, z of min(G2[x,z], G2[z,y]) - G2[x,y] (all doubled)."""
    n = G2.shape[0]
    best = np.full((n, n), np.iinfo(np.int64).min, dtype=np.int64)
    for z in range(n):
        np.maximum(best, np.minimum(G2[:, z][:, None], G2[z, :][None, :]),
                   out=best)
    return int((best - G2).max())


def hyperbolicity_delta(g: AugmentedGraph, *, base: int | None = None,
                        use_es=False, certified_only=False,
                        max_vertices=2000, sample=None, seed=0) -> dict:
    """Four-point constant with a fixed base: the smallest delta with

        (x|y) >= min((x|z), (z|y)) - delta   for all x, y, z.

    Exhaustive up to `max_vertices`; beyond that a subset of `sample`
    vertices is drawn (deterministic in `seed`) and the result is flagged.
    """
    base = g.root if base is None else base
    idx = np.arange(g.n)
    exhaustive = True
    if g.n > max_vertices:
        if sample is None:
            raise BudgetExceededError(
                f"{g.n} vertices exceed the exhaustive budget {max_vertices}; "
                "pass sample=<count> for a sampled bound")
        rng = np.random.default_rng(seed)
        keep = rng.choice(g.n, size=min(sample, g.n), replace=False)
        keep = np.unique(np.concatenate([[base], keep]))
        idx = keep
        exhaustive = False
    mat = _sparse_adjacency(g, use_es=use_es, certified_only=certified_only)
    D = csgraph.dijkstra(mat, unweighted=True, indices=idx)[:, idx]
    if not np.isfinite(D).all():
        raise UnsupportedOperationError("graph is disconnected; delta undefined")
    D = D.astype(np.int64)
    b = int(np.nonzero(idx == base)[0][0])
    G2 = D[b][:, None] + D[b][None, :] - D
    defect = _maxmin_defect(G2)
    return {
        "delta": max(0.0, defect / 2.0),
        "base": int(base),
        "vertices": int(len(idx)),
        "exhaustive": exhaustive,
    }


def delta_profile(spec_builder, depths, **delta_kwargs) -> list[float]:
    """delta at increasing truncation depths; `spec_builder(depth) -> graph`."""
    return [hyperbolicity_delta(spec_builder(d), **delta_kwargs)["delta"]
            for d in depths]


# ---------------------------------------------------------------------------
# visual quasi-metric and boundary distortion
# ---------------------------------------------------------------------------


def gromov_matrix(g: AugmentedGraph, level: int, *, certified_only=False,
                  level_budget=4000) -> np.ndarray:
    """(x | y) for all pairs at one level, from the bridge recursion."""
    H, D = level_matrices(g, certified_only=certified_only, max_level=level,
                          level_budget=level_budget)
    d = D[level].astype(float)
    d[d >= float(_INF)] = np.inf
    return level - d / 2.0


def visual_metric_report(g: AugmentedGraph, a: float, level: int, *,
                         certified_only=False) -> dict:
    """rho_a(x, y) = exp(-a (x|y)) on one level, and the smallest C with
    rho(x, z) <= C max(rho(x, y), rho(y, z)) over the level's triples."""
    G = gromov_matrix(g, level, certified_only=certified_only)
    finite = np.isfinite(G)
    if not finite.all():
        raise UnsupportedOperationError("level has disconnected bridge pairs")
    G2 = np.rint(2 * G).astype(np.int64)
    defect = _maxmin_defect(G2) / 2.0
    rho = np.exp(-a * G)
    np.fill_diagonal(rho, 0.0)
    return {
        "a": a,
        "level": level,
        "rho": rho,
        "gromov": G,
        "triangle_constant": float(np.exp(a * max(0.0, defect))),
        "defect": max(0.0, defect),
    }


def holder_report(g: AugmentedGraph, level: int, *, a: float = 0.2,
                  certified_only=False) -> dict:
    """Distortion between the visual metric and Euclidean distance.

    With beta = ln(1/r) / a the comparison rho_a^beta vs |point(x) - point(y)|
    reduces to ratio = dist / r^(x|y).  Pairs closer than the resolution
    floor (twice cell diameter plus net slack at this level) are excluded:
    at that scale the representative points cannot separate the cells.
    """
    ids = g.levels[level]
    k = len(ids)
    if k < 2:
        raise UnsupportedOperationError("need at least two cells on the level")
    G = gromov_matrix(g, level, certified_only=certified_only)
    pts = np.array([g.point(i) for i in ids])
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))

    r = g.base_ratio
    if g.maps is not None and g.root_cell is not None:
        diam_up = max(float(g.maps[i].R_bound) * g.root_cell.diameter_interval[1]
                      + float(g.maps[i].R_bound) * g.root_cell.net_error
                      for i in ids)
    else:
        diam_up = r ** level
    floor = 2.0 * diam_up

    iu = np.triu_indices(k, 1)
    usable = dist[iu] >= floor
    ratios = dist[iu][usable] / np.power(r, G[iu][usable])
    if len(ratios) == 0:
        raise UnsupportedOperationError(
            "no pairs above the resolution floor at this level")
    lo, hi = float(ratios.min()), float(ratios.max())
    return {
        "a": a,
        "beta": float(np.log(1.0 / r) / a),
        "level": level,
        "pairs": int(usable.sum()),
        "excluded_pairs": int((~usable).sum()),
        "min_ratio": lo,
        "max_ratio": hi,
        "implied_C": max(hi, 1.0 / lo),
        "resolution_floor": floor,
    }


# ---------------------------------------------------------------------------
# geodesic divergence in diamond graphs
# ---------------------------------------------------------------------------


def geodesic_divergence(g: AugmentedGraph, *, max_vertices=4000) -> dict:
    """Spread of the descending-path pencils in a diamond graph.

    In a diamond graph every root-to-z path is a geodesic.  For each z the
    slice A_i(z) holds the level-i vertices lying on such paths; the
    divergence of z is the largest graph-distance diameter of a slice.  A
    profile growing with the level witnesses the loss of hyperbolicity, a
    bounded one is consistent with it.
    """
    rep = verify_diamond(g)
    if not rep["ok"]:
        raise UnsupportedOperationError(
            f"divergence needs a diamond graph: {rep}")
    D = all_pairs_distances(g, use_eh=False, use_es=True,
                            max_vertices=max_vertices)
    up: list[list[int]] = [[] for _ in range(g.n)]
    for j, ps in enumerate(g.parents):
        for p in ps:
            up[j].append(p)
    if g.es is not None:
        for u, v, s in g.es.pairs():
            lo, hi = (u, v) if g.level_of[u] < g.level_of[v] else (v, u)
            if lo not in up[hi]:
                up[hi].append(lo)

    per_vertex = np.zeros(g.n)
    for z in range(g.n):
        lz = int(g.level_of[z])
        if lz == 0:
            continue
        slice_ = [z]
        worst = 0.0
        for i in range(lz - 1, -1, -1):
            nxt: set[int] = set()
            for v in slice_:
                nxt.update(up[v])
            slice_ = sorted(nxt)
            if len(slice_) > 1:
                arr = np.asarray(slice_)
                worst = max(worst, float(D[np.ix_(arr, arr)].max()))
        per_vertex[z] = worst
    profile = [float(max((per_vertex[i] for i in ids), default=0.0))
               for ids in g.levels]
    return {
        "per_vertex": per_vertex,
        "profile": profile,
        "max": float(per_vertex.max()),
    }
