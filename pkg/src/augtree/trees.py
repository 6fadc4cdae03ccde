"""Augmented trees over contraction systems.

Vertices are the level sets J_n = {w : R_w <= r^n < R_{parent(w)}} (r = the
smallest generator ratio), so non-equicontractive systems still produce one
comparable scale per level.  Edges come in three kinds:

* vertical: w to its unique prefix in the previous level;
* horizontal: same-level pairs whose cells are within kappa * r^n;
* slanted (optional): adjacent-level pairs within kappa * r^min(level).

Horizontal and slanted edges carry a status: `certified` when the distance
interval decides the comparison, `uncertain` when the interval straddles the
threshold.  Uncertain edges are kept in the graph and counted, so analyses can
run with and without them.
"""

from __future__ import annotations

import itertools

import numpy as np

from .cells import (
    CellApprox,
    attractor_cell,
    build_cell,
    invariant_ball,
    min_net_distance,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    InternalError,
    UnsupportedOperationError,
)
from .exact import scalar_key
from .ifs import ContractionSpec, SimilitudeMap, Word, word_str

CERTIFIED = 0
UNCERTAIN = 1
_STATUS_NAMES = {CERTIFIED: "certified", UNCERTAIN: "uncertain"}

_FLOAT_GUARD = 1e-12  # relative guard band for float level comparisons


class EdgeSet:
    """Undirected edges between global vertex ids, each with a status."""

    def __init__(self):
        self._u: list[int] = []
        self._v: list[int] = []
        self._s: list[int] = []
        self._adj: dict[int, list[int]] | None = None
        self._pairset: set[tuple[int, int]] | None = None

    def add(self, u: int, v: int, status: int = CERTIFIED):
        if u == v:
            raise InternalError("self-loop edge")
        if u > v:
            u, v = v, u
        self._u.append(u)
        self._v.append(v)
        self._s.append(status)
        self._adj = None
        self._pairset = None

    def extend(self, triples):
        for u, v, s in triples:
            self.add(u, v, s)

    def __len__(self):
        return len(self._u)

    @property
    def n_uncertain(self) -> int:
        return sum(1 for s in self._s if s == UNCERTAIN)

    def pairs(self, certified_only: bool = False):
        for u, v, s in zip(self._u, self._v, self._s):
            if certified_only and s != CERTIFIED:
                continue
            yield u, v, s

    def arrays(self):
        return (np.asarray(self._u, dtype=np.int64),
                np.asarray(self._v, dtype=np.int64),
                np.asarray(self._s, dtype=np.int8))

    def _pairs_set(self):
        if self._pairset is None:
            self._pairset = set(zip(self._u, self._v))
        return self._pairset

    def has(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self._pairs_set()

    def adjacency(self, certified_only: bool = False) -> dict[int, list[int]]:
        if certified_only:
            adj: dict[int, list[int]] = {}
            for u, v, s in self.pairs(True):
                adj.setdefault(u, []).append(v)
                adj.setdefault(v, []).append(u)
            return adj
        if self._adj is None:
            adj = {}
            for u, v in zip(self._u, self._v):
                adj.setdefault(u, []).append(v)
                adj.setdefault(v, []).append(u)
            self._adj = adj
        return self._adj


class AugmentedGraph:
    """A finite truncation of an augmented tree (or its quotient)."""

    def __init__(self, *, kind: str, dim: int, levels: list[list[int]],
                 parents: list[tuple[int, ...]], words: list[tuple],
                 eh: EdgeSet, kappa: float, base_ratio: float,
                 es: EdgeSet | None = None, spec: ContractionSpec | None = None,
                 maps: list | None = None, root_cell: CellApprox | None = None,
                 boxes: list | None = None, is_quotient: bool = False,
                 members: list[tuple] | None = None, flags: dict | None = None):
        self.kind = kind
        self.dim = dim
        self.levels = levels
        self.parents = parents
        self.words = words
        self.eh = eh
        self.es = es
        self.kappa = float(kappa)
        self.base_ratio = float(base_ratio)
        self.spec = spec
        self.maps = maps
        self.root_cell = root_cell
        self.boxes = boxes
        self.is_quotient = is_quotient
        self.members = members
        self.flags = dict(flags or {})

        self.n = len(words)
        self.level_of = np.empty(self.n, dtype=np.int32)
        for lv, ids in enumerate(levels):
            for i in ids:
                self.level_of[i] = lv
        self._children: list[list[int]] | None = None
        self._csr_cache: dict = {}

    # -- structure ---------------------------------------------------------

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def root(self) -> int:
        return self.levels[0][0]

    def children(self, i: int) -> list[int]:
        if self._children is None:
            ch: list[list[int]] = [[] for _ in range(self.n)]
            for j, ps in enumerate(self.parents):
                for p in ps:
                    ch[p].append(j)
            self._children = ch
        return self._children[i]

    def label(self, i: int) -> str:
        return word_str(self.words[i])

    def threshold(self, level: int) -> float:
        return self.kappa * self.base_ratio ** level

    def degree_arrays(self, certified_only: bool = False):
        """(deg_v, deg_h, deg_s) as int arrays over all vertices."""
        deg_v = np.zeros(self.n, dtype=np.int64)
        for j, ps in enumerate(self.parents):
            deg_v[j] += len(ps)
            for p in ps:
                deg_v[p] += 1
        deg_h = np.zeros(self.n, dtype=np.int64)
        for u, v, s in self.eh.pairs(certified_only):
            deg_h[u] += 1
            deg_h[v] += 1
        deg_s = np.zeros(self.n, dtype=np.int64)
        if self.es is not None:
            for u, v, s in self.es.pairs(certified_only):
                deg_s[u] += 1
                deg_s[v] += 1
        return deg_v, deg_h, deg_s

    def adjacency(self, *, use_ev: bool = True, use_eh: bool = True,
                  use_es: bool = False, certified_only: bool = False,
                  max_level: int | None = None):
        """CSR neighbor arrays (indptr, indices) for BFS, cached."""
        key = (use_ev, use_eh, use_es, certified_only, max_level)
        hit = self._csr_cache.get(key)
        if hit is not None:
            return hit
        heads: list[np.ndarray] = []
        tails: list[np.ndarray] = []

        def keep(u, v):
            if max_level is None:
                return np.ones(len(u), dtype=bool)
            lu = self.level_of[u] <= max_level
            lv = self.level_of[v] <= max_level
            return lu & lv

        if use_ev:
            us, vs = [], []
            for j, ps in enumerate(self.parents):
                for p in ps:
                    us.append(p)
                    vs.append(j)
            u = np.asarray(us, dtype=np.int64)
            v = np.asarray(vs, dtype=np.int64)
            m = keep(u, v)
            heads += [u[m], v[m]]
            tails += [v[m], u[m]]
        for use, es in ((use_eh, self.eh), (use_es, self.es)):
            if not use or es is None or len(es) == 0:
                continue
            u, v, s = es.arrays()
            m = keep(u, v)
            if certified_only:
                m = m & (s == CERTIFIED)
            heads += [u[m], v[m]]
            tails += [v[m], u[m]]
        if heads:
            h = np.concatenate(heads)
            t = np.concatenate(tails)
        else:
            h = np.empty(0, dtype=np.int64)
            t = np.empty(0, dtype=np.int64)
        order = np.argsort(h, kind="stable")
        h, t = h[order], t[order]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(indptr, h + 1, 1)
        np.cumsum(indptr, out=indptr)
        out = (indptr, t)
        self._csr_cache[key] = out
        return out

    # -- geometry ----------------------------------------------------------

    def cell(self, i: int) -> CellApprox:
        if self.boxes is not None:
            lo, hi = self.boxes[i]
            corners = np.array(list(itertools.product(*zip(lo, hi))), dtype=float)
            return CellApprox(corners, 0.0, in_set=True,
                              box=(np.asarray(lo, float), np.asarray(hi, float)))
        if self.maps is None or self.root_cell is None:
            raise UnsupportedOperationError(f"graph kind {self.kind!r} carries no cells")
        m = self.maps[i]
        if m is None:
            return self.root_cell
        return build_cell(m, self.root_cell)

    def level_cells(self, level: int) -> dict[int, CellApprox]:
        return {i: self.cell(i) for i in self.levels[level]}

    def point(self, i: int) -> np.ndarray:
        """A deterministic representative point of the cell of vertex i."""
        if self.boxes is not None:
            lo, hi = self.boxes[i]
            return (np.asarray(lo, float) + np.asarray(hi, float)) / 2.0
        if self.maps is None or self.root_cell is None:
            raise UnsupportedOperationError(f"graph kind {self.kind!r} carries no cells")
        m = self.maps[i]
        anchor = self.root_cell.net[0]
        return anchor.copy() if m is None else m.apply(anchor[None, :])[0]

    def summary(self) -> dict:
        per_level = [len(ids) for ids in self.levels]
        return {
            "kind": self.kind,
            "dim": self.dim,
            "depth": self.depth,
            "vertices": self.n,
            "per_level": per_level,
            "eh_edges": len(self.eh),
            "eh_uncertain": self.eh.n_uncertain,
            "es_edges": 0 if self.es is None else len(self.es),
            "es_uncertain": 0 if self.es is None else self.es.n_uncertain,
            "kappa": self.kappa,
            "base_ratio": self.base_ratio,
            "is_quotient": self.is_quotient,
            "flags": dict(self.flags),
        }


# ---------------------------------------------------------------------------
# level construction (cut sets of the coding tree)
# ---------------------------------------------------------------------------


def _r_power(spec: ContractionSpec, n: int):
    if spec.exact:
        return spec.r_min ** n
    return spec.r_min_f ** n


def _le_threshold(value, threshold, exact: bool, flagged: list):
    """value <= threshold, with a relative guard band in float mode."""
    if exact:
        return value <= threshold
    t = float(threshold)
    v = float(value)
    if abs(v - t) <= _FLOAT_GUARD * max(abs(t), 1e-300):
        flagged.append(v)
        return True
    return v <= t


def build_levels(spec: ContractionSpec, depth: int, budget: int = 5_000_000):
    """Words, composed maps and parent links for levels 0..depth.

    Returns (levels_words, levels_maps, parent_index_lists, flags).  Words in
    a level are produced in lexicographic order, so vertex ids are stable.
    """
    if depth < 0:
        raise ConfigError("depth must be >= 0")
    exact = spec.exact
    flagged: list[float] = []
    words0: list[Word] = [()]
    maps0: list = [None]
    levels_words = [words0]
    levels_maps = [maps0]
    parents: list[list[int]] = [[]]
    total = 1

    for n in range(1, depth + 1):
        rn = _r_power(spec, n)
        prev_words = levels_words[-1]
        prev_maps = levels_maps[-1]
        cur_words: list[Word] = []
        cur_maps: list = []
        cur_parent: list[int] = []

        for pi, (w, m) in enumerate(zip(prev_words, prev_maps)):
            # DFS extensions of w until the contraction bound drops to r^n
            stack = [(w, m)]
            out_w: list[Word] = []
            out_m: list = []
            while stack:
                wv, mv = stack.pop()
                for c in range(spec.N - 1, -1, -1):
                    child_w = wv + (c,)
                    child_m = (spec.maps[c] if mv is None
                               else spec.extend(mv, c))
                    if _le_threshold(child_m.R_bound, rn, exact, flagged):
                        out_w.append(child_w)
                        out_m.append(child_m)
                    else:
                        stack.append((child_w, child_m))
            # DFS with reversed letters pops in lexicographic order for the
            # single-expansion case; still sort for the general case
            order = sorted(range(len(out_w)), key=lambda k: out_w[k])
            cur_words.extend(out_w[k] for k in order)
            cur_maps.extend(out_m[k] for k in order)
            cur_parent.extend([pi] * len(out_w))

        total += len(cur_words)
        if total > budget:
            raise BudgetExceededError(
                f"level {n} brings the vertex total to {total} > budget {budget}"
            )
        levels_words.append(cur_words)
        levels_maps.append(cur_maps)
        parents.append(cur_parent)

    flags = {"boundary_words": len(flagged)}
    return levels_words, levels_maps, parents, flags


# ---------------------------------------------------------------------------
# horizontal edge construction
# ---------------------------------------------------------------------------


def _classify(lo_bound: float, up_bound: float, thr: float):
    """Interval [lo_bound, up_bound] for the true distance vs threshold."""
    if up_bound <= thr:
        return CERTIFIED
    if lo_bound <= thr:
        return UNCERTAIN
    return None


def _identity_orthogonal(m) -> bool:
    if not isinstance(m, SimilitudeMap):
        return False
    return bool(np.all(m.orthogonal_f == np.eye(m.dim)))


def _level_geometry(maps_level, root_cell: CellApprox, dim: int):
    """Centers, radii and (when cheap) exact bounding boxes per cell."""
    k = len(maps_level)
    centers = np.empty((k, dim))
    radii = np.empty(k)
    c0 = root_cell.ball_center
    r0 = root_cell.ball_radius
    net0 = root_cell.net
    blo = net0.min(axis=0)
    bhi = net0.max(axis=0)
    boxes = np.empty((k, 2, dim))
    boxes_ok = True
    for idx, m in enumerate(maps_level):
        if m is None:
            centers[idx] = c0
            radii[idx] = r0
            boxes[idx, 0], boxes[idx, 1] = blo, bhi
        elif _identity_orthogonal(m):
            r = m.ratio_f
            t = m.translation_f
            centers[idx] = r * c0 + t
            radii[idx] = r * r0
            boxes[idx, 0] = r * blo + t
            boxes[idx, 1] = r * bhi + t
        else:
            centers[idx] = m.apply(c0[None, :])[0]
            radii[idx] = float(m.R_bound) * r0
            boxes_ok = False
    return centers, radii, (boxes if boxes_ok else None)


def _near_box(pts: np.ndarray, lo: np.ndarray, hi: np.ndarray, cap: float):
    gaps = np.maximum(0.0, np.maximum(lo[None, :] - pts, pts - hi[None, :]))
    return pts[(gaps ** 2).sum(axis=1) <= cap * cap]


def _near_ball(pts: np.ndarray, center: np.ndarray, radius: float, cap: float):
    d2 = ((pts - center[None, :]) ** 2).sum(axis=1)
    return pts[d2 <= (radius + cap) ** 2]


def _eh_level_nd(ids, maps_level, root_cell, errs, thr, dim):
    """Candidate pairs via spatial hashing; each candidate is decided on the
    subsets of the two nets that lie within decision range of the other cell.
    A pair realizing a net distance <= cap keeps both witness points after
    masking, so the masked minimum equals the full net minimum whenever the
    comparison is close enough to matter."""
    k = len(ids)
    if k <= 1:
        return []
    centers, radii, boxes = _level_geometry(maps_level, root_cell, dim)
    grid = thr + 2.0 * float(radii.max()) + 2.0 * float(errs.max())
    keys = np.floor(centers / grid).astype(np.int64)
    buckets: dict[tuple, list[int]] = {}
    for idx in range(k):
        buckets.setdefault(tuple(keys[idx]), []).append(idx)
    offsets = list(itertools.product((-1, 0, 1), repeat=dim))
    net0 = root_cell.net

    def net_of(idx):
        m = maps_level[idx]
        return net0 if m is None else m.apply(net0)

    # translate-structure levels (all maps exact, identity-orthogonal, one
    # ratio): the decision depends only on the exact translation offset, so
    # each distinct offset is computed once
    m0 = maps_level[0]
    translations = None
    if (isinstance(m0, SimilitudeMap) and m0.exact and _identity_orthogonal(m0)
            and all(isinstance(m, SimilitudeMap) and m.exact
                    and m.ratio == m0.ratio and _identity_orthogonal(m)
                    for m in maps_level)):
        translations = [m.translation for m in maps_level]
    cache: dict[tuple, float] = {}

    def pair_distance(idx, j, cap, pts_i):
        """Masked net distance, or +inf when provably above cap."""
        pts_j = net_of(j)
        if boxes is not None:
            a = _near_box(pts_i, boxes[j, 0], boxes[j, 1], cap)
            b = _near_box(pts_j, boxes[idx, 0], boxes[idx, 1], cap)
        else:
            a = _near_ball(pts_i, centers[j], radii[j], cap)
            b = _near_ball(pts_j, centers[idx], radii[idx], cap)
        if not len(a) or not len(b):
            return np.inf
        d = min_net_distance(a, b)
        return d if d <= cap else np.inf

    out = []
    for idx in range(k):
        key = keys[idx]
        cand: list[int] = []
        for off in offsets:
            lst = buckets.get(tuple(key + np.asarray(off)))
            if lst:
                cand.extend(j for j in lst if j > idx)
        if not cand:
            continue
        cand = np.asarray(sorted(cand))
        dc = np.linalg.norm(centers[cand] - centers[idx], axis=1)
        ball_lo = dc - radii[cand] - radii[idx]
        cand = cand[ball_lo <= thr + errs[idx] + errs[cand]]
        if boxes is not None and len(cand):
            gaps = np.maximum(
                0.0,
                np.maximum(boxes[cand, 0] - boxes[idx, 1][None, :],
                           boxes[idx, 0][None, :] - boxes[cand, 1]),
            )
            box_lo = np.sqrt((gaps ** 2).sum(axis=1)) - errs[cand] - errs[idx]
            cand = cand[box_lo <= thr]
        if not len(cand):
            continue
        pts_i = None
        for j in cand:
            j = int(j)
            cap = thr + errs[idx] + errs[j]
            if translations is not None:
                dkey = tuple(scalar_key(a - b) for a, b in
                             zip(translations[j], translations[idx]))
                d = cache.get(dkey)
                if d is None:
                    if pts_i is None:
                        pts_i = net_of(idx)
                    d = pair_distance(idx, j, cap, pts_i)
                    cache[dkey] = d
            else:
                if pts_i is None:
                    pts_i = net_of(idx)
                d = pair_distance(idx, j, cap, pts_i)
            if not np.isfinite(d):
                continue
            low = max(0.0, d - errs[idx] - errs[j])
            status = _classify(low, d, thr)
            if status is not None:
                u, v = ids[idx], ids[j]
                out.append((u, v, status) if u < v else (v, u, status))
    out.sort()
    return out


def _build_eh(levels_ids, levels_maps, root_cell, eps0, base_r, kappa, dim):
    eh = EdgeSet()
    for n in range(1, len(levels_ids)):
        ids = levels_ids[n]
        maps_level = levels_maps[n]
        if len(ids) < 2:
            continue
        errs = np.array([eps0 if m is None else float(m.R_bound) * eps0
                         for m in maps_level])
        thr = kappa * base_r ** n
        triples = _eh_level_nd(np.asarray(ids), maps_level, root_cell, errs,
                               thr, dim)
        eh.extend(triples)
    return eh


def _build_es(levels_ids, levels_maps, parents_global, root_cell, eps0, base_r,
              kappa, dim):
    """Slanted edges: adjacent levels, not vertical, within kappa r^min."""
    es = EdgeSet()
    ev_pairs = set()
    for j, ps in enumerate(parents_global):
        for p in ps:
            ev_pairs.add((p, j) if p < j else (j, p))
    for n in range(0, len(levels_ids) - 1):
        ids = list(levels_ids[n]) + list(levels_ids[n + 1])
        maps_level = list(levels_maps[n]) + list(levels_maps[n + 1])
        errs = np.array([eps0 if m is None else float(m.R_bound) * eps0
                         for m in maps_level])
        thr = kappa * base_r ** n
        triples = _eh_level_nd(np.asarray(ids), maps_level, root_cell, errs,
                               thr, dim)
        level_of = {}
        for i in levels_ids[n]:
            level_of[i] = n
        for i in levels_ids[n + 1]:
            level_of[i] = n + 1
        for u, v, s in triples:
            if level_of[u] == level_of[v]:
                continue  # same-level proximity is eh territory
            if (u, v) in ev_pairs:
                continue
            es.add(u, v, s)
    return es


def _apply_extra_edges(g: AugmentedGraph, extra_edges):
    """Declared horizontal edges: 'wrap' joins each level's first and last word."""
    if extra_edges is None:
        return
    added = 0
    if extra_edges == "wrap":
        for n in range(1, g.depth + 1):
            ids = g.levels[n]
            if len(ids) < 2:
                continue
            first = min(ids, key=lambda i: g.words[i])
            last = max(ids, key=lambda i: g.words[i])
            if not g.eh.has(first, last):
                g.eh.add(first, last, CERTIFIED)
                added += 1
    else:
        by_word = {}
        for i in range(g.n):
            by_word.setdefault(g.words[i], i)
        for wa, wb in extra_edges:
            ia, ib = by_word.get(tuple(wa)), by_word.get(tuple(wb))
            if ia is None or ib is None:
                raise ConfigError(f"extra edge names unknown words {wa}, {wb}")
            if g.level_of[ia] != g.level_of[ib]:
                raise ConfigError("extra edges must join same-level words")
            if not g.eh.has(ia, ib):
                g.eh.add(ia, ib, CERTIFIED)
                added += 1
    g.flags["extra_edges"] = added


def build_graph(spec: ContractionSpec, depth: int, *, kappa: float | None = None,
                epsilon_net: float | None = None, budget: int = 5_000_000,
                net_budget: int = 2_000_000, slanted: bool = False,
                horizontal: bool = True, extra_edges=None) -> AugmentedGraph:
    """Augmented tree of an IFS truncated at `depth`.

    kappa is the absolute coefficient of the horizontal threshold
    kappa * r^n; it defaults to 0.1 times the certified upper bound on
    diam(K).  epsilon_net is the root net accuracy; by default it is a few
    percent of the threshold scale, so only pairs genuinely close to the
    threshold can come back uncertain (tighten epsilon_net to resolve them).
    """
    if epsilon_net is None:
        if kappa is not None:
            epsilon_net = 0.05 * kappa
        else:
            _, rho = invariant_ball(spec)
            epsilon_net = 0.05 * 0.1 * 2 * rho
    root_cell = attractor_cell(spec, epsilon_net, net_budget=net_budget)
    if kappa is None:
        kappa = 0.1 * root_cell.diameter_interval[1]
    if kappa <= 0:
        raise ConfigError("kappa must be positive")

    levels_words, levels_maps, parents_local, lvl_flags = build_levels(
        spec, depth, budget)

    ids = []
    start = 0
    for words in levels_words:
        ids.append(list(range(start, start + len(words))))
        start += len(words)
    words_flat: list[tuple] = [w for level in levels_words for w in level]
    maps_flat: list = [m for level in levels_maps for m in level]
    parents_global: list[tuple[int, ...]] = []
    for n, plist in enumerate(parents_local):
        if n == 0:
            parents_global.append(())
            continue
        base_prev = ids[n - 1][0] if ids[n - 1] else 0
        for p in plist:
            parents_global.append((base_prev + p,))

    base_r = spec.r_min_f
    eps0 = root_cell.net_error
    eh = (_build_eh(ids, levels_maps, root_cell, eps0, base_r, kappa, spec.dim)
          if horizontal else EdgeSet())
    es = None
    if slanted:
        es = _build_es(ids, levels_maps, parents_global, root_cell, eps0,
                       base_r, kappa, spec.dim)

    flags = {
        "heuristic": not spec.exact,
        "epsilon_net": eps0,
        "net_points": int(len(root_cell.net)),
        "root_diameter": root_cell.diameter_interval,
        **lvl_flags,
    }
    g = AugmentedGraph(
        kind="ifs", dim=spec.dim, levels=ids, parents=parents_global,
        words=words_flat, eh=eh, es=es, kappa=kappa, base_ratio=base_r,
        spec=spec, maps=maps_flat, root_cell=root_cell, flags=flags,
    )
    _apply_extra_edges(g, extra_edges)
    return g


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def verify_pre_augmented(g: AugmentedGraph, include_uncertain: bool = True) -> dict:
    """Check the defining axiom: a horizontal edge forces its endpoints'
    parents to coincide or to be horizontally adjacent."""
    adj = g.eh.adjacency(certified_only=not include_uncertain)
    pair_ok = 0
    violations = []
    checked = 0
    for u, v, s in g.eh.pairs(certified_only=not include_uncertain):
        if g.level_of[u] != g.level_of[v]:
            violations.append((g.label(u), g.label(v), "levels differ"))
            continue
        if g.level_of[u] == 0:
            continue
        checked += 1
        pu, pv = g.parents[u], g.parents[v]
        ok = False
        for a in pu:
            if ok:
                break
            for b in pv:
                if a == b or b in adj.get(a, ()):
                    ok = True
                    break
        if ok:
            pair_ok += 1
        elif len(violations) < 20:
            violations.append((g.label(u), g.label(v), "parents not adjacent"))
    bad = checked - pair_ok
    return {
        "ok": bad == 0 and not violations,
        "edges_checked": checked,
        "violations": bad,
        "examples": violations,
        "include_uncertain": include_uncertain,
    }


def verify_diamond(g: AugmentedGraph) -> dict:
    """Diamond-graph conditions for (ev + es) builds.

    (i) no horizontal edges; (ii) any 2-path x-y-z with |x| = |z| = |y| - 1
    and x != z closes through some y' one level above x.  The canonical
    witness is the grandparent of y, whose cell contains y's cell.
    """
    up: dict[int, set[int]] = {i: set() for i in range(g.n)}
    for j, ps in enumerate(g.parents):
        for p in ps:
            up[j].add(p)
    if g.es is not None:
        for u, v, s in g.es.pairs():
            lo, hi = (u, v) if g.level_of[u] < g.level_of[v] else (v, u)
            up[hi].add(lo)

    checked = 0
    failures = []
    grandparent_misses = 0
    for y in range(g.n):
        ups = sorted(up[y])
        if len(ups) < 2:
            continue
        grands = {w for x in ups for w in up[x]}
        for x, z in itertools.combinations(ups, 2):
            checked += 1
            common = up[x] & up[z]
            if not common:
                if len(failures) < 20:
                    failures.append((g.label(x), g.label(y), g.label(z)))
                continue
            # canonical witness: a grandparent of y
            if not (common & grands):
                grandparent_misses += 1
    return {
        "ok": len(g.eh) == 0 and not failures,
        "eh_edges": len(g.eh),
        "paths_checked": checked,
        "failures": failures,
        "grandparent_witness_misses": grandparent_misses,
    }


# ---------------------------------------------------------------------------
# quotient graph: identify same-level words with identical maps
# ---------------------------------------------------------------------------


def quotient_graph(g: AugmentedGraph, fingerprint_grid: float = 1e-9) -> AugmentedGraph:
    if g.is_quotient:
        raise UnsupportedOperationError("graph is already a quotient")
    if g.kind != "ifs" or g.maps is None:
        raise UnsupportedOperationError("quotient needs an IFS graph with maps")
    if g.spec is not None and g.spec.kind != "similitude":
        raise UnsupportedOperationError(
            "map identity is undecidable for general contractions")

    heuristic = False
    class_of = np.empty(g.n, dtype=np.int64)
    q_levels: list[list[int]] = []
    q_words: list[tuple] = []
    q_members: list[tuple] = []
    q_maps: list = []
    next_id = 0
    for n, ids in enumerate(g.levels):
        seen: dict = {}
        level_ids = []
        for i in ids:
            m = g.maps[i]
            if m is None:
                key = ("root",)
            else:
                fp = m.fingerprint(fingerprint_grid)
                heuristic = heuristic or fp.heuristic
                key = fp.key
            c = seen.get(key)
            if c is None:
                c = next_id
                next_id += 1
                seen[key] = c
                level_ids.append(c)
                q_words.append(g.words[i])
                q_members.append((i,))
                q_maps.append(g.maps[i])
            else:
                q_members[c] = q_members[c] + (i,)
            class_of[i] = c
        q_levels.append(level_ids)

    q_parents: list[tuple[int, ...]] = []
    for c in range(next_id):
        ps: list[int] = []
        for i in q_members[c]:
            for p in g.parents[i]:
                cp = int(class_of[p])
                if cp not in ps:
                    ps.append(cp)
        q_parents.append(tuple(sorted(ps)))

    def induce(edges: EdgeSet | None) -> EdgeSet | None:
        if edges is None:
            return None
        best: dict[tuple[int, int], int] = {}
        for u, v, s in edges.pairs():
            cu, cv = int(class_of[u]), int(class_of[v])
            if cu == cv:
                continue
            if cu > cv:
                cu, cv = cv, cu
            prev = best.get((cu, cv))
            if prev is None or s < prev:
                best[(cu, cv)] = s
        out = EdgeSet()
        for (cu, cv), s in sorted(best.items()):
            out.add(cu, cv, s)
        return out

    flags = dict(g.flags)
    flags["heuristic"] = flags.get("heuristic", False) or heuristic
    return AugmentedGraph(
        kind="ifs", dim=g.dim, levels=q_levels, parents=q_parents,
        words=q_words, eh=induce(g.eh), es=induce(g.es), kappa=g.kappa,
        base_ratio=g.base_ratio, spec=g.spec, maps=q_maps,
        root_cell=g.root_cell, is_quotient=True, members=q_members,
        flags=flags,
    )


# ---------------------------------------------------------------------------
# Moran constructions (stage-wise ratio lists)
# ---------------------------------------------------------------------------


class MoranSpec:
    """Stage-wise similitude lists: stage k >= 1 subdivides each piece of
    stage k-1 by `stages[(k-1) % len(stages)]`.  All maps within one stage
    must share their contraction ratio."""

    def __init__(self, stages: list[list[SimilitudeMap]], dim: int = 1,
                 name: str = "moran"):
        if not stages or any(not s for s in stages):
            raise ConfigError("moran spec needs nonempty stages")
        self.stages = stages
        self.dim = dim
        self.name = name
        for s in stages:
            if any(not isinstance(m, SimilitudeMap) for m in s):
                raise ConfigError("moran stages must consist of similitudes")
            if any(m.dim != dim for m in s):
                raise ConfigError("moran stage dimension mismatch")
            r0 = s[0].ratio_f
            if any(m.ratio_f != r0 for m in s):
                raise ConfigError("maps within a moran stage must share a ratio")
            if not r0 < 1:
                raise ConfigError("moran stage ratio must contract")
        self.stage_ratios = [s[0].ratio_f for s in stages]
        self.r_min = min(self.stage_ratios)

    def stage(self, k: int) -> list[SimilitudeMap]:
        return self.stages[(k - 1) % len(self.stages)]

    def stage_ratio(self, k: int) -> float:
        return self.stage_ratios[(k - 1) % len(self.stages)]


def unit_interval_cell(points: int = 1001) -> CellApprox:
    """The initial set J = [0, 1] as an explicit net cell."""
    net = np.linspace(0.0, 1.0, points)[:, None]
    return CellApprox(net, 1.0 / (2 * (points - 1)), in_set=True,
                      diameter_interval=(1.0, 1.0))


def build_moran_tree(mspec: MoranSpec, depth: int, *, kappa: float | None = None,
                     root_cell: CellApprox | None = None,
                     budget: int = 5_000_000) -> AugmentedGraph:
    """Re-leveled Moran tree: graph level m is construction stage n(m), the
    first n with r_1 ... r_n <= r^m (r = min stage ratio).  Stage products are
    uniform inside a stage, so every cut set is a full product level."""
    if root_cell is None:
        root_cell = unit_interval_cell()
    if kappa is None:
        kappa = 0.1 * root_cell.diameter_interval[1]
    r = mspec.r_min

    # construction depths for graph levels 0..depth
    n_of = [0]
    prod = 1.0
    n = 0
    for m in range(1, depth + 1):
        target = r ** m
        while prod > target * (1 + _FLOAT_GUARD):
            n += 1
            prod *= mspec.stage_ratio(n)
        n_of.append(n)

    levels_words: list[list[tuple]] = [[()]]
    levels_maps: list[list] = [[None]]
    parents_local: list[list[int]] = [[]]
    total = 1
    for m in range(1, depth + 1):
        prev_w = levels_words[-1]
        prev_m = levels_maps[-1]
        cur_w: list[tuple] = []
        cur_m: list = []
        cur_p: list[int] = []
        for pi, (w, mp) in enumerate(zip(prev_w, prev_m)):
            frontier = [(w, mp)]
            for k in range(n_of[m - 1] + 1, n_of[m] + 1):
                stage = mspec.stage(k)
                nxt = []
                for ww, mm in frontier:
                    for c, sm in enumerate(stage):
                        nxt.append((ww + (c,), sm if mm is None else mm.compose(sm)))
                frontier = nxt
            for ww, mm in frontier:
                cur_w.append(ww)
                cur_m.append(mm)
                cur_p.append(pi)
        total += len(cur_w)
        if total > budget:
            raise BudgetExceededError(
                f"moran level {m} brings the vertex total to {total} > {budget}")
        levels_words.append(cur_w)
        levels_maps.append(cur_m)
        parents_local.append(cur_p)

    ids = []
    start = 0
    for words in levels_words:
        ids.append(list(range(start, start + len(words))))
        start += len(words)
    words_flat = [w for level in levels_words for w in level]
    maps_flat = [m for level in levels_maps for m in level]
    parents_global: list[tuple[int, ...]] = [()]
    for mlvl in range(1, len(parents_local)):
        base_prev = ids[mlvl - 1][0]
        for p in parents_local[mlvl]:
            parents_global.append((base_prev + p,))

    eps0 = root_cell.net_error
    eh = _build_eh(ids, levels_maps, root_cell, eps0, r, kappa, mspec.dim)

    # measured cell-size comparability per level: max(r^m/diam, diam/r^m)
    delta0 = []
    for m in range(1, depth + 1):
        mm = levels_maps[m][0]
        lo = mm.ratio_f * root_cell.diameter_interval[0]
        hi = mm.ratio_f * root_cell.diameter_interval[1]
        rm = r ** m
        delta0.append(max(rm / lo, hi / rm))
    flags = {
        "heuristic": False,
        "stage_of_level": n_of,
        "delta0_profile": delta0,
        "epsilon_net": eps0,
    }
    return AugmentedGraph(
        kind="moran", dim=mspec.dim, levels=ids, parents=parents_global,
        words=words_flat, eh=eh, kappa=kappa, base_ratio=r,
        maps=maps_flat, root_cell=root_cell, flags=flags,
    )


def moran_from_stage_lines(lines: list[tuple[float, list[float]]],
                           name: str = "moran") -> MoranSpec:
    """1-D sugar: each stage is (ratio, offsets); maps are x -> ratio x + t."""
    stages = [[SimilitudeMap(ratio, 1, t) for t in offsets]
              for ratio, offsets in lines]
    return MoranSpec(stages, dim=1, name=name)


# ---------------------------------------------------------------------------
# dyadic-cube trees for arbitrary compact subsets of [0, 1]^d
# ---------------------------------------------------------------------------


def build_dyadic_tree(points: np.ndarray, depth: int, *, kappa: float = 0.5,
                      budget: int = 5_000_000) -> AugmentedGraph:
    """Cube tree over a compact set sampled by `points` (inside [0, 1]^d).

    Level k vertices are the dyadic cubes of side 2^-k meeting the sample;
    cells are the cubes themselves, so every horizontal decision is exact.
    Words are the octant digits along the cube's ancestry.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ConfigError("dyadic tree needs at least one sample point")
    d = pts.shape[1]
    if np.any(pts < 0) or np.any(pts > 1):
        raise ConfigError("sample points must lie in the unit cube")
    if kappa <= 0 or kappa >= 1:
        raise ConfigError("dyadic kappa must lie in (0, 1) for exact adjacency")

    levels: list[list[int]] = []
    words: list[tuple] = []
    parents: list[tuple[int, ...]] = []
    boxes: list = []
    eh = EdgeSet()
    total = 0
    prev_cubes: dict[tuple, int] = {}
    for k in range(depth + 1):
        side = 2.0 ** -k
        scaled = np.minimum((pts / side).astype(np.int64), 2 ** k - 1)
        cubes = sorted({tuple(row) for row in scaled})
        total += len(cubes)
        if total > budget:
            raise BudgetExceededError(
                f"dyadic level {k} brings the vertex total to {total} > {budget}")
        level_ids = []
        cur: dict[tuple, int] = {}
        for cube in cubes:
            i = len(words)
            cur[cube] = i
            level_ids.append(i)
            lo = np.array(cube, dtype=float) * side
            boxes.append((lo, lo + side))
            if k == 0:
                words.append(())
                parents.append(())
            else:
                parent_cube = tuple(c >> 1 for c in cube)
                p = prev_cubes[parent_cube]
                parents.append((p,))
                octant = sum((c & 1) << axis for axis, c in enumerate(cube))
                words.append(words[p] + (octant,))
        # horizontal: cubes touching or within kappa * side (kappa < 1 means
        # index offsets in {-1, 0, 1}^d with per-axis gaps 0)
        for cube, i in cur.items():
            for off in itertools.product((-1, 0, 1), repeat=d):
                if off <= (0,) * d:
                    continue  # canonical direction, avoid duplicates
                nb = tuple(c + o for c, o in zip(cube, off))
                j = cur.get(nb)
                if j is not None:
                    eh.add(i, j, CERTIFIED)
        levels.append(level_ids)
        prev_cubes = cur

    flags = {"heuristic": False, "sample_points": int(len(pts))}
    return AugmentedGraph(
        kind="dyadic", dim=d, levels=levels, parents=parents, words=words,
        eh=eh, kappa=kappa, base_ratio=0.5, boxes=boxes, flags=flags,
    )


# ---------------------------------------------------------------------------
# explicit fixtures
# ---------------------------------------------------------------------------


def graph_from_parts(level_words: list[list[tuple]],
                     parent_words: dict[tuple, tuple],
                     eh_pairs: list[tuple[tuple, tuple]],
                     es_pairs: list[tuple[tuple, tuple]] | None = None,
                     kappa: float = 1.0, base_ratio: float = 0.5,
                     kind: str = "fixture") -> AugmentedGraph:
    """Hand-built leveled graph; for tests and counterexamples."""
    words: list[tuple] = []
    levels: list[list[int]] = []
    index: dict[tuple, int] = {}
    for lvl in level_words:
        ids = []
        for w in lvl:
            if w in index:
                raise ConfigError(f"duplicate word {w!r}")
            index[w] = len(words)
            ids.append(len(words))
            words.append(w)
        levels.append(ids)
    parents: list[tuple[int, ...]] = []
    for i, w in enumerate(words):
        pw = parent_words.get(w)
        parents.append(() if pw is None else (index[pw],))
    eh = EdgeSet()
    for a, b in eh_pairs:
        eh.add(index[a], index[b], CERTIFIED)
    es = None
    if es_pairs is not None:
        es = EdgeSet()
        for a, b in es_pairs:
            es.add(index[a], index[b], CERTIFIED)
    return AugmentedGraph(kind=kind, dim=1, levels=levels, parents=parents,
                          words=words, eh=eh, es=es, kappa=kappa,
                          base_ratio=base_ratio)
