"""Random walks on truncated augmented trees.

The simple random walk moves to a uniformly chosen neighbor (vertical and
horizontal edges alike).  Truncating at a horizon makes the deepest level
absorbing; the interior part of the transition matrix is substochastic, its
Neumann series is the Green function, and the absorption distribution is the
discrete harmonic measure.  Kernels derived from the Green function
(K(x,y) = G(x,y)/G(o,y) and Theta(x,y) = K(x,y)/G(x,o), with o the root)
grow exponentially in the Gromov product, which is the quantitative link
back to hyperbolicity: their log-slopes against the product are checked by
the regression helpers.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import BudgetExceededError, SolverError, UnsupportedOperationError
from .trees import AugmentedGraph

_RESIDUAL_TOL = 1e-10


class TruncatedChain:
    """Absorbing simple random walk on the truncation at `horizon`.

    Vertices below the horizon are interior; horizon vertices absorb.  Rows
    of the transition matrix are exactly stochastic by construction (each of
    the deg neighbors gets probability 1/deg); `integrity()` re-checks the
    combinatorial facts behind that claim.
    """

    def __init__(self, g: AugmentedGraph, horizon: int | None = None, *,
                 use_es: bool = False, certified_only: bool = False,
                 max_states: int = 200_000):
        horizon = g.depth if horizon is None else horizon
        if not 1 <= horizon <= g.depth:
            raise UnsupportedOperationError(
                f"horizon {horizon} not in 1..{g.depth}")
        self.graph = g
        self.horizon = horizon
        indptr, indices = g.adjacency(use_es=use_es,
                                      certified_only=certified_only,
                                      max_level=horizon)
        keep = g.level_of <= horizon
        self.interior = np.nonzero(keep & (g.level_of < horizon))[0]
        self.absorbing = np.nonzero(g.level_of == horizon)[0]
        if len(self.interior) + len(self.absorbing) > max_states:
            raise BudgetExceededError(
                f"{len(self.interior) + len(self.absorbing)} states exceed "
                f"budget {max_states}")
        self._int_pos = np.full(g.n, -1, dtype=np.int64)
        self._int_pos[self.interior] = np.arange(len(self.interior))
        self._abs_pos = np.full(g.n, -1, dtype=np.int64)
        self._abs_pos[self.absorbing] = np.arange(len(self.absorbing))

        self._indptr, self._indices = indptr, indices
        self.degrees = (indptr[1:] - indptr[:-1]).astype(np.int64)
        if (self.degrees[self.interior] == 0).any():
            raise UnsupportedOperationError(
                "an interior vertex has no neighbors inside the horizon")

        rows_q, cols_q, vals_q = [], [], []
        rows_r, cols_r, vals_r = [], [], []
        for ii, v in enumerate(self.interior):
            nb = indices[indptr[v]:indptr[v + 1]]
            p = 1.0 / len(nb)
            for w in nb:
                if g.level_of[w] < horizon:
                    rows_q.append(ii)
                    cols_q.append(self._int_pos[w])
                    vals_q.append(p)
                else:
                    rows_r.append(ii)
                    cols_r.append(self._abs_pos[w])
                    vals_r.append(p)
        k, m = len(self.interior), len(self.absorbing)
        self.Q = sp.csr_matrix((vals_q, (rows_q, cols_q)), shape=(k, k))
        self.R = sp.csr_matrix((vals_r, (rows_r, cols_r)), shape=(k, m))
        self._lu = splu(sp.eye(k, format="csc") - self.Q.tocsc())
        self._green_dense: np.ndarray | None = None

    # -- integrity ---------------------------------------------------------

    def integrity(self) -> dict:
        """Exact facts behind row-stochasticity: every interior row has
        exactly deg entries summing to deg * (1/deg), no self-loops, no
        duplicate neighbors."""
        ok = True
        for v in self.interior:
            nb = self._indices[self._indptr[v]:self._indptr[v + 1]]
            if len(nb) != self.degrees[v] or len(set(nb.tolist())) != len(nb) \
                    or v in nb:
                ok = False
                break
        counts = self.Q.getnnz(axis=1) + self.R.getnnz(axis=1)
        ok = ok and (counts == self.degrees[self.interior]).all()
        return {"exact": bool(ok), "interior": len(self.interior),
                "absorbing": len(self.absorbing)}

    # -- solver ------------------------------------------------------------

    def green(self) -> np.ndarray:
        """Dense Green matrix G[i, j] = expected visits to interior j from
        interior i (positions follow `self.interior`), with the defining
        identity re-checked."""
        if self._green_dense is None:
            k = len(self.interior)
            G = self._lu.solve(np.eye(k))
            A = sp.eye(k) - self.Q
            resid = np.abs(A @ G - np.eye(k)).max()
            if resid > _RESIDUAL_TOL:
                raise SolverError(f"Green residual {resid:.2e} above tolerance")
            self._green_dense = G
        return self._green_dense

    def green_entry(self, x: int, y: int) -> float:
        """G(x, y) for graph vertex ids."""
        G = self.green()
        ix, iy = self._int_pos[x], self._int_pos[y]
        if ix < 0 or iy < 0:
            raise UnsupportedOperationError(
                "Green entries are defined for interior vertices")
        return float(G[ix, iy])

    def hitting(self, start: int | None = None) -> np.ndarray:
        """Absorption distribution over `self.absorbing` from `start`
        (root by default), via one adjoint solve."""
        start = self.graph.root if start is None else start
        ii = self._int_pos[start]
        if ii < 0:
            raise UnsupportedOperationError(f"vertex {start} is not interior")
        e = np.zeros(len(self.interior))
        e[ii] = 1.0
        w = self._lu.solve(e, trans="T")
        nu = self.R.T @ w
        s = nu.sum()
        if abs(s - 1.0) > 1e-9:
            raise SolverError(f"hitting mass {s} is not 1")
        return nu / s

    def reversibility_defect(self) -> float:
        """max |deg(x) G(x,y) - deg(y) G(y,x)|; zero for a reversible walk."""
        G = self.green()
        d = self.degrees[self.interior].astype(float)
        M = d[:, None] * G
        return float(np.abs(M - M.T).max())

    # -- simulation --------------------------------------------------------

    def simulate(self, n_walks: int, seed: int, *, start: int | None = None,
                 step_cap: int | None = None) -> dict:
        """Absorption counts from `n_walks` independent walks
        (counter-based generator, reproducible).

        Walks still alive after `step_cap` steps (default 10^6 * horizon)
        are reported as censored rather than raising; the count should be
        zero for any reasonable cap.
        """
        start = self.graph.root if start is None else start
        if self._int_pos[start] < 0:
            raise UnsupportedOperationError(f"vertex {start} is not interior")
        if step_cap is None:
            step_cap = 10 ** 6 * self.horizon
        rng = np.random.Generator(np.random.Philox(seed))
        level_of = self.graph.level_of
        indptr, indices = self._indptr, self._indices
        counts = np.zeros(len(self.absorbing), dtype=np.int64)
        cur = np.full(n_walks, start, dtype=np.int64)
        for _ in range(step_cap):
            if len(cur) == 0:
                break
            deg = self.degrees[cur]
            pick = indptr[cur] + (rng.random(len(cur)) * deg).astype(np.int64)
            nxt = indices[pick]
            done = level_of[nxt] == self.horizon
            if done.any():
                counts += np.bincount(self._abs_pos[nxt[done]],
                                      minlength=len(self.absorbing))
            cur = nxt[~done]
        return {"counts": counts, "censored": int(len(cur)),
                "walks": n_walks, "start": int(start), "seed": int(seed)}


# ---------------------------------------------------------------------------
# measures and comparisons
# ---------------------------------------------------------------------------


def _ancestor_at(g: AugmentedGraph, v: int, level: int) -> int:
    while g.level_of[v] > level:
        ps = g.parents[v]
        if len(ps) != 1:
            raise UnsupportedOperationError(
                "aggregation by ancestors needs a raw tree (one parent each)")
        v = ps[0]
    return v


def aggregate_to_level(chain: TruncatedChain, weights: np.ndarray,
                       level: int) -> dict[int, float]:
    """Sum a measure on absorbing states up to their level-`level` ancestors."""
    g = chain.graph
    out: dict[int, float] = {int(i): 0.0 for i in g.levels[level]}
    for w, z in zip(weights, chain.absorbing):
        out[_ancestor_at(g, int(z), level)] += float(w)
    return out


def _natural_measure(chain: TruncatedChain, level: int) -> dict[int, float]:
    g = chain.graph
    base: dict[int, float] = {int(i): 0.0 for i in g.levels[level]}
    for z in chain.absorbing:
        base[_ancestor_at(g, int(z), level)] += 1.0 / len(chain.absorbing)
    return base


def harmonic_vs_natural(chain: TruncatedChain, level: int, *,
                        start: int | None = None,
                        weights: np.ndarray | None = None) -> dict:
    """Total variation between harmonic measure and the branching measure.

    The reference gives each level-`level` cell the fraction of absorbing
    states below it (for an equicontractive system, the natural
    dimension-measure of the cell).  `weights` substitutes an empirical
    distribution for the solver's.
    """
    nu_abs = chain.hitting(start) if weights is None else weights
    nu = aggregate_to_level(chain, nu_abs, level)
    base = _natural_measure(chain, level)
    tv = 0.5 * sum(abs(nu[i] - base[i]) for i in nu)
    return {"tv": tv, "harmonic": nu, "natural": base, "level": level}


def harmonic_profile(chain: TruncatedChain, *, n_walks: int | None = None,
                     seed: int = 0) -> dict:
    """TV against the branching measure for every level 1..horizon-2,
    from the solver or (with `n_walks`) from simulation."""
    if chain.horizon < 3:
        raise UnsupportedOperationError("profile needs horizon >= 3")
    if n_walks is None:
        weights, censored = chain.hitting(), 0
        mode = "solve"
    else:
        sim = chain.simulate(n_walks, seed)
        good = sim["walks"] - sim["censored"]
        weights, censored = sim["counts"] / good, sim["censored"]
        mode = "simulate"
    rows = [{"level": m,
             "tv": harmonic_vs_natural(chain, m, weights=weights)["tv"]}
            for m in range(1, chain.horizon - 1)]
    return {"rows": rows, "mode": mode, "walks": n_walks,
            "censored": censored, "horizon": chain.horizon}


def horizon_comparison(g: AugmentedGraph, level: int, horizon: int, *,
                       delta: int = 2, use_es: bool = False) -> dict:
    """Stability under a deeper horizon: TV between harmonic measures
    aggregated at `level`, and the relative change of the Green column at
    the root over vertices of depth <= horizon - 2."""
    c1 = TruncatedChain(g, horizon, use_es=use_es)
    c2 = TruncatedChain(g, horizon + delta, use_es=use_es)
    m1 = aggregate_to_level(c1, c1.hitting(), level)
    m2 = aggregate_to_level(c2, c2.hitting(), level)
    tv = 0.5 * sum(abs(m1[i] - m2[i]) for i in m1)
    o = g.root
    shallow = [int(v) for v in c1.interior
               if g.level_of[v] <= horizon - 2]
    rel = max(abs(c2.green_entry(v, o) - c1.green_entry(v, o))
              / c1.green_entry(v, o) for v in shallow)
    return {"tv": tv, "green_rel_change": rel,
            "horizons": (horizon, horizon + delta), "level": level}


def compare_mc_solver(chain: TruncatedChain, n_walks: int, seed: int, *,
                      start: int | None = None) -> dict:
    """Monte-Carlo absorption counts against solver probabilities, in units
    of the binomial standard error."""
    p = chain.hitting(start)
    sim = chain.simulate(n_walks, seed, start=start)
    phat = sim["counts"] / n_walks
    sigma = np.sqrt(np.maximum(p * (1 - p), 1e-300) / n_walks)
    z = np.abs(phat - p) / sigma
    return {
        "max_z": float(z.max()),
        "mean_z": float(z.mean()),
        "tv": float(0.5 * np.abs(phat - p).sum()),
        "walks": n_walks,
        "censored": sim["censored"],
    }


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def martin_kernel(chain: TruncatedChain, x: int, y: int, *,
                  base: int | None = None) -> float:
    """K(x, y) = G(x, y) / G(o, y) for interior x, y."""
    o = chain.graph.root if base is None else base
    return chain.green_entry(x, y) / chain.green_entry(o, y)


def naim_kernel(chain: TruncatedChain, x: int, y: int, *,
                base: int | None = None) -> float:
    """Theta(x, y) = K(x, y) / G(x, o) for interior x, y."""
    o = chain.graph.root if base is None else base
    return martin_kernel(chain, x, y, base=o) / chain.green_entry(x, o)


def boundary_martin(chain: TruncatedChain, x: int, *,
                    base: int | None = None) -> np.ndarray:
    """Martin kernel against the absorbing level: hitting from x over
    hitting from the base, per absorbing state."""
    base = chain.graph.root if base is None else base
    nu_x = chain.hitting(x)
    nu_o = chain.hitting(base)
    if (nu_o <= 0).any():
        raise SolverError("base hitting measure has zero mass somewhere")
    return nu_x / nu_o


def martin_harmonic_defect(chain: TruncatedChain, y: int) -> float:
    """max over interior x != y of |(P K(., y))(x) - K(x, y)|; the kernel
    is P-harmonic off y because absorbed walks never revisit the interior."""
    G = chain.green()
    iy = chain._int_pos[y]
    if iy < 0:
        raise UnsupportedOperationError("y must be interior")
    col = G[:, iy] / G[chain._int_pos[chain.graph.root], iy]
    defect = np.abs(chain.Q @ col - col)
    defect[iy] = 0.0
    return float(defect.max())


# ---------------------------------------------------------------------------
# scaling regressions
# ---------------------------------------------------------------------------


def _gromov_to_set(g, x, targets, horizon):
    from .metric import bfs_distances
    d = bfs_distances(g, [x], max_level=horizon)[0]
    lx = int(g.level_of[x])
    return {int(z): (lx + int(g.level_of[z]) - d[z]) / 2.0 for z in targets}


def default_growth_rate(chain: TruncatedChain) -> float:
    """ln of the per-level branching: ln N for an N-map system, else
    measured at the horizon."""
    g = chain.graph
    if g.spec is not None and not g.is_quotient:
        return float(np.log(len(g.spec.maps)))
    h = chain.horizon
    return float(np.log(len(g.levels[h]) / len(g.levels[h - 1])))


def _fit(ts, ys):
    ts = np.asarray(ts)
    ys = np.asarray(ys)
    if len(ts) < 2 or np.ptp(ts) == 0:
        raise UnsupportedOperationError("not enough spread for a regression")
    slope, intercept = np.polyfit(ts, ys, 1)
    resid = ys - (slope * ts + intercept)
    r2 = 1.0 - resid.var() / ys.var() if ys.var() > 0 else 1.0
    return float(slope), float(intercept), float(r2), float(
        np.abs(resid).max())


def martin_regression(chain: TruncatedChain, *, level: int | None = None,
                      rate: float | None = None) -> dict:
    """Fit ln K(x, z) against rate * (2 (x|z) - |x|) over all interior x at
    one level and all absorbing z.  Slope near 1 is the hyperbolic
    prediction: the kernel grows like the branching to the power of the
    Gromov-product excess.
    """
    g = chain.graph
    level = chain.horizon // 2 if level is None else level
    if not 1 <= level < chain.horizon:
        raise UnsupportedOperationError(f"level {level} is not interior")
    rate = default_growth_rate(chain) if rate is None else rate
    ts, ys = [], []
    for x in (int(i) for i in g.levels[level]):
        K = boundary_martin(chain, x)
        gp = _gromov_to_set(g, x, chain.absorbing, chain.horizon)
        for pos, z in enumerate(chain.absorbing):
            ts.append(rate * (2.0 * gp[int(z)] - level))
            ys.append(np.log(K[pos]))
    slope, intercept, r2, spread = _fit(ts, ys)
    return {"slope": slope, "intercept": intercept, "r2": r2,
            "max_residual": spread, "pairs": len(ts), "rate": rate,
            "level": level}


def naim_regression(chain: TruncatedChain, *, level: int | None = None,
                    rate: float | None = None) -> dict:
    """Fit ln Theta over same-level interior pairs, twice: against
    rate * 2 (x|y) (graph Gromov products) and against
    -2 alpha ln |p(x) - p(y)| (representative attractor points), with
    alpha = rate / -ln(contraction ratio).  Pairs whose representative
    points coincide are excluded from the second fit and counted.
    """
    g = chain.graph
    level = chain.horizon // 2 if level is None else level
    if not 1 <= level < chain.horizon:
        raise UnsupportedOperationError(f"level {level} is not interior")
    rate = default_growth_rate(chain) if rate is None else rate
    alpha = (None if g.base_ratio is None
             else rate / -np.log(g.base_ratio))
    xs = [int(i) for i in g.levels[level]]
    pts = None
    if alpha is not None and (g.maps is not None or g.is_quotient):
        try:
            pts = {x: np.asarray(g.point(x)) for x in xs}
        except Exception:
            pts = None
    ts, ys, es, ye = [], [], [], []
    excluded = 0
    for a in range(len(xs)):
        gp = _gromov_to_set(g, xs[a], xs[a + 1:], chain.horizon)
        for b in range(a + 1, len(xs)):
            theta = naim_kernel(chain, xs[a], xs[b])
            ts.append(rate * 2.0 * gp[xs[b]])
            ys.append(np.log(theta))
            if pts is not None:
                gap = float(np.linalg.norm(pts[xs[a]] - pts[xs[b]]))
                if gap == 0.0:
                    excluded += 1
                else:
                    es.append(-2.0 * alpha * np.log(gap))
                    ye.append(np.log(theta))
    slope, intercept, r2, spread = _fit(ts, ys)
    out = {"slope": slope, "intercept": intercept, "r2": r2,
           "max_residual": spread, "pairs": len(ts), "rate": rate,
           "alpha": None if alpha is None else float(alpha), "level": level,
           "euclid_slope": None, "euclid_r2": None,
           "euclid_excluded": excluded}
    if len(es) >= 2 and np.ptp(es) > 0:
        e_slope, _, e_r2, _ = _fit(es, ye)
        out["euclid_slope"] = e_slope
        out["euclid_r2"] = e_r2
    return out
