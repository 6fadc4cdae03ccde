"""Certified cell approximations.

A cell is the image S_w(K) of the attractor (or an explicit box for cube
trees).  It is approximated by a finite net of points together with a
certified one-sided Hausdorff error: every cell point is within `net_error`
of the net.  Nets are seeded at the fixed points of the generators, which lie
in K exactly, so net points stay inside the cell (`in_set`); the minimum
pairwise net distance is then an exact upper bound for the distance between
two cells and certified two-sided intervals follow.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BudgetExceededError, InternalError
from .ifs import ContractionSpec

_GUARD = 1e-12  # multiplicative slack on float-derived certified bounds


def _pairwise_max(pts: np.ndarray) -> float:
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.max()))


def point_set_diameter(pts: np.ndarray) -> float:
    """Exact diameter of a finite point set."""
    n, d = pts.shape
    if n <= 1:
        return 0.0
    if d == 1:
        return float(pts.max() - pts.min())
    if n <= 400:
        return _pairwise_max(pts)
    try:
        from scipy.spatial import ConvexHull

        hull = pts[ConvexHull(pts).vertices]
        return _pairwise_max(hull)
    except Exception:
        # degenerate (e.g. collinear) input: project on the principal axis
        c = pts - pts.mean(axis=0)
        _, s, vt = np.linalg.svd(c, full_matrices=False)
        if s.size > 1 and s[1] > 1e-12 * max(s[0], 1.0):
            return _pairwise_max(pts)  # genuinely 2-D but hull failed
        proj = c @ vt[0]
        return float(proj.max() - proj.min())


class CellApprox:
    """Net approximation of one cell, with certified error terms.

    diameter_interval always contains the true cell diameter and its width is
    at most 4 * net_error.  When `box` is set the cell is exactly that axis
    box and box arithmetic supersedes the net.
    """

    __slots__ = ("net", "net_error", "in_set", "ball_center", "ball_radius",
                 "diameter_interval", "box")

    def __init__(self, net: np.ndarray, net_error: float, *, in_set: bool,
                 diameter_interval: tuple[float, float] | None = None,
                 box: tuple[np.ndarray, np.ndarray] | None = None):
        net = np.atleast_2d(np.asarray(net, dtype=float))
        self.net = net
        self.net_error = float(net_error)
        self.in_set = in_set
        self.box = box
        lo = (net.min(axis=0) if box is None else box[0])
        hi = (net.max(axis=0) if box is None else box[1])
        center = (lo + hi) / 2.0
        self.ball_center = center
        if box is None:
            r = float(np.sqrt(((net - center) ** 2).sum(axis=1).max()))
            self.ball_radius = r * (1 + _GUARD) + self.net_error
        else:
            self.ball_radius = float(np.linalg.norm(hi - lo)) / 2 * (1 + _GUARD)
        if diameter_interval is None:
            if box is not None:
                d = float(np.linalg.norm(hi - lo))
                diameter_interval = (d * (1 - _GUARD), d * (1 + _GUARD))
            else:
                d = point_set_diameter(net)
                diameter_interval = (d, d + 2 * self.net_error)
        self.diameter_interval = diameter_interval

    @property
    def dim(self) -> int:
        return self.net.shape[1]

    def hull_interval(self) -> tuple[float, float]:
        """1-D support interval of the net (fast-path helper)."""
        return float(self.net[:, 0].min()), float(self.net[:, 0].max())

    def __repr__(self):
        lo, hi = self.diameter_interval
        return (f"CellApprox(dim={self.dim}, net={len(self.net)}, "
                f"err={self.net_error:.2e}, diam=[{lo:.4g}, {hi:.4g}])")


def _dedup_grid(pts: np.ndarray, step: float) -> np.ndarray:
    """Keep one original representative per grid box (points are never moved)."""
    if step <= 0 or len(pts) < 2:
        return pts
    keys = np.floor(pts / step).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return pts[np.sort(idx)]


def invariant_ball(spec: ContractionSpec) -> tuple[np.ndarray, float]:
    """Center and radius of a ball that contains the attractor.

    For any center c, every attractor point is within
    max_j |S_j(c) - c| / (1 - R) of c.
    """
    seeds = np.array([m.fixed_point() for m in spec.maps], dtype=float)
    center = seeds.mean(axis=0)
    disp = max(float(np.linalg.norm(m.apply(center[None, :])[0] - center))
               for m in spec.maps)
    rho = disp / (1 - spec.R_max_f) * (1 + _GUARD) + 1e-300
    return center, rho


def attractor_cell(spec: ContractionSpec, epsilon: float | None = None,
                   net_budget: int = 2_000_000) -> CellApprox:
    """Root cell: a certified epsilon-net of the attractor K.

    Seeds are the generator fixed points (exactly in K); the system is
    iterated until the one-sided Hausdorff error R^k * 2*rho plus the grid
    dedup loss is below epsilon.  Default epsilon is 1e-3 times the certified
    ball diameter.
    """
    d = spec.dim
    R = spec.R_max_f
    seeds = np.array([m.fixed_point() for m in spec.maps], dtype=float)
    seeds = np.unique(seeds, axis=0)

    center, rho = invariant_ball(spec)

    if epsilon is None:
        epsilon = 1e-3 * max(2 * rho, 1e-12)
    epsilon = float(epsilon)
    if epsilon <= 0:
        raise InternalError("net epsilon must be positive")

    # R^k * 2 rho <= eps/2; dedup losses sum to <= grid*sqrt(d)/(1-R) <= eps/2
    if 2 * rho <= epsilon / 2:
        k = 0
    else:
        k = max(0, math.ceil(math.log(epsilon / (4 * rho)) / math.log(R)))
    grid = epsilon * (1 - R) / (2 * math.sqrt(d)) if k > 0 else 0.0

    pts = seeds
    for _ in range(k):
        pts = np.concatenate([m.apply(pts) for m in spec.maps], axis=0)
        pts = _dedup_grid(pts, grid)
        if len(pts) > net_budget:
            raise BudgetExceededError(
                f"attractor net exceeded {net_budget} points at epsilon={epsilon:g}; "
                f"coarsen epsilon or raise the budget"
            )
    return CellApprox(pts, epsilon, in_set=True)


def build_cell(composed_map, root: CellApprox) -> CellApprox:
    """Image cell S_w(K) from the composed map and the root net."""
    net = composed_map.apply(root.net)
    R = float(composed_map.R_bound)
    err = R * root.net_error * (1 + _GUARD)
    from .ifs import SimilitudeMap

    if isinstance(composed_map, SimilitudeMap):
        r = composed_map.ratio_f
        lo, hi = root.diameter_interval
        di = (r * lo * (1 - _GUARD), r * hi * (1 + _GUARD))
        return CellApprox(net, err, in_set=root.in_set, diameter_interval=di)
    return CellApprox(net, err, in_set=root.in_set)


def min_net_distance(a: np.ndarray, b: np.ndarray, chunk: int = 1 << 22) -> float:
    """Minimum pairwise distance between two point sets (chunked)."""
    n, m = len(a), len(b)
    if n * m <= chunk:
        d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
        return float(np.sqrt(d2.min()))
    best = np.inf
    rows = max(1, chunk // max(m, 1))
    for i in range(0, n, rows):
        d2 = np.sum((a[i:i + rows, None, :] - b[None, :, :]) ** 2, axis=-1)
        best = min(best, float(d2.min()))
    return math.sqrt(best)


def box_distance(a: CellApprox, b: CellApprox) -> float:
    gap = np.maximum(0.0, np.maximum(a.box[0] - b.box[1], b.box[0] - a.box[1]))
    return float(np.linalg.norm(gap))


def cell_distance(a: CellApprox, b: CellApprox) -> tuple[float, float]:
    """Certified interval for dist(cell_a, cell_b); width <= 2*(err_a+err_b)."""
    if a.box is not None and b.box is not None:
        d = box_distance(a, b)
        return (d * (1 - _GUARD), d * (1 + _GUARD))
    d = min_net_distance(a.net, b.net)
    band = a.net_error + b.net_error
    lo = max(0.0, d - band)
    if a.in_set and b.in_set:
        return (lo, d)
    return (lo, d + band)
