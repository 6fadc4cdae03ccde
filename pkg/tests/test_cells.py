import numpy as np
import pytest

from augtree import presets
from augtree.cells import (
    CellApprox,
    attractor_cell,
    build_cell,
    cell_distance,
    min_net_distance,
    point_set_diameter,
)
from augtree.errors import BudgetExceededError


def brute_cantor_points(depth: int) -> np.ndarray:
    """All left endpoints of depth-`depth` Cantor intervals: a fine subset of K."""
    pts = np.array([0.0])
    for _ in range(depth):
        pts = np.concatenate([pts / 3, pts / 3 + 2 / 3])
    return np.sort(pts)


class TestAttractorNet:
    def test_cantor_net_is_accurate(self):
        root = attractor_cell(presets.cantor(), epsilon=1e-3)
        assert root.in_set
        # oracle: dense true subset; net must epsilon-cover it
        oracle = brute_cantor_points(12)
        net = np.sort(root.net[:, 0])
        idx = np.searchsorted(net, oracle)
        idx = np.clip(idx, 1, len(net) - 1)
        gaps = np.minimum(np.abs(oracle - net[idx]), np.abs(oracle - net[idx - 1]))
        assert gaps.max() <= root.net_error
        # and net points really lie in (a fine cover of) the Cantor set
        jdx = np.clip(np.searchsorted(oracle, net), 1, len(oracle) - 1)
        d = np.minimum(np.abs(net - oracle[jdx]), np.abs(net - oracle[jdx - 1]))
        # within one depth-12 interval length of the oracle (plus float dust)
        assert d.max() <= 3.0 ** -12 + 1e-14

    def test_diameters(self):
        root = attractor_cell(presets.cantor(), epsilon=1e-4)
        lo, hi = root.diameter_interval
        assert lo <= 1.0 <= hi
        assert hi - lo <= 4 * root.net_error

        root = attractor_cell(presets.sierpinski(), epsilon=1e-3)
        lo, hi = root.diameter_interval
        assert lo <= 1.0 <= hi and hi - lo <= 4 * root.net_error

    def test_interval_attractor(self):
        root = attractor_cell(presets.unit_interval(), epsilon=1e-3)
        m, M = root.hull_interval()
        assert m == 0.0 and M == 1.0
        diff = np.diff(np.sort(root.net[:, 0]))
        assert diff.max() <= 2 * root.net_error

    def test_single_map(self):
        root = attractor_cell(presets.single())
        assert len(root.net) == 1
        assert root.net[0, 0] == pytest.approx(0.0)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            attractor_cell(presets.sierpinski(), epsilon=1e-5, net_budget=1000)

    def test_golden_net_covers_unit_interval(self):
        root = attractor_cell(presets.golden(), epsilon=1e-3)
        m, M = root.hull_interval()
        assert m == pytest.approx(0.0, abs=1e-12)
        assert M == pytest.approx(1.0, abs=1e-12)
        assert np.diff(np.sort(root.net[:, 0])).max() <= 2e-3


class TestCells:
    def test_sierpinski_subcell_diameter(self):
        spec = presets.sierpinski()
        root = attractor_cell(spec, epsilon=1e-3)
        cell = build_cell(spec.compose((1, 2)), root)
        lo, hi = cell.diameter_interval
        eps = cell.net_error
        assert 0.25 - 2 * eps <= lo <= hi <= 0.25 + 2 * eps + 1e-12
        assert hi - lo <= 4 * eps + 1e-12

    def test_cantor_gap_distance(self):
        spec = presets.cantor()
        root = attractor_cell(spec, epsilon=1e-4)
        left = build_cell(spec.compose((0,)), root)
        right = build_cell(spec.compose((1,)), root)
        lo, hi = cell_distance(left, right)
        assert lo <= 1 / 3 <= hi      # the true middle gap
        assert hi - lo <= 2 * (left.net_error + right.net_error)
        assert hi == pytest.approx(1 / 3, abs=2e-4)

    def test_touching_cells(self):
        spec = presets.unit_interval()
        root = attractor_cell(spec, epsilon=1e-3)
        a = build_cell(spec.compose((0,)), root)
        b = build_cell(spec.compose((1,)), root)
        lo, hi = cell_distance(a, b)
        assert lo == 0.0
        assert hi <= a.net_error + b.net_error  # truly touching at 1/2

    def test_box_cells_exact(self):
        a = CellApprox(np.array([[0.0, 0.0], [0.5, 0.5]]), 0.0, in_set=True,
                       box=(np.array([0.0, 0.0]), np.array([0.5, 0.5])))
        b = CellApprox(np.array([[1.0, 0.5], [1.5, 1.0]]), 0.0, in_set=True,
                       box=(np.array([1.0, 0.5]), np.array([1.5, 1.0])))
        lo, hi = cell_distance(a, b)
        assert lo == pytest.approx(0.5, rel=1e-9)
        assert hi == pytest.approx(0.5, rel=1e-9)

    def test_min_net_distance_chunking(self):
        rng = np.random.default_rng(0)
        a = rng.random((700, 2))
        b = rng.random((900, 2)) + 2.0
        d_full = min_net_distance(a, b)
        d_chunk = min_net_distance(a, b, chunk=1000)
        assert d_full == pytest.approx(d_chunk, rel=1e-12)

    def test_point_set_diameter_matches_brute(self):
        rng = np.random.default_rng(1)
        pts = rng.random((500, 2))
        brute = 0.0
        for i in range(len(pts)):
            brute = max(brute, float(np.linalg.norm(pts - pts[i], axis=1).max()))
        assert point_set_diameter(pts) == pytest.approx(brute, rel=1e-12)

    def test_point_set_diameter_collinear(self):
        t = np.linspace(0, 1, 450)[:, None]
        pts = np.hstack([t, 2 * t])
        assert point_set_diameter(pts) == pytest.approx(np.sqrt(5), rel=1e-9)
