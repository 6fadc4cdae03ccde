"""Tests for absorbing walks: Green function, harmonic measure, kernels.

The small-chain numbers are hand-derived.  Single branch truncated at two
levels: interior {root, v} with P(root->v) = 1 and P(v->root) = 1/2 gives
G = (I-Q)^{-1} = [[2, 2], [1, 2]].  Binary tree truncated at two levels:
each excursion from the root returns with probability 1/3, so
G(root, root) = 3/2; first-step analysis gives G(c0, root) = 1/2 and
(by reversibility, degrees 2 and 3) G(root, c0) = 3/4, hence
K(c0, c1) = (1/4)/(3/4) = 1/3 and Theta(c0, c1) = (1/3)/(1/2) = 2/3,
and the hitting row of c0 is (5/12, 5/12, 1/12, 1/12).
"""

from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augtree import (
    BudgetExceededError,
    TruncatedChain,
    UnsupportedOperationError,
    aggregate_to_level,
    boundary_martin,
    build_graph,
    compare_mc_solver,
    default_growth_rate,
    harmonic_profile,
    harmonic_vs_natural,
    horizon_comparison,
    martin_harmonic_defect,
    martin_kernel,
    martin_regression,
    naim_kernel,
    naim_regression,
    preset,
    quotient_graph,
)


@lru_cache(maxsize=None)
def _graph(name, depth, **kw):
    return build_graph(preset(name), depth, **kw)


@lru_cache(maxsize=None)
def _chain(name, depth, horizon=None):
    return TruncatedChain(_graph(name, depth), horizon)


# ---------------------------------------------------------------------------
# hand-derived Green functions
# ---------------------------------------------------------------------------


def test_single_branch_one_level():
    c = _chain("single", 1)
    g = c.graph
    assert c.integrity() == {"exact": True, "interior": 1, "absorbing": 1}
    assert c.green_entry(g.root, g.root) == pytest.approx(1.0, abs=1e-12)
    assert c.hitting().tolist() == pytest.approx([1.0])


def test_single_branch_two_levels():
    c = _chain("single", 2)
    g = c.graph
    v = int(g.levels[1][0])
    G = [[c.green_entry(a, b) for b in (g.root, v)] for a in (g.root, v)]
    assert G[0] == pytest.approx([2.0, 2.0], abs=1e-12)
    assert G[1] == pytest.approx([1.0, 2.0], abs=1e-12)
    assert c.reversibility_defect() < 1e-12


def test_single_branch_all_mass_on_unique_leaf():
    c = _chain("single", 3)
    sim = c.simulate(200, 5)
    assert sim["counts"].tolist() == [200]
    assert sim["censored"] == 0


def test_binary_tree_small_green():
    c = _chain("cantor", 2)
    g = c.graph
    c0 = int(g.levels[1][0])
    assert c.green_entry(g.root, g.root) == pytest.approx(1.5, abs=1e-12)
    assert c.green_entry(c0, g.root) == pytest.approx(0.5, abs=1e-12)
    assert c.green_entry(g.root, c0) == pytest.approx(0.75, abs=1e-12)
    assert c.hitting().tolist() == pytest.approx([0.25] * 4, abs=1e-12)


def test_interval_small_green():
    # Horizontal edge between the two level-1 cells changes degrees but the
    # escape probability per excursion stays 1/3, hence the same diagonal.
    c = _chain("unit_interval", 2)
    g = c.graph
    assert c.green_entry(g.root, g.root) == pytest.approx(1.5, abs=1e-12)
    assert c.hitting().tolist() == pytest.approx([0.25] * 4, abs=1e-12)
    assert c.reversibility_defect() < 1e-12


def test_kernel_hand_values():
    c = _chain("cantor", 2)
    g = c.graph
    c0, c1 = (int(v) for v in g.levels[1])
    assert martin_kernel(c, c0, c1) == pytest.approx(1 / 3, abs=1e-12)
    assert naim_kernel(c, c0, c1) == pytest.approx(2 / 3, abs=1e-12)
    K = boundary_martin(c, c0)
    assert K.tolist() == pytest.approx([5 / 3, 5 / 3, 1 / 3, 1 / 3], abs=1e-12)


def test_martin_kernel_at_base_is_one():
    c = _chain("cantor", 4)
    g = c.graph
    for y in list(g.levels[1]) + list(g.levels[3][:4]):
        assert martin_kernel(c, g.root, int(y)) == pytest.approx(1.0, abs=1e-12)


def test_naim_symmetry_exact():
    c = _chain("unit_interval", 5)
    g = c.graph
    pairs = [(int(g.levels[2][0]), int(g.levels[3][5])),
             (int(g.levels[1][0]), int(g.levels[4][9])),
             (int(g.levels[3][2]), int(g.levels[3][7]))]
    for x, y in pairs:
        assert naim_kernel(c, x, y) == pytest.approx(naim_kernel(c, y, x),
                                                     rel=1e-10)


def test_martin_kernel_harmonic_off_singularity():
    c = _chain("cantor", 8)
    y = int(c.graph.levels[1][0])
    assert martin_harmonic_defect(c, y) < 1e-10
    c2 = _chain("unit_interval", 6)
    y2 = int(c2.graph.levels[3][4])
    assert martin_harmonic_defect(c2, y2) < 1e-10


# ---------------------------------------------------------------------------
# solver invariants
# ---------------------------------------------------------------------------


def test_green_matrix_invariants():
    G = _chain("unit_interval", 5).green()
    assert (G >= 0).all()
    assert (np.diag(G) >= 1.0 - 1e-12).all()


def test_reversibility_identity():
    assert _chain("cantor", 6).reversibility_defect() < 1e-10
    assert _chain("unit_interval", 6).reversibility_defect() < 1e-10


def test_integrity_reports_exact():
    rep = _chain("unit_interval", 6).integrity()
    assert rep["exact"] is True
    assert rep["interior"] == 2 ** 6 - 1
    assert rep["absorbing"] == 2 ** 6


def test_hitting_masses_aggregate():
    c = _chain("cantor", 6)
    agg = aggregate_to_level(c, c.hitting(), 1)
    assert sorted(agg.values()) == pytest.approx([0.5, 0.5], abs=1e-12)


def test_harmonic_equals_natural_on_cantor():
    rep = harmonic_vs_natural(_chain("cantor", 6), 4)
    assert rep["tv"] < 1e-12
    assert len(rep["harmonic"]) == 16


def test_harmonic_uniform_on_interval_measured():
    # Measured fact: with the full horizontal structure the dyadic-interval
    # walk still hits the bottom level uniformly (machine precision).
    rep = harmonic_vs_natural(_chain("unit_interval", 6), 3)
    assert rep["tv"] < 1e-12


def test_harmonic_profile_modes():
    c = _chain("cantor", 6)
    solve = harmonic_profile(c)
    assert [row["level"] for row in solve["rows"]] == [1, 2, 3, 4]
    assert all(row["tv"] < 1e-12 for row in solve["rows"])
    mc = harmonic_profile(c, n_walks=100_000, seed=3)
    assert mc["mode"] == "simulate"
    assert mc["censored"] == 0
    assert all(row["tv"] < 0.02 for row in mc["rows"])
    with pytest.raises(UnsupportedOperationError):
        harmonic_profile(_chain("cantor", 2))


def test_horizon_stability():
    rep = horizon_comparison(_graph("cantor", 8), 4, 6)
    assert rep["tv"] < 1e-12
    # Green entries deep in the tree keep gaining return paths as the
    # horizon recedes; the hitting measure converges much faster.
    assert rep["green_rel_change"] == pytest.approx(0.25, abs=0.01)
    assert horizon_comparison(_graph("unit_interval", 6), 2, 4)["tv"] < 1e-12


def test_quotient_chain_and_aggregation_refusal():
    gq = quotient_graph(_graph("golden", 5))
    c = TruncatedChain(gq)
    assert c.integrity() == {"exact": True, "interior": 26, "absorbing": 20}
    nu = c.hitting()
    assert nu.sum() == pytest.approx(1.0, abs=1e-9)
    assert nu.min() == pytest.approx(0.03747997419931726, abs=1e-9)
    with pytest.raises(UnsupportedOperationError):
        harmonic_vs_natural(c, 2)


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def test_simulate_deterministic_counts():
    c = _chain("cantor", 2)
    a = c.simulate(1000, 7)
    assert a["counts"].tolist() == [273, 256, 234, 237]
    assert a["censored"] == 0
    assert (a["counts"] == c.simulate(1000, 7)["counts"]).all()
    assert (a["counts"] != c.simulate(1000, 8)["counts"]).any()


def test_simulate_matches_solver():
    rep = compare_mc_solver(_chain("cantor", 6), 200_000, 20260825)
    assert rep["max_z"] < 3.5
    assert rep["tv"] < 0.01
    assert rep["censored"] == 0


def test_interval_mc_tv_bound():
    rep = compare_mc_solver(_chain("unit_interval", 5), 100_000, 11)
    assert rep["tv"] <= 0.02


def test_simulate_censoring_reported():
    sim = _chain("cantor", 2).simulate(10, 0, step_cap=1)
    assert sim["censored"] == 10
    assert sim["counts"].sum() == 0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_simulate_conserves_walks(seed):
    c = _chain("unit_interval", 3)
    sim = c.simulate(500, seed)
    assert sim["counts"].sum() + sim["censored"] == 500
    assert (sim["counts"] >= 0).all()


# ---------------------------------------------------------------------------
# kernels and regressions
# ---------------------------------------------------------------------------


def test_growth_rate_binary():
    assert default_growth_rate(_chain("cantor", 6)) == pytest.approx(
        np.log(2), abs=1e-12)


def test_martin_regression_cantor():
    rep = martin_regression(_chain("cantor", 8))
    assert rep["pairs"] == 16 * 256
    assert rep["slope"] == pytest.approx(0.9190775611110712, abs=1e-9)
    assert 0.85 <= rep["slope"] <= 1.15
    assert rep["r2"] > 0.99


def test_naim_regression_cantor():
    rep = naim_regression(_chain("cantor", 8))
    assert rep["pairs"] == 120
    assert rep["slope"] == pytest.approx(0.886824544750737, abs=1e-9)
    assert 0.85 <= rep["slope"] <= 1.15
    assert rep["r2"] > 0.99
    # alpha = ln 2 / ln 3 is the similarity dimension of the middle-thirds
    # system; the Euclidean-distance fit lands near but below the graph fit.
    assert rep["alpha"] == pytest.approx(np.log(2) / np.log(3), abs=1e-12)
    assert rep["euclid_slope"] == pytest.approx(0.8396200886863714, abs=1e-9)
    assert rep["euclid_excluded"] == 0


def test_martin_regression_interval_documented_rate():
    # Horizontal edges shift the effective rate below the branching rate:
    # the fit stays strongly log-linear but the slope against ln 2 drops.
    rep = martin_regression(_chain("unit_interval", 8))
    assert rep["slope"] == pytest.approx(0.7499268531031511, abs=1e-9)
    assert rep["r2"] > 0.95


def test_regression_level_bounds():
    with pytest.raises(UnsupportedOperationError):
        martin_regression(_chain("cantor", 4), level=4)
    with pytest.raises(UnsupportedOperationError):
        naim_regression(_chain("cantor", 4), level=0)


# ---------------------------------------------------------------------------
# error paths
# ---------------------------------------------------------------------------


def test_horizon_bounds():
    g = _graph("cantor", 3)
    with pytest.raises(UnsupportedOperationError):
        TruncatedChain(g, 0)
    with pytest.raises(UnsupportedOperationError):
        TruncatedChain(g, 4)


def test_state_budget():
    with pytest.raises(BudgetExceededError):
        TruncatedChain(_graph("cantor", 6), max_states=10)


def test_interior_only_accessors():
    c = _chain("cantor", 3)
    g = c.graph
    bottom = int(g.levels[3][0])
    with pytest.raises(UnsupportedOperationError):
        c.hitting(bottom)
    with pytest.raises(UnsupportedOperationError):
        c.simulate(10, 0, start=bottom)
    with pytest.raises(UnsupportedOperationError):
        c.green_entry(g.root, bottom)
