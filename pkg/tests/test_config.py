"""Tests for run-config parsing and graph construction from configs."""

import math

import pytest

from augtree import ConfigError, build_graph, preset
from augtree.config import (
    RunConfig,
    apply_overrides,
    build_from_config,
    load_config,
    parse_config,
)
from augtree.graphio import graphs_equal

MINIMAL = "format = run/1\nbuilder = ifs\npreset = cantor\n"


def _cfg(text, **kw):
    return parse_config(text, source="test.cfg", **kw)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def test_minimal_config_defaults():
    cfg = _cfg(MINIMAL)
    assert cfg.builder == "ifs"
    assert cfg.preset_name == "cantor"
    assert cfg.depth == 4
    assert cfg.quotient is False
    assert cfg.horizontal is True
    assert cfg.analyses == ("metric", "separation", "lipschitz", "walk")
    assert cfg.seed == 0


def test_full_config_round():
    cfg = _cfg(
        "format = run/1\n"
        "# comment line\n"
        "builder = ifs\n"
        "preset = unit_interval   # trailing comment\n"
        "depth = 6\n"
        "kappa = 0.6\n"
        "epsilon_net = 0.01\n"
        "quotient = true\n"
        "slanted = true\n"
        "horizontal = false\n"
        "budget = 123456\n"
        "extra_edges = none\n"
        "analyze = metric,walk\n"
        "metric = delta\n"
        "a = 0.3\n"
        "samples = 500\n"
        "trials = 1000\n"
        "iso_depth = 3\n"
        "horizon = 5\n"
        "walks = 2000\n"
        "pairs = 50\n"
        "seed = 7\n"
        "threads = 2\n")
    assert cfg.depth == 6
    assert cfg.kappa == 0.6
    assert cfg.epsilon_net == 0.01
    assert cfg.quotient and cfg.slanted and not cfg.horizontal
    assert cfg.budget == 123456
    assert cfg.extra_edges is None
    assert cfg.analyses == ("metric", "walk")
    assert cfg.metric == "delta"
    assert cfg.a == 0.3
    assert (cfg.samples, cfg.trials, cfg.iso_depth) == (500, 1000, 3)
    assert (cfg.horizon, cfg.walks, cfg.pairs) == (5, 2000, 50)
    assert cfg.seed == 7 and cfg.threads == 2


def test_exact_scalar_values_in_floats():
    cfg = _cfg(MINIMAL + "kappa = 1/3\n")
    assert cfg.kappa == pytest.approx(1 / 3, abs=1e-15)


@pytest.mark.parametrize("line,fragment", [
    ("format = run/2\n" + MINIMAL[14:], "unsupported schema"),
    (MINIMAL + "builder = magic\n", "builder must be one of"),
    (MINIMAL + "preset = nosuch\n", "unknown preset"),
    (MINIMAL + "depth = 0\n", "below the minimum"),
    (MINIMAL + "depth = three\n", "expected an integer"),
    (MINIMAL + "kappa = -1\n", "must be positive"),
    (MINIMAL + "quotient = maybe\n", "expected a boolean"),
    (MINIMAL + "analyze = metric,sorcery\n", "unknown analyses"),
    (MINIMAL + "metric = volume\n", "metric must be one of"),
    (MINIMAL + "mystery = 1\n", "unknown key"),
    (MINIMAL + "depth\n", "expected key = value"),
    (MINIMAL + "depth =\n", "empty key or value"),
])
def test_bad_configs_raise_with_location(line, fragment):
    with pytest.raises(ConfigError) as exc:
        _cfg(line)
    assert fragment in str(exc.value)
    assert "test.cfg" in str(exc.value)


def test_missing_format_line():
    with pytest.raises(ConfigError, match="format = run/1"):
        _cfg("builder = ifs\npreset = cantor\n")


def test_error_reports_line_number():
    with pytest.raises(ConfigError, match="test.cfg:4"):
        _cfg("format = run/1\nbuilder = ifs\npreset = cantor\ndepth = zero\n")


def test_ifs_builder_needs_exactly_one_source():
    with pytest.raises(ConfigError, match="exactly one"):
        _cfg("format = run/1\nbuilder = ifs\n")
    with pytest.raises(ConfigError, match="exactly one"):
        _cfg(MINIMAL + "ifs_text = format = ifs/1; dim = 1; map = 1/2 | 1 | 0\n")


def test_moran_builder_needs_stage_file():
    with pytest.raises(ConfigError, match="moran"):
        _cfg("format = run/1\nbuilder = moran\n")


def test_slanted_and_horizontal_are_ifs_only(tmp_path):
    stages = tmp_path / "stages.txt"
    stages.write_text("1/2 : 0 1/2\n")
    base = f"format = run/1\nbuilder = moran\nmoran = {stages.name}\n"
    with pytest.raises(ConfigError, match="slanted"):
        _cfg(base + "slanted = true\n", base_dir=tmp_path)
    with pytest.raises(ConfigError, match="horizontal"):
        _cfg(base + "horizontal = false\n", base_dir=tmp_path)


def test_missing_referenced_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        _cfg("format = run/1\nbuilder = ifs\nifs = nope.ifs\n",
             base_dir=tmp_path)


def test_load_config_resolves_paths_against_config_dir(tmp_path):
    (tmp_path / "sys.ifs").write_text(
        "format = ifs/1\ndim = 1\nmap = 1/2 | 1 | 0\nmap = 1/2 | 1 | 1/2\n")
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("format = run/1\nbuilder = ifs\nifs = sys.ifs\n"
                        "out = artifacts\n")
    cfg = load_config(cfg_path)
    assert cfg.ifs_path == (tmp_path / "sys.ifs").resolve()
    assert cfg.out == (tmp_path / "artifacts").resolve()


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.cfg")


# ---------------------------------------------------------------------------
# overrides
# ---------------------------------------------------------------------------


def test_overrides_beat_config_and_none_is_untouched():
    cfg = _cfg(MINIMAL + "depth = 6\nseed = 3\n")
    apply_overrides(cfg, depth=8, seed=None, quotient=True)
    assert cfg.depth == 8
    assert cfg.seed == 3
    assert cfg.quotient is True


def test_unknown_override_rejected():
    with pytest.raises(ConfigError, match="unknown override"):
        apply_overrides(_cfg(MINIMAL), warp=9)


# ---------------------------------------------------------------------------
# building
# ---------------------------------------------------------------------------


def test_build_preset_matches_direct_call():
    cfg = _cfg(MINIMAL + "depth = 4\n")
    assert graphs_equal(build_from_config(cfg), build_graph(preset("cantor"), 4))


def test_build_from_ifs_file(tmp_path):
    (tmp_path / "halves.ifs").write_text(
        "format = ifs/1\ndim = 1\nmap = 1/2 | 1 | 0\nmap = 1/2 | 1 | 1/2\n")
    cfg = _cfg("format = run/1\nbuilder = ifs\nifs = halves.ifs\ndepth = 3\n",
               base_dir=tmp_path)
    g = build_from_config(cfg)
    assert graphs_equal(g, build_graph(preset("unit_interval"), 3))


def test_build_from_inline_text():
    cfg = _cfg("format = run/1\nbuilder = ifs\ndepth = 3\n"
               "ifs_text = format = ifs/1; dim = 1; "
               "map = 1/3 | 1 | 0; map = 1/3 | 1 | 2/3\n")
    g = build_from_config(cfg)
    assert graphs_equal(g, build_graph(preset("cantor"), 3))


def test_build_quotient():
    cfg = _cfg("format = run/1\nbuilder = ifs\npreset = golden\n"
               "depth = 5\nquotient = true\n")
    g = build_from_config(cfg)
    assert g.is_quotient
    # exact overlaps collapse vertices: strictly fewer than 2^5 leaves
    assert len(g.levels[5]) < 32


def test_build_moran(tmp_path):
    stages = tmp_path / "stages.txt"
    stages.write_text("# alternating stages\n1/2 : 0 1/2\n1/3 : 0 2/3\n")
    cfg = _cfg(f"format = run/1\nbuilder = moran\nmoran = {stages.name}\n"
               "depth = 3\n", base_dir=tmp_path)
    g = build_from_config(cfg)
    assert g.kind == "moran"
    assert g.n == 29


def test_build_dyadic():
    cfg = _cfg("format = run/1\nbuilder = dyadic\npreset = cantor\n"
               "depth = 4\n")
    g = build_from_config(cfg)
    assert g.kind == "dyadic"
    assert [len(l) for l in g.levels] == [1, 2, 4, 6, 10]


def test_build_wrap_extra_edges_close_each_level_into_a_cycle():
    cfg = _cfg("format = run/1\nbuilder = ifs\npreset = unit_interval\n"
               "depth = 4\nextra_edges = wrap\n")
    g = build_from_config(cfg)
    # a cycle on 2^n vertices has 2^n edges; the path had 2^n - 1.  (At
    # level 1 the wrap pair 0:1 is already the lone horizontal edge.)
    for n in range(2, 5):
        ids = set(int(i) for i in g.levels[n])
        count = sum(1 for u, v, s in g.eh.pairs() if u in ids and v in ids)
        assert count == 2 ** n
        deg = {i: 0 for i in ids}
        for u, v, s in g.eh.pairs():
            if u in ids:
                deg[u] += 1
                deg[v] += 1
        assert set(deg.values()) == {2}


def test_build_explicit_extra_edge_words():
    cfg = _cfg("format = run/1\nbuilder = ifs\npreset = cantor\ndepth = 3\n"
               "extra_edges = 00:11\n")
    g = build_from_config(cfg)
    plain = build_graph(preset("cantor"), 3)
    assert len(g.eh) == len(plain.eh) + 1


def test_extra_edges_rejected_off_ifs(tmp_path):
    stages = tmp_path / "stages.txt"
    stages.write_text("1/2 : 0 1/2\n")
    cfg = _cfg(f"format = run/1\nbuilder = moran\nmoran = {stages.name}\n"
               "extra_edges = wrap\n", base_dir=tmp_path)
    with pytest.raises(ConfigError, match="extra_edges"):
        build_from_config(cfg)


def test_build_horizontal_false_gives_eh_free_diamond():
    cfg = _cfg("format = run/1\nbuilder = ifs\npreset = unit_interval\n"
               "depth = 4\nkappa = 0.6\nslanted = true\nhorizontal = false\n")
    g = build_from_config(cfg)
    assert len(g.eh) == 0
    assert g.es is not None and len(g.es) > 0


def test_build_respects_budget():
    from augtree import BudgetExceededError
    cfg = _cfg(MINIMAL + "depth = 12\nbudget = 100\n")
    with pytest.raises(BudgetExceededError):
        build_from_config(cfg)
