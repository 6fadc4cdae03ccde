"""Tests for serialization: determinism, round-trips, DOT and CSV shape."""

import json
import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augtree import (
    ConfigError,
    TruncatedChain,
    build_graph,
    delta_profile,
    graph_from_parts,
    holder_report,
    horizontal_run_profile,
    lipschitz_report,
    preset,
    quotient_graph,
    separation_verdict,
)
from augtree import graphio as IO


@lru_cache(maxsize=None)
def _graph(name, depth, **kw):
    return build_graph(preset(name), depth, **kw)


def _fixture():
    return graph_from_parts(
        [[("r",)], [("a",), ("b",)]],
        {("a",): ("r",), ("b",): ("r",)},
        [(("a",), ("b",))])


# ---------------------------------------------------------------------------
# deterministic JSON text
# ---------------------------------------------------------------------------


def test_float_formatting():
    assert IO.json_text({"x": 0.1}) == '{"x":0.10000000000000001}\n'
    assert IO.json_text(1.0) == "1\n"
    assert IO.json_text(float("inf")) == '"inf"\n'
    assert IO.json_text(float("-inf")) == '"-inf"\n'
    assert IO.json_text(float("nan")) == '"nan"\n'


def test_json_sorted_keys_and_types():
    txt = IO.json_text({"b": [1, (2, 3)], "a": {"y": True, "x": None}})
    assert txt == '{"a":{"x":null,"y":true},"b":[1,[2,3]]}\n'
    assert IO.json_text(np.float64(0.5)) == "0.5\n"
    assert IO.json_text(np.int64(7)) == "7\n"
    assert IO.json_text(np.array([1, 2])) == "[1,2]\n"


def test_json_rejects_bad_payloads():
    with pytest.raises(ConfigError):
        IO.json_text({1: "non-string key"})
    with pytest.raises(ConfigError):
        IO.json_text({"x": object()})


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_seventeen_digits_round_trip(x):
    assert float(format(x, ".17g")) == x


# ---------------------------------------------------------------------------
# graph round-trip
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("tag", ["cantor", "unit_interval", "sierpinski",
                                 "golden"])
def test_graph_roundtrip(tag, tmp_path):
    g = _graph(tag, 4)
    p = IO.write_graph_json(tmp_path / "g.json", g)
    g2 = IO.read_graph_json(p)
    assert IO.graphs_equal(g, g2)
    assert g2.flags["imported"] is True
    assert g2.depth == g.depth and g2.n == g.n


def test_quotient_roundtrip_and_walkability(tmp_path):
    gq = quotient_graph(_graph("golden", 5))
    p = IO.write_graph_json(tmp_path / "q.json", gq)
    g2 = IO.read_graph_json(p)
    assert IO.graphs_equal(gq, g2)
    assert g2.is_quotient
    nu = TruncatedChain(g2).hitting()
    assert nu.sum() == pytest.approx(1.0, abs=1e-9)


def test_fixture_roundtrip(tmp_path):
    g = _fixture()
    assert IO.graphs_equal(g, IO.read_graph_json(
        IO.write_graph_json(tmp_path / "f.json", g)))


def test_uncertain_statuses_survive(tmp_path):
    g = build_graph(preset("golden"), 4, epsilon_net=0.4)
    assert g.eh.n_uncertain == 29
    g2 = IO.read_graph_json(IO.write_graph_json(tmp_path / "u.json", g))
    assert g2.eh.n_uncertain == 29
    assert IO.graphs_equal(g, g2)


def test_export_bytes_deterministic(tmp_path):
    a = IO.json_text(IO.graph_to_json(build_graph(preset("golden"), 5)))
    b = IO.json_text(IO.graph_to_json(build_graph(preset("golden"), 5)))
    assert a == b
    # and a written file re-serializes to the same bytes after import
    p = tmp_path / "g.json"
    p.write_text(a, encoding="ascii")
    g2 = IO.read_graph_json(p)
    d2 = IO.graph_to_json(g2)
    d2["flags"].pop("imported")
    assert IO.json_text(d2) == a


def test_import_validation():
    with pytest.raises(ConfigError):
        IO.graph_from_json({"schema": "bogus/9"})
    d = IO.graph_to_json(_fixture())
    bad = dict(d)
    bad["levels"] = [[0], [1]]  # drops vertex 2
    with pytest.raises(ConfigError):
        IO.graph_from_json(bad)
    bad2 = dict(d)
    bad2["parents"] = bad2["parents"][:-1]
    with pytest.raises(ConfigError):
        IO.graph_from_json(bad2)


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------


def test_dot_structure():
    g = _graph("golden", 3)
    dot = IO.graph_to_dot(g)
    assert dot.startswith("graph augmented_tree {")
    assert dot.count("rank=same") == g.depth + 1
    n_ev = sum(len(ps) for ps in g.parents)
    n_eh = len(g.eh)
    assert dot.count(" -- ") == n_ev + n_eh
    assert dot.count("style=dashed") == n_eh
    assert dot.count("label=") == g.n


def test_dot_extra_edges_dotted():
    g = build_graph(preset("unit_interval"), 3, kappa=0.6, slanted=True)
    dot = IO.graph_to_dot(g)
    assert dot.count("style=dotted") == len(g.es)


def test_dot_max_level():
    g = _graph("cantor", 4)
    dot = IO.graph_to_dot(g, max_level=2)
    assert dot.count("label=") == 1 + 2 + 4


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def test_degree_csv_row_per_vertex(tmp_path):
    g = _graph("golden", 4)
    txt = IO.write_degree_csv(tmp_path / "deg.csv", g).read_text()
    lines = txt.splitlines()
    assert lines[0] == "vertex,level,word,deg_v,deg_h,deg_s,deg_total"
    assert len(lines) - 1 == g.n
    deg_v, deg_h, deg_s = g.degree_arrays()
    row5 = lines[6].split(",")
    v = int(row5[0])
    assert int(row5[6]) == int(deg_v[v] + deg_h[v] + deg_s[v])


def test_csv_quoting():
    txt = IO.csv_text(["a", "b"], [("x,y", 'say "hi"'), (1.5, None)])
    assert txt.splitlines()[1] == '"x,y","say ""hi"""'
    assert txt.splitlines()[2] == "1.5,None"


def test_l_profile_csv(tmp_path):
    prof = horizontal_run_profile(_graph("unit_interval", 5))
    txt = IO.write_l_profile_csv(tmp_path / "L.csv", prof).read_text()
    assert txt.splitlines()[0] == "level,L"
    assert [int(r.split(",")[1]) for r in txt.splitlines()[1:]] == prof


def test_holder_csv(tmp_path):
    reports = [(d, holder_report(_graph("cantor", d), d)) for d in (4, 5)]
    txt = IO.write_holder_csv(tmp_path / "h.csv", reports).read_text()
    lines = txt.splitlines()
    assert lines[0] == "depth,min_ratio,max_ratio,implied_C,excluded_pairs"
    first = lines[1].split(",")
    assert first[0] == "4"
    assert float(first[3]) == pytest.approx(reports[0][1]["implied_C"])
    assert first[4] == "8"


def test_delta_profile_csv(tmp_path):
    deltas = delta_profile(lambda d: _graph("unit_interval", d), [3, 4])
    txt = IO.write_delta_profile_csv(tmp_path / "d.csv", [3, 4],
                                     deltas).read_text()
    assert txt.splitlines()[0] == "depth,delta"
    assert len(txt.splitlines()) == 3


def test_hitting_csv(tmp_path):
    chain = TruncatedChain(_graph("cantor", 4))
    sim = chain.simulate(1000, 1)
    txt = IO.write_hitting_csv(tmp_path / "hit.csv", chain,
                               sim["counts"]).read_text()
    lines = txt.splitlines()
    assert lines[0] == "vertex,word,count,frequency"
    assert len(lines) - 1 == len(chain.absorbing)
    counts = [int(r.split(",")[2]) for r in lines[1:]]
    freqs = [float(r.split(",")[3]) for r in lines[1:]]
    assert sum(counts) == 1000
    assert sum(freqs) == pytest.approx(1.0, abs=1e-9)


def test_kernels_csv(tmp_path):
    chain = TruncatedChain(_graph("cantor", 4))
    txt = IO.write_kernels_csv(tmp_path / "ker.csv", chain).read_text()
    lines = txt.splitlines()
    assert lines[0] == "pair,gromov_product,K,Theta,predicted"
    assert len(lines) - 1 == 6  # 4 level-2 vertices -> 6 pairs
    for row in lines[1:]:
        cells = row.split(",")
        gp = float(cells[1])
        assert float(cells[4]) == pytest.approx(
            math.exp(math.log(2) * 2 * gp), rel=1e-12)


# ---------------------------------------------------------------------------
# report writers
# ---------------------------------------------------------------------------


def test_verdicts_json(tmp_path):
    v = separation_verdict(preset("golden"), 5)
    d = json.loads(IO.write_verdicts_json(tmp_path / "v.json",
                                          v).read_text())
    assert d["schema"] == IO.REPORT_SCHEMA
    assert d["report"] == "separation"
    assert d["osc"] == "fails"
    assert d["coincidence_groups"]


def test_classes_json(tmp_path):
    rep = lipschitz_report(_graph("fifths_touching", 5))
    d = json.loads(IO.write_classes_json(tmp_path / "c.json",
                                         rep).read_text())
    assert d["class_count"] == 3
    assert d["per_level_class_counts"]["1"] == [1, 1, 0]
    assert d["incidence"] == [[1, 1, 1], [1, 1, 0], [1, 1, 2]]
    assert d["simplicity"]["perron_root"] == pytest.approx(3.0)


def test_report_json(tmp_path):
    d = json.loads(IO.write_report_json(
        tmp_path / "r.json",
        {"slopes": {"martin": np.float64(0.9)},
         "levels": np.array([1, 2])}).read_text())
    assert d["report"] == "run"
    assert d["slopes"]["martin"] == pytest.approx(0.9)
    assert d["levels"] == [1, 2]
