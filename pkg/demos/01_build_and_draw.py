#!/usr/bin/env python3
"""Build augmented trees for a few contraction systems and look at them.

A contraction system assigns each word over its alphabet a cell of the
attractor.  The graph has one vertex per word, vertical edges from parent
to child, and horizontal edges between same-level words whose cells come
within kappa * r^n of each other.  This script builds four systems, prints
their shapes, and writes DOT drawings next to the script.
"""

from pathlib import Path

from augtree import build_graph, preset, write_dot
from augtree.separation import degree_profile

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)


def describe(name, depth, **kw):
    g = build_graph(preset(name), depth, **kw)
    print(f"\n{name} (depth {depth})")
    print(f"  vertices {g.n}, horizontal edges {len(g.eh)}"
          f" ({g.eh.n_uncertain} uncertain), kappa {g.kappa:.4f}")
    print(f"  level sizes {[len(l) for l in g.levels]}")
    rows = degree_profile(g)
    print(f"  max degree per level {[r['max_total'] for r in rows]}")
    path = write_dot(OUT / f"{name}.dot", g, max_level=min(depth, 4))
    print(f"  drawing -> {path}")
    return g


# The middle-thirds Cantor system: cells at each level are separated by
# gaps as wide as themselves, so at the default threshold no horizontal
# edge ever forms and the graph is the plain binary coding tree.
describe("cantor", 6)

# The dyadic unit-interval system: adjacent cells touch, so each level is
# a path of horizontal edges.  Degrees stay bounded, which is the desk
# signature of an open-set-condition system.
describe("unit_interval", 6)

# The Sierpinski gasket in the plane: three maps, touching corners, again
# bounded degrees.
describe("sierpinski", 5)

# The golden-ratio system overlaps heavily: words 011 and 100 compose to
# the same map, and horizontal edges pile up.  Compare its degree growth
# with the gasket's flat profile above.
describe("golden", 6)

print("\nRender the drawings with e.g.:  dot -Tpng out/golden.dot -o golden.png")
