"""Classification of horizontal components and their substitution structure.

For an equicontractive similitude system, the horizontal components of one
level map onto components of the next: each component's cells split into
child cells whose components lie inside the parent component's footprint
(their parents form a connected set by the parent axiom).  When component
shapes recur, the process is a substitution: finitely many component classes
and an integer incidence matrix counting, per class, the child components of
each class.  That matrix is the object the Lipschitz-equivalence analysis
consumes; its Perron data and primitivity are summarized separately.

Two components belong to the same class when their probe graphs — the
component plus `probe_depth` generations of descendants, with vertical and
horizontal edges and vertices labeled by level offset — are isomorphic.
Isomorphism is decided by a Weisfeiler-Lehman hash prefilter confirmed with
an exact matcher, and the classification is re-run one generation deeper to
check it has stabilized.
"""

from __future__ import annotations

from collections import Counter

import networkx as nx
import numpy as np

from .errors import (ClassificationUnstableError, InternalError,
                     UnsupportedOperationError)
from .trees import AugmentedGraph


def _require_equicontractive_ifs(g: AugmentedGraph):
    if g.kind != "ifs" or g.spec is None:
        raise UnsupportedOperationError(
            f"component classification needs an IFS graph, not {g.kind!r}")
    if g.is_quotient:
        raise UnsupportedOperationError(
            "classification runs on the raw tree, not a quotient")
    if g.spec.kind != "similitude" or not g.spec.equicontractive:
        raise UnsupportedOperationError(
            "component classification assumes one common contraction ratio")


def horizontal_components(g: AugmentedGraph, level: int, *,
                          certified_only: bool = False) -> list[tuple[int, ...]]:
    """Connected components of one level under horizontal edges, sorted."""
    adj = g.eh.adjacency(certified_only=certified_only)
    seen: set[int] = set()
    comps = []
    for i in g.levels[level]:
        if i in seen:
            continue
        stack = [i]
        seen.add(i)
        comp = []
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj.get(u, ()):
                if w not in seen and g.level_of[w] == level:
                    seen.add(w)
                    stack.append(w)
        comps.append(tuple(sorted(comp)))
    comps.sort()
    return comps


def _probe_graph(g: AugmentedGraph, comp, probe_depth: int,
                 certified_only: bool):
    """Component plus `probe_depth` generations below, labeled by offset."""
    G = nx.Graph()
    frontier = list(comp)
    members: set[int] = set(comp)
    for v in comp:
        G.add_node(v, off=0)
    for off in range(1, probe_depth + 1):
        nxt = []
        for v in frontier:
            for c in g.children(v):
                G.add_node(c, off=off)
                G.add_edge(v, c)
                members.add(c)
                nxt.append(c)
        frontier = nxt
    for u, v, s in g.eh.pairs(certified_only):
        if u in members and v in members:
            G.add_edge(u, v)
    return G


def _signature(G):
    offs = Counter(d["off"] for _, d in G.nodes(data=True))
    return (tuple(sorted(offs.items())), G.number_of_edges())


def _off_match(a, b):
    return a["off"] == b["off"]


def classify_components(g: AugmentedGraph, *, probe_depth: int = 2,
                        certified_only: bool = False) -> dict:
    """Group the components of levels 1..depth-probe_depth into classes.

    Returns the per-level component lists, the class of each component, and
    one representative probe graph per class.
    """
    _require_equicontractive_ifs(g)
    top = g.depth - probe_depth
    if top < 1:
        raise UnsupportedOperationError(
            f"depth {g.depth} leaves no room for probe depth {probe_depth}")
    comps = {n: horizontal_components(g, n, certified_only=certified_only)
             for n in range(1, top + 1)}
    class_of: dict[tuple[int, int], int] = {}
    reps: list[dict] = []
    buckets: dict[tuple, list[int]] = {}
    for n in range(1, top + 1):
        for ci, comp in enumerate(comps[n]):
            P = _probe_graph(g, comp, probe_depth, certified_only)
            key = (_signature(P),
                   nx.weisfeiler_lehman_graph_hash(P, node_attr="off"))
            label = None
            for cand in buckets.get(key, ()):
                if nx.is_isomorphic(P, reps[cand]["probe"],
                                    node_match=_off_match):
                    label = cand
                    break
            if label is None:
                label = len(reps)
                reps.append({"level": n, "component": comp, "probe": P,
                             "size": len(comp)})
                buckets.setdefault(key, []).append(label)
            class_of[(n, ci)] = label
    return {
        "probe_depth": probe_depth,
        "top_level": top,
        "components": comps,
        "class_of": class_of,
        "class_count": len(reps),
        "class_sizes": [r["size"] for r in reps],
        "representatives": [(r["level"], r["component"]) for r in reps],
        "_reps": reps,
    }


def _parent_component_index(g, comps_prev, child_comp, level):
    """Index of the level-(level-1) component holding the child's parents."""
    where = {v: k for k, comp in enumerate(comps_prev) for v in comp}
    owners = {where[p] for v in child_comp for p in g.parents[v]}
    if len(owners) != 1:
        raise InternalError(
            f"child component {child_comp} has parents in {len(owners)} "
            "components; the parent axiom should forbid this")
    return owners.pop()


def incidence_matrix(g: AugmentedGraph, classification: dict | None = None, *,
                     probe_depth: int = 2,
                     certified_only: bool = False) -> dict:
    """Counts of child-component classes produced by each class.

    Every representative of a class with enough depth below it yields a row;
    all of a class's rows must agree, otherwise the classification does not
    determine the substitution and ClassificationUnstableError is raised.
    Classes whose representatives all sit too deep get no row and the matrix
    is marked incomplete.
    """
    cls = classification
    if cls is None:
        cls = classify_components(g, probe_depth=probe_depth,
                                  certified_only=certified_only)
    comps = cls["components"]
    class_of = cls["class_of"]
    k = cls["class_count"]
    top = cls["top_level"]

    rows: dict[int, tuple[int, ...]] = {}
    witnesses: dict[int, int] = {}
    for n in range(1, top):  # children at n+1 must be classified too
        child_owner: dict[int, list[int]] = {}
        for cj, child in enumerate(comps[n + 1]):
            pi = _parent_component_index(g, comps[n], child, n + 1)
            child_owner.setdefault(pi, []).append(cj)
        for ci in range(len(comps[n])):
            counts = [0] * k
            for cj in child_owner.get(ci, ()):
                counts[class_of[(n + 1, cj)]] += 1
            row = tuple(counts)
            label = class_of[(n, ci)]
            if label in rows:
                if rows[label] != row:
                    raise ClassificationUnstableError(
                        f"class {label} has conflicting child rows "
                        f"{rows[label]} and {row} (level {n}, component {ci}); "
                        "a deeper probe may separate the shapes")
                witnesses[label] += 1
            else:
                rows[label] = row
                witnesses[label] = 1

    complete = len(rows) == k
    matrix = None
    if complete:
        matrix = np.array([rows[t] for t in range(k)], dtype=np.int64)
    return {
        "rows": rows,
        "row_witnesses": witnesses,
        "matrix": matrix,
        "complete": complete,
        "class_count": k,
    }


def _partitions_agree(cls_a: dict, cls_b: dict) -> bool:
    """Same grouping of the components both classifications cover."""
    common = [key for key in cls_b["class_of"]]
    fwd: dict[int, int] = {}
    back: dict[int, int] = {}
    for key in common:
        a = cls_a["class_of"][key]
        b = cls_b["class_of"][key]
        if fwd.setdefault(a, b) != b or back.setdefault(b, a) != a:
            return False
    return True


def simplicity_report(matrix: np.ndarray) -> dict:
    """Perron data and regularity of the substitution matrix."""
    A = np.asarray(matrix, dtype=np.int64)
    k = A.shape[0]
    if A.shape != (k, k) or (A < 0).any():
        raise UnsupportedOperationError("need a square nonnegative matrix")
    D = nx.DiGraph()
    D.add_nodes_from(range(k))
    for i in range(k):
        for j in range(k):
            if A[i, j]:
                D.add_edge(i, j)
    irreducible = nx.is_strongly_connected(D)
    primitive = False
    if irreducible:
        # Wielandt: a primitive matrix has a positive power by (k-1)^2 + 1
        P = np.eye(k, dtype=object)
        bound = (k - 1) ** 2 + 1
        for _ in range(bound):
            P = P @ A
            if (np.asarray(P, dtype=float) > 0).all():
                primitive = True
                break
    vals, vecs = np.linalg.eig(A.astype(float))
    idx = int(np.argmax(np.abs(vals)))
    perron = float(np.real(vals[idx]))
    right = np.real(vecs[:, idx])
    if right.sum() < 0:
        right = -right
    right = right / right.sum()
    return {
        "irreducible": irreducible,
        "primitive": primitive,
        "perron_root": perron,
        "perron_right": right,
        "row_sums": A.sum(axis=1).tolist(),
        "size": k,
    }


def lipschitz_report(g: AugmentedGraph, *, probe_depth: int = 2,
                     verify: bool = True,
                     certified_only: bool = False) -> dict:
    """Classification, stability check, incidence, and matrix summary.

    With `verify`, the classification is recomputed with a one-deeper probe;
    if the deeper view splits or merges any classes on the levels both cover,
    ClassificationUnstableError is raised rather than reporting a matrix that
    depends on the probe depth.
    """
    cls = classify_components(g, probe_depth=probe_depth,
                              certified_only=certified_only)
    if verify:
        deeper = classify_components(g, probe_depth=probe_depth + 1,
                                     certified_only=certified_only)
        if not _partitions_agree(cls, deeper):
            raise ClassificationUnstableError(
                f"probe depth {probe_depth} and {probe_depth + 1} disagree; "
                "classes have not stabilized")
    inc = incidence_matrix(g, cls, certified_only=certified_only)
    out = {
        "probe_depth": probe_depth,
        "verified": verify,
        "top_level": cls["top_level"],
        "component_counts": {n: len(c) for n, c in cls["components"].items()},
        "class_count": cls["class_count"],
        "class_sizes": cls["class_sizes"],
        "class_of": cls["class_of"],
        "representatives": cls["representatives"],
        "incidence_rows": inc["rows"],
        "row_witnesses": inc["row_witnesses"],
        "incidence": inc["matrix"],
        "incidence_complete": inc["complete"],
        "uncertain_edges": g.eh.n_uncertain,
        "heuristic": bool(g.flags.get("heuristic", False)) or g.eh.n_uncertain > 0,
    }
    if inc["complete"]:
        out["simplicity"] = simplicity_report(inc["matrix"])
    return out
