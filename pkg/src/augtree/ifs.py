"""Contraction systems on R^d and their symbolic words.

A similitude S(x) = ratio * O x + t (O orthogonal) is stored with exact
parameters when they were given exactly, plus float mirrors for geometry.
Words over the alphabet {0..N-1} index compositions S_w = S_{w_1} ∘ ... ∘ S_{w_k}.

Two composed similitudes can be compared as maps through their fingerprint,
which canonically serializes the affine map (linear part and translation).
Fingerprints of exactly-parameterized maps are decision procedures; float
parameters give grid-rounded fingerprints flagged heuristic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, UnsupportedOperationError
from .exact import (
    Surd,
    is_exact,
    mat_identity,
    mat_is_orthogonal,
    mat_mul,
    mat_vec,
    parse_scalar,
    scalar_key,
)

Word = tuple[int, ...]

EMPTY_WORD: Word = ()


def word_str(w: Word) -> str:
    """Render a word; digits are concatenated for alphabets up to size 10."""
    if not w:
        return "@"
    if max(w) <= 9:
        return "".join(str(c) for c in w)
    return ".".join(str(c) for c in w)


def parse_word(s: str, n_letters: int) -> Word:
    if s in ("@", ""):
        return EMPTY_WORD
    parts = list(s) if "." not in s else s.split(".")
    try:
        w = tuple(int(p) for p in parts)
    except ValueError as e:
        raise ConfigError(f"bad word {s!r}") from e
    for c in w:
        if not 0 <= c < n_letters:
            raise ConfigError(f"letter {c} out of range for {n_letters} maps in {s!r}")
    return w


class MapFingerprint(NamedTuple):
    key: tuple
    heuristic: bool


def _is_scalar(x) -> bool:
    return isinstance(x, (int, float, Fraction, Surd))


def _as_matrix(m, dim: int):
    """Normalize a matrix argument to tuple-of-tuples (exact) or ndarray (float)."""
    if _is_scalar(m) and dim == 1:
        m = ((m,),)
    rows = [(row,) if _is_scalar(row) else tuple(row) for row in m]
    flat = [x for row in rows for x in row]
    if all(is_exact(x) for x in flat):
        return tuple(tuple(Fraction(x) if isinstance(x, int) else x for x in row)
                     for row in rows)
    return np.asarray([[float(x) for x in row] for row in rows], dtype=float)


def _as_vector(v, dim: int):
    if _is_scalar(v) and dim == 1:
        v = (v,)
    v = tuple(v)
    if all(is_exact(x) for x in v):
        return tuple(Fraction(x) if isinstance(x, int) else x for x in v)
    return np.asarray([float(x) for x in v], dtype=float)


_ORTHO_TOL = 1e-9


class SimilitudeMap:
    """S(x) = ratio * O x + t with 0 < ratio <= 1 and O orthogonal."""

    def __init__(self, ratio, orthogonal, translation, *, _check: bool = True):
        t = _as_vector(translation, 1)
        self.dim = len(t)
        O = _as_matrix(orthogonal, self.dim)
        if isinstance(O, np.ndarray):
            if O.shape != (self.dim, self.dim):
                raise ConfigError(f"orthogonal part shape {O.shape} != dim {self.dim}")
        elif len(O) != self.dim or len(O[0]) != self.dim:
            raise ConfigError("orthogonal part does not match translation dimension")

        self.exact = is_exact(ratio) and isinstance(O, tuple) and isinstance(t, tuple)
        self.ratio = Fraction(ratio) if isinstance(ratio, int) else ratio
        self.orthogonal = O
        self.translation = t

        self.ratio_f = float(self.ratio)
        self.orthogonal_f = (np.asarray([[float(x) for x in row] for row in O])
                             if isinstance(O, tuple) else O)
        self.translation_f = (np.asarray([float(x) for x in t])
                              if isinstance(t, tuple) else np.asarray(t, dtype=float))
        self.linear_f = self.ratio_f * self.orthogonal_f

        if _check:
            self._validate()

    def _validate(self):
        if not (0 < self.ratio_f <= 1):
            raise ConfigError(f"contraction ratio {self.ratio_f} outside (0, 1]")
        if self.exact:
            if not mat_is_orthogonal(self.orthogonal):
                raise ConfigError("matrix is not exactly orthogonal")
        else:
            err = np.abs(self.orthogonal_f.T @ self.orthogonal_f
                         - np.eye(self.dim)).max()
            if err > _ORTHO_TOL:
                raise ConfigError(f"matrix fails orthogonality by {err:.2e}")

    # similitudes have exact contraction bounds equal to the ratio
    @property
    def r_bound(self):
        return self.ratio

    R_bound = r_bound

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Image of an (k, dim) array of points."""
        return points @ self.linear_f.T + self.translation_f

    def apply_one(self, x: np.ndarray) -> np.ndarray:
        return self.linear_f @ x + self.translation_f

    def compose(self, other: "SimilitudeMap") -> "SimilitudeMap":
        """self ∘ other."""
        if self.exact and other.exact:
            ratio = self.ratio * other.ratio
            O = mat_mul(self.orthogonal, other.orthogonal)
            rt = tuple(self.ratio * x for x in mat_vec(self.orthogonal, other.translation))
            t = tuple(a + b for a, b in zip(rt, self.translation))
            return SimilitudeMap(ratio, O, t, _check=False)
        return SimilitudeMap(
            self.ratio_f * other.ratio_f,
            self.orthogonal_f @ other.orthogonal_f,
            self.linear_f @ other.translation_f + self.translation_f,
            _check=False,
        )

    def fixed_point(self) -> np.ndarray:
        return np.linalg.solve(np.eye(self.dim) - self.linear_f, self.translation_f)

    def fingerprint(self, grid: float = 1e-9) -> MapFingerprint:
        """Canonical key of the affine map.

        Exact parameters give an exact decision procedure; float parameters are
        snapped to `grid` and flagged heuristic (maps closer than the grid may
        collide, maps straddling a grid line may be missed).
        """
        if self.exact:
            lin = tuple(tuple(self.ratio * x for x in row) for row in self.orthogonal)
            key = ("exact", self.dim,
                   tuple(scalar_key(x) for row in lin for x in row),
                   tuple(scalar_key(x) for x in self.translation))
            return MapFingerprint(key, False)
        q = np.concatenate([self.linear_f.ravel(), self.translation_f])
        key = ("float", self.dim, tuple(int(round(v / grid)) for v in q))
        return MapFingerprint(key, True)

    def __repr__(self):
        return (f"SimilitudeMap(ratio={self.ratio!r}, dim={self.dim}, "
                f"exact={self.exact})")


def identity_map(dim: int) -> SimilitudeMap:
    return SimilitudeMap(Fraction(1), mat_identity(dim), (Fraction(0),) * dim,
                         _check=False)


class GeneralContraction:
    """A contraction given by an evaluator plus user-certified bounds.

    r_bound and R_bound must satisfy
    r_bound * |x - y| <= |S(x) - S(y)| <= R_bound * |x - y|;
    the toolkit never estimates them by sampling.  `func` maps an (k, dim)
    array to an (k, dim) array.  Affine maps may pass `matrix`/`translation`
    instead of `func`.
    """

    exact = False

    def __init__(self, r_bound: float, R_bound: float, dim: int,
                 func: Callable[[np.ndarray], np.ndarray] | None = None,
                 matrix=None, translation=None, fixed_point_hint=None):
        if func is None:
            if matrix is None or translation is None:
                raise ConfigError("general map needs func or matrix+translation")
            M = np.asarray([[float(x) for x in row] for row in
                            (matrix if not np.isscalar(matrix) else ((matrix,),))])
            t = np.asarray([float(x) for x in
                            (translation if not np.isscalar(translation)
                             else (translation,))])
            func = lambda p, M=M, t=t: p @ M.T + t  # noqa: E731
            self.matrix, self.trans = M, t
        else:
            self.matrix = self.trans = None
        self.func = func
        self.r_bound = float(r_bound)
        self.R_bound = float(R_bound)
        self.dim = dim
        self._fp_hint = fixed_point_hint
        if not (0 < self.r_bound <= self.R_bound):
            raise ConfigError("need 0 < r_bound <= R_bound")

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.func(points)

    def fixed_point(self) -> np.ndarray:
        if self.matrix is not None:
            return np.linalg.solve(np.eye(self.dim) - self.matrix, self.trans)
        if self._fp_hint is not None:
            x = np.asarray(self._fp_hint, dtype=float)[None, :]
        else:
            x = np.zeros((1, self.dim))
        # contraction mapping iteration; R_bound < 1 guarantees convergence
        for _ in range(200):
            nx = self.apply(x)
            if np.max(np.abs(nx - x)) < 1e-15:
                return nx[0]
            x = nx
        return x[0]

    def fingerprint(self, grid: float = 1e-9) -> MapFingerprint:
        raise UnsupportedOperationError(
            "fingerprints of general contractions are not decidable from an evaluator"
        )

    def compose(self, other: "GeneralContraction") -> "GeneralContraction":
        f, g = self.func, other.func
        return GeneralContraction(
            self.r_bound * other.r_bound, self.R_bound * other.R_bound, self.dim,
            func=lambda p: f(g(p)),
        )


class ContractionSpec:
    """An ordered finite family of contractions sharing one ambient dimension."""

    def __init__(self, maps: Sequence, name: str = ""):
        maps = list(maps)
        if not maps:
            raise ConfigError("a contraction system needs at least one map")
        self.maps = maps
        self.name = name
        self.dim = maps[0].dim
        if any(m.dim != self.dim for m in maps):
            raise ConfigError("all maps must share the ambient dimension")
        self.N = len(maps)
        n_sim = sum(isinstance(m, SimilitudeMap) for m in maps)
        if 0 < n_sim < self.N:
            raise ConfigError("mixing similitudes and general maps is not supported")
        self.kind = "similitude" if n_sim == self.N else "general"
        self.exact = all(getattr(m, "exact", False) for m in maps)
        for m in maps:
            if float(m.R_bound) >= 1:
                raise ConfigError("every generator must contract: R_bound < 1")
        self.r_min_f = min(float(m.r_bound) for m in maps)
        self.R_max_f = max(float(m.R_bound) for m in maps)
        if self.exact:
            r_min = maps[0].r_bound
            for m in maps[1:]:
                if m.r_bound < r_min:
                    r_min = m.r_bound
            self.r_min = r_min
            first = maps[0].ratio
            self.equicontractive = all(m.ratio == first for m in maps)
        else:
            self.r_min = self.r_min_f
            ratios = [float(m.r_bound) for m in maps] + [float(m.R_bound) for m in maps]
            self.equicontractive = max(ratios) == min(ratios)

    def compose(self, word: Word):
        """S_w; the empty word gives the identity (similitudes) or raises."""
        for c in word:
            if not 0 <= c < self.N:
                raise ConfigError(f"letter {c} out of range in word {word_str(word)}")
        if self.kind == "similitude":
            m = identity_map(self.dim)
            for c in word:
                m = m.compose(self.maps[c])
            return m
        if not word:
            raise UnsupportedOperationError("empty word for a general system")
        m = self.maps[word[0]]
        for c in word[1:]:
            m = m.compose(self.maps[c])
        return m

    def extend(self, composed, letter: int):
        """S_w ∘ S_letter, incremental form used by level builders."""
        return composed.compose(self.maps[letter])

    def fingerprint(self, word: Word, grid: float = 1e-9) -> MapFingerprint:
        return self.compose(word).fingerprint(grid)

    def __repr__(self):
        return (f"ContractionSpec(N={self.N}, dim={self.dim}, kind={self.kind}, "
                f"exact={self.exact}, name={self.name!r})")


# ---------------------------------------------------------------------------
# IFS text files
#
#   # comment
#   format = ifs/1
#   dim = 2
#   kind = similitude            (default; or "general")
#   map = 1/2 | 1 0 ; 0 1 | 0 0
#
# similitude fields:  ratio | orthogonal rows (';' separated) | translation
# general fields:     matrix | translation | bounds r R
# entries are scalar expressions: 1/3, 0.25, sqrt(2)/2, (sqrt(5)-1)/2 ...
# ---------------------------------------------------------------------------


def _split_entries(text: str, count: int | None):
    """Entries are comma-separated; whitespace works too when expressions have
    no spaces; a known count of 1 takes the whole text as one expression."""
    if "," in text:
        parts = [p for p in text.split(",")]
    elif count == 1:
        parts = [text]
    else:
        parts = text.split()
    return [parse_scalar(p) for p in parts]


def _parse_matrix_field(field: str, dim: int):
    rows = field.split(";")
    return [_split_entries(row, 1 if (dim == 1 and len(rows) == 1) else None)
            for row in rows]


def parse_ifs_text(text: str, name: str = "") -> ContractionSpec:
    dim = None
    kind = "similitude"
    raw_maps: list[tuple[int, str]] = []
    fmt_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"ifs line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key == "format":
            if val != "ifs/1":
                raise ConfigError(f"ifs line {lineno}: unknown format {val!r}")
            fmt_seen = True
        elif key == "dim":
            dim = int(val)
        elif key == "kind":
            if val not in ("similitude", "general"):
                raise ConfigError(f"ifs line {lineno}: unknown kind {val!r}")
            kind = val
        elif key == "map":
            raw_maps.append((lineno, val))
        else:
            raise ConfigError(f"ifs line {lineno}: unknown key {key!r}")
    if not fmt_seen:
        raise ConfigError("ifs file must declare: format = ifs/1")
    if dim is None:
        raise ConfigError("ifs file must declare: dim = <int>")
    if not raw_maps:
        raise ConfigError("ifs file has no map lines")

    maps = []
    for lineno, val in raw_maps:
        fields = [f.strip() for f in val.split("|")]
        try:
            if kind == "similitude":
                if len(fields) != 3:
                    raise ConfigError("similitude map needs ratio | matrix | translation")
                ratio = parse_scalar(fields[0])
                O = _parse_matrix_field(fields[1], dim)
                t = _split_entries(fields[2], dim)
                if len(t) != dim:
                    raise ConfigError(f"translation has {len(t)} entries, dim is {dim}")
                maps.append(SimilitudeMap(ratio, O, t))
            else:
                if len(fields) != 3 or not fields[2].startswith("bounds"):
                    raise ConfigError("general map needs matrix | translation | bounds r R")
                M = _parse_matrix_field(fields[0], dim)
                t = _split_entries(fields[1], dim)
                b = fields[2].split(None, 1)
                bs = _split_entries(b[1], 2) if len(b) == 2 else []
                if len(bs) != 2:
                    raise ConfigError("bounds field needs exactly two scalars")
                maps.append(GeneralContraction(
                    float(bs[0]), float(bs[1]), dim, matrix=M, translation=t))
        except ConfigError as e:
            raise ConfigError(f"ifs line {lineno}: {e}") from None
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"ifs line {lineno}: {e}") from None
    try:
        return ContractionSpec(maps, name=name)
    except ConfigError as e:
        raise ConfigError(f"ifs file: {e}") from None


def load_ifs(path) -> ContractionSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ifs_text(fh.read(), name=str(path))
