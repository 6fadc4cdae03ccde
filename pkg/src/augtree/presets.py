"""Bundled contraction systems used throughout tests and demos."""

from __future__ import annotations

from fractions import Fraction

from .errors import ConfigError
from .exact import surd
from .ifs import ContractionSpec, SimilitudeMap


def cantor() -> ContractionSpec:
    """Middle-third Cantor set: {x/3, x/3 + 2/3}."""
    third = Fraction(1, 3)
    return ContractionSpec(
        [SimilitudeMap(third, 1, 0), SimilitudeMap(third, 1, Fraction(2, 3))],
        name="cantor",
    )


def unit_interval() -> ContractionSpec:
    """[0, 1] as {x/2, x/2 + 1/2}: touching cells, a dyadic-path augmented tree."""
    half = Fraction(1, 2)
    return ContractionSpec(
        [SimilitudeMap(half, 1, 0), SimilitudeMap(half, 1, half)],
        name="unit_interval",
    )


def sierpinski() -> ContractionSpec:
    """Equilateral Sierpinski gasket, ratio 1/2; corners 0, 1, (1 + i sqrt 3)/2."""
    half = Fraction(1, 2)
    I2 = ((1, 0), (0, 1))
    s3 = surd(0, Fraction(1, 4), 3)  # sqrt(3)/4
    return ContractionSpec(
        [
            SimilitudeMap(half, I2, (0, 0)),
            SimilitudeMap(half, I2, (half, 0)),
            SimilitudeMap(half, I2, (Fraction(1, 4), s3)),
        ],
        name="sierpinski",
    )


def golden() -> ContractionSpec:
    """Overlapping pair {rx, rx + (1-r)} with r = (sqrt(5)-1)/2.

    r^2 + r = 1, so S_011 and S_100 coincide as maps; the system satisfies the
    weak separation condition but not the open set condition.
    """
    r = surd(Fraction(-1, 2), Fraction(1, 2), 5)
    return ContractionSpec(
        [SimilitudeMap(r, 1, 0), SimilitudeMap(r, 1, 1 - r)],
        name="golden",
    )


def fifths_disjoint() -> ContractionSpec:
    """{x/5, (x+1)/5, (x+3)/5}: one isolated cell and one touching pair."""
    fifth = Fraction(1, 5)
    return ContractionSpec(
        [SimilitudeMap(fifth, 1, 0),
         SimilitudeMap(fifth, 1, fifth),
         SimilitudeMap(fifth, 1, Fraction(3, 5))],
        name="fifths_disjoint",
    )


def fifths_touching() -> ContractionSpec:
    """{x/5, (x+1)/5, (x+4)/5}: like fifths_disjoint with the third cell shifted."""
    fifth = Fraction(1, 5)
    return ContractionSpec(
        [SimilitudeMap(fifth, 1, 0),
         SimilitudeMap(fifth, 1, fifth),
         SimilitudeMap(fifth, 1, Fraction(4, 5))],
        name="fifths_touching",
    )


def two_scale() -> ContractionSpec:
    """Non-equicontractive pair {x/2, x/4 + 3/4}: exercises cut-set levels."""
    return ContractionSpec(
        [SimilitudeMap(Fraction(1, 2), 1, 0),
         SimilitudeMap(Fraction(1, 4), 1, Fraction(3, 4))],
        name="two_scale",
    )


def single() -> ContractionSpec:
    """One map {x/2}: the degenerate single-path tree."""
    return ContractionSpec([SimilitudeMap(Fraction(1, 2), 1, 0)], name="single")


def dense_overlap() -> ContractionSpec:
    """Float-parameter pair {rx, rx + (1-r)} with r = 0.7003, heavy overlap.

    Parameters are floats on purpose: map comparisons are heuristic and every
    verdict derived from them carries the heuristic flag.  Distinct words give
    distinct maps (no exact coincidences), yet ~ (2r)^n cells pile up near any
    point, so neither separation condition holds.
    """
    r = 0.7003
    return ContractionSpec(
        [SimilitudeMap(r, 1, 0.0), SimilitudeMap(r, 1, 1.0 - r)],
        name="dense_overlap",
    )


PRESETS = {
    "cantor": cantor,
    "unit_interval": unit_interval,
    "sierpinski": sierpinski,
    "golden": golden,
    "fifths_disjoint": fifths_disjoint,
    "fifths_touching": fifths_touching,
    "two_scale": two_scale,
    "single": single,
    "dense_overlap": dense_overlap,
}


def preset(name: str) -> ContractionSpec:
    try:
        factory = PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r}; known: {known}") from None
    return factory()
