"""Finitely supported probability distributions, predicates, and couplings.

Representations are dense: a Distribution or FuzzyPredicate stores one
rational per carrier point, in carrier order, with zeros kept explicitly.
Carriers are compared by their ordered point tuples; mixing carriers is a
validation error, never silent coercion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .errors import ValidationError
from .rationals import ONE, ZERO, check_unit, format_rational
from .spaces import _check_points


def _same_carrier(a: tuple[str, ...], b: tuple[str, ...], what: str) -> None:
    if a != b:
        raise ValidationError(f"carrier mismatch in {what}: {a} vs {b}")


@dataclass(frozen=True)
class Distribution:
    points: tuple[str, ...]
    mass: tuple[Fraction, ...]

    def __init__(self, points: Sequence[str], mass: Sequence[Fraction]):
        pts = _check_points(points, "carrier")
        if len(mass) != len(pts):
            raise ValidationError(
                f"carrier has {len(pts)} points but {len(mass)} masses given"
            )
        masses = tuple(Fraction(m) for m in mass)
        for p, m in zip(pts, masses):
            if m < 0:
                raise ValidationError(f"negative mass {format_rational(m)} at {p!r}")
        total = sum(masses, ZERO)
        if total != 1:
            raise ValidationError(
                f"total mass must be 1, got {format_rational(total)}"
            )
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mass", masses)

    @classmethod
    def from_mapping(
        cls, points: Sequence[str], mass: Mapping[str, Fraction]
    ) -> "Distribution":
        """Build from a point->mass mapping; omitted points get mass zero."""
        pts = tuple(points)
        unknown = set(mass) - set(pts)
        if unknown:
            raise ValidationError(f"mass assigned to unknown points: {sorted(unknown)}")
        return cls(pts, [Fraction(mass.get(p, 0)) for p in pts])

    @classmethod
    def dirac(cls, points: Sequence[str], at: str) -> "Distribution":
        pts = tuple(points)
        if at not in pts:
            raise ValidationError(f"unknown point {at!r}")
        return cls(pts, [ONE if p == at else ZERO for p in pts])

    def __call__(self, point: str) -> Fraction:
        try:
            return self.mass[self.points.index(point)]
        except ValueError:
            raise ValidationError(f"unknown point {point!r}") from None

    def support(self) -> tuple[str, ...]:
        return tuple(p for p, m in zip(self.points, self.mass) if m > 0)


@dataclass(frozen=True)
class FuzzyPredicate:
    """A [0, 1]-valued function on a carrier, stored densely."""

    points: tuple[str, ...]
    values: tuple[Fraction, ...]

    def __init__(self, points: Sequence[str], values: Sequence[Fraction]):
        pts = _check_points(points, "carrier")
        if len(values) != len(pts):
            raise ValidationError(
                f"carrier has {len(pts)} points but {len(values)} values given"
            )
        vals = tuple(
            check_unit(Fraction(v), f"predicate value at {p!r}")
            for p, v in zip(pts, values)
        )
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, points: Sequence[str], value: Fraction) -> "FuzzyPredicate":
        return cls(points, [Fraction(value)] * len(tuple(points)))

    @classmethod
    def from_mapping(
        cls, points: Sequence[str], values: Mapping[str, Fraction]
    ) -> "FuzzyPredicate":
        pts = tuple(points)
        unknown = set(values) - set(pts)
        if unknown:
            raise ValidationError(f"values at unknown points: {sorted(unknown)}")
        return cls(pts, [Fraction(values.get(p, 0)) for p in pts])

    def __call__(self, point: str) -> Fraction:
        try:
            return self.values[self.points.index(point)]
        except ValueError:
            raise ValidationError(f"unknown point {point!r}") from None

    def complement(self) -> "FuzzyPredicate":
        return FuzzyPredicate(self.points, [ONE - v for v in self.values])

    def oplus(self, other: "FuzzyPredicate") -> "FuzzyPredicate":
        _same_carrier(self.points, other.points, "oplus")
        return FuzzyPredicate(
            self.points, [min(ONE, a + b) for a, b in zip(self.values, other.values)]
        )

    def ominus(self, other: "FuzzyPredicate") -> "FuzzyPredicate":
        _same_carrier(self.points, other.points, "ominus")
        return FuzzyPredicate(
            self.points, [max(ZERO, a - b) for a, b in zip(self.values, other.values)]
        )


@dataclass(frozen=True)
class Coupling:
    """A joint distribution on a product carrier, stored row-major.

    joint[i][j] is the mass on (sources[i], targets[j]).  Marginals are
    computed on demand; ``of_marginals`` checks a candidate matrix against
    prescribed marginals exactly.
    """

    sources: tuple[str, ...]
    targets: tuple[str, ...]
    joint: tuple[tuple[Fraction, ...], ...]

    def __init__(
        self,
        sources: Sequence[str],
        targets: Sequence[str],
        joint: Sequence[Sequence[Fraction]],
    ):
        src = _check_points(sources, "sources")
        tgt = _check_points(targets, "targets")
        if len(joint) != len(src):
            raise ValidationError("joint matrix row count must match sources")
        rows = []
        for i, row in enumerate(joint):
            if len(row) != len(tgt):
                raise ValidationError("joint matrix column count must match targets")
            vals = tuple(Fraction(v) for v in row)
            for v in vals:
                if v < 0:
                    raise ValidationError("joint masses must be >= 0")
            rows.append(vals)
        total = sum((v for row in rows for v in row), ZERO)
        if total != 1:
            raise ValidationError(
                f"joint mass must sum to 1, got {format_rational(total)}"
            )
        object.__setattr__(self, "sources", src)
        object.__setattr__(self, "targets", tgt)
        object.__setattr__(self, "joint", tuple(rows))

    def left_marginal(self) -> Distribution:
        return Distribution(self.sources, [sum(row, ZERO) for row in self.joint])

    def right_marginal(self) -> Distribution:
        cols = [
            sum((row[j] for row in self.joint), ZERO)
            for j in range(len(self.targets))
        ]
        return Distribution(self.targets, cols)

    def has_marginals(self, left: Distribution, right: Distribution) -> bool:
        return (
            self.left_marginal().mass == left.mass
            and self.right_marginal().mass == right.mass
            and self.sources == left.points
            and self.targets == right.points
        )

    def expectation(self, cost: Sequence[Sequence[Fraction]]) -> Fraction:
        """Expected value of a matrix-valued function under the joint mass."""
        if len(cost) != len(self.sources) or any(
            len(row) != len(self.targets) for row in cost
        ):
            raise ValidationError("cost matrix shape must match the coupling")
        return sum(
            (m * Fraction(c) for mrow, crow in zip(self.joint, cost)
             for m, c in zip(mrow, crow)),
            ZERO,
        )


def expectation(mu: Distribution, f: FuzzyPredicate) -> Fraction:
    _same_carrier(mu.points, f.points, "expectation")
    return sum((m * v for m, v in zip(mu.mass, f.values)), ZERO)


def convex_combine(
    weights: Sequence[Fraction], dists: Sequence[Distribution]
) -> Distribution:
    if len(weights) != len(dists) or not dists:
        raise ValidationError("need equally many weights and distributions, >= 1")
    ws = [Fraction(w) for w in weights]
    for w in ws:
        if w < 0:
            raise ValidationError("weights must be >= 0")
    if sum(ws, ZERO) != 1:
        raise ValidationError(
            f"weight sum must be 1, got {format_rational(sum(ws, ZERO))}"
        )
    pts = dists[0].points
    for d in dists[1:]:
        _same_carrier(pts, d.points, "convex_combine")
    mass = [
        sum((w * d.mass[i] for w, d in zip(ws, dists)), ZERO)
        for i in range(len(pts))
    ]
    return Distribution(pts, mass)


def pushforward(
    mapping: Mapping[str, str] | Callable[[str], str],
    mu: Distribution,
    target_points: Sequence[str] | None = None,
) -> Distribution:
    """Transport mass along a point map.

    The map must be total on the carrier.  When ``target_points`` is omitted
    the target carrier lists the images in order of first occurrence.
    """
    if callable(mapping):
        images = [mapping(p) for p in mu.points]
    else:
        missing = [p for p in mu.points if p not in mapping]
        if missing:
            raise ValidationError(f"map not total, missing: {missing}")
        images = [mapping[p] for p in mu.points]
    if target_points is None:
        seen: list[str] = []
        for q in images:
            if q not in seen:
                seen.append(q)
        target_points = seen
    tgt = tuple(target_points)
    index: dict[str, int] = {}
    for i, q in enumerate(tgt):
        index[q] = i
    unknown = [q for q in images if q not in index]
    if unknown:
        raise ValidationError(f"images outside target carrier: {sorted(set(unknown))}")
    mass = [ZERO] * len(tgt)
    for img, m in zip(images, mu.mass):
        mass[index[img]] += m
    return Distribution(tgt, mass)
