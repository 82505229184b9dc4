"""Finite pseudometric spaces and fuzzy relations with [0, 1]-valued entries.

A PseudometricSpace is an ordered tuple of point names plus a square matrix
of rational distances.  Construction checks only shape and range so that
``validate`` can report axiom violations (reflexivity, symmetry, triangle
inequality) with explicit witnesses; operations that require a genuine
pseudometric call ``require_valid`` first.

A FuzzyRelation is the asymmetric counterpart: a rectangular [0, 1]-valued
matrix between two (possibly different) carriers.  CrispRelation restricts
entries to {0, 1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import ValidationError
from .rationals import ZERO, check_unit, format_rational


def _check_points(points: Sequence[str], label: str) -> tuple[str, ...]:
    pts = tuple(points)
    if not pts:
        raise ValidationError(f"{label} must contain at least one point")
    if len(set(pts)) != len(pts):
        raise ValidationError(f"duplicate point names in {label}: {points}")
    for p in pts:
        if not isinstance(p, str) or not p:
            raise ValidationError(f"point names must be non-empty strings, got {p!r}")
    return pts


def _check_matrix(
    matrix: Sequence[Sequence[Fraction]], rows: int, cols: int, label: str
) -> tuple[tuple[Fraction, ...], ...]:
    if len(matrix) != rows:
        raise ValidationError(f"{label} must have {rows} rows, got {len(matrix)}")
    out = []
    for i, row in enumerate(matrix):
        if len(row) != cols:
            raise ValidationError(
                f"{label} row {i} must have {cols} entries, got {len(row)}"
            )
        out.append(tuple(check_unit(Fraction(v), f"{label}[{i}]") for v in row))
    return tuple(out)


@dataclass(frozen=True)
class AxiomViolation:
    """One failed pseudometric axiom together with the witnessing points."""

    axiom: str  # "reflexivity" | "symmetry" | "triangle"
    witness: tuple[str, ...]
    detail: str


@dataclass(frozen=True)
class PseudometricSpace:
    points: tuple[str, ...]
    d: tuple[tuple[Fraction, ...], ...]

    def __init__(self, points: Sequence[str], d: Sequence[Sequence[Fraction]]):
        pts = _check_points(points, "space")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "d", _check_matrix(d, len(pts), len(pts), "d"))

    def index(self, point: str) -> int:
        try:
            return self.points.index(point)
        except ValueError:
            raise ValidationError(f"unknown point {point!r}") from None

    def distance(self, x: str, y: str) -> Fraction:
        return self.d[self.index(x)][self.index(y)]

    @property
    def size(self) -> int:
        return len(self.points)


def validate(space: PseudometricSpace) -> tuple[AxiomViolation, ...]:
    """Report every pseudometric axiom violation; empty means valid."""
    pts, d = space.points, space.d
    n = len(pts)
    found: list[AxiomViolation] = []
    for i in range(n):
        if d[i][i] != 0:
            found.append(
                AxiomViolation(
                    "reflexivity",
                    (pts[i],),
                    f"d({pts[i]},{pts[i]}) = {format_rational(d[i][i])} != 0",
                )
            )
    for i in range(n):
        for j in range(i + 1, n):
            if d[i][j] != d[j][i]:
                found.append(
                    AxiomViolation(
                        "symmetry",
                        (pts[i], pts[j]),
                        f"d({pts[i]},{pts[j]}) = {format_rational(d[i][j])} != "
                        f"{format_rational(d[j][i])} = d({pts[j]},{pts[i]})",
                    )
                )
    for i in range(n):
        for k in range(n):
            for j in range(n):
                if i == j or k == i or k == j:
                    continue
                if d[i][j] > d[i][k] + d[k][j]:
                    found.append(
                        AxiomViolation(
                            "triangle",
                            (pts[i], pts[k], pts[j]),
                            f"d({pts[i]},{pts[j]}) > d({pts[i]},{pts[k]}) + "
                            f"d({pts[k]},{pts[j]})",
                        )
                    )
    return tuple(found)


def require_valid(space: PseudometricSpace) -> PseudometricSpace:
    violations = validate(space)
    if violations:
        first = violations[0]
        raise ValidationError(
            f"not a pseudometric: {first.axiom} fails at {first.witness} "
            f"({first.detail}); {len(violations)} violation(s) total"
        )
    return space


def metric_quotient(space: PseudometricSpace) -> tuple[PseudometricSpace, dict[str, str]]:
    """Identify points at distance zero.

    Returns the quotient space and the projection map.  Each class is named
    after its least-index member, and classes keep the order in which their
    representatives appear in the carrier.  The quotient distance is well
    defined because d vanishes inside classes.
    """
    require_valid(space)
    pts, d = space.points, space.d
    n = len(pts)
    representative: dict[int, int] = {}
    reps: list[int] = []
    for i in range(n):
        for r in reps:
            if d[r][i] == 0:
                representative[i] = r
                break
        else:
            representative[i] = i
            reps.append(i)
    quotient_points = [pts[r] for r in reps]
    quotient_d = [[d[a][b] for b in reps] for a in reps]
    projection = {pts[i]: pts[representative[i]] for i in range(n)}
    return PseudometricSpace(quotient_points, quotient_d), projection


def epsilon_expansion(
    space: PseudometricSpace, subset: Iterable[str], epsilon: Fraction
) -> tuple[str, ...]:
    """All points within distance epsilon of the subset, in carrier order."""
    if epsilon < 0:
        raise ValidationError("epsilon must be >= 0")
    indices = [space.index(p) for p in subset]
    d = space.d
    return tuple(
        space.points[j]
        for j in range(len(space.points))
        if any(d[i][j] <= epsilon for i in indices)
    )


@dataclass(frozen=True)
class FuzzyRelation:
    """A [0, 1]-valued relation between a source and a target carrier."""

    sources: tuple[str, ...]
    targets: tuple[str, ...]
    r: tuple[tuple[Fraction, ...], ...]

    def __init__(
        self,
        sources: Sequence[str],
        targets: Sequence[str],
        r: Sequence[Sequence[Fraction]],
    ):
        src = _check_points(sources, "sources")
        tgt = _check_points(targets, "targets")
        object.__setattr__(self, "sources", src)
        object.__setattr__(self, "targets", tgt)
        object.__setattr__(self, "r", _check_matrix(r, len(src), len(tgt), "r"))

    def source_index(self, point: str) -> int:
        try:
            return self.sources.index(point)
        except ValueError:
            raise ValidationError(f"unknown source point {point!r}") from None

    def target_index(self, point: str) -> int:
        try:
            return self.targets.index(point)
        except ValueError:
            raise ValidationError(f"unknown target point {point!r}") from None

    @property
    def is_crisp(self) -> bool:
        return all(v == 0 or v == 1 for row in self.r for v in row)


class CrispRelation(FuzzyRelation):
    """A FuzzyRelation whose entries all lie in {0, 1}."""

    def __init__(self, sources, targets, r):
        super().__init__(sources, targets, r)
        if not self.is_crisp:
            raise ValidationError("crisp relation entries must be 0 or 1")


def relation_of_metric(space: PseudometricSpace) -> FuzzyRelation:
    """View a pseudometric as a fuzzy relation from the carrier to itself."""
    return FuzzyRelation(space.points, space.points, space.d)


def crisp_threshold(relation: FuzzyRelation, epsilon: Fraction) -> CrispRelation:
    """Entrywise threshold: 1 where r >= epsilon, else 0.

    At epsilon = 0 every entry becomes 1.  Thresholds are antitone in
    epsilon: a larger epsilon never turns a 0 into a 1.
    """
    if epsilon < 0:
        raise ValidationError("epsilon must be >= 0")
    one, zero = Fraction(1), Fraction(0)
    rows = tuple(
        tuple(one if v >= epsilon else zero for v in row) for row in relation.r
    )
    return CrispRelation(relation.sources, relation.targets, rows)
