"""Seeded random instances for tests and benchmarks.

Everything is driven by an explicit random.Random so runs are reproducible.
Distances and masses are rationals with small denominators; pseudometrics
are made triangle-consistent by shortest-path closure, which only lowers
entries and so preserves the unit range.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .convex_powerset import ConvexSet
from .distributions import Distribution, FuzzyPredicate
from .rationals import ONE, ZERO
from .spaces import FuzzyRelation, PseudometricSpace, require_valid


def point_names(n: int, prefix: str = "x") -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(n))


def random_rational(rng: random.Random, denominator_limit: int = 12) -> Fraction:
    den = rng.randint(1, denominator_limit)
    return Fraction(rng.randint(0, den), den)


def random_pseudometric(
    rng: random.Random,
    n: int,
    denominator_limit: int = 12,
    zero_pairs: int = 0,
) -> PseudometricSpace:
    """Random valid pseudometric; zero_pairs forces non-separated points."""
    points = point_names(n)
    d = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = random_rational(rng, denominator_limit)
            d[i][j] = v
            d[j][i] = v
    glued = 0
    while glued < zero_pairs and n >= 2:
        i, j = rng.sample(range(n), 2)
        d[i][j] = ZERO
        d[j][i] = ZERO
        glued += 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                through = d[i][k] + d[k][j]
                if through < d[i][j]:
                    d[i][j] = through
    return require_valid(PseudometricSpace(points, d))


def random_distribution(
    rng: random.Random,
    points,
    denominator_limit: int = 12,
) -> Distribution:
    points = tuple(points)
    den = rng.randint(1, denominator_limit)
    counts = [0] * len(points)
    for _ in range(den):
        counts[rng.randrange(len(points))] += 1
    return Distribution(points, [Fraction(c, den) for c in counts])


def random_relation(
    rng: random.Random,
    n_sources: int,
    n_targets: int,
    denominator_limit: int = 12,
) -> FuzzyRelation:
    sources = point_names(n_sources)
    targets = point_names(n_targets, prefix="y")
    r = [
        [random_rational(rng, denominator_limit) for _ in targets]
        for _ in sources
    ]
    return FuzzyRelation(sources, targets, r)


def random_predicate(
    rng: random.Random,
    points,
    denominator_limit: int = 12,
) -> FuzzyPredicate:
    points = tuple(points)
    return FuzzyPredicate(
        points, [random_rational(rng, denominator_limit) for _ in points]
    )


def random_convex_set(
    rng: random.Random,
    points,
    max_generators: int = 4,
    denominator_limit: int = 12,
) -> ConvexSet:
    points = tuple(points)
    count = rng.randint(1, max_generators)
    return ConvexSet(
        points,
        tuple(
            random_distribution(rng, points, denominator_limit)
            for _ in range(count)
        ),
    )


def random_point_set(rng: random.Random, points) -> tuple[str, ...]:
    points = tuple(points)
    count = rng.randint(1, len(points))
    chosen = rng.sample(range(len(points)), count)
    return tuple(points[i] for i in sorted(chosen))
