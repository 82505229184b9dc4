"""Three fully worked instances with their independently known values.

Each builder returns a report dict with per-check expected/computed pairs
so callers (CLI, tests) can render or assert them uniformly.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .convex_powerset import (
    ConvexSet,
    dhk_composite,
    dhk_dual,
    dhk_spanning_tree,
    point_to_set_distance,
)
from .distributions import Distribution
from .levy_prokhorov import duality_witness, ky_fan, lp_direct
from .liftings import kantorovich, kantorovich_relational, wasserstein
from .modalities import Modality
from .rationals import decimal_string, format_rational
from .spaces import PseudometricSpace, relation_of_metric

EXAMPLE_NAMES = ("p-wasserstein-gap", "hexagon", "lp-duality")


def _check(label: str, expected, computed) -> dict:
    expected_s = str(expected)
    computed_s = str(computed)
    return {
        "label": label,
        "expected": expected_s,
        "computed": computed_s,
        "ok": expected_s == computed_s,
    }


def _report(name: str, checks: list[dict]) -> dict:
    return {"name": name, "checks": checks, "all_ok": all(c["ok"] for c in checks)}


def _two_point_instance():
    points = ("a", "b")
    space = PseudometricSpace(
        points, [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]
    )
    mu = Distribution(points, [Fraction(2, 3), Fraction(1, 3)])
    nu = Distribution(points, [Fraction(1, 3), Fraction(2, 3)])
    return space, mu, nu


def hexagon() -> dict:
    points = ("x", "y", "z")
    one = Fraction(1)
    space = PseudometricSpace(
        points, [[one * (i != j) for j in range(3)] for i in range(3)]
    )
    mu0 = Distribution(points, [Fraction(1, 3)] * 3)
    mu1 = Distribution(points, [Fraction(2, 3), Fraction(1, 3), Fraction(0)])
    mu2 = Distribution(points, [Fraction(0), Fraction(2, 3), Fraction(1, 3)])
    mu3 = Distribution(points, [Fraction(1, 3), Fraction(0), Fraction(2, 3)])
    a_set = ConvexSet(points, (mu0, mu1))
    b_set = ConvexSet(points, (mu2, mu3))

    p2s = point_to_set_distance(space, mu1, b_set)
    gens_only = point_to_set_distance(space, mu1, b_set, generators_only=True)
    checks = [
        _check("point_to_set mu1 -> B", "1/2", format_rational(p2s.value)),
        _check(
            "optimal mixture nu*",
            "(1/6, 1/3, 1/2)",
            "(" + ", ".join(format_rational(m) for m in p2s.mixture.mass) + ")",
        ),
        _check("generators-only value", "2/3", format_rational(gens_only.value)),
        _check(
            "point_to_set mu0 -> B",
            "1/6",
            format_rational(point_to_set_distance(space, mu0, b_set).value),
        ),
        _check(
            "distance (composite)",
            "1/2",
            format_rational(dhk_composite(space, a_set, b_set).value),
        ),
        _check(
            "distance (spanning-tree)",
            "1/2",
            format_rational(dhk_spanning_tree(space, a_set, b_set).value),
        ),
        _check(
            "distance (dual)",
            "1/2",
            format_rational(dhk_dual(space, a_set, b_set).value),
        ),
    ]
    return _report("hexagon", checks)


def p_wasserstein_gap() -> dict:
    space, mu, nu = _two_point_instance()
    m2 = Modality.p_moment(Fraction(2))
    w = wasserstein(m2, space, mu, nu)
    k = kantorovich(m2, space, mu, nu, oracle_delta=Fraction(1, 32))
    with mpmath.mp.workdps(40):
        target = 1 / mpmath.sqrt(3)
        w_close = abs(w.value - target) < mpmath.mpf("1e-12")
        separation = mpmath.mpf(1) / 3 < w.value - mpmath.mpf("0.1")
        lower_ok = k.value <= mpmath.mpf(1) / 3
    checks = [
        _check("W_2 squared-cost transport value", "1/3", format_rational(w.root_base)),
        _check("W_2 equals 3^(-1/2) to 1e-12", True, bool(w_close)),
        _check("K_2 grid lower bound <= 1/3", True, bool(lower_ok)),
        _check("upper bound 1/3 < W_2 - 1/10", True, bool(separation)),
        _check("K_2 exactness flag", "lower-bound", k.exactness),
    ]
    report = _report("p-wasserstein-gap", checks)
    report["w_decimal"] = mpmath.nstr(w.value, 12)
    report["k_lower_decimal"] = mpmath.nstr(+k.value, 12)
    report["k_upper"] = "1/3"
    return report


def lp_duality() -> dict:
    space, mu, nu = _two_point_instance()
    gen = Modality.generally()
    direct = lp_direct(space, mu, nu)
    fan = ky_fan(space, mu, nu)
    kant = kantorovich(gen, space, mu, nu)
    rel = kantorovich_relational(gen, relation_of_metric(space), mu, nu)
    witness = duality_witness(space, mu, nu, Fraction(1, 4))
    checks = [
        _check("direct subset definition", "1/3", format_rational(direct.value)),
        _check("coupling threshold form", "1/3", format_rational(fan.value)),
        _check("price-function value", "1/3", format_rational(kant.value)),
        _check("relational price-pair value", "1/3", format_rational(rel.value)),
        _check(
            "duality witness margin at eps = 1/4",
            "1/4",
            format_rational(witness.epsilon),
        ),
    ]
    report = _report("lp-duality", checks)
    report["value_decimal"] = decimal_string(direct.value)
    return report


def run_example(name: str) -> dict:
    if name == "hexagon":
        return hexagon()
    if name == "p-wasserstein-gap":
        return p_wasserstein_gap()
    if name == "lp-duality":
        return lp_duality()
    from .errors import ValidationError

    raise ValidationError(
        f"unknown example {name!r}; choose from {', '.join(EXAMPLE_NAMES)}"
    )
