import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings

from liftlab import (
    Distribution,
    FuzzyPredicate,
    Modality,
    ValidationError,
    check_well_behaved,
    dual_eval,
    eval_modality,
    expectation,
    generally_representations,
    generally_value,
    parse_modality,
)
from liftlab.instances import point_names, random_distribution, random_predicate

from oracles import generally_eval_exact
from strategies import distributions_on, predicates_on

F = Fraction
PTS = ("a", "b", "c", "d")


# --- construction and parsing ---------------------------------------------


def test_modality_constructors_and_validation():
    assert Modality.expectation().kind == "expectation"
    assert Modality.p_moment(2).p == 2
    assert Modality.p_moment(2).digits == 30
    with pytest.raises(ValidationError):
        Modality("no_such_kind")
    with pytest.raises(ValidationError):
        Modality.p_moment(F(1, 2))  # p < 1
    with pytest.raises(ValidationError):
        Modality.p_moment(2, digits=8)  # too coarse
    with pytest.raises(ValidationError):
        Modality("expectation", p=F(2))  # stray parameter


@pytest.mark.parametrize(
    "spec,expected",
    [
        ("expectation", Modality.expectation()),
        ("sup", Modality.sup()),
        ("inf", Modality.inf()),
        ("generally", Modality.generally()),
        ("p_moment:2", Modality.p_moment(2)),
        ("p_moment:3/2:20", Modality.p_moment(F(3, 2), digits=20)),
        ({"p_moment": "2"}, Modality.p_moment(2)),
        ({"p_moment": {"p": "5/2", "digits": 14}}, Modality.p_moment(F(5, 2), 14)),
        (Modality.generally(), Modality.generally()),
    ],
)
def test_parse_modality(spec, expected):
    assert parse_modality(spec) == expected


@pytest.mark.parametrize("bad", ["p_moment", "median", {"sup": {}}, 7, "p_moment:x"])
def test_parse_modality_rejects(bad):
    with pytest.raises(ValidationError):
        parse_modality(bad)


# --- pointwise evaluation ---------------------------------------------------


def test_eval_each_kind_on_a_hand_instance():
    mu = Distribution(PTS, [F(1, 2), F(1, 4), F(1, 8), F(1, 8)])
    f = FuzzyPredicate(PTS, [F(0), F(1, 2), F(3, 4), F(1)])
    assert eval_modality(Modality.expectation(), f, mu) == F(11, 32)
    assert eval_modality(Modality.sup(), f, ["a", "b"]) == F(1, 2)
    assert eval_modality(Modality.inf(), f, ["b", "d"]) == F(1, 2)
    # tail mass is 1/2 on [0, 1/2) and 1/4 at 1/2, so the crossing sits at 1/2
    assert generally_value(f, mu) == F(1, 2)
    with pytest.raises(ValidationError):
        eval_modality(Modality.expectation(), f, ["a"])
    with pytest.raises(ValidationError):
        eval_modality(Modality.sup(), f, mu)


def test_generally_two_valued_closed_form():
    # on {0, b}-valued predicates: min(b, max(a, mu(f = b))) with a = 0
    pts = ("x", "y")
    for b_num in range(1, 7):
        b = F(b_num, 6)
        for m_num in range(0, 7):
            m = F(m_num, 6)
            mu = Distribution(pts, [m, 1 - m])
            f = FuzzyPredicate(pts, [b, F(0)])
            assert generally_value(f, mu) == min(b, m)


def test_generally_against_candidate_scan_oracle():
    rng = random.Random(4242)
    for _ in range(300):
        n = rng.randint(1, 5)
        pts = point_names(n)
        mu = random_distribution(rng, pts)
        f = random_predicate(rng, pts)
        assert generally_value(f, mu) == generally_eval_exact(f.values, mu.mass)


@settings(max_examples=200)
@given(distributions_on(PTS), predicates_on(PTS))
def test_all_eight_generally_representations_agree(mu, f):
    reps = generally_representations(f, mu)
    assert reps.all_equal, reps
    assert reps.values()[0] == generally_value(f, mu)


@settings(max_examples=200)
@given(distributions_on(PTS), predicates_on(PTS))
def test_generally_self_duality(mu, f):
    assert dual_eval(Modality.generally(), f, mu) == generally_value(f, mu)


def test_expectation_self_duality_exact():
    mu = Distribution(PTS, [F(1, 3), F(1, 3), F(1, 6), F(1, 6)])
    f = FuzzyPredicate(PTS, [F(1, 7), F(2, 7), F(3, 7), F(1)])
    assert dual_eval(Modality.expectation(), f, mu) == expectation(mu, f)


# --- p_moment ----------------------------------------------------------------


def test_p_moment_matches_expectation_at_p_one():
    mu = Distribution(PTS, [F(1, 2), F(1, 4), F(1, 8), F(1, 8)])
    f = FuzzyPredicate(PTS, [F(0), F(1, 2), F(3, 4), F(1)])
    v = eval_modality(Modality.p_moment(1), f, mu)
    assert abs(v - float(expectation(mu, f))) < 1e-25


def test_p_moment_square_root_of_exact_moment():
    mu = Distribution(("x", "y"), [F(1, 4), F(3, 4)])
    f = FuzzyPredicate(("x", "y"), [F(1), F(0)])
    v = eval_modality(Modality.p_moment(2), f, mu)
    with mpmath.mp.workdps(40):
        assert abs(v - mpmath.mpf(1) / 2) < mpmath.mpf(10) ** -25


def test_p_moment_is_monotone_in_p():
    mu = Distribution(("x", "y"), [F(1, 3), F(2, 3)])
    f = FuzzyPredicate(("x", "y"), [F(1, 2), F(1, 5)])
    v1 = eval_modality(Modality.p_moment(1), f, mu)
    v2 = eval_modality(Modality.p_moment(2), f, mu)
    v3 = eval_modality(Modality.p_moment(3), f, mu)
    assert v1 < v2 < v3 < 0.5  # capped by sup f


def test_p_moment_non_integer_p():
    mu = Distribution(("x", "y"), [F(1, 2), F(1, 2)])
    f = FuzzyPredicate(("x", "y"), [F(1, 4), F(1)])
    v = eval_modality(Modality.p_moment(F(3, 2)), f, mu)
    with mpmath.mp.workdps(50):
        exact = ((mpmath.mpf(1) / 4) ** mpmath.mpf(1.5) / 2 + mpmath.mpf(1) / 2) ** (
            mpmath.mpf(2) / 3
        )
        assert abs(v - exact) < mpmath.mpf(10) ** -25


def test_convex_sup_expectation_takes_the_best_generator():
    from liftlab import ConvexSet

    pts = ("x", "y")
    gens = (
        Distribution(pts, [F(1), F(0)]),
        Distribution(pts, [F(1, 4), F(3, 4)]),
    )
    f = FuzzyPredicate(pts, [F(0), F(1)])
    val = eval_modality(Modality.convex_sup_expectation(), f, ConvexSet(pts, gens))
    assert val == F(3, 4)
    with pytest.raises(ValidationError):
        eval_modality(Modality.convex_sup_expectation(), f, Distribution(pts, [F(1), F(0)]))


# --- well-behavedness --------------------------------------------------------


@pytest.mark.parametrize(
    "modality", [Modality.expectation(), Modality.generally()]
)
def test_well_behaved_on_random_triples(modality):
    rng = random.Random(77)
    triples = []
    for _ in range(120):
        n = rng.randint(1, 4)
        pts = point_names(n)
        triples.append(
            (
                random_predicate(rng, pts),
                random_predicate(rng, pts),
                random_distribution(rng, pts),
            )
        )
    report = check_well_behaved(modality, triples)
    assert report.ok, report.violations[:3]
    assert report.checked == 120


def test_well_behaved_sup_over_point_sets():
    rng = random.Random(78)
    triples = []
    for _ in range(60):
        n = rng.randint(1, 4)
        pts = point_names(n)
        subset = tuple(p for p in pts if rng.random() < 0.7) or pts[:1]
        triples.append(
            (random_predicate(rng, pts), random_predicate(rng, pts), subset)
        )
    report = check_well_behaved(Modality.sup(), triples)
    assert report.ok
