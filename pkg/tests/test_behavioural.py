import random
from fractions import Fraction

import pytest

from liftlab import (
    Coalgebra,
    ConvexSet,
    Distribution,
    InternalCheckError,
    Lifting,
    Modality,
    PseudometricSpace,
    ValidationError,
    bdist_step,
    behavioural_distance,
    validate,
)
from liftlab.behavioural import parse_lifting
from liftlab.instances import random_distribution

F = Fraction


def swap_chain():
    """Outputs 0 and 1/2; each state jumps deterministically to the other."""
    states = ("u", "v")
    return Coalgebra.labelled_markov_chain(
        states,
        {
            "u": (F(0), Distribution.dirac(states, "v")),
            "v": (F(1, 2), Distribution.dirac(states, "u")),
        },
    )


def self_loop_chain():
    states = ("u", "v")
    return Coalgebra.labelled_markov_chain(
        states,
        {
            "u": (F(0), Distribution.dirac(states, "u")),
            "v": (F(1), Distribution.dirac(states, "v")),
        },
    )


def random_markov_chain(rng, n):
    states = tuple(f"s{i}" for i in range(n))
    return Coalgebra.markov_chain(
        states, {s: random_distribution(rng, states) for s in states}
    )


def test_lifting_parsing_and_validation():
    lift = Lifting(Modality.expectation(), "kantorovich")
    assert lift.construction == "kantorovich"
    assert parse_lifting({"modality": "generally", "construction": "wasserstein"}) == Lifting(
        Modality.generally(), "wasserstein"
    )
    with pytest.raises(ValidationError):
        Lifting(Modality.expectation(), "primal")


def test_coalgebra_construction_validation():
    states = ("u", "v")
    with pytest.raises(ValidationError):
        Coalgebra.markov_chain(states, {"u": Distribution.dirac(states, "u")})
    with pytest.raises(ValidationError):
        Coalgebra.markov_chain(
            states,
            {
                "u": Distribution.dirac(states, "u"),
                "v": Distribution.dirac(("a", "b"), "a"),
            },
        )
    with pytest.raises(ValidationError):
        Coalgebra.labelled_markov_chain(
            states, {"u": (F(2), Distribution.dirac(states, "u"))}
        )


def test_unlabelled_chains_collapse_to_the_zero_metric():
    rng = random.Random(70)
    for trial in range(10):
        chain = random_markov_chain(rng, rng.randint(1, 4))
        for construction in ("kantorovich", "wasserstein"):
            res = behavioural_distance(
                chain, Lifting(Modality.expectation(), construction)
            )
            assert res.converged and res.iteration == 1
            assert res.stop_reason == "exact"
            assert all(v == 0 for row in res.d for v in row), trial


def test_self_loop_outputs_saturate_at_one():
    res = behavioural_distance(
        self_loop_chain(), Lifting(Modality.expectation(), "kantorovich")
    )
    assert res.converged and res.iteration == 2
    assert res.d[0][1] == F(1)
    assert res.d[0][0] == res.d[1][1] == 0


def test_swap_chain_fixpoint_is_one_half():
    for modality in (Modality.expectation(), Modality.generally()):
        for construction in ("kantorovich", "wasserstein"):
            res = behavioural_distance(swap_chain(), Lifting(modality, construction))
            assert res.converged, (modality.kind, construction)
            assert res.iteration == 2
            assert res.d[0][1] == F(1, 2)
            assert res.stop_reason == "exact"


def test_iterates_grow_monotonically_from_zero():
    chain = swap_chain()
    lifting = Lifting(Modality.expectation(), "kantorovich")
    states = chain.states
    zero = PseudometricSpace(states, [[F(0)] * 2 for _ in range(2)])
    one_step = bdist_step(chain, lifting, zero)
    two_step = bdist_step(chain, lifting, one_step)
    assert one_step.d[0][1] == F(1, 2)
    assert two_step.d[0][1] == F(1, 2)  # already the fixpoint
    for i in range(2):
        for j in range(2):
            assert zero.d[i][j] <= one_step.d[i][j] <= two_step.d[i][j]


def test_bdist_step_preserves_order():
    rng = random.Random(71)
    chain = random_markov_chain(rng, 3)
    lifting = Lifting(Modality.expectation(), "wasserstein")
    states = chain.states
    lo = PseudometricSpace(states, [[F(0)] * 3 for _ in range(3)])
    hi = PseudometricSpace(
        states, [[F(0) if i == j else F(1) for j in range(3)] for i in range(3)]
    )
    step_lo = bdist_step(chain, lifting, lo)
    step_hi = bdist_step(chain, lifting, hi)
    for i in range(3):
        for j in range(3):
            assert step_lo.d[i][j] <= step_hi.d[i][j]


def test_every_iterate_is_a_valid_pseudometric():
    rng = random.Random(72)
    chain = random_markov_chain(rng, 4)
    lifting = Lifting(Modality.generally(), "wasserstein")
    current = PseudometricSpace(
        chain.states, [[F(0)] * 4 for _ in range(4)]
    )
    for _ in range(4):
        current = bdist_step(chain, lifting, current)
        assert validate(current) == ()


def test_max_iters_stop_reports_non_convergence():
    res = behavioural_distance(
        self_loop_chain(),
        Lifting(Modality.expectation(), "kantorovich"),
        max_iters=1,
    )
    assert not res.converged
    assert res.stop_reason == "max_iters"
    assert res.iteration == 1


def test_tolerance_stop_on_an_asymptotic_chain():
    # d(u, v) follows t -> 1/2 + t/2, approaching 1 without ever reaching
    # it, so exact repetition cannot happen and the tolerance stop fires
    states = ("u", "v", "a", "b")
    half = F(1, 2)
    chain = Coalgebra.labelled_markov_chain(
        states,
        {
            "u": (F(0), Distribution(states, [half, F(0), half, F(0)])),
            "v": (F(0), Distribution(states, [F(0), half, F(0), half])),
            "a": (F(1), Distribution.dirac(states, "a")),
            "b": (F(0), Distribution.dirac(states, "b")),
        },
    )
    res = behavioural_distance(
        chain,
        Lifting(Modality.expectation(), "wasserstein"),
        tolerance=F(1, 10**6),
    )
    assert res.converged
    assert res.stop_reason == "tolerance"
    assert res.iteration >= 20  # 2^-k must fall below the tolerance
    assert 1 - F(1, 2**19) <= res.d[0][1] < 1


def test_convex_automata_run_under_the_convex_modality():
    states = ("u", "v")
    gamma = {
        "u": ConvexSet(states, (Distribution.dirac(states, "u"),)),
        "v": ConvexSet(
            states,
            (
                Distribution.dirac(states, "u"),
                Distribution.dirac(states, "v"),
            ),
        ),
    }
    auto = Coalgebra.convex_automaton(states, gamma)
    for construction in ("kantorovich", "wasserstein"):
        res = behavioural_distance(
            auto, Lifting(Modality.convex_sup_expectation(), construction)
        )
        assert res.converged
        assert all(v == 0 for row in res.d for v in row)


def test_modality_kind_mismatches_are_rejected():
    chain = swap_chain()
    with pytest.raises(ValidationError):
        behavioural_distance(chain, Lifting(Modality.sup(), "kantorovich"))
    with pytest.raises(ValidationError):
        behavioural_distance(
            chain, Lifting(Modality.convex_sup_expectation(), "kantorovich")
        )
    states = ("u",)
    auto = Coalgebra.convex_automaton(
        states, {"u": ConvexSet(states, (Distribution.dirac(states, "u"),))}
    )
    with pytest.raises(ValidationError):
        behavioural_distance(auto, Lifting(Modality.expectation(), "kantorovich"))


def test_step_requires_matching_carrier():
    chain = swap_chain()
    lifting = Lifting(Modality.expectation(), "kantorovich")
    wrong = PseudometricSpace(("a", "b"), [[F(0), F(0)], [F(0), F(0)]])
    with pytest.raises(ValidationError):
        bdist_step(chain, lifting, wrong)
