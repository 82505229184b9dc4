import json
from fractions import Fraction

import pytest

from liftlab import (
    Coupling,
    Distribution,
    FuzzyPredicate,
    FuzzyRelation,
    LiftedValue,
    Modality,
    NonexpansivePair,
    PairingRelation,
    PseudometricSpace,
    ThresholdCoupling,
    ValidationError,
    duality_witness,
    kantorovich,
    lp_direct,
    wasserstein,
)
from liftlab.jsonio import (
    coupling_json,
    distribution_json,
    hk_result_json,
    lifted_value_json,
    lp_value_json,
    metric_iterate_json,
    parse_coalgebra,
    parse_convex_set,
    parse_distribution,
    parse_ground,
    parse_point_set,
    parse_relation,
    parse_space,
    predicate_json,
    rational_json,
    relation_json,
    space_json,
    witness_json,
)

F = Fraction


def sample_space():
    return PseudometricSpace(
        ("a", "b"), [[F(0), F(2, 3)], [F(2, 3), F(0)]]
    )


def test_space_round_trip():
    sp = sample_space()
    encoded = space_json(sp)
    assert encoded == {"points": ["a", "b"], "d": [["0", "2/3"], ["2/3", "0"]]}
    assert parse_space(encoded) == sp
    assert parse_ground(encoded) == sp
    with pytest.raises(ValidationError):
        parse_space({"points": ["a"]})
    with pytest.raises(ValidationError):
        parse_space({"points": ["a"], "d": "not a matrix"})


def test_relation_round_trip_accepts_both_matrix_keys():
    rel = FuzzyRelation(("x",), ("y", "z"), [[F(1, 2), F(1)]])
    encoded = relation_json(rel)
    assert encoded["targets"] == ["y", "z"]
    assert parse_relation(encoded) == rel
    assert parse_ground(encoded) == rel
    alt = {"points": ["x"], "targets": ["y", "z"], "r": [["1/2", "1"]]}
    assert parse_relation(alt) == rel


def test_distribution_round_trip_omits_zeros():
    mu = Distribution(("a", "b", "c"), [F(1, 3), F(0), F(2, 3)])
    encoded = distribution_json(mu)
    assert encoded == {"mass": {"a": "1/3", "c": "2/3"}}
    assert parse_distribution(encoded, carrier=("a", "b", "c")) == mu
    # bare mapping with carrier from context
    assert parse_distribution({"a": "1/3", "c": "2/3"}, ("a", "b", "c")) == mu
    # inline space fixes the carrier
    inline = {"space": {"points": ["a", "b", "c"]}, "mass": {"a": "1"}}
    assert parse_distribution(inline).points == ("a", "b", "c")
    with pytest.raises(ValidationError):
        parse_distribution({"mass": {"a": "1"}})  # no carrier anywhere
    with pytest.raises(ValidationError):
        parse_distribution({"mass": {"zz": "1"}}, ("a",))
    with pytest.raises(ValidationError):
        parse_distribution("nope", ("a",))


def test_point_set_parsing():
    assert parse_point_set(["a", "b"], ("a", "b")) == ("a", "b")
    assert parse_point_set({"set": ["b"]}, ("a", "b")) == ("b",)
    with pytest.raises(ValidationError):
        parse_point_set({"points": ["a"]}, ("a",))


def test_convex_set_round_trip():
    obj = {
        "space": {"points": ["a", "b"]},
        "generators": [{"mass": {"a": "1"}}, {"mass": {"a": "1/2", "b": "1/2"}}],
    }
    cs = parse_convex_set(obj)
    assert cs.points == ("a", "b")
    assert len(cs.generators) == 2
    assert cs.generators[1].mass == (F(1, 2), F(1, 2))
    with pytest.raises(ValidationError):
        parse_convex_set({"generators": []}, carrier=("a",))
    with pytest.raises(ValidationError):
        parse_convex_set({"generators": [{"mass": {"a": "1"}}]})


def test_coalgebra_parsing_all_kinds():
    mc = parse_coalgebra(
        {
            "kind": "markov_chain",
            "states": ["u", "v"],
            "gamma": {"u": {"v": "1"}, "v": {"u": "1"}},
        }
    )
    assert mc.kind == "markov_chain"
    lmc = parse_coalgebra(
        {
            "kind": "labelled_markov_chain",
            "states": ["u", "v"],
            "gamma": {
                "u": {"out": "0", "next": {"v": "1"}},
                "v": {"out": "1/2", "next": {"u": "1"}},
            },
        }
    )
    assert lmc.successors[1][0] == F(1, 2)
    ca = parse_coalgebra(
        {
            "kind": "convex_automaton",
            "states": ["u"],
            "gamma": {"u": {"generators": [{"u": "1"}]}},
        }
    )
    assert ca.kind == "convex_automaton"
    with pytest.raises(ValidationError):
        parse_coalgebra({"kind": "petri_net", "states": ["u"], "gamma": {}})
    with pytest.raises(ValidationError):
        parse_coalgebra({"kind": "markov_chain", "states": ["u"], "gamma": []})


def test_rational_and_value_fields():
    assert rational_json(F(4, 6)) == "2/3"
    out = lifted_value_json(LiftedValue(F(1, 3), "exact"))
    assert out["value"] == "1/3"
    assert out["decimal"].startswith("0.3333333333")
    assert out["exactness"] == "exact"
    import mpmath

    approx = lifted_value_json(LiftedValue(mpmath.mpf(2) ** -1, "lower-bound"))
    assert approx["precision_digits"] == 12
    assert "value" not in approx
    assert approx["decimal"] == "0.5"


def test_witness_json_dispatch():
    c = Coupling(("a",), ("b",), [[F(1)]])
    f = FuzzyPredicate(("a",), [F(1, 2)])
    pair = NonexpansivePair(f, FuzzyPredicate(("b",), [F(1)]))
    assert witness_json(None) == {}
    assert witness_json(c)["kind"] == "coupling"
    assert witness_json(ThresholdCoupling(F(0), c))["kind"] == "threshold_coupling"
    assert witness_json(PairingRelation((("a", "b"),)))["pairs"] == [["a", "b"]]
    assert witness_json(f)["kind"] == "price_function"
    assert witness_json(pair)["kind"] == "price_pair"
    with pytest.raises(ValidationError):
        witness_json(object())


def test_witness_json_for_duality_witness():
    sp = PseudometricSpace(("a", "b"), [[F(0), F(1)], [F(1), F(0)]])
    mu = Distribution(sp.points, [F(2, 3), F(1, 3)])
    nu = Distribution(sp.points, [F(1, 3), F(2, 3)])
    dw = duality_witness(sp, mu, nu, F(1, 4))
    encoded = witness_json(dw)
    assert encoded["kind"] == "duality_witness"
    assert encoded["epsilon"] == "1/4"
    assert encoded["crisp_pair"]["kind"] == "crisp_price_pair"
    assert encoded["f"]["values"] == ["1/3", "7/12"]


def test_lifted_and_lp_serialization_agree_on_values():
    sp = PseudometricSpace(("a", "b"), [[F(0), F(1)], [F(1), F(0)]])
    mu = Distribution(sp.points, [F(2, 3), F(1, 3)])
    nu = Distribution(sp.points, [F(1, 3), F(2, 3)])
    w = wasserstein(Modality.expectation(), sp, mu, nu)
    out = lifted_value_json(w, include_witness=True)
    assert out["value"] == "1/3"
    assert out["witness"]["kind"] == "coupling"
    direct = lp_value_json(lp_direct(sp, mu, nu))
    assert direct["value"] == "1/3" and direct["direction"] == "forward"


def test_serialization_is_deterministic():
    sp = sample_space()
    mu = Distribution(sp.points, [F(1, 3), F(2, 3)])
    nu = Distribution(sp.points, [F(1), F(0)])
    res = kantorovich(Modality.expectation(), sp, mu, nu)
    a = json.dumps(lifted_value_json(res, include_witness=True))
    b = json.dumps(
        lifted_value_json(
            kantorovich(Modality.expectation(), sp, mu, nu), include_witness=True
        )
    )
    assert a == b


def test_metric_iterate_serialization():
    from liftlab import Coalgebra, Lifting, behavioural_distance

    states = ("u", "v")
    chain = Coalgebra.labelled_markov_chain(
        states,
        {
            "u": (F(0), Distribution.dirac(states, "v")),
            "v": (F(1, 2), Distribution.dirac(states, "u")),
        },
    )
    res = behavioural_distance(chain, Lifting(Modality.expectation(), "kantorovich"))
    out = metric_iterate_json(res, states)
    assert out["distance"][0][1] == "1/2"
    assert out["converged"] is True
    assert out["stop_reason"] == "exact"
