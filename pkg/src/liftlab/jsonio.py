"""JSON schemas for spaces, relations, distributions, convex sets and
coalgebras, plus serializers for computed values and witnesses.

Rationals travel as "p/q" strings (bare integers allowed).  Spaces are
{"points": [...], "d": [[...], ...]}; a relation adds a "targets" list.
Distributions are {"space": <inline space, optional>, "mass": {point:
rational}} with omitted points at mass zero; a bare mass mapping is
accepted when the carrier is supplied by context.  Serialized output is
deterministic: plain dicts with stable insertion order, rationals exact.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .behavioural import Coalgebra, MetricIterate
from .convex_powerset import ConvexSet, HkResult, PointToSetResult
from .distributions import Coupling, Distribution, FuzzyPredicate
from .errors import ValidationError
from .levy_prokhorov import CrispPricePair, DualityWitness, LevyProkhorovValue
from .liftings import (
    LiftedValue,
    NonexpansivePair,
    PairingRelation,
    ThresholdCoupling,
)
from .rationals import decimal_string, format_rational, parse_rational
from .spaces import FuzzyRelation, PseudometricSpace


# ---------------------------------------------------------------------------
# Parsing


def _require(obj, key: str, context: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError(f"{context} must be an object with a {key!r} field")
    return obj[key]


def _parse_matrix(raw, context: str):
    if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
        raise ValidationError(f"{context} must be a list of rows")
    return [[parse_rational(v) for v in row] for row in raw]


def parse_space(obj) -> PseudometricSpace:
    points = _require(obj, "points", "space")
    d = _parse_matrix(_require(obj, "d", "space"), "space matrix")
    return PseudometricSpace(points, d)


def parse_relation(obj) -> FuzzyRelation:
    sources = _require(obj, "points", "relation")
    targets = _require(obj, "targets", "relation")
    key = "d" if "d" in obj else "r"
    r = _parse_matrix(_require(obj, key, "relation"), "relation matrix")
    return FuzzyRelation(sources, targets, r)


def parse_ground(obj):
    """A space, or a relation when a "targets" list is present."""
    if isinstance(obj, dict) and "targets" in obj:
        return parse_relation(obj)
    return parse_space(obj)


def parse_distribution(obj, carrier=None) -> Distribution:
    """Distribution from {"space": ..., "mass": {...}} or a bare mass map.

    An inline "space" object fixes the carrier; otherwise the carrier

    argument (point order) is required.  Unlisted points get mass zero.
    """
    if isinstance(obj, dict) and "mass" in obj:
        mass_map = obj["mass"]
        inline = obj.get("space")
        if isinstance(inline, dict):
            carrier = tuple(_require(inline, "points", "space"))
    elif isinstance(obj, dict):
        mass_map = obj
    else:
        raise ValidationError("distribution must be an object")
    if carrier is None:
        raise ValidationError("distribution carrier is not determined")
    if not isinstance(mass_map, dict):
        raise ValidationError("mass must map points to rationals")
    parsed = {p: parse_rational(v) for p, v in mass_map.items()}
    return Distribution.from_mapping(tuple(carrier), parsed)


def parse_point_set(obj, carrier) -> tuple[str, ...]:
    if isinstance(obj, dict) and "set" in obj:
        obj = obj["set"]
    if not isinstance(obj, list):
        raise ValidationError('a point set is a list or {"set": [...]}')
    del carrier  # membership is checked by the consuming operation
    return tuple(obj)


def parse_convex_set(obj, carrier=None) -> ConvexSet:
    gens = _require(obj, "generators", "convex set")
    inline = obj.get("space")
    if isinstance(inline, dict):
        carrier = tuple(_require(inline, "points", "space"))
    if carrier is None:
        raise ValidationError("convex set carrier is not determined")
    carrier = tuple(carrier)
    return ConvexSet(
        carrier, tuple(parse_distribution(g, carrier) for g in gens)
    )


def parse_coalgebra(obj) -> Coalgebra:
    kind = _require(obj, "kind", "coalgebra")
    states = tuple(_require(obj, "states", "coalgebra"))
    gamma_raw = _require(obj, "gamma", "coalgebra")
    if not isinstance(gamma_raw, dict):
        raise ValidationError("gamma must map states to successor structures")
    if kind == "markov_chain":
        gamma = {
            s: parse_distribution(v, states) for s, v in gamma_raw.items()
        }
        return Coalgebra.markov_chain(states, gamma)
    if kind == "labelled_markov_chain":
        gamma = {}
        for s, v in gamma_raw.items():
            out = _require(v, "out", "labelled successor")
            nxt = _require(v, "next", "labelled successor")
            gamma[s] = (parse_rational(out), parse_distribution(nxt, states))
        return Coalgebra.labelled_markov_chain(states, gamma)
    if kind == "convex_automaton":
        gamma = {s: parse_convex_set(v, states) for s, v in gamma_raw.items()}
        return Coalgebra.convex_automaton(states, gamma)
    raise ValidationError(f"unknown coalgebra kind {kind!r}")


# ---------------------------------------------------------------------------
# Serialization


def rational_json(v: Fraction) -> str:
    return format_rational(v)


def _value_field(value, digits: int = 12):
    if isinstance(value, Fraction):
        return {
            "value": format_rational(value),
            "decimal": decimal_string(value, digits),
        }
    with mpmath.mp.workdps(digits):
        return {"decimal": mpmath.nstr(+value, digits), "precision_digits": digits}


def space_json(space: PseudometricSpace) -> dict:
    return {
        "points": list(space.points),
        "d": [[format_rational(v) for v in row] for row in space.d],
    }


def relation_json(rel: FuzzyRelation) -> dict:
    return {
        "points": list(rel.sources),
        "targets": list(rel.targets),
        "d": [[format_rational(v) for v in row] for row in rel.r],
    }


def distribution_json(mu: Distribution) -> dict:
    return {
        "mass": {
            p: format_rational(m)
            for p, m in zip(mu.points, mu.mass)
            if m != 0
        }
    }


def predicate_json(f: FuzzyPredicate) -> dict:
    return {
        "points": list(f.points),
        "values": [format_rational(v) for v in f.values],
    }


def coupling_json(c: Coupling) -> dict:
    return {
        "sources": list(c.sources),
        "targets": list(c.targets),
        "joint": [[format_rational(v) for v in row] for row in c.joint],
    }


def witness_json(witness) -> dict:
    if witness is None:
        return {}
    if isinstance(witness, Coupling):
        return {"kind": "coupling", **coupling_json(witness)}
    if isinstance(witness, ThresholdCoupling):
        return {
            "kind": "threshold_coupling",
            "epsilon_star": format_rational(witness.epsilon_star),
            **coupling_json(witness.coupling),
        }
    if isinstance(witness, PairingRelation):
        return {"kind": "pairing", "pairs": [list(p) for p in witness.pairs]}
    if isinstance(witness, FuzzyPredicate):
        return {"kind": "price_function", **predicate_json(witness)}
    if isinstance(witness, NonexpansivePair):
        return {
            "kind": "price_pair",
            "f": predicate_json(witness.f),
            "g": predicate_json(witness.g),
        }
    if isinstance(witness, DualityWitness):
        return {
            "kind": "duality_witness",
            "epsilon": format_rational(witness.epsilon),
            "f": predicate_json(witness.f),
            "g": predicate_json(witness.g),
            "crisp_pair": witness_json(witness.crisp_pair),
        }
    if isinstance(witness, CrispPricePair):
        return {
            "kind": "crisp_price_pair",
            "value": format_rational(witness.value),
            "p": predicate_json(witness.p),
            "q": predicate_json(witness.q),
        }
    raise ValidationError(f"no serialization for witness {type(witness).__name__}")


def lifted_value_json(
    res: LiftedValue, include_witness: bool = False, digits: int = 12
) -> dict:
    out = dict(_value_field(res.value, digits))
    out["exactness"] = res.exactness
    if res.note:
        out["note"] = res.note
    if res.root_base is not None:
        out["root_base"] = format_rational(res.root_base)
    if include_witness and res.witness is not None:
        out["witness"] = witness_json(res.witness)
    return out


def lp_value_json(res: LevyProkhorovValue) -> dict:
    return {
        "value": format_rational(res.value),
        "decimal": decimal_string(res.value),
        "exactness": "exact",
        "worst_set": list(res.worst_set),
        "direction": res.direction,
    }


def point_to_set_json(res: PointToSetResult, include_witness: bool = False) -> dict:
    out = {
        "value": format_rational(res.value),
        "decimal": decimal_string(res.value),
        "weights": [format_rational(w) for w in res.weights],
        "mixture": distribution_json(res.mixture),
    }
    if include_witness:
        out["coupling"] = coupling_json(res.coupling)
    return out


def hk_result_json(res: HkResult, include_witness: bool = False) -> dict:
    def directed(d):
        out = {
            "value": format_rational(d.value),
            "generator_index": d.generator_index,
        }
        if include_witness and d.inner is not None:
            if isinstance(d.inner, PointToSetResult):
                out["point_to_set"] = point_to_set_json(d.inner, True)
            elif isinstance(d.inner, FuzzyPredicate):
                out["price_function"] = predicate_json(d.inner)
        return out

    return {
        "value": format_rational(res.value),
        "decimal": decimal_string(res.value),
        "method": res.method,
        "forward": directed(res.forward),
        "backward": directed(res.backward),
    }


def metric_iterate_json(it: MetricIterate, states) -> dict:
    return {
        "states": list(states),
        "distance": [[format_rational(v) for v in row] for row in it.d],
        "iterations": it.iteration,
        "converged": it.converged,
        "stop_reason": it.stop_reason,
    }
