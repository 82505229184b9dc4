"""Behavioural distances on finite transition systems by fixpoint iteration.

A coalgebra assigns each state a successor structure: a distribution over
states (markov_chain), an output in [0, 1] together with a distribution
(labelled_markov_chain), or a convex set of distributions
(convex_automaton).  One step of the distance functional lifts the current
pseudometric on states to successor structures; the behavioural distance is
the least fixpoint, approached from the zero pseudometric by Kleene
iteration.  Iterates grow entrywise and every iterate is itself a
pseudometric; both facts are checked at runtime.

Stopping is by exact rational repetition when possible, with an entrywise
tolerance as fallback; the result records which rule fired.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .convex_powerset import ConvexSet, dhk_composite, dhk_dual
from .distributions import Distribution
from .errors import InternalCheckError, ValidationError
from .liftings import kantorovich, wasserstein
from .modalities import Modality, parse_modality
from .rationals import ZERO, check_unit, parse_rational
from .spaces import PseudometricSpace, require_valid, validate

_CONSTRUCTIONS = ("kantorovich", "wasserstein")


@dataclass(frozen=True)
class Lifting:
    """Which evaluation map and which construction drive the iteration."""

    modality: Modality
    construction: str

    def __post_init__(self):
        if self.construction not in _CONSTRUCTIONS:
            raise ValidationError(
                f"construction must be one of {_CONSTRUCTIONS}"
            )


def parse_lifting(raw) -> Lifting:
    if isinstance(raw, Lifting):
        return raw
    if isinstance(raw, dict):
        return Lifting(
            parse_modality(raw.get("modality", "expectation")),
            raw.get("construction", "kantorovich"),
        )
    raise ValidationError("lifting must be a Lifting or a mapping")


@dataclass(frozen=True)
class Coalgebra:
    """Finite state space with one successor structure per state."""

    kind: str
    states: tuple[str, ...]
    successors: tuple

    def __init__(self, kind, states, successors):
        states = tuple(states)
        successors = tuple(successors)
        if kind not in ("markov_chain", "labelled_markov_chain", "convex_automaton"):
            raise ValidationError(f"unknown coalgebra kind {kind!r}")
        if len(successors) != len(states):
            raise ValidationError("one successor structure per state required")
        for s in successors:
            if kind == "markov_chain":
                if not isinstance(s, Distribution) or s.points != states:
                    raise ValidationError(
                        "markov_chain successors must be distributions on the states"
                    )
            elif kind == "labelled_markov_chain":
                if (
                    not isinstance(s, tuple)
                    or len(s) != 2
                    or not isinstance(s[1], Distribution)
                    or s[1].points != states
                ):
                    raise ValidationError(
                        "labelled successors must be (output, distribution) pairs"
                    )
                check_unit(Fraction(s[0]), "output")
            else:
                if not isinstance(s, ConvexSet) or s.points != states:
                    raise ValidationError(
                        "convex_automaton successors must be convex sets on the states"
                    )
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "successors", successors)

    @classmethod
    def markov_chain(cls, states, gamma: dict) -> "Coalgebra":
        states = tuple(states)
        return cls(
            "markov_chain", states, [_lookup(gamma, s) for s in states]
        )

    @classmethod
    def labelled_markov_chain(cls, states, gamma: dict) -> "Coalgebra":
        states = tuple(states)
        succ = []
        for s in states:
            out, nxt = _lookup(gamma, s)
            succ.append((parse_rational(out), nxt))
        return cls("labelled_markov_chain", states, succ)

    @classmethod
    def convex_automaton(cls, states, gamma: dict) -> "Coalgebra":
        states = tuple(states)
        return cls(
            "convex_automaton", states, [_lookup(gamma, s) for s in states]
        )


def _lookup(gamma: dict, state: str):
    if state not in gamma:
        raise ValidationError(f"no successor structure for state {state!r}")
    return gamma[state]


@dataclass(frozen=True)
class MetricIterate:
    d: tuple[tuple[Fraction, ...], ...]
    iteration: int
    converged: bool
    stop_reason: str  # "exact", "tolerance" or "max_iters"

    def space(self, states: tuple[str, ...]) -> PseudometricSpace:
        return PseudometricSpace(states, [list(row) for row in self.d])


def _check_lifting_kind(c: Coalgebra, lifting: Lifting):
    kind = lifting.modality.kind
    if c.kind == "convex_automaton":
        if kind != "convex_sup_expectation":
            raise ValidationError(
                "convex automata require the convex_sup_expectation modality"
            )
    else:
        if kind not in ("expectation", "generally"):
            raise ValidationError(
                f"{c.kind} supports expectation or generally, not {kind!r}"
            )


def bdist_step(
    c: Coalgebra, lifting: Lifting, d: PseudometricSpace
) -> PseudometricSpace:
    """One application of the distance functional to a pseudometric.

    The new distance between two states is the lifted distance between
    their successor structures under d; labelled chains take the max of
    the output gap and the lifted successor distance.
    """
    lifting = parse_lifting(lifting)
    _check_lifting_kind(c, lifting)
    require_valid(d)
    if d.points != c.states:
        raise ValidationError("pseudometric carrier must equal the state space")
    n = len(c.states)
    m = lifting.modality

    def lifted(a, b) -> Fraction:
        if lifting.construction == "wasserstein":
            return wasserstein(m, d, a, b).value
        return kantorovich(m, d, a, b, witness_depth=0).value

    new = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if c.kind == "markov_chain":
                val = lifted(c.successors[i], c.successors[j])
            elif c.kind == "labelled_markov_chain":
                out_i, next_i = c.successors[i]
                out_j, next_j = c.successors[j]
                val = max(abs(out_i - out_j), lifted(next_i, next_j))
            else:
                if lifting.construction == "wasserstein":
                    val = dhk_composite(d, c.successors[i], c.successors[j]).value
                else:
                    val = dhk_dual(d, c.successors[i], c.successors[j]).value
            new[i][j] = val
            new[j][i] = val
    result = PseudometricSpace(c.states, new)
    violations = validate(result)
    if violations:
        raise InternalCheckError(
            "lifted step produced a non-pseudometric: "
            + "; ".join(v.detail for v in violations)
        )
    return result


def behavioural_distance(
    c: Coalgebra,
    lifting: Lifting,
    max_iters: int = 1000,
    tolerance: Optional[Fraction] = None,
) -> MetricIterate:
    """Least-fixpoint distance by Kleene iteration from the zero pseudometric.

    Stops on exact repetition of an iterate, entrywise change below
    tolerance (default 10^-9), or max_iters; the stop_reason field records
    which.  Iterates must grow entrywise; a decrease is an internal error.
    """
    lifting = parse_lifting(lifting)
    if tolerance is None:
        tolerance = Fraction(1, 10**9)
    n = len(c.states)
    current = PseudometricSpace(c.states, [[ZERO] * n for _ in range(n)])
    for iteration in range(1, max_iters + 1):
        nxt = bdist_step(c, lifting, current)
        delta = ZERO
        for i in range(n):
            for j in range(n):
                step = nxt.d[i][j] - current.d[i][j]
                if step < 0:
                    raise InternalCheckError(
                        "Kleene iterate decreased at "
                        f"({c.states[i]}, {c.states[j]})"
                    )
                delta = max(delta, step)
        frozen = tuple(tuple(row) for row in nxt.d)
        if delta == 0:
            return MetricIterate(frozen, iteration, True, "exact")
        if delta < tolerance:
            return MetricIterate(frozen, iteration, True, "tolerance")
        current = nxt
    frozen = tuple(tuple(row) for row in current.d)
    return MetricIterate(frozen, max_iters, False, "max_iters")
