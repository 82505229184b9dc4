"""Evaluation maps sending [0, 1]-valued predicates to [0, 1] values.

Supported kinds:

    expectation             E_mu[f] for a distribution mu
    sup / inf               extrema of f over a finite point set
    generally               the threshold value inf { e >= 0 : mu(f > e) <= e }
    p_moment                (E_mu[f^p])^(1/p), p >= 1, high-precision decimal
    convex_sup_expectation  sup of E_mu[f] over a convex set, via generators

All kinds except p_moment evaluate exactly in rationals.  The generally kind
is computed from the crossing of the decreasing step function
e |-> mu({f > e}) with the identity; ``generally_representations`` returns
all eight equivalent formulations (four forms, each with strict and
non-strict threshold) which agree at the crossing abscissa.

p_moment values are mpmath floats carrying ``digits`` significant decimal
digits (default 30, at least 12); every comparison involving them uses an
explicit 1e-12 tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import mpmath

from .distributions import Distribution, FuzzyPredicate, expectation
from .errors import ValidationError
from .rationals import ONE, ZERO, format_rational, oplus, parse_rational

PMOMENT_TOLERANCE = Fraction(1, 10**12)

_KINDS = (
    "expectation",
    "sup",
    "inf",
    "generally",
    "p_moment",
    "convex_sup_expectation",
)


@dataclass(frozen=True)
class Modality:
    kind: str
    p: Optional[Fraction] = None
    digits: int = 30

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown modality kind {self.kind!r}")
        if self.kind == "p_moment":
            if self.p is None or self.p < 1:
                raise ValidationError("p_moment requires p >= 1")
            if self.digits < 12:
                raise ValidationError("p_moment precision must be >= 12 digits")
        elif self.p is not None:
            raise ValidationError(f"modality {self.kind} takes no parameter p")

    @classmethod
    def expectation(cls) -> "Modality":
        return cls("expectation")

    @classmethod
    def sup(cls) -> "Modality":
        return cls("sup")

    @classmethod
    def inf(cls) -> "Modality":
        return cls("inf")

    @classmethod
    def generally(cls) -> "Modality":
        return cls("generally")

    @classmethod
    def p_moment(cls, p, digits: int = 30) -> "Modality":
        return cls("p_moment", p=Fraction(p), digits=digits)

    @classmethod
    def convex_sup_expectation(cls) -> "Modality":
        return cls("convex_sup_expectation")


def parse_modality(spec) -> Modality:
    """Parse "expectation", "p_moment:2", {"p_moment": "2"}, ... into a Modality."""
    if isinstance(spec, Modality):
        return spec
    if isinstance(spec, dict):
        if set(spec) == {"p_moment"}:
            inner = spec["p_moment"]
            if isinstance(inner, dict):
                return Modality.p_moment(
                    parse_rational(inner["p"]), int(inner.get("digits", 30))
                )
            return Modality.p_moment(parse_rational(inner))
        raise ValidationError(f"unknown modality spec {spec!r}")
    if isinstance(spec, str):
        name = spec.strip().replace("-", "_")
        if name in _KINDS and name != "p_moment":
            return Modality(name)
        if name.startswith("p_moment:"):
            parts = name.split(":")[1:]
            p = parse_rational(parts[0])
            digits = int(parts[1]) if len(parts) > 1 else 30
            return Modality.p_moment(p, digits)
    raise ValidationError(f"unknown modality spec {spec!r}")


def _point_set(arg) -> tuple[str, ...]:
    if isinstance(arg, (list, tuple, frozenset, set)):
        return tuple(sorted(arg)) if isinstance(arg, (set, frozenset)) else tuple(arg)
    raise ValidationError("sup/inf modalities take a finite point set")


def _tail_mass(
    f: FuzzyPredicate, mu: Distribution, threshold: Fraction, strict: bool
) -> Fraction:
    if strict:
        return sum(
            (m for m, v in zip(mu.mass, f.values) if v > threshold), ZERO
        )
    return sum((m for m, v in zip(mu.mass, f.values) if v >= threshold), ZERO)


def _breakpoints(f: FuzzyPredicate) -> list[Fraction]:
    return sorted(set(f.values) | {ZERO, ONE})


def _crossing_candidates(f, mu, strict):
    """Yield (breakpoint values, interval data) for the tail-mass step function."""
    bp = _breakpoints(f)
    point_vals = [(b, _tail_mass(f, mu, b, strict)) for b in bp]
    intervals = []
    for a, b in zip(bp, bp[1:]):
        mid = (a + b) / 2
        intervals.append((a, b, _tail_mass(f, mu, mid, strict)))
    return point_vals, intervals


def _threshold_inf(f, mu, strict) -> Fraction:
    """inf { e in [0,1] : mu-tail(e) <= e }  (the tail uses > when strict)."""
    point_vals, intervals = _crossing_candidates(f, mu, strict)
    candidates = [b for b, g in point_vals if g <= b]
    for a, b, g in intervals:
        if g <= a:
            candidates.append(a)
        elif g < b:
            candidates.append(g)
    if not candidates:
        raise ValidationError("threshold crossing missing; masses exceed 1?")
    return min(candidates)


def _threshold_sup(f, mu, strict) -> Fraction:
    """sup { e in [0,1] : mu-tail(e) >= e }."""
    point_vals, intervals = _crossing_candidates(f, mu, strict)
    candidates = [b for b, g in point_vals if g >= b]
    for a, b, g in intervals:
        if g >= b:
            candidates.append(b)
        elif g > a:
            candidates.append(g)
    return max(candidates) if candidates else ZERO


def _minimax(f, mu, strict) -> Fraction:
    """inf over e in [0,1] of max(mu-tail(e), e)."""
    point_vals, intervals = _crossing_candidates(f, mu, strict)
    candidates = [max(g, b) for b, g in point_vals]
    candidates += [max(g, a) for a, _b, g in intervals]
    return min(candidates)


def _maximin(f, mu, strict) -> Fraction:
    """sup over e in [0,1] of min(mu-tail(e), e)."""
    point_vals, intervals = _crossing_candidates(f, mu, strict)
    candidates = [min(g, b) for b, g in point_vals]
    candidates += [min(g, b) for _a, b, g in intervals]
    return max(candidates)


def generally_value(f: FuzzyPredicate, mu: Distribution) -> Fraction:
    """The defining strict-threshold form, computed exactly."""
    if f.points != mu.points:
        raise ValidationError("predicate and distribution carriers differ")
    return _threshold_inf(f, mu, strict=True)


@dataclass(frozen=True)
class GenerallyRepresentations:
    threshold_inf_strict: Fraction
    threshold_inf_nonstrict: Fraction
    minimax_strict: Fraction
    minimax_nonstrict: Fraction
    maximin_strict: Fraction
    maximin_nonstrict: Fraction
    threshold_sup_strict: Fraction
    threshold_sup_nonstrict: Fraction

    def values(self) -> tuple[Fraction, ...]:
        return (
            self.threshold_inf_strict,
            self.threshold_inf_nonstrict,
            self.minimax_strict,
            self.minimax_nonstrict,
            self.maximin_strict,
            self.maximin_nonstrict,
            self.threshold_sup_strict,
            self.threshold_sup_nonstrict,
        )

    @property
    def all_equal(self) -> bool:
        vals = self.values()
        return all(v == vals[0] for v in vals)


def generally_representations(
    f: FuzzyPredicate, mu: Distribution
) -> GenerallyRepresentations:
    if f.points != mu.points:
        raise ValidationError("predicate and distribution carriers differ")
    return GenerallyRepresentations(
        threshold_inf_strict=_threshold_inf(f, mu, True),
        threshold_inf_nonstrict=_threshold_inf(f, mu, False),
        minimax_strict=_minimax(f, mu, True),
        minimax_nonstrict=_minimax(f, mu, False),
        maximin_strict=_maximin(f, mu, True),
        maximin_nonstrict=_maximin(f, mu, False),
        threshold_sup_strict=_threshold_sup(f, mu, True),
        threshold_sup_nonstrict=_threshold_sup(f, mu, False),
    )


def _p_moment_value(m: Modality, f: FuzzyPredicate, mu: Distribution):
    assert m.p is not None
    with mpmath.mp.workdps(m.digits):
        if m.p.denominator == 1:
            # Integer p: the p-th moment itself is an exact rational.
            moment = sum(
                (mass * v ** m.p.numerator for mass, v in zip(mu.mass, f.values)),
                ZERO,
            )
            base = mpmath.mpf(moment.numerator) / mpmath.mpf(moment.denominator)
        else:
            p = mpmath.mpf(m.p.numerator) / mpmath.mpf(m.p.denominator)
            base = mpmath.mpf(0)
            for mass, v in zip(mu.mass, f.values):
                if mass:
                    term = mpmath.power(
                        mpmath.mpf(v.numerator) / mpmath.mpf(v.denominator), p
                    )
                    base += (
                        mpmath.mpf(mass.numerator) / mpmath.mpf(mass.denominator)
                    ) * term
        if base == 0:
            return mpmath.mpf(0)
        return mpmath.power(base, mpmath.mpf(1) / (
            mpmath.mpf(m.p.numerator) / mpmath.mpf(m.p.denominator)
        ))


def eval_modality(m: Modality, f: FuzzyPredicate, arg):
    """Evaluate the modality on predicate f at the given argument.

    The argument is a Distribution (expectation, generally, p_moment), a
    point set (sup, inf), or a convex set of distributions given by
    generators (convex_sup_expectation).  Returns a Fraction, or an mpmath
    float for p_moment.
    """
    if m.kind == "expectation":
        if not isinstance(arg, Distribution):
            raise ValidationError("expectation takes a Distribution argument")
        return expectation(arg, f)
    if m.kind == "sup":
        pts = _point_set(arg)
        return max((f(p) for p in pts), default=ZERO)
    if m.kind == "inf":
        pts = _point_set(arg)
        return min((f(p) for p in pts), default=ONE)
    if m.kind == "generally":
        if not isinstance(arg, Distribution):
            raise ValidationError("generally takes a Distribution argument")
        return generally_value(f, arg)
    if m.kind == "p_moment":
        if not isinstance(arg, Distribution):
            raise ValidationError("p_moment takes a Distribution argument")
        if f.points != arg.points:
            raise ValidationError("predicate and distribution carriers differ")
        return _p_moment_value(m, f, arg)
    if m.kind == "convex_sup_expectation":
        generators = getattr(arg, "generators", None)
        if not generators:
            raise ValidationError(
                "convex_sup_expectation takes a convex set with generators"
            )
        return max(expectation(nu, f) for nu in generators)
    raise ValidationError(f"unknown modality kind {m.kind!r}")


def dual_eval(m: Modality, f: FuzzyPredicate, arg):
    """1 - eval(m, 1 - f, arg): the De Morgan dual evaluation."""
    val = eval_modality(m, f.complement(), arg)
    if m.kind == "p_moment":
        return mpmath.mpf(1) - val
    return ONE - val


@dataclass(frozen=True)
class WellBehavedViolation:
    law: str  # "monotone" | "subadditive" | "zero"
    index: int
    detail: str


@dataclass(frozen=True)
class WellBehavedReport:
    ok: bool
    checked: int
    violations: tuple[WellBehavedViolation, ...]


def _leq(a, b, tolerant: bool) -> bool:
    if tolerant:
        return a <= b + PMOMENT_TOLERANCE
    return a <= b


def check_well_behaved(m: Modality, triples: Iterable[tuple]) -> WellBehavedReport:
    """Check monotonicity, truncated-sum subadditivity, and zero preservation.

    Each triple is (f, g, arg).  Monotonicity is checked on the comparable
    pair f <= f (+) g; subadditivity as eval(f (+) g) <= eval(f) (+) eval(g);
    zero preservation on the constant-zero predicate over the same carrier.
    p_moment comparisons use the 1e-12 tolerance, everything else is exact.
    """
    violations: list[WellBehavedViolation] = []
    tolerant = m.kind == "p_moment"
    count = 0
    for index, (f, g, arg) in enumerate(triples):
        count += 1
        fg = f.oplus(g)
        vf = eval_modality(m, f, arg)
        vg = eval_modality(m, g, arg)
        vfg = eval_modality(m, fg, arg)
        if not _leq(vf, vfg, tolerant):
            violations.append(
                WellBehavedViolation(
                    "monotone", index, f"eval(f)={vf} > eval(f(+)g)={vfg}"
                )
            )
        bound = min(ONE, vf + vg) if not tolerant else min(mpmath.mpf(1), vf + vg)
        if not _leq(vfg, bound, tolerant):
            violations.append(
                WellBehavedViolation(
                    "subadditive", index, f"eval(f(+)g)={vfg} > {bound}"
                )
            )
        zero = FuzzyPredicate.constant(f.points, ZERO)
        vz = eval_modality(m, zero, arg)
        if not (vz == 0 or (tolerant and abs(vz) <= PMOMENT_TOLERANCE)):
            violations.append(
                WellBehavedViolation("zero", index, f"eval(0)={vz} != 0")
            )
    return WellBehavedReport(not violations, count, tuple(violations))
