"""Levy-Prokhorov distance on finite carriers, computed two independent ways.

``lp_direct`` works from the definition: the least epsilon such that every
subset A of the support satisfies mu(A) <= nu(A^eps) + eps, where A^eps
collects the targets within distance epsilon of A.  Between consecutive
distinct relation values the expansion is constant, so the least feasible
epsilon per subset is a finite scan.

``ky_fan`` computes the same quantity through couplings: the least epsilon
admitting a coupling that puts mass at most epsilon on pairs farther than
epsilon apart.  The two agree (a finite Strassen argument); the test suite
checks this on random instances rather than asserting it here.

``crisp_price_pair`` and ``duality_witness`` build the certificates used to
bound price-function values from below: 0/1 dual prices for a crisp
relation, and from them a nonexpansive pair whose evaluation gap under the
generally kind is exactly the requested epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import _config
from .distributions import Distribution, FuzzyPredicate, expectation
from .errors import (
    GuardLimitError,
    InternalCheckError,
    PreconditionError,
    ValidationError,
)
from .liftings import LiftedValue, ThresholdCoupling, _generally_sweep
from .lp import Constraint, LinearProgram, solve_lp, solve_transport
from .modalities import generally_value
from .rationals import ONE, ZERO, format_rational
from .spaces import FuzzyRelation, PseudometricSpace, relation_of_metric


def _as_relation(ground) -> FuzzyRelation:
    if isinstance(ground, PseudometricSpace):
        return relation_of_metric(ground)
    if isinstance(ground, FuzzyRelation):
        return ground
    raise ValidationError("ground must be a PseudometricSpace or FuzzyRelation")


def _check_carriers(rel: FuzzyRelation, s: Distribution, t: Distribution):
    if not isinstance(s, Distribution) or not isinstance(t, Distribution):
        raise ValidationError("s and t must be Distributions")
    if s.points != rel.sources or t.points != rel.targets:
        raise ValidationError("distribution carriers do not match the ground")


@dataclass(frozen=True)
class LevyProkhorovValue:
    value: Fraction
    worst_set: tuple[str, ...]
    direction: str  # "forward" or "backward"


def _one_sided(
    r, sources, targets, s_mass, t_mass
) -> tuple[Fraction, tuple[int, ...]]:
    support = [i for i, m in enumerate(s_mass) if m > 0]
    limit = _config.guard("SUBSET_POINTS")
    if len(support) > limit:
        raise GuardLimitError(
            f"support of size {len(support)} exceeds the subset guard {limit}; "
            "raise LIFTLAB_GUARD_SUBSET_POINTS to force"
        )
    levels = [ZERO] + sorted({v for row in r for v in row if v > 0})
    # masks[x][k]: bitmask of targets within levels[k] of source x
    masks = [
        [
            sum(1 << j for j, v in enumerate(r[i]) if v <= level)
            for level in levels
        ]
        for i in support
    ]
    best = ZERO
    best_bits: tuple[int, ...] = ()
    for bits in range(1, 1 << len(support)):
        members = [b for b in range(len(support)) if bits >> b & 1]
        mu_a = sum(s_mass[support[b]] for b in members)
        eps_a = None
        for k, level in enumerate(levels):
            expanded = 0
            for b in members:
                expanded |= masks[b][k]
            reach = sum(
                t_mass[j] for j in range(len(targets)) if expanded >> j & 1
            )
            candidate = max(level, mu_a - reach)
            if k + 1 == len(levels) or candidate < levels[k + 1]:
                eps_a = candidate
                break
        assert eps_a is not None
        if eps_a > best:
            best = eps_a
            best_bits = tuple(support[b] for b in members)
    return best, best_bits


def lp_direct(
    ground, s: Distribution, t: Distribution, symmetrized: bool = False
) -> LevyProkhorovValue:
    """Least epsilon with mu(A) <= nu(A^eps) + eps for all A, by enumeration.

    With symmetrized=True the mirrored condition on target-side subsets is
    imposed as well; over symmetric grounds both directions already agree.
    """
    rel = _as_relation(ground)
    _check_carriers(rel, s, t)
    value, bits = _one_sided(rel.r, rel.sources, rel.targets, s.mass, t.mass)
    worst = tuple(rel.sources[i] for i in bits)
    direction = "forward"
    if symmetrized:
        transposed = [
            [rel.r[i][j] for i in range(len(rel.sources))]
            for j in range(len(rel.targets))
        ]
        back, back_bits = _one_sided(
            transposed, rel.targets, rel.sources, t.mass, s.mass
        )
        if back > value:
            value = back
            worst = tuple(rel.targets[j] for j in back_bits)
            direction = "backward"
    return LevyProkhorovValue(value, worst, direction)


def ky_fan(ground, s: Distribution, t: Distribution) -> LiftedValue:
    """Least epsilon admitting a coupling with mass <= epsilon beyond epsilon.

    Equals the coupling lifting for the generally kind; the witness coupling
    is certified at the returned threshold.
    """
    rel = _as_relation(ground)
    _check_carriers(rel, s, t)
    value, coupling, eps_star = _generally_sweep(rel, s, t)
    return LiftedValue(value, "exact", ThresholdCoupling(eps_star, coupling))


@dataclass(frozen=True)
class CrispPricePair:
    """0/1 prices p, q with q(y) - p(x) <= R(x, y), optimal for the gap."""

    p: FuzzyPredicate
    q: FuzzyPredicate
    value: Fraction

    def violations(self, crisp, s: Distribution, t: Distribution) -> list[str]:
        out = []
        for vec in (self.p.values, self.q.values):
            for v in vec:
                if v not in (0, 1):
                    out.append("prices must be 0/1-valued")
        for i in range(len(self.p.values)):
            for j in range(len(self.q.values)):
                if self.q.values[j] - self.p.values[i] > crisp[i][j]:
                    out.append(f"price pair infeasible at ({i},{j})")
        gap = expectation(t, self.q) - expectation(s, self.p)
        if gap != self.value:
            out.append("recorded value does not match the price gap")
        return out


def crisp_price_pair(
    crisp, s: Distribution, t: Distribution
) -> CrispPricePair:
    """Optimal 0/1 prices for a 0/1 cost matrix.

    Solves the box dual of the transport problem; its constraint matrix is
    a network matrix, so the simplex vertex is integral.  The gap equals
    the transport optimum; both facts are asserted against independent
    recomputation.
    """
    nx, ny = len(s.points), len(t.points)
    if len(crisp) != nx or any(len(row) != ny for row in crisp):
        raise ValidationError("crisp matrix shape does not match the carriers")
    for row in crisp:
        for v in row:
            if v not in (0, 1):
                raise ValidationError("crisp matrix entries must be 0 or 1")
    variables = [f"p[{i}]" for i in range(nx)] + [f"q[{j}]" for j in range(ny)]
    constraints = []
    for i in range(nx):
        for j in range(ny):
            if crisp[i][j] >= 1:
                continue
            row = [ZERO] * (nx + ny)
            row[i] = -ONE
            row[nx + j] = ONE
            constraints.append(Constraint(row, "<=", Fraction(crisp[i][j]), f"ne[{i},{j}]"))
    lp = LinearProgram(
        variables,
        [-m for m in s.mass] + list(t.mass),
        "max",
        constraints,
        lower=[ZERO] * (nx + ny),
        upper=[ONE] * (nx + ny),
    )
    sol = solve_lp(lp)
    if sol.status != "optimal":
        raise InternalCheckError("box dual of a transport problem must be solvable")
    p_vals = [sol.assignment[f"p[{i}]"] for i in range(nx)]
    q_vals = [sol.assignment[f"q[{j}]"] for j in range(ny)]
    for v in p_vals + q_vals:
        if v not in (0, 1):
            raise InternalCheckError("box dual vertex is not 0/1-valued")
    cost = [[Fraction(v) for v in row] for row in crisp]
    primal = solve_transport(cost, s, t)
    if primal.cost != sol.value:
        raise InternalCheckError("crisp price gap does not equal the transport cost")
    pair = CrispPricePair(
        FuzzyPredicate(s.points, p_vals),
        FuzzyPredicate(t.points, q_vals),
        sol.value,
    )
    bad = pair.violations(crisp, s, t)
    if bad:
        raise InternalCheckError("; ".join(bad))
    return pair


@dataclass(frozen=True)
class DualityWitness:
    """Nonexpansive pair whose generally-evaluation gap is exactly epsilon.

    Built from optimal 0/1 prices for the relation thresholded strictly
    above epsilon: f = a + eps*p and g = a + eps*q with a = E_s[p].  Valid
    whenever 0 < eps < the distance value, and certifies the value from
    below at margin eps.
    """

    f: FuzzyPredicate
    g: FuzzyPredicate
    epsilon: Fraction
    crisp_pair: CrispPricePair


def duality_witness(
    ground, s: Distribution, t: Distribution, epsilon: Fraction
) -> DualityWitness:
    rel = _as_relation(ground)
    _check_carriers(rel, s, t)
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise PreconditionError("epsilon must be strictly positive")
    crisp = [[ONE if v > epsilon else ZERO for v in row] for row in rel.r]
    pair = crisp_price_pair(crisp, s, t)
    if pair.value <= epsilon:
        raise PreconditionError(
            f"epsilon = {format_rational(epsilon)} is not below the distance value"
        )
    shift = expectation(s, pair.p)
    f = FuzzyPredicate(rel.sources, [shift + epsilon * v for v in pair.p.values])
    g = FuzzyPredicate(rel.targets, [shift + epsilon * v for v in pair.q.values])
    for i in range(len(rel.sources)):
        for j in range(len(rel.targets)):
            if g.values[j] - f.values[i] > rel.r[i][j]:
                raise InternalCheckError("duality witness pair is not nonexpansive")
    gap = generally_value(g, t) - generally_value(f, s)
    if gap != epsilon:
        raise InternalCheckError(
            "duality witness gap "
            f"{format_rational(gap)} differs from epsilon {format_rational(epsilon)}"
        )
    return DualityWitness(f, g, epsilon, pair)
