"""Distribution distances obtained by lifting a ground distance.

Two constructions are implemented for each supported evaluation map:

* the coupling construction (``wasserstein``): optimise the lifted ground
  distance over all couplings of the two arguments;
* the price-function construction (``kantorovich`` and its relational
  variant): optimise the evaluation gap over nonexpansive [0, 1]-valued
  functions (pairs (f, g) with g(y) - f(x) <= r(x, y) in the relational
  case, single 1-Lipschitz f in the symmetric case).

The coupling value always dominates the price-function value; for
expectation (by LP strong duality), extrema over point sets, and the
generally kind (by the threshold-sweep argument, certified at runtime by
explicit witnesses) the two coincide and both routes return exact rationals.
For p_moment the price-function route only reports a grid-oracle lower
bound; the coupling route is exact up to the final p-th root.

All returned values carry witnesses that re-evaluate to the value (or bound
it as flagged): couplings, price functions, nonexpansive pairs, or duality
witnesses built from crisp price pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath

from . import _config
from .distributions import Coupling, Distribution, FuzzyPredicate, expectation
from .errors import GuardLimitError, InternalCheckError, ValidationError
from .lp import Constraint, LinearProgram, solve_lp, solve_transport
from .modalities import Modality, eval_modality, generally_value
from .rationals import ONE, ZERO, format_rational
from .spaces import (
    FuzzyRelation,
    PseudometricSpace,
    crisp_threshold,
    relation_of_metric,
    require_valid,
)

Ground = Union[PseudometricSpace, FuzzyRelation]


@dataclass(frozen=True)
class NonexpansivePair:
    """Functions f (on sources) and g (on targets) with g(y) - f(x) <= r(x, y)."""

    f: FuzzyPredicate
    g: FuzzyPredicate

    def violations(self, relation: FuzzyRelation) -> list[str]:
        if self.f.points != relation.sources or self.g.points != relation.targets:
            return ["carrier mismatch with relation"]
        out = []
        for i, x in enumerate(relation.sources):
            for j, y in enumerate(relation.targets):
                if self.g.values[j] - self.f.values[i] > relation.r[i][j]:
                    out.append(
                        f"g({y}) - f({x}) = "
                        f"{format_rational(self.g.values[j] - self.f.values[i])}"
                        f" > r = {format_rational(relation.r[i][j])}"
                    )
        return out


@dataclass(frozen=True)
class ThresholdCoupling:
    """A coupling certified at a threshold: mass of {r > epsilon_star} <= epsilon_star."""

    epsilon_star: Fraction
    coupling: Coupling


@dataclass(frozen=True)
class PairingRelation:
    """A set of source/target pairs with full projections onto both point sets."""

    pairs: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class LiftedValue:
    """A lifted-distance value with its certificate.

    exactness is "exact", "lower-bound" or "upper-bound" and describes how
    the value relates to the mathematical quantity.  root_base, when set,
    is the exact rational whose p-th root the (floating) value renders.
    """

    value: object
    exactness: str
    witness: object | None = None
    note: str = ""
    root_base: Optional[Fraction] = None


def _as_relation(ground: Ground) -> FuzzyRelation:
    if isinstance(ground, PseudometricSpace):
        return relation_of_metric(ground)
    if isinstance(ground, FuzzyRelation):
        return ground
    raise ValidationError("ground must be a PseudometricSpace or FuzzyRelation")


def _check_distribution(arg, points: tuple[str, ...], label: str) -> Distribution:
    if not isinstance(arg, Distribution):
        raise ValidationError(f"{label} must be a Distribution for this modality")
    if arg.points != points:
        raise ValidationError(f"{label} carrier does not match the ground carrier")
    return arg


def _check_point_set(arg, points: tuple[str, ...], label: str) -> tuple[str, ...]:
    if isinstance(arg, Distribution):
        raise ValidationError(f"{label} must be a point set for sup")
    pts = tuple(arg)
    if not pts:
        raise ValidationError(f"{label} must be a nonempty point set")
    if len(set(pts)) != len(pts):
        raise ValidationError(f"{label} contains duplicate points")
    for p in pts:
        if p not in points:
            raise ValidationError(f"{label} contains unknown point {p!r}")
    return pts


def joint_carrier(nx: int, ny: int) -> tuple[str, ...]:
    """Index-based product carrier names, row-major."""
    return tuple(f"{i}:{j}" for i in range(nx) for j in range(ny))


def matrix_predicate(matrix: Sequence[Sequence[Fraction]]) -> FuzzyPredicate:
    nx, ny = len(matrix), len(matrix[0])
    return FuzzyPredicate(
        joint_carrier(nx, ny), [v for row in matrix for v in row]
    )


def coupling_distribution(coupling: Coupling) -> Distribution:
    nx, ny = len(coupling.sources), len(coupling.targets)
    return Distribution(
        joint_carrier(nx, ny), [v for row in coupling.joint for v in row]
    )


# ---------------------------------------------------------------------------
# Hausdorff (sup modality)


def hausdorff_distance(ground: Ground, a, b) -> Fraction:
    """max of the two directed farthest-to-nearest distances between point sets."""
    rel = _as_relation(ground)
    a_pts = _check_point_set(a, rel.sources, "first argument")
    b_pts = _check_point_set(b, rel.targets, "second argument")
    ai = [rel.source_index(p) for p in a_pts]
    bj = [rel.target_index(p) for p in b_pts]
    forward = max(min(rel.r[i][j] for j in bj) for i in ai)
    backward = max(min(rel.r[i][j] for i in ai) for j in bj)
    return max(forward, backward)


def _hausdorff_pairing(rel: FuzzyRelation, a_pts, b_pts) -> PairingRelation:
    ai = [rel.source_index(p) for p in a_pts]
    bj = [rel.target_index(p) for p in b_pts]
    pairs: list[tuple[str, str]] = []
    for i in ai:
        j = min(bj, key=lambda jj: (rel.r[i][jj], jj))
        pairs.append((rel.sources[i], rel.targets[j]))
    for j in bj:
        i = min(ai, key=lambda ii: (rel.r[ii][j], ii))
        pair = (rel.sources[i], rel.targets[j])
        if pair not in pairs:
            pairs.append(pair)
    return PairingRelation(tuple(pairs))


# ---------------------------------------------------------------------------
# Threshold sweep for the generally kind


def _generally_sweep(
    rel: FuzzyRelation, s: Distribution, t: Distribution
) -> tuple[Fraction, Coupling, Fraction]:
    """Exact coupling lifting for the generally kind.

    Sweeps the thresholded crisp relations: on each interval between
    consecutive distinct positive entries of r the crisp matrix is constant,
    so inf over epsilon of max(epsilon, cost(epsilon)) is a minimum over
    finitely many candidates.  Returns (value, witness coupling, epsilon*)
    where the witness coupling puts mass at most epsilon* on {r > epsilon*}.
    """
    levels = sorted({v for row in rel.r for v in row if v > 0})
    cuts = []  # (lower endpoint v_i, crisp cost matrix for the interval)
    for i, level in enumerate(levels + [None]):
        lower = ZERO if i == 0 else levels[i - 1]
        if level is None:
            crisp = [[ZERO] * len(rel.targets) for _ in rel.sources]
        else:
            crisp = [
                [ONE if v >= level else ZERO for v in row] for row in rel.r
            ]
        cuts.append((lower, crisp))

    best_value = None
    plans = []
    for lower, crisp in cuts:
        plan = solve_transport(crisp, s, t)
        plans.append(plan)
        candidate = plan.cost if plan.cost > lower else lower
        if best_value is None or candidate < best_value:
            best_value = candidate
    assert best_value is not None

    joint_pred = matrix_predicate(rel.r)
    for plan in plans:
        joint = coupling_distribution(plan.coupling())
        if generally_value(joint_pred, joint) == best_value:
            return best_value, plan.coupling(), best_value
    raise InternalCheckError(
        "threshold sweep found no coupling matching its own optimum"
    )


# ---------------------------------------------------------------------------
# Expectation LPs


def _essential_pairs(space: PseudometricSpace) -> list[tuple[int, int]]:
    """Unordered pairs whose 1-Lipschitz row is not implied by bounds or others.

    A pair (i, j) is dropped when d(i, j) >= 1 (implied by the [0, 1] box) or
    when some k splits it into two strictly shorter legs whose sum does not
    exceed d(i, j); the kept strictly-shorter rows then imply the dropped one.
    """
    d = space.d
    n = len(space.points)
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            dij = d[i][j]
            if dij >= 1:
                continue
            implied = any(
                d[i][k] < dij and d[k][j] < dij and d[i][k] + d[k][j] <= dij
                for k in range(n)
                if k != i and k != j
            )
            if not implied:
                pairs.append((i, j))
    return pairs


def _kantorovich_expectation_metric(
    space: PseudometricSpace, s: Distribution, t: Distribution
) -> tuple[Fraction, FuzzyPredicate]:
    n = len(space.points)
    pairs = _essential_pairs(space)
    constraints = []
    for i, j in pairs:
        row = [ZERO] * n
        row[i], row[j] = ONE, -ONE
        constraints.append(Constraint(row, "<=", space.d[i][j], f"lip[{i},{j}]"))
        row2 = [ZERO] * n
        row2[i], row2[j] = -ONE, ONE
        constraints.append(Constraint(row2, "<=", space.d[i][j], f"lip[{j},{i}]"))
    best = None
    best_f = None
    for sign in (1, -1):
        objective = [sign * (tm - sm) for sm, tm in zip(s.mass, t.mass)]
        lp = LinearProgram(
            [f"f[{i}]" for i in range(n)],
            objective,
            "max",
            constraints,
            lower=[ZERO] * n,
            upper=[ONE] * n,
        )
        sol = solve_lp(lp)
        if sol.status != "optimal":
            raise InternalCheckError("price-function LP must be solvable")
        if best is None or sol.value > best:
            best = sol.value
            best_f = FuzzyPredicate(
                space.points, [sol.assignment[f"f[{i}]"] for i in range(n)]
            )
    assert best is not None and best_f is not None
    return max(best, ZERO), best_f


def _kantorovich_expectation_relational(
    rel: FuzzyRelation, s: Distribution, t: Distribution
) -> tuple[Fraction, NonexpansivePair]:
    nx, ny = len(rel.sources), len(rel.targets)
    variables = [f"f[{i}]" for i in range(nx)] + [f"g[{j}]" for j in range(ny)]
    constraints = []
    for i in range(nx):
        for j in range(ny):
            if rel.r[i][j] >= 1:
                continue
            row = [ZERO] * (nx + ny)
            row[i] = -ONE
            row[nx + j] = ONE
            constraints.append(Constraint(row, "<=", rel.r[i][j], f"ne[{i},{j}]"))
    objective = [-m for m in s.mass] + list(t.mass)
    lp = LinearProgram(
        variables,
        objective,
        "max",
        constraints,
        lower=[ZERO] * (nx + ny),
        upper=[ONE] * (nx + ny),
    )
    sol = solve_lp(lp)
    if sol.status != "optimal":
        raise InternalCheckError("price-pair LP must be solvable")
    pair = NonexpansivePair(
        FuzzyPredicate(rel.sources, [sol.assignment[f"f[{i}]"] for i in range(nx)]),
        FuzzyPredicate(rel.targets, [sol.assignment[f"g[{j}]"] for j in range(ny)]),
    )
    return max(sol.value, ZERO), pair


# ---------------------------------------------------------------------------
# p_moment helpers


def _pow_cost_matrix(
    rel: FuzzyRelation, p: Fraction, digits: int
) -> tuple[list[list[Fraction]], bool]:
    """Entrywise r^p; exact for integer p, else a rational lower bound."""
    if p.denominator == 1:
        return [[v ** p.numerator for v in row] for row in rel.r], True
    scale = 10**digits
    out = []
    with mpmath.mp.workdps(digits + 10):
        pf = mpmath.mpf(p.numerator) / mpmath.mpf(p.denominator)
        for row in rel.r:
            out_row = []
            for v in row:
                if v in (0, 1):
                    out_row.append(Fraction(v))
                    continue
                approx = mpmath.power(
                    mpmath.mpf(v.numerator) / mpmath.mpf(v.denominator), pf
                )
                out_row.append(
                    Fraction(int(mpmath.floor(approx * scale)), scale)
                )
            out.append(out_row)
    return out, False


def _root(value: Fraction, p: Fraction, digits: int):
    with mpmath.mp.workdps(digits):
        if value == 0:
            return mpmath.mpf(0)
        base = mpmath.mpf(value.numerator) / mpmath.mpf(value.denominator)
        exponent = mpmath.mpf(p.denominator) / mpmath.mpf(p.numerator)
        return mpmath.power(base, exponent)


# ---------------------------------------------------------------------------
# Public constructions


def wasserstein(m: Modality, ground: Ground, s, t) -> LiftedValue:
    """Coupling construction of the lifted distance.

    Arguments s and t are distributions (expectation, generally, p_moment)
    or point sets (sup) over the ground carriers.  The ground may be any
    fuzzy relation; symmetry is not required here.
    """
    rel = _as_relation(ground)
    if m.kind == "expectation":
        mu = _check_distribution(s, rel.sources, "s")
        nu = _check_distribution(t, rel.targets, "t")
        plan = solve_transport(rel.r, mu, nu)
        return LiftedValue(plan.cost, "exact", plan.coupling())
    if m.kind == "generally":
        mu = _check_distribution(s, rel.sources, "s")
        nu = _check_distribution(t, rel.targets, "t")
        value, coupling, eps_star = _generally_sweep(rel, mu, nu)
        return LiftedValue(value, "exact", ThresholdCoupling(eps_star, coupling))
    if m.kind == "sup":
        a = _check_point_set(s, rel.sources, "s")
        b = _check_point_set(t, rel.targets, "t")
        value = hausdorff_distance(rel, a, b)
        pairing = _hausdorff_pairing(rel, a, b)
        observed = max(
            rel.r[rel.source_index(x)][rel.target_index(y)] for x, y in pairing.pairs
        )
        if observed != value:
            raise InternalCheckError("pairing witness does not match value")
        return LiftedValue(value, "exact", pairing)
    if m.kind == "p_moment":
        mu = _check_distribution(s, rel.sources, "s")
        nu = _check_distribution(t, rel.targets, "t")
        cost, is_exact = _pow_cost_matrix(rel, m.p, m.digits)
        plan = solve_transport(cost, mu, nu)
        value = _root(plan.cost, m.p, m.digits)
        if is_exact:
            return LiftedValue(
                value,
                "exact",
                plan.coupling(),
                note=f"p-th root rendered at {m.digits} digits",
                root_base=plan.cost,
            )
        return LiftedValue(
            value,
            "lower-bound",
            plan.coupling(),
            note="non-integer p: cost entries rounded down before transport",
            root_base=plan.cost,
        )
    if m.kind == "convex_sup_expectation":
        raise ValidationError(
            "convex_sup_expectation lifts convex sets; use the convex_powerset module"
        )
    raise ValidationError(f"modality kind {m.kind!r} has no coupling construction")


def _attach_generally_witness(
    rel: FuzzyRelation, s, t, value: Fraction, depth: int
):
    if value <= 0 or depth <= 0:
        return None, ""
    from .levy_prokhorov import duality_witness  # deferred: module cycle

    for k in range(depth, 0, -1):
        gap = Fraction(1, 2**k)
        if gap < value:
            witness = duality_witness(rel, s, t, value - gap)
            return witness, (
                f"duality witness certifies value - 2^-{k} from below"
            )
    return None, ""


def kantorovich(
    m: Modality,
    space: PseudometricSpace,
    s,
    t,
    *,
    witness_depth: Optional[int] = None,
    oracle_delta: Optional[Fraction] = None,
) -> LiftedValue:
    """Price-function construction over a valid pseudometric.

    expectation: exact via the 1-Lipschitz LP.  sup: exact, coincides with
    the farthest-nearest formula, witnessed by a distance-to-set function.
    generally: exact via the coupling value (the two constructions agree),
    certified from below by a duality witness at value - 2^-k.  p_moment:
    grid-oracle lower bound only.
    """
    require_valid(space)
    depth = _config.witness_depth() if witness_depth is None else witness_depth
    if m.kind == "expectation":
        mu = _check_distribution(s, space.points, "s")
        nu = _check_distribution(t, space.points, "t")
        value, f = _kantorovich_expectation_metric(space, mu, nu)
        return LiftedValue(value, "exact", f)
    if m.kind == "sup":
        a = _check_point_set(s, space.points, "s")
        b = _check_point_set(t, space.points, "t")
        value = hausdorff_distance(space, a, b)
        to_b = FuzzyPredicate(
            space.points,
            [min(space.d[i][space.index(y)] for y in b)
             for i in range(len(space.points))],
        )
        to_a = FuzzyPredicate(
            space.points,
            [min(space.d[i][space.index(x)] for x in a)
             for i in range(len(space.points))],
        )
        best = None
        best_f = None
        for f in (to_b, to_a):
            gap = abs(
                eval_modality(Modality.sup(), f, b)
                - eval_modality(Modality.sup(), f, a)
            )
            if best is None or gap > best:
                best, best_f = gap, f
        if best != value:
            raise InternalCheckError(
                "distance-to-set witnesses do not reach the sup value"
            )
        return LiftedValue(value, "exact", best_f)
    if m.kind == "generally":
        mu = _check_distribution(s, space.points, "s")
        nu = _check_distribution(t, space.points, "t")
        rel = relation_of_metric(space)
        value, _coupling, _eps = _generally_sweep(rel, mu, nu)
        witness, note = _attach_generally_witness(rel, mu, nu, value, depth)
        return LiftedValue(value, "exact", witness, note=note)
    if m.kind == "p_moment":
        delta = Fraction(1, 32) if oracle_delta is None else Fraction(oracle_delta)
        return kantorovich_grid_oracle(m, space, s, t, delta)
    if m.kind == "convex_sup_expectation":
        raise ValidationError(
            "convex_sup_expectation lifts convex sets; use the convex_powerset module"
        )
    raise ValidationError(f"modality kind {m.kind!r} has no price-function construction")


def kantorovich_relational(
    m: Modality,
    relation: FuzzyRelation,
    s,
    t,
    *,
    witness_depth: Optional[int] = None,
) -> LiftedValue:
    """Price-pair construction over an arbitrary fuzzy relation.

    Supports expectation (exact LP over pairs (f, g)) and generally (exact
    via the coupling value with duality-witness certification).
    """
    depth = _config.witness_depth() if witness_depth is None else witness_depth
    if m.kind == "expectation":
        mu = _check_distribution(s, relation.sources, "s")
        nu = _check_distribution(t, relation.targets, "t")
        value, pair = _kantorovich_expectation_relational(relation, mu, nu)
        return LiftedValue(value, "exact", pair)
    if m.kind == "generally":
        mu = _check_distribution(s, relation.sources, "s")
        nu = _check_distribution(t, relation.targets, "t")
        value, _coupling, _eps = _generally_sweep(relation, mu, nu)
        witness, note = _attach_generally_witness(relation, mu, nu, value, depth)
        return LiftedValue(value, "exact", witness, note=note)
    raise ValidationError(
        f"relational price pairs support expectation and generally, not {m.kind!r}"
    )


# ---------------------------------------------------------------------------
# Grid oracle


def _check_delta(delta: Fraction) -> Fraction:
    delta = Fraction(delta)
    if delta <= 0 or delta > 1 or delta.numerator != 1:
        raise ValidationError("delta must be 1/2^k")
    den = delta.denominator
    if den & (den - 1) != 0:
        raise ValidationError("delta must be 1/2^k")
    return delta


def _grid_values(delta: Fraction) -> list[Fraction]:
    steps = int(1 / delta)
    return [Fraction(i, steps) for i in range(steps + 1)]


def _enumerate_metric_functions(space: PseudometricSpace, grid: list[Fraction]):
    n = len(space.points)
    d = space.d
    values: list[Fraction] = []

    def rec(i: int):
        if i == n:
            yield FuzzyPredicate(space.points, list(values))
            return
        lo, hi = ZERO, ONE
        for j in range(i):
            lo = max(lo, values[j] - d[i][j])
            hi = min(hi, values[j] + d[i][j])
        for v in grid:
            if lo <= v <= hi:
                values.append(v)
                yield from rec(i + 1)
                values.pop()

    yield from rec(0)


def _enumerate_relational_pairs(rel: FuzzyRelation, grid: list[Fraction]):
    nx, ny = len(rel.sources), len(rel.targets)
    fvals: list[Fraction] = []
    gvals: list[Fraction] = []

    def rec_g(j: int):
        if j == ny:
            yield NonexpansivePair(
                FuzzyPredicate(rel.sources, list(fvals)),
                FuzzyPredicate(rel.targets, list(gvals)),
            )
            return
        hi = min((fvals[i] + rel.r[i][j] for i in range(nx)), default=ONE)
        for v in grid:
            if v <= hi:
                gvals.append(v)
                yield from rec_g(j + 1)
                gvals.pop()

    def rec_f(i: int):
        if i == nx:
            yield from rec_g(0)
            return
        for v in grid:
            fvals.append(v)
            yield from rec_f(i + 1)
            fvals.pop()

    yield from rec_f(0)


def kantorovich_grid_oracle(
    m: Modality, ground: Ground, s, t, delta: Fraction
) -> LiftedValue:
    """Brute-force lower bound on the price-function value over a value grid.

    Enumerates functions with values in {0, delta, ..., 1} satisfying the
    exact nonexpansiveness constraints, so the maximum observed objective
    never exceeds the true value.  delta must be 1/2^k.  Refuses carriers
    where (1/delta + 1)^points exceeds the grid budget guard.
    """
    delta = _check_delta(delta)
    grid = _grid_values(delta)
    budget = _config.guard("GRID_BUDGET")

    symmetric = isinstance(ground, PseudometricSpace)
    if symmetric:
        space = ground
        require_valid(space)
        n_points = len(space.points)
    else:
        rel = _as_relation(ground)
        n_points = len(rel.sources) + len(rel.targets)
    if len(grid) ** n_points > budget:
        raise GuardLimitError(
            f"grid enumeration of {len(grid)}^{n_points} functions exceeds the "
            f"budget {budget}; raise LIFTLAB_GUARD_GRID_BUDGET to force"
        )

    def prepare_arg(arg, points, label):
        if m.kind in ("sup", "inf"):
            return _check_point_set(arg, points, label)
        return _check_distribution(arg, points, label)

    best = None
    best_witness = None
    if symmetric:
        a = prepare_arg(s, space.points, "s")
        b = prepare_arg(t, space.points, "t")
        for f in _enumerate_metric_functions(space, grid):
            gap = abs(eval_modality(m, f, b) - eval_modality(m, f, a))
            if best is None or gap > best:
                best, best_witness = gap, f
    else:
        if m.kind not in ("expectation", "generally", "p_moment"):
            raise ValidationError(
                "relational grid oracle supports expectation/generally/p_moment"
            )
        mu = _check_distribution(s, rel.sources, "s")
        nu = _check_distribution(t, rel.targets, "t")
        zero = mpmath.mpf(0) if m.kind == "p_moment" else ZERO
        for pair in _enumerate_relational_pairs(rel, grid):
            gap = eval_modality(m, pair.g, nu) - eval_modality(m, pair.f, mu)
            if gap < zero:
                gap = zero
            if best is None or gap > best:
                best, best_witness = gap, pair
    assert best is not None
    return LiftedValue(
        best,
        "lower-bound",
        best_witness,
        note=f"grid oracle at delta = {format_rational(delta)}",
    )
