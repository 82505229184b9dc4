"""Exact rational linear programming and transportation problems.

solve_lp runs a dense two-phase simplex over exact rationals.  Pivoting uses
the classic most-negative-reduced-cost rule for speed and switches to Bland's
rule after a fixed pivot budget, which guarantees termination.  Infeasibility
and unboundedness are reported as statuses, never exceptions.

Dual values are read off the final basis (via the reduced costs under each
row's identity column) and translated back to the caller's constraints under
the usual sign conventions:

    min problems:  ">=" rows have y >= 0, "<=" rows y <= 0, "=" rows free;
    max problems:  the mirror image.

Every returned solution is re-verified against an independent certificate
check (primal feasibility, complementary slackness, strong duality including
variable-bound terms); failure raises InternalCheckError.

solve_transport specialises to marginal-constrained couplings and returns the
optimal plan together with a potential pair (f, g) satisfying
g(y) - f(x) <= cost(x, y), tight on the support of the plan, with
E_demand[g] - E_supply[f] equal to the optimal cost.

Internally the tableau holds gmpy2.mpq entries for speed; the public API
speaks fractions.Fraction throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Optional, Sequence

from gmpy2 import mpq

from . import _config
from .distributions import Coupling, Distribution
from .errors import InternalCheckError, ValidationError
from .rationals import ZERO, format_rational

Relation = Literal["<=", "=", ">="]
_RELATIONS = ("<=", "=", ">=")

# Hard cap on simplex pivots; hitting it indicates a bug, not a big input.
_PIVOT_HARD_LIMIT = 500_000


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    relation: str
    rhs: Fraction
    name: str = ""

    def __init__(self, coeffs, relation: str, rhs, name: str = ""):
        if relation not in _RELATIONS:
            raise ValidationError(f"relation must be one of {_RELATIONS}")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in coeffs))
        object.__setattr__(self, "relation", relation)
        object.__setattr__(self, "rhs", Fraction(rhs))
        object.__setattr__(self, "name", name)


@dataclass(frozen=True)
class LinearProgram:
    """optimize objective . x subject to constraints and variable bounds.

    Bounds default to [0, +inf).  A lower bound of None means unbounded
    below; an upper bound of None means unbounded above.
    """

    variables: tuple[str, ...]
    objective: tuple[Fraction, ...]
    sense: str
    constraints: tuple[Constraint, ...]
    lower: tuple[Optional[Fraction], ...]
    upper: tuple[Optional[Fraction], ...]

    def __init__(
        self,
        variables: Sequence[str],
        objective: Sequence[Fraction],
        sense: str,
        constraints: Sequence[Constraint],
        lower: Sequence[Optional[Fraction]] | None = None,
        upper: Sequence[Optional[Fraction]] | None = None,
    ):
        vars_ = tuple(variables)
        if len(set(vars_)) != len(vars_):
            raise ValidationError("duplicate variable names")
        if sense not in ("min", "max"):
            raise ValidationError("sense must be 'min' or 'max'")
        if len(objective) != len(vars_):
            raise ValidationError("objective length must match variables")
        cons = tuple(constraints)
        for c in cons:
            if len(c.coeffs) != len(vars_):
                raise ValidationError(
                    f"constraint {c.name!r} has {len(c.coeffs)} coefficients, "
                    f"expected {len(vars_)}"
                )
        n = len(vars_)
        lo = tuple(
            None if v is None else Fraction(v)
            for v in (lower if lower is not None else [ZERO] * n)
        )
        hi = tuple(
            None if v is None else Fraction(v)
            for v in (upper if upper is not None else [None] * n)
        )
        if len(lo) != n or len(hi) != n:
            raise ValidationError("bounds length must match variables")
        object.__setattr__(self, "variables", vars_)
        object.__setattr__(self, "objective", tuple(Fraction(c) for c in objective))
        object.__setattr__(self, "sense", sense)
        object.__setattr__(self, "constraints", cons)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Optional[Fraction]
    assignment: dict[str, Fraction]
    duals: Optional[tuple[Fraction, ...]]


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    """Dense simplex tableau over mpq with two carried cost rows."""

    def __init__(self, rows, basis, cost1, cost2, n_real):
        self.rows = rows          # list of lists, last entry = rhs
        self.basis = basis        # basis[i] = column index basic in row i
        self.cost1 = cost1        # phase-1 reduced cost row (or None)
        self.cost2 = cost2        # phase-2 reduced cost row
        self.n_real = n_real      # columns 0..n_real-1 may enter the basis

    def pivot(self, row: int, col: int) -> None:
        rows = self.rows
        prow = rows[row]
        piv = prow[col]
        if piv == 0:
            raise InternalCheckError("zero pivot")
        inv = 1 / piv
        rows[row] = prow = [v * inv for v in prow]
        for targets in (rows, [r for r in (self.cost1, self.cost2) if r is not None]):
            for r in targets:
                if r is prow:
                    continue
                f = r[col]
                if f:
                    for j, pv in enumerate(prow):
                        if pv:
                            r[j] -= f * pv
        self.basis[row] = col

    def _entering(self, cost, pivots_done: int) -> Optional[int]:
        fast = pivots_done < _config.PIVOT_FAST_LIMIT
        best = None
        best_val = 0
        for j in range(self.n_real):
            cj = cost[j]
            if cj < 0:
                if not fast:
                    return j  # Bland: first negative index
                if best is None or cj < best_val:
                    best, best_val = j, cj
        return best

    def _leaving(self, col: int) -> Optional[int]:
        best_row = None
        best_ratio = None
        for i, row in enumerate(self.rows):
            a = row[col]
            if a > 0:
                ratio = row[-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and self.basis[i] < self.basis[best_row])
                ):
                    best_row, best_ratio = i, ratio
        return best_row

    def run(self, cost, pivots_done: int) -> tuple[str, int]:
        while True:
            col = self._entering(cost, pivots_done)
            if col is None:
                return "optimal", pivots_done
            row = self._leaving(col)
            if row is None:
                return "unbounded", pivots_done
            self.pivot(row, col)
            pivots_done += 1
            if pivots_done > _PIVOT_HARD_LIMIT:
                raise InternalCheckError("simplex pivot limit exceeded")


def solve_lp(lp: LinearProgram) -> LpSolution:
    n = len(lp.variables)
    minimize = lp.sense == "min"
    obj = [c if minimize else -c for c in lp.objective]

    # Variable substitution x = sign * z + shift with z >= 0.
    col_of_var: list[list[tuple[int, int]]] = []  # var -> [(col, sign)]
    shifts: list[Fraction] = []
    extra_rows: list[tuple[int, Fraction]] = []  # (col, upper bound on z)
    n_cols = 0
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo is not None and hi is not None and lo > hi:
            return LpSolution("infeasible", None, {}, None)
        if lo is not None:
            col_of_var.append([(n_cols, 1)])
            shifts.append(lo)
            if hi is not None:
                extra_rows.append((n_cols, hi - lo))
            n_cols += 1
        elif hi is not None:
            col_of_var.append([(n_cols, -1)])
            shifts.append(hi)
            n_cols += 1
        else:
            col_of_var.append([(n_cols, 1), (n_cols + 1, -1)])
            shifts.append(ZERO)
            n_cols += 2

    # Build rows over z: (coeffs, relation, rhs, origin index or None, flip)
    raw_rows = []
    for idx, con in enumerate(lp.constraints):
        coeffs = [Fraction(0)] * n_cols
        rhs = con.rhs
        for j, a in enumerate(con.coeffs):
            if a == 0:
                continue
            rhs -= a * shifts[j]
            for col, sign in col_of_var[j]:
                coeffs[col] += a * sign
        raw_rows.append([coeffs, con.relation, rhs, idx, 1])
    for col, ub in extra_rows:
        coeffs = [Fraction(0)] * n_cols
        coeffs[col] = Fraction(1)
        raw_rows.append([coeffs, "<=", ub, None, 1])

    flip_rel = {"<=": ">=", ">=": "<=", "=": "="}
    for row in raw_rows:
        if row[2] < 0:
            row[0] = [-a for a in row[0]]
            row[1] = flip_rel[row[1]]
            row[2] = -row[2]
            row[4] = -1

    m = len(raw_rows)
    n_slack = sum(1 for row in raw_rows if row[1] != "=")
    total_cols = n_cols + n_slack + m  # z | slack/surplus | artificial
    art_base = n_cols + n_slack

    rows = []
    basis = []
    slack_col_of_row: list[Optional[int]] = []
    slack_idx = 0
    for i, (coeffs, rel, rhs, _origin, _flip) in enumerate(raw_rows):
        row = [mpq(a.numerator, a.denominator) for a in coeffs]
        row += [mpq(0)] * (n_slack + m) + [mpq(rhs.numerator, rhs.denominator)]
        if rel != "=":
            col = n_cols + slack_idx
            row[col] = mpq(1) if rel == "<=" else mpq(-1)
            slack_col_of_row.append(col)
            slack_idx += 1
        else:
            slack_col_of_row.append(None)
        row[art_base + i] = mpq(1)
        rows.append(row)
        # Prefer the slack as the initial basic variable for "<=" rows.
        if rel == "<=":
            basis.append(slack_col_of_row[i])
        else:
            basis.append(art_base + i)

    cost2 = [mpq(0)] * (total_cols + 1)
    for j, group in enumerate(col_of_var):
        for col, sign in group:
            cost2[col] += mpq(obj[j].numerator, obj[j].denominator) * sign
    cost1 = [mpq(0)] * (total_cols + 1)
    for i in range(m):
        cost1[art_base + i] = mpq(1)
    for i in range(m):
        if basis[i] == art_base + i:
            for j, v in enumerate(rows[i]):
                if v:
                    cost1[j] -= v

    tab = _Tableau(rows, basis, cost1, cost2, n_real=art_base)
    pivots = 0
    status, pivots = tab.run(cost1, pivots)
    if status != "optimal":  # phase 1 is always bounded below by 0
        raise InternalCheckError("phase 1 reported unbounded")
    if -cost1[-1] != 0:
        return LpSolution("infeasible", None, {}, None)

    # Drive remaining artificials out of the basis; drop dependent rows.
    keep = list(range(m))
    for i in range(m):
        if tab.basis[i] >= art_base:
            entered = False
            for j in range(art_base):
                if tab.rows[i][j] != 0:
                    tab.pivot(i, j)
                    entered = True
                    break
            if not entered:
                keep.remove(i)
    if len(keep) != m:
        tab.rows = [tab.rows[i] for i in keep]
        tab.basis = [tab.basis[i] for i in keep]

    tab.cost1 = None
    status, pivots = tab.run(tab.cost2, pivots)
    if status == "unbounded":
        return LpSolution("unbounded", None, {}, None)

    z = [Fraction(0)] * n_cols
    for i, b in enumerate(tab.basis):
        if b < n_cols:
            z[b] = _frac(tab.rows[i][-1])
    assignment = {}
    for j, var in enumerate(lp.variables):
        x = shifts[j]
        for col, sign in col_of_var[j]:
            x += sign * z[col]
        assignment[var] = x
    value = sum(
        (c * assignment[v] for c, v in zip(lp.objective, lp.variables)), ZERO
    )

    # Duals: reduced cost under each kept row's identity column.
    dual_by_origin: dict[int, Fraction] = {}
    for pos, i in enumerate(keep):
        origin = raw_rows[i][3]
        if origin is None:
            continue
        ident = slack_col_of_row[i]
        if ident is None or raw_rows[i][1] == ">=":
            ident = art_base + i  # surplus columns are -e_i; use the artificial
        y = -_frac(tab.cost2[ident])
        if raw_rows[i][4] == -1:
            y = -y
        dual_by_origin[origin] = y
    duals = tuple(
        dual_by_origin.get(idx, ZERO) for idx in range(len(lp.constraints))
    )
    if not minimize:
        duals = tuple(-y for y in duals)

    solution = LpSolution("optimal", value, assignment, duals)
    problems = check_solution(lp, solution)
    if problems:
        raise InternalCheckError(
            "LP certificate failed: " + "; ".join(problems[:3])
        )
    return solution


def check_solution(lp: LinearProgram, sol: LpSolution) -> list[str]:
    """Independent certificate check; returns a list of violations (empty = ok)."""
    if sol.status != "optimal":
        return []
    problems = []
    x = [sol.assignment[v] for v in lp.variables]
    for j, (lo, hi) in enumerate(zip(lp.lower, lp.upper)):
        if lo is not None and x[j] < lo:
            problems.append(f"{lp.variables[j]} below lower bound")
        if hi is not None and x[j] > hi:
            problems.append(f"{lp.variables[j]} above upper bound")
    activities = []
    for c in lp.constraints:
        act = sum((a * xi for a, xi in zip(c.coeffs, x)), ZERO)
        activities.append(act)
        ok = (
            act <= c.rhs
            if c.relation == "<="
            else act >= c.rhs if c.relation == ">=" else act == c.rhs
        )
        if not ok:
            problems.append(f"constraint {c.name or c!r} violated")
    value = sum((c * xi for c, xi in zip(lp.objective, x)), ZERO)
    if value != sol.value:
        problems.append("objective mismatch")
    if sol.duals is None:
        return problems

    minimize = lp.sense == "min"
    for y, c, act in zip(sol.duals, lp.constraints, activities):
        if c.relation == "=":
            pass
        elif (c.relation == ">=") == minimize:  # min/>= and max/<= need y >= 0
            if y < 0:
                problems.append(f"dual sign violated on {c.relation} row")
        else:
            if y > 0:
                problems.append(f"dual sign violated on {c.relation} row")
        if c.relation != "=" and y != 0 and act != c.rhs:
            problems.append("complementary slackness violated on a row")
    reduced = []
    for j in range(len(lp.variables)):
        r = lp.objective[j] - sum(
            (y * c.coeffs[j] for y, c in zip(sol.duals, lp.constraints)), ZERO
        )
        reduced.append(r)
        lo, hi = lp.lower[j], lp.upper[j]
        at_lo = lo is not None and x[j] == lo
        at_hi = hi is not None and x[j] == hi
        sign = 1 if minimize else -1
        if not at_lo and not at_hi:
            if r != 0:
                problems.append(f"reduced cost of interior {lp.variables[j]} nonzero")
        elif at_lo and not at_hi and sign * r < 0:
            problems.append(f"reduced cost sign at lower bound of {lp.variables[j]}")
        elif at_hi and not at_lo and sign * r > 0:
            problems.append(f"reduced cost sign at upper bound of {lp.variables[j]}")
    lagrangian = sum(
        (y * c.rhs for y, c in zip(sol.duals, lp.constraints)), ZERO
    ) + sum((r * xi for r, xi in zip(reduced, x)), ZERO)
    if lagrangian != value:
        problems.append("strong duality identity violated")
    return problems


@dataclass(frozen=True)
class TransportPlan:
    """An optimal coupling with certifying potentials.

    plan[i][j] carries supply.points[i] to demand.points[j]; potentials
    satisfy g(y) - f(x) <= cost(x, y) everywhere with equality on the
    support, and E_demand[g] - E_supply[f] = cost of the plan.
    """

    sources: tuple[str, ...]
    targets: tuple[str, ...]
    plan: tuple[tuple[Fraction, ...], ...]
    cost: Fraction
    potential_source: dict[str, Fraction]
    potential_target: dict[str, Fraction]

    def coupling(self) -> Coupling:
        return Coupling(self.sources, self.targets, self.plan)


def solve_transport(
    cost: Sequence[Sequence[Fraction]],
    supply: Distribution,
    demand: Distribution,
) -> TransportPlan:
    xs, ys = supply.points, demand.points
    nx, ny = len(xs), len(ys)
    if len(cost) != nx or any(len(row) != ny for row in cost):
        raise ValidationError(
            f"cost matrix must be {nx}x{ny} to match the marginals"
        )
    cost_f = [[Fraction(v) for v in row] for row in cost]
    for row in cost_f:
        for v in row:
            if v < 0:
                raise ValidationError("cost entries must be >= 0")

    variables = [f"p[{i},{j}]" for i in range(nx) for j in range(ny)]
    objective = [cost_f[i][j] for i in range(nx) for j in range(ny)]
    constraints = []
    for i in range(nx):
        coeffs = [ZERO] * (nx * ny)
        for j in range(ny):
            coeffs[i * ny + j] = Fraction(1)
        constraints.append(Constraint(coeffs, "=", supply.mass[i], f"row[{i}]"))
    for j in range(ny):
        coeffs = [ZERO] * (nx * ny)
        for i in range(nx):
            coeffs[i * ny + j] = Fraction(1)
        constraints.append(Constraint(coeffs, "=", demand.mass[j], f"col[{j}]"))
    lp = LinearProgram(variables, objective, "min", constraints)
    sol = solve_lp(lp)
    if sol.status != "optimal":
        raise InternalCheckError(
            f"transport problem must be feasible and bounded, got {sol.status}"
        )
    plan = tuple(
        tuple(sol.assignment[f"p[{i},{j}]"] for j in range(ny)) for i in range(nx)
    )
    assert sol.duals is not None
    u = sol.duals[:nx]
    v = sol.duals[nx:]
    f = {x: -u[i] for i, x in enumerate(xs)}
    g = {y: v[j] for j, y in enumerate(ys)}

    problems = []
    for i in range(nx):
        if sum(plan[i], ZERO) != supply.mass[i]:
            problems.append("row marginal violated")
    for j in range(ny):
        if sum((plan[i][j] for i in range(nx)), ZERO) != demand.mass[j]:
            problems.append("column marginal violated")
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            slack = cost_f[i][j] - (g[y] - f[x])
            if slack < 0:
                problems.append(f"potentials infeasible at ({x},{y})")
            if plan[i][j] > 0 and slack != 0:
                problems.append(f"complementary slackness fails at ({x},{y})")
    total = sum((g[y] * demand.mass[j] for j, y in enumerate(ys)), ZERO) - sum(
        (f[x] * supply.mass[i] for i, x in enumerate(xs)), ZERO
    )
    if total != sol.value:
        problems.append("potential gap differs from optimal cost")
    if problems:
        raise InternalCheckError("transport certificate failed: " + problems[0])

    return TransportPlan(xs, ys, plan, sol.value, f, g)
