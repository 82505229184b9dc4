"""Hausdorff-style distance between convex sets of distributions.

A convex set is given by finitely many generating distributions over one
pseudometric carrier.  The distance between two such sets is the larger of
the two directed values, where the directed value from A to B is the
largest, over generators of A, distance from the generator to the convex
hull of B's generators (a sup of a convex function over a polytope is
attained at a generator, so restricting the outer sup to generators is
exact; the inner minimisation over mixtures is not restrictable in general,
which ``generators_only`` demonstrates).

Three independent computations are provided:

* ``dhk_composite``: one joint LP per (generator, set) pair, optimising
  mixture weights and a transport plan simultaneously;
* ``dhk_spanning_tree``: enumerates spanning trees of the complete
  bipartite transport graph; on each tree the flows are affine in the
  mixture weights, leaving a tiny LP over the weight simplex;
* ``dhk_dual``: a price-function LP per (generator, set) pair, maximising
  the generator's expectation of a 1-Lipschitz f minus the best expectation
  over the opposing generators.

Agreement of the three routes is a test-suite concern, not asserted here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import _config
from .distributions import Coupling, Distribution, FuzzyPredicate, expectation
from .errors import GuardLimitError, InternalCheckError, ValidationError
from .liftings import _essential_pairs
from .lp import Constraint, LinearProgram, solve_lp, solve_transport
from .rationals import ONE, ZERO
from .spaces import PseudometricSpace, require_valid


@dataclass(frozen=True)
class ConvexSet:
    """Convex hull of finitely many distributions on a shared carrier."""

    points: tuple[str, ...]
    generators: tuple[Distribution, ...]

    def __init__(self, points, generators):
        points = tuple(points)
        generators = tuple(generators)
        if not generators:
            raise ValidationError("a convex set needs at least one generator")
        for g in generators:
            if not isinstance(g, Distribution):
                raise ValidationError("generators must be Distributions")
            if g.points != points:
                raise ValidationError("generator carrier does not match the set")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "generators", generators)

    def mixture(self, weights) -> Distribution:
        weights = tuple(Fraction(w) for w in weights)
        if len(weights) != len(self.generators):
            raise ValidationError("one weight per generator required")
        if any(w < 0 for w in weights) or sum(weights) != 1:
            raise ValidationError("weights must be a convex combination")
        mass = [ZERO] * len(self.points)
        for w, g in zip(weights, self.generators):
            for i, m in enumerate(g.mass):
                mass[i] += w * m
        return Distribution(self.points, mass)


@dataclass(frozen=True)
class PointToSetResult:
    value: Fraction
    weights: tuple[Fraction, ...]
    mixture: Distribution
    coupling: Coupling


@dataclass(frozen=True)
class DirectedHk:
    value: Fraction
    generator_index: int
    inner: object  # PointToSetResult or a price function


@dataclass(frozen=True)
class HkResult:
    value: Fraction
    forward: DirectedHk
    backward: DirectedHk
    method: str


def _check_inputs(space: PseudometricSpace, *sets: ConvexSet):
    require_valid(space)
    for cs in sets:
        if cs.points != space.points:
            raise ValidationError("convex set carrier does not match the space")


def point_to_set_distance(
    space: PseudometricSpace,
    mu: Distribution,
    target: ConvexSet,
    generators_only: bool = False,
) -> PointToSetResult:
    """Least transport cost from mu to any mixture of the target generators.

    With generators_only=True the mixture is restricted to the generators
    themselves, which in general overshoots the convex-hull value.
    """
    _check_inputs(space, target)
    if mu.points != space.points:
        raise ValidationError("distribution carrier does not match the space")
    n = len(space.points)
    gens = target.generators
    if generators_only:
        best = None
        best_k = 0
        for k, g in enumerate(gens):
            plan = solve_transport(space.d, mu, g)
            if best is None or plan.cost < best.cost:
                best, best_k = plan, k
        assert best is not None
        weights = tuple(
            ONE if k == best_k else ZERO for k in range(len(gens))
        )
        return PointToSetResult(best.cost, weights, gens[best_k], best.coupling())

    variables = [f"w[{k}]" for k in range(len(gens))] + [
        f"rho[{i},{j}]" for i in range(n) for j in range(n)
    ]

    def rho_col(i, j):
        return len(gens) + i * n + j

    constraints = []
    for i in range(n):
        row = [ZERO] * len(variables)
        for j in range(n):
            row[rho_col(i, j)] = ONE
        constraints.append(Constraint(row, "=", mu.mass[i], f"row[{i}]"))
    for j in range(n):
        row = [ZERO] * len(variables)
        for i in range(n):
            row[rho_col(i, j)] = ONE
        for k, g in enumerate(gens):
            row[k] = -g.mass[j]
        constraints.append(Constraint(row, "=", ZERO, f"col[{j}]"))
    row = [ONE] * len(gens) + [ZERO] * (n * n)
    constraints.append(Constraint(row, "=", ONE, "simplex"))

    objective = [ZERO] * len(gens) + [
        space.d[i][j] for i in range(n) for j in range(n)
    ]
    sol = solve_lp(LinearProgram(variables, objective, "min", constraints))
    if sol.status != "optimal":
        raise InternalCheckError("point-to-set LP must be solvable")
    weights = tuple(sol.assignment[f"w[{k}]"] for k in range(len(gens)))
    mixture = target.mixture(weights)
    joint = [
        [sol.assignment[f"rho[{i},{j}]"] for j in range(n)] for i in range(n)
    ]
    coupling = Coupling(space.points, space.points, joint)
    if not coupling.has_marginals(mu, mixture):
        raise InternalCheckError("point-to-set plan has wrong marginals")
    check = solve_transport(space.d, mu, mixture)
    if check.cost != sol.value:
        raise InternalCheckError(
            "point-to-set optimum disagrees with transport at its own mixture"
        )
    return PointToSetResult(sol.value, weights, mixture, coupling)


def _directed(
    space: PseudometricSpace,
    source: ConvexSet,
    target: ConvexSet,
    generators_only: bool,
) -> DirectedHk:
    best: Optional[PointToSetResult] = None
    best_k = 0
    for k, g in enumerate(source.generators):
        res = point_to_set_distance(space, g, target, generators_only)
        if best is None or res.value > best.value:
            best, best_k = res, k
    assert best is not None
    return DirectedHk(best.value, best_k, best)


def dhk_composite(
    space: PseudometricSpace,
    first: ConvexSet,
    second: ConvexSet,
    generators_only: bool = False,
) -> HkResult:
    """Directed maxima of point-to-set transport distances, both ways."""
    _check_inputs(space, first, second)
    fwd = _directed(space, first, second, generators_only)
    bwd = _directed(space, second, first, generators_only)
    method = "composite/generators-only" if generators_only else "composite"
    return HkResult(max(fwd.value, bwd.value), fwd, bwd, method)


# ---------------------------------------------------------------------------
# Spanning-tree route


def _spanning_trees(m: int, n: int):
    """All spanning trees of the complete bipartite graph K_{m,n}.

    Yields edge lists; recursion on edges in fixed order with include and
    exclude branches, pruning branches that cannot stay connected.
    """
    edges = [(i, m + j) for i in range(m) for j in range(n)]
    total = m + n
    chosen: list[tuple[int, int]] = []

    def find(parent, x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def connected_with(rest_index: int, parent: list[int]) -> bool:
        parent = list(parent)
        comps = len({find(parent, v) for v in range(total)})
        for u, v in edges[rest_index:]:
            ru, rv = find(parent, u), find(parent, v)
            if ru != rv:
                parent[ru] = rv
                comps -= 1
                if comps == 1:
                    return True
        return comps == 1

    def rec(idx: int, parent: list[int], count: int):
        if count == total - 1:
            yield list(chosen)
            return
        if idx == len(edges):
            return
        u, v = edges[idx]
        ru, rv = find(parent, u), find(parent, v)
        if ru != rv:
            nxt = list(parent)
            nxt[ru] = rv
            chosen.append(edges[idx])
            yield from rec(idx + 1, nxt, count + 1)
            chosen.pop()
        if connected_with(idx + 1, parent):
            yield from rec(idx + 1, parent, count)

    yield from rec(0, list(range(total)), 0)


def _tree_flows(tree, m, n, mu_mass, gen_mass):
    """Affine flow (const, per-generator coefficients) on each tree edge.

    Peels leaves; a leaf's remaining marginal rides on its only edge.  Row
    marginals are constants, column marginals are affine in the weights.
    """
    n_gen = len(gen_mass)
    adj: dict[int, set[int]] = {v: set() for v in range(m + n)}
    for u, v in tree:
        adj[u].add(v)
        adj[v].add(u)
    remaining = {}
    for i in range(m):
        remaining[i] = (mu_mass[i], [ZERO] * n_gen)
    for j in range(n):
        remaining[m + j] = (ZERO, [g[j] for g in gen_mass])
    flows = {}
    active = set(range(m + n))
    leaves = [v for v in active if len(adj[v]) == 1]
    while leaves:
        v = leaves.pop()
        if v not in active or not adj[v]:
            continue
        (u,) = adj[v]
        const, coefs = remaining[v]
        edge = (v, u) if v < m else (u, v)
        flows[edge] = (const, list(coefs))
        uc, ucoefs = remaining[u]
        remaining[u] = (uc - const, [a - b for a, b in zip(ucoefs, coefs)])
        adj[u].discard(v)
        adj[v].clear()
        active.discard(v)
        if len(adj[u]) == 1:
            leaves.append(u)
    (last,) = active
    const, coefs = remaining[last]
    # balance only holds on the weight simplex; probe at the uniform point
    uniform = Fraction(1, n_gen)
    if const + sum(c * uniform for c in coefs) != 0:
        raise InternalCheckError("tree peeling left an unbalanced node")
    return flows


def dhk_spanning_tree(
    space: PseudometricSpace, first: ConvexSet, second: ConvexSet
) -> HkResult:
    """Spanning-tree enumeration route to the convex-set distance.

    Every vertex of the joint weights-and-plan polytope has acyclic plan
    support, so scanning all spanning trees of the transport graph and
    minimising the affine cost over the weight simplex on each one reaches
    the optimum.  Guarded: the tree count is points^(2*points - 2).
    """
    _check_inputs(space, first, second)
    limit = _config.guard("TREE_CARRIER")
    if len(space.points) > limit:
        raise GuardLimitError(
            f"carrier of size {len(space.points)} exceeds the spanning-tree "
            f"guard {limit}; raise LIFTLAB_GUARD_TREE_CARRIER to force"
        )

    n = len(space.points)
    trees = list(_spanning_trees(n, n))

    def p2s_tree(mu: Distribution, target: ConvexSet) -> Fraction:
        gens = target.generators
        n_gen = len(gens)
        gen_mass = [g.mass for g in gens]
        best = None
        for tree in trees:
            flows = _tree_flows(tree, n, n, mu.mass, gen_mass)
            const_cost = ZERO
            lin_cost = [ZERO] * n_gen
            for (i, vj), (c0, coefs) in flows.items():
                dij = space.d[i][vj - n]
                const_cost += dij * c0
                for k in range(n_gen):
                    lin_cost[k] += dij * coefs[k]
            constraints = [
                Constraint([ONE] * n_gen, "=", ONE, "simplex")
            ]
            for (i, vj), (c0, coefs) in flows.items():
                constraints.append(
                    Constraint([-c for c in coefs], "<=", c0, f"flow[{i},{vj - n}]")
                )
            sol = solve_lp(
                LinearProgram(
                    [f"w[{k}]" for k in range(n_gen)],
                    lin_cost,
                    "min",
                    constraints,
                )
            )
            if sol.status != "optimal":
                continue
            value = const_cost + sol.value
            if best is None or value < best:
                best = value
        if best is None:
            raise InternalCheckError("no spanning tree admits a feasible plan")
        return best

    def directed(source: ConvexSet, target: ConvexSet) -> DirectedHk:
        best = None
        best_k = 0
        for k, g in enumerate(source.generators):
            v = p2s_tree(g, target)
            if best is None or v > best:
                best, best_k = v, k
        assert best is not None
        return DirectedHk(best, best_k, None)

    fwd = directed(first, second)
    bwd = directed(second, first)
    return HkResult(max(fwd.value, bwd.value), fwd, bwd, "spanning-tree")


# ---------------------------------------------------------------------------
# Price-function route


def _dominance_rows(gens, chosen: int, tag: str):
    """Rows forcing E_chosen[f] >= E_g[f] for every generator g."""
    rows = []
    base = gens[chosen].mass
    for k, g in enumerate(gens):
        if k == chosen:
            continue
        row = [gm - bm for gm, bm in zip(g.mass, base)]
        rows.append(Constraint(row, "<=", ZERO, f"dom[{tag},{k}]"))
    return rows


def dhk_dual(
    space: PseudometricSpace, first: ConvexSet, second: ConvexSet
) -> HkResult:
    """Price-function route to the convex-set distance.

    For each generator pair, a 1-Lipschitz f in [0,1] is sought whose
    expectations are maximised over each hull at the chosen generators;
    the objective is the expectation gap, solved once per sign.  The best
    value over pairs and signs equals the transport-based distance.
    """
    _check_inputs(space, first, second)
    n = len(space.points)
    lipschitz = []
    for i, j in _essential_pairs(space):
        row = [ZERO] * n
        row[i], row[j] = ONE, -ONE
        lipschitz.append(Constraint(row, "<=", space.d[i][j], f"lip[{i},{j}]"))
        row2 = [ZERO] * n
        row2[i], row2[j] = -ONE, ONE
        lipschitz.append(Constraint(row2, "<=", space.d[i][j], f"lip[{j},{i}]"))

    best: dict[int, tuple[Fraction, int, FuzzyPredicate] | None] = {1: None, -1: None}
    for ka, mu0 in enumerate(first.generators):
        for kb, nu0 in enumerate(second.generators):
            constraints = list(lipschitz)
            constraints.extend(_dominance_rows(first.generators, ka, "a"))
            constraints.extend(_dominance_rows(second.generators, kb, "b"))
            gap = [nm - mm for mm, nm in zip(mu0.mass, nu0.mass)]
            for sign in (1, -1):
                sol = solve_lp(
                    LinearProgram(
                        [f"f[{i}]" for i in range(n)],
                        [sign * c for c in gap],
                        "max",
                        constraints,
                        lower=[ZERO] * n,
                        upper=[ONE] * n,
                    )
                )
                if sol.status != "optimal":
                    raise InternalCheckError("generator-pair price LP must be solvable")
                cur = best[sign]
                if cur is None or sol.value > cur[0]:
                    f = FuzzyPredicate(
                        space.points,
                        [sol.assignment[f"f[{i}]"] for i in range(n)],
                    )
                    best[sign] = (
                        sol.value,
                        ka if sign == -1 else kb,
                        f,
                    )

    plus, minus = best[1], best[-1]
    assert plus is not None and minus is not None
    # sign -1 maximises E_mu0 - E_nu0, the first-to-second direction
    fwd = DirectedHk(max(minus[0], ZERO), minus[1], minus[2])
    bwd = DirectedHk(max(plus[0], ZERO), plus[1], plus[2])
    return HkResult(max(fwd.value, bwd.value), fwd, bwd, "dual")
