"""Command-line interface: every computation as a batch subcommand.

Inputs are JSON files; outputs are deterministic JSON (or CSV for bench)
on standard out.  Exit codes: 0 success, 1 input/validation/guard error,
2 internal assertion failure (including worked-example mismatches).
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from fractions import Fraction

from . import _config
from .behavioural import Lifting, behavioural_distance
from .convex_powerset import dhk_composite, dhk_dual, dhk_spanning_tree
from .distributions import expectation
from .errors import InternalCheckError, ValidationError
from .instances import point_names, random_distribution, random_pseudometric
from .jsonio import (
    hk_result_json,
    lifted_value_json,
    lp_value_json,
    metric_iterate_json,
    parse_coalgebra,
    parse_convex_set,
    parse_distribution,
    parse_ground,
    parse_point_set,
    witness_json,
)
from .levy_prokhorov import crisp_price_pair, duality_witness, ky_fan, lp_direct
from .liftings import (
    Coupling,
    LiftedValue,
    NonexpansivePair,
    PairingRelation,
    ThresholdCoupling,
    coupling_distribution,
    kantorovich,
    kantorovich_relational,
    matrix_predicate,
    wasserstein,
)
from .modalities import Modality, eval_modality, generally_value, parse_modality
from .rationals import ONE, ZERO, format_rational, parse_rational
from .spaces import FuzzyRelation, PseudometricSpace, relation_of_metric
from .worked_examples import EXAMPLE_NAMES, run_example


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _carriers(ground):
    if isinstance(ground, FuzzyRelation):
        return ground.sources, ground.targets
    return ground.points, ground.points


def _relation_matrix(ground):
    if isinstance(ground, FuzzyRelation):
        return ground
    return relation_of_metric(ground)


def _load_args(args, modality: Modality):
    ground = parse_ground(_load(args.space))
    sources, targets = _carriers(ground)
    if modality.kind in ("sup", "inf"):
        mu = parse_point_set(_load(args.mu), sources)
        nu = parse_point_set(_load(args.nu), targets)
    else:
        mu = parse_distribution(_load(args.mu), sources)
        nu = parse_distribution(_load(args.nu), targets)
    return ground, mu, nu


# ---------------------------------------------------------------------------
# Witness re-verification (--verify)


def _verify_lifted(res: LiftedValue, m: Modality, ground, s, t) -> None:
    """Independent re-evaluation of an emitted witness; raises on mismatch."""
    w = res.witness
    if w is None:
        return
    rel = _relation_matrix(ground)
    problems: list[str] = []
    if isinstance(w, Coupling):
        if not w.has_marginals(s, t):
            problems.append("coupling marginals do not match the arguments")
        elif m.kind == "expectation" and w.expectation(rel.r) != res.value:
            problems.append("coupling cost does not reproduce the value")
        elif m.kind == "p_moment" and res.root_base is not None:
            cost = w.expectation(
                [[v ** m.p.numerator for v in row] for row in rel.r]
            ) if m.p.denominator == 1 else None
            if cost is not None and cost != res.root_base:
                problems.append("coupling p-cost does not reproduce the root base")
    elif isinstance(w, ThresholdCoupling):
        if not w.coupling.has_marginals(s, t):
            problems.append("coupling marginals do not match the arguments")
        else:
            eps = w.epsilon_star
            beyond = sum(
                w.coupling.joint[i][j]
                for i in range(len(rel.sources))
                for j in range(len(rel.targets))
                if rel.r[i][j] > eps
            )
            if beyond > eps:
                problems.append("threshold coupling mass exceeds its threshold")
            joint = coupling_distribution(w.coupling)
            if generally_value(matrix_predicate(rel.r), joint) != res.value:
                problems.append("coupling does not re-evaluate to the value")
    elif isinstance(w, PairingRelation):
        left = {x for x, _ in w.pairs}
        right = {y for _, y in w.pairs}
        if left != set(s) or right != set(t):
            problems.append("pairing does not project onto both point sets")
        top = max(
            rel.r[rel.source_index(x)][rel.target_index(y)] for x, y in w.pairs
        )
        if top != res.value:
            problems.append("pairing maximum does not reproduce the value")
    elif isinstance(w, NonexpansivePair):
        problems.extend(w.violations(rel))
        gap = eval_modality(m, w.g, t) - eval_modality(m, w.f, s)
        if max(gap, ZERO) != res.value:
            problems.append("price pair gap does not reproduce the value")
    elif hasattr(w, "epsilon") and hasattr(w, "crisp_pair"):
        pair = NonexpansivePair(w.f, w.g)
        problems.extend(pair.violations(rel))
        gap = generally_value(w.g, t) - generally_value(w.f, s)
        if gap != w.epsilon:
            problems.append("duality witness margin drifted")
        if res.exactness == "exact" and not w.epsilon < res.value:
            problems.append("witness epsilon is not below the value")
    elif hasattr(w, "values") and hasattr(w, "points"):
        if isinstance(ground, PseudometricSpace):
            n = len(ground.points)
            for i in range(n):
                for j in range(n):
                    if abs(w.values[i] - w.values[j]) > ground.d[i][j]:
                        problems.append("price function is not nonexpansive")
                        break
        gap = abs(eval_modality(m, w, t) - eval_modality(m, w, s))
        if res.exactness == "exact" and gap != res.value:
            problems.append("price function does not reproduce the value")
        if res.exactness == "lower-bound" and gap != res.value:
            problems.append("price function does not reproduce the bound")
    if problems:
        raise InternalCheckError("; ".join(problems))


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_dist(args) -> tuple[int, str]:
    m = parse_modality(args.modality)
    ground, mu, nu = _load_args(args, m)
    construction = args.construction
    delta = parse_rational(args.delta) if args.delta else None
    if construction in ("lp-direct", "ky-fan") and m.kind != "generally":
        raise ValidationError(f"{construction} requires the generally modality")
    if construction == "lp-direct":
        res = lp_direct(ground, mu, nu)
        payload = {"command": "dist", "construction": construction,
                   "modality": args.modality, **lp_value_json(res)}
        return 0, json.dumps(payload, indent=2)
    if construction == "ky-fan":
        res = ky_fan(ground, mu, nu)
    elif construction == "wasserstein":
        res = wasserstein(m, ground, mu, nu)
    elif isinstance(ground, FuzzyRelation):
        res = kantorovich_relational(
            m, ground, mu, nu, witness_depth=args.witness_depth
        )
    else:
        res = kantorovich(
            m, ground, mu, nu,
            witness_depth=args.witness_depth, oracle_delta=delta,
        )
    if args.verify:
        _verify_lifted(res, m, ground, mu, nu)
    payload = {
        "command": "dist",
        "construction": construction,
        "modality": args.modality,
        **lifted_value_json(res, include_witness=args.witness),
    }
    if args.verify:
        payload["verified"] = True
    return 0, json.dumps(payload, indent=2)


def _cmd_duality_check(args) -> tuple[int, str]:
    m = parse_modality(args.modality)
    ground, mu, nu = _load_args(args, m)
    delta = parse_rational(args.delta) if args.delta else None
    w = wasserstein(m, ground, mu, nu)
    if isinstance(ground, FuzzyRelation):
        k = kantorovich_relational(m, ground, mu, nu, witness_depth=0)
    else:
        k = kantorovich(m, ground, mu, nu, witness_depth=0, oracle_delta=delta)
    if isinstance(w.value, Fraction) and isinstance(k.value, Fraction):
        gap = w.value - k.value
        equal = gap == 0
        gap_out = format_rational(gap)
    else:
        import mpmath

        with mpmath.mp.workdps(30):
            gap = w.value - k.value
            equal = bool(abs(gap) < mpmath.mpf("1e-12"))
            gap_out = mpmath.nstr(+gap, 12)
    payload = {
        "command": "duality-check",
        "modality": args.modality,
        "kantorovich": lifted_value_json(k),
        "wasserstein": lifted_value_json(w),
        "equal": equal,
        "gap": gap_out,
    }
    return 0, json.dumps(payload, indent=2)


def _cmd_witness(args) -> tuple[int, str]:
    ground = parse_ground(_load(args.space))
    sources, targets = _carriers(ground)
    mu = parse_distribution(_load(args.mu), sources)
    nu = parse_distribution(_load(args.nu), targets)
    eps = parse_rational(args.epsilon)
    rel = _relation_matrix(ground)
    if args.crisp:
        crisp = [[ONE if v > eps else ZERO for v in row] for row in rel.r]
        pair = crisp_price_pair(crisp, mu, nu)
        if args.verify and pair.violations(crisp, mu, nu):
            raise InternalCheckError("crisp pair failed re-verification")
        payload = {"command": "witness", "epsilon": format_rational(eps),
                   **witness_json(pair)}
    else:
        dw = duality_witness(ground, mu, nu, eps)
        if args.verify:
            gap = generally_value(dw.g, nu) - generally_value(dw.f, mu)
            if gap != dw.epsilon or NonexpansivePair(dw.f, dw.g).violations(rel):
                raise InternalCheckError("duality witness failed re-verification")
        payload = {"command": "witness", **witness_json(dw)}
    if args.verify:
        payload["verified"] = True
    return 0, json.dumps(payload, indent=2)


def _cmd_convex(args) -> tuple[int, str]:
    space = parse_ground(_load(args.space))
    if isinstance(space, FuzzyRelation):
        raise ValidationError("convex distances need a pseudometric space")
    a_set = parse_convex_set(_load(args.a), space.points)
    b_set = parse_convex_set(_load(args.b), space.points)
    if args.generators_only and args.algorithm != "composite":
        raise ValidationError("--generators-only applies to the composite algorithm")
    if args.algorithm == "composite":
        res = dhk_composite(space, a_set, b_set, generators_only=args.generators_only)
    elif args.algorithm == "spanning-tree":
        res = dhk_spanning_tree(space, a_set, b_set)
    else:
        res = dhk_dual(space, a_set, b_set)
    if args.verify:
        _verify_convex(space, a_set, b_set, res)
    payload = {
        "command": "convex",
        "algorithm": args.algorithm,
        **hk_result_json(res, include_witness=args.witness),
    }
    if args.verify:
        payload["verified"] = True
    return 0, json.dumps(payload, indent=2)


def _verify_convex(space, a_set, b_set, res) -> None:
    if res.method == "dual":
        m = Modality.convex_sup_expectation()
        n = len(space.points)
        for directed, source, target in (
            (res.forward, a_set, b_set),
            (res.backward, b_set, a_set),
        ):
            f = directed.inner
            gap = eval_modality(m, f, source) - eval_modality(m, f, target)
            if gap != directed.value:
                raise InternalCheckError("dual witness does not re-evaluate to the value")
            for i in range(n):
                for j in range(n):
                    if abs(f.values[i] - f.values[j]) > space.d[i][j]:
                        raise InternalCheckError("dual witness is not nonexpansive")
        if max(res.forward.value, res.backward.value) != res.value:
            raise InternalCheckError("dual value is not the larger directed value")
    else:
        check = dhk_composite(space, a_set, b_set)
        if res.method == "composite/generators-only":
            if res.value < check.value:
                raise InternalCheckError(
                    "generators-only value fell below the hull value"
                )
        elif check.value != res.value:
            raise InternalCheckError("value disagrees with the composite recomputation")


def _cmd_behavioural(args) -> tuple[int, str]:
    coalg = parse_coalgebra(_load(args.coalgebra))
    lifting = Lifting(parse_modality(args.modality), args.construction)
    tolerance = parse_rational(args.tolerance) if args.tolerance else None
    res = behavioural_distance(
        coalg, lifting, max_iters=args.max_iters, tolerance=tolerance
    )
    payload = {
        "command": "behavioural",
        "kind": coalg.kind,
        "modality": args.modality,
        "construction": args.construction,
        **metric_iterate_json(res, coalg.states),
    }
    return 0, json.dumps(payload, indent=2)


def _cmd_bench(args) -> tuple[int, str]:
    if args.suite != "convex":
        raise ValidationError("the only bench suite is 'convex'")
    import random

    from .convex_powerset import ConvexSet

    sizes = []
    for chunk in args.sizes.split(","):
        chunk = chunk.strip()
        if chunk:
            sizes.append(int(chunk))
    if not sizes:
        raise ValidationError("--sizes must list at least one carrier size")
    gens = args.gens
    tree_limit = _config.guard("TREE_CARRIER")
    lines = ["algorithm,carrier,a_generators,b_generators,seconds,value"]
    notes = []
    for n in sizes:
        rng = random.Random(args.seed + n)
        space = random_pseudometric(rng, n)
        pts = point_names(n)
        a_set = ConvexSet(
            pts, tuple(random_distribution(rng, pts) for _ in range(gens))
        )
        b_set = ConvexSet(
            pts, tuple(random_distribution(rng, pts) for _ in range(gens))
        )
        algos = [("dual", dhk_dual), ("composite", dhk_composite)]
        if n <= tree_limit:
            algos.append(("spanning-tree", dhk_spanning_tree))
        else:
            notes.append(
                f"# spanning-tree skipped at |X|={n}: K_{{n,n}} has n^(2n-2) "
                f"spanning trees ({n}^{2 * n - 2} = {n ** (2 * n - 2)}), "
                "infeasible to enumerate"
            )
        for name, fn in algos:
            samples = []
            value = None
            for _ in range(args.repeats):
                start = time.perf_counter()
                value = fn(space, a_set, b_set).value
                samples.append(time.perf_counter() - start)
            lines.append(
                f"{name},{n},{gens},{gens},"
                f"{statistics.median(samples):.6f},{format_rational(value)}"
            )
    notes.append(
        "# rationale: the dual route solves O(|A0|*|B0|) small LPs, polynomial "
        "in the carrier, while tree enumeration grows as n^(2n-2)"
    )
    return 0, "\n".join(lines + notes)


def _cmd_examples(args) -> tuple[int, str]:
    report = run_example(args.name)
    code = 0 if report["all_ok"] else 2
    return code, json.dumps(report, indent=2)


# ---------------------------------------------------------------------------
# Parser


def _build_parser() -> _Parser:
    parser = _Parser(prog="liftlab", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--space", required=True, help="space or relation JSON file")
        p.add_argument("--mu", required=True, help="first argument JSON file")
        p.add_argument("--nu", required=True, help="second argument JSON file")
        p.add_argument("--modality", default="expectation")

    dist = sub.add_parser("dist", help="lifted distance between two arguments")
    add_common(dist)
    dist.add_argument(
        "--construction",
        choices=["kantorovich", "wasserstein", "lp-direct", "ky-fan"],
        default="kantorovich",
    )
    dist.add_argument("--witness", action="store_true")
    dist.add_argument("--verify", action="store_true")
    dist.add_argument("--witness-depth", type=int, default=None)
    dist.add_argument("--delta", default=None, help="grid step for oracle bounds")
    dist.set_defaults(func=_cmd_dist)

    dc = sub.add_parser("duality-check", help="compare both constructions")
    add_common(dc)
    dc.add_argument("--delta", default=None)
    dc.set_defaults(func=_cmd_duality_check)

    wit = sub.add_parser("witness", help="duality witness or crisp price pair")
    wit.add_argument("--space", required=True)
    wit.add_argument("--mu", required=True)
    wit.add_argument("--nu", required=True)
    wit.add_argument("--epsilon", required=True)
    wit.add_argument("--crisp", action="store_true")
    wit.add_argument("--verify", action="store_true")
    wit.set_defaults(func=_cmd_witness)

    cx = sub.add_parser("convex", help="distance between convex sets")
    cx.add_argument("--space", required=True)
    cx.add_argument("--a", required=True)
    cx.add_argument("--b", required=True)
    cx.add_argument(
        "--algorithm",
        choices=["composite", "spanning-tree", "dual"],
        default="composite",
    )
    cx.add_argument("--generators-only", action="store_true")
    cx.add_argument("--witness", action="store_true")
    cx.add_argument("--verify", action="store_true")
    cx.set_defaults(func=_cmd_convex)

    bh = sub.add_parser("behavioural", help="fixpoint distance on a coalgebra")
    bh.add_argument("--coalgebra", required=True)
    bh.add_argument("--modality", default="expectation")
    bh.add_argument(
        "--construction", choices=["kantorovich", "wasserstein"],
        default="kantorovich",
    )
    bh.add_argument("--max-iters", type=int, default=1000)
    bh.add_argument("--tolerance", default=None)
    bh.set_defaults(func=_cmd_behavioural)

    bench = sub.add_parser("bench", help="timing suite, CSV output")
    bench.add_argument("--suite", default="convex")
    bench.add_argument("--sizes", default="3,4,10")
    bench.add_argument("--gens", type=int, default=5)
    bench.add_argument("--seed", type=int, default=20240)
    bench.add_argument("--repeats", type=int, default=3)
    bench.set_defaults(func=_cmd_bench)

    ex = sub.add_parser("examples", help="reproduce a worked instance")
    ex.add_argument("--name", required=True, choices=list(EXAMPLE_NAMES))
    ex.set_defaults(func=_cmd_examples)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        code, output = args.func(args)
        print(output)
        return code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InternalCheckError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
