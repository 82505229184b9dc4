"""End-to-end checks of the command line interface.

Every test drives ``liftlab.cli.main`` directly with temp JSON files and
inspects stdout/stderr plus the exit code, so the whole parse -> compute ->
serialize pipeline is covered without spawning subprocesses.
"""

import json
from fractions import Fraction

import pytest

from liftlab.cli import main
from liftlab.errors import InternalCheckError

F = Fraction


def write_json(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def two_point(tmp_path):
    space = write_json(
        tmp_path,
        "space.json",
        {"points": ["a", "b"], "d": [["0", "1"], ["1", "0"]]},
    )
    mu = write_json(tmp_path, "mu.json", {"mass": {"a": "2/3", "b": "1/3"}})
    nu = write_json(tmp_path, "nu.json", {"mass": {"a": "1/3", "b": "2/3"}})
    return space, mu, nu


def test_dist_expectation_both_constructions(two_point, capsys):
    space, mu, nu = two_point
    for construction in ("kantorovich", "wasserstein"):
        code, out, err = run_cli(
            capsys,
            ["dist", "--space", space, "--mu", mu, "--nu", nu,
             "--construction", construction],
        )
        assert code == 0, err
        payload = json.loads(out)
        assert payload["command"] == "dist"
        assert payload["construction"] == construction
        assert payload["value"] == "1/3"
        assert payload["exactness"] == "exact"


def test_dist_generally_all_constructions_agree(two_point, capsys):
    space, mu, nu = two_point
    for construction in ("kantorovich", "wasserstein", "ky-fan"):
        code, out, err = run_cli(
            capsys,
            ["dist", "--space", space, "--mu", mu, "--nu", nu,
             "--modality", "generally", "--construction", construction],
        )
        assert code == 0, err
        assert json.loads(out)["value"] == "1/3"
    code, out, err = run_cli(
        capsys,
        ["dist", "--space", space, "--mu", mu, "--nu", nu,
         "--modality", "generally", "--construction", "lp-direct"],
    )
    assert code == 0, err
    payload = json.loads(out)
    assert payload["value"] == "1/3"
    assert payload["direction"] in ("forward", "backward")
    assert "worst_set" in payload


def test_dist_rejects_direct_constructions_for_expectation(two_point, capsys):
    space, mu, nu = two_point
    for construction in ("lp-direct", "ky-fan"):
        code, _, err = run_cli(
            capsys,
            ["dist", "--space", space, "--mu", mu, "--nu", nu,
             "--construction", construction],
        )
        assert code == 1
        assert "generally" in err


def test_dist_sup_takes_point_sets(tmp_path, capsys):
    space = write_json(
        tmp_path,
        "space.json",
        {
            "points": ["x", "y", "z"],
            "d": [["0", "1/2", "1"], ["1/2", "0", "1/2"], ["1", "1/2", "0"]],
        },
    )
    a = write_json(tmp_path, "a.json", {"set": ["x", "y"]})
    b = write_json(tmp_path, "b.json", {"set": ["y", "z"]})
    for construction in ("kantorovich", "wasserstein"):
        code, out, err = run_cli(
            capsys,
            ["dist", "--space", space, "--mu", a, "--nu", b,
             "--modality", "sup", "--construction", construction],
        )
        assert code == 0, err
        assert json.loads(out)["value"] == "1/2"


def test_dist_relational_ground(tmp_path, capsys):
    rel = write_json(
        tmp_path,
        "rel.json",
        {
            "points": ["a", "b"],
            "targets": ["u", "v"],
            "d": [["0", "1"], ["1", "0"]],
        },
    )
    mu = write_json(tmp_path, "mu.json", {"mass": {"a": "2/3", "b": "1/3"}})
    nu = write_json(tmp_path, "nu.json", {"mass": {"u": "1/3", "v": "2/3"}})
    code, out, err = run_cli(
        capsys, ["dist", "--space", rel, "--mu", mu, "--nu", nu]
    )
    assert code == 0, err
    assert json.loads(out)["value"] == "1/3"


def test_dist_witness_payloads(two_point, capsys):
    space, mu, nu = two_point
    code, out, _ = run_cli(
        capsys,
        ["dist", "--space", space, "--mu", mu, "--nu", nu,
         "--witness", "--verify"],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["verified"] is True
    assert payload["witness"]["kind"] == "price_function"

    code, out, _ = run_cli(
        capsys,
        ["dist", "--space", space, "--mu", mu, "--nu", nu,
         "--construction", "wasserstein", "--witness", "--verify"],
    )
    assert code == 0
    assert json.loads(out)["witness"]["kind"] == "coupling"

    code, out, _ = run_cli(
        capsys,
        ["dist", "--space", space, "--mu", mu, "--nu", nu,
         "--modality", "generally", "--construction", "wasserstein",
         "--witness", "--verify"],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["witness"]["kind"] == "threshold_coupling"

    code, out, _ = run_cli(
        capsys,
        ["dist", "--space", space, "--mu", mu, "--nu", nu,
         "--modality", "generally", "--witness", "--verify"],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["witness"]["kind"] == "duality_witness"
    # default depth 8: epsilon sits 2^-8 below the value
    assert F(payload["value"]) - F(payload["witness"]["epsilon"]) == F(1, 256)


def test_duality_check_exact_branch(two_point, capsys):
    space, mu, nu = two_point
    code, out, err = run_cli(
        capsys, ["duality-check", "--space", space, "--mu", mu, "--nu", nu]
    )
    assert code == 0, err
    payload = json.loads(out)
    assert payload["equal"] is True
    assert payload["gap"] == "0"
    assert payload["kantorovich"]["value"] == "1/3"
    assert payload["wasserstein"]["value"] == "1/3"


def test_duality_check_p_moment_branch(tmp_path, capsys):
    # Dirac pair at distance one: both routes give exactly 1 even through
    # the floating p-th root, so the tolerance comparison reports equality.
    space = write_json(
        tmp_path,
        "space.json",
        {"points": ["a", "b"], "d": [["0", "1"], ["1", "0"]]},
    )
    mu = write_json(tmp_path, "mu.json", {"mass": {"a": "1"}})
    nu = write_json(tmp_path, "nu.json", {"mass": {"b": "1"}})
    code, out, err = run_cli(
        capsys,
        ["duality-check", "--space", space, "--mu", mu, "--nu", nu,
         "--modality", "p_moment:2"],
    )
    assert code == 0, err
    payload = json.loads(out)
    assert payload["equal"] is True
    assert payload["wasserstein"]["exactness"] == "exact"
    assert payload["kantorovich"]["exactness"] == "lower-bound"


def test_witness_subcommand(two_point, capsys):
    space, mu, nu = two_point
    code, out, err = run_cli(
        capsys,
        ["witness", "--space", space, "--mu", mu, "--nu", nu,
         "--epsilon", "1/4", "--verify"],
    )
    assert code == 0, err
    payload = json.loads(out)
    assert payload["kind"] == "duality_witness"
    assert payload["epsilon"] == "1/4"
    assert payload["f"]["values"] == ["1/3", "7/12"]
    assert payload["g"]["values"] == ["1/3", "7/12"]
    assert payload["crisp_pair"]["kind"] == "crisp_price_pair"
    assert payload["verified"] is True


def test_witness_crisp_pair(two_point, capsys):
    space, mu, nu = two_point
    code, out, err = run_cli(
        capsys,
        ["witness", "--space", space, "--mu", mu, "--nu", nu,
         "--epsilon", "1/4", "--crisp", "--verify"],
    )
    assert code == 0, err
    payload = json.loads(out)
    assert payload["kind"] == "crisp_price_pair"
    assert payload["value"] == "1/3"
    for key in ("p", "q"):
        assert set(payload[key]["values"]) <= {"0", "1"}


def test_witness_epsilon_preconditions(two_point, capsys):
    space, mu, nu = two_point
    for eps in ("0", "1/3", "2"):
        code, _, err = run_cli(
            capsys,
            ["witness", "--space", space, "--mu", mu, "--nu", nu,
             "--epsilon", eps],
        )
        assert code == 1, eps
        assert err.startswith("error:")


@pytest.fixture
def hexagon_files(tmp_path):
    space = write_json(
        tmp_path,
        "space.json",
        {
            "points": ["x", "y", "z"],
            "d": [["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]],
        },
    )
    a = write_json(
        tmp_path,
        "a.json",
        {
            "generators": [
                {"mass": {"x": "1/3", "y": "1/3", "z": "1/3"}},
                {"mass": {"x": "2/3", "y": "1/3"}},
            ]
        },
    )
    b = write_json(
        tmp_path,
        "b.json",
        {
            "generators": [
                {"mass": {"y": "2/3", "z": "1/3"}},
                {"mass": {"x": "1/3", "z": "2/3"}},
            ]
        },
    )
    return space, a, b


def test_convex_three_algorithms(hexagon_files, capsys):
    space, a, b = hexagon_files
    for algorithm in ("composite", "spanning-tree", "dual"):
        code, out, err = run_cli(
            capsys,
            ["convex", "--space", space, "--a", a, "--b", b,
             "--algorithm", algorithm, "--witness", "--verify"],
        )
        assert code == 0, err
        payload = json.loads(out)
        assert payload["value"] == "1/2"
        assert payload["verified"] is True
        assert "generator_index" in payload["forward"]
        if algorithm == "dual":
            assert "price_function" in payload["forward"]
        elif algorithm == "composite":
            assert "point_to_set" in payload["forward"]


def test_convex_generators_only(hexagon_files, capsys):
    space, a, b = hexagon_files
    code, out, err = run_cli(
        capsys,
        ["convex", "--space", space, "--a", a, "--b", b, "--generators-only"],
    )
    assert code == 0, err
    payload = json.loads(out)
    assert payload["method"] == "composite/generators-only"
    assert F(payload["value"]) >= F(1, 2)

    code, _, err = run_cli(
        capsys,
        ["convex", "--space", space, "--a", a, "--b", b,
         "--algorithm", "dual", "--generators-only"],
    )
    assert code == 1
    assert "composite" in err


def test_convex_rejects_relational_ground(tmp_path, hexagon_files, capsys):
    _, a, b = hexagon_files
    rel = write_json(
        tmp_path,
        "rel.json",
        {"points": ["x"], "targets": ["y"], "d": [["1"]]},
    )
    code, _, err = run_cli(
        capsys, ["convex", "--space", rel, "--a", a, "--b", b]
    )
    assert code == 1
    assert "pseudometric" in err


def test_behavioural_subcommand(tmp_path, capsys):
    coalg = write_json(
        tmp_path,
        "chain.json",
        {
            "kind": "labelled_markov_chain",
            "states": ["s", "t"],
            "gamma": {
                "s": {"out": "0", "next": {"t": "1"}},
                "t": {"out": "1/2", "next": {"s": "1"}},
            },
        },
    )
    for construction in ("kantorovich", "wasserstein"):
        code, out, err = run_cli(
            capsys,
            ["behavioural", "--coalgebra", coalg,
             "--construction", construction],
        )
        assert code == 0, err
        payload = json.loads(out)
        assert payload["kind"] == "labelled_markov_chain"
        assert payload["states"] == ["s", "t"]
        assert payload["distance"][0][1] == "1/2"
        assert payload["distance"][0][0] == "0"
        assert payload["converged"] is True
        assert payload["stop_reason"] == "exact"


def test_behavioural_modality_mismatch(tmp_path, capsys):
    coalg = write_json(
        tmp_path,
        "chain.json",
        {
            "kind": "markov_chain",
            "states": ["s"],
            "gamma": {"s": {"s": "1"}},
        },
    )
    code, _, err = run_cli(
        capsys,
        ["behavioural", "--coalgebra", coalg,
         "--modality", "convex_sup_expectation"],
    )
    assert code == 1
    assert err.startswith("error:")


def test_bench_csv_and_guard_note(capsys):
    code, out, err = run_cli(
        capsys,
        ["bench", "--sizes", "3,5", "--gens", "2", "--repeats", "1"],
    )
    assert code == 0, err
    lines = out.strip().splitlines()
    assert lines[0] == "algorithm,carrier,a_generators,b_generators,seconds,value"
    rows = [ln for ln in lines if not ln.startswith("#")][1:]
    algos_at = {}
    for row in rows:
        algo, carrier, a_g, b_g, seconds, value = row.split(",")
        algos_at.setdefault(carrier, set()).add(algo)
        assert a_g == "2" and b_g == "2"
        float(seconds)
        F(value)
    assert algos_at["3"] == {"dual", "composite", "spanning-tree"}
    assert algos_at["5"] == {"dual", "composite"}
    notes = [ln for ln in lines if ln.startswith("#")]
    assert any("skipped at |X|=5" in n and "5^8" in n for n in notes)
    assert any("n^(2n-2)" in n for n in notes)


def test_examples_all_pass(capsys):
    for name in ("p-wasserstein-gap", "hexagon", "lp-duality"):
        code, out, err = run_cli(capsys, ["examples", "--name", name])
        assert code == 0, err
        payload = json.loads(out)
        assert payload["name"] == name
        assert payload["all_ok"] is True
        assert all(c["ok"] for c in payload["checks"])


def test_input_error_paths(tmp_path, two_point, capsys):
    space, mu, nu = two_point

    code, _, err = run_cli(
        capsys,
        ["dist", "--space", str(tmp_path / "missing.json"),
         "--mu", mu, "--nu", nu],
    )
    assert code == 1 and "cannot read" in err

    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    code, _, err = run_cli(
        capsys, ["dist", "--space", str(bad), "--mu", mu, "--nu", nu]
    )
    assert code == 1 and "not valid JSON" in err

    broken = write_json(
        tmp_path,
        "broken.json",
        {
            "points": ["x", "y", "z"],
            "d": [["0", "1", "1/4"], ["1", "0", "1/4"], ["1/4", "1/4", "0"]],
        },
    )
    code, _, err = run_cli(
        capsys, ["dist", "--space", broken, "--mu", mu, "--nu", nu]
    )
    assert code == 1 and err.startswith("error:")

    code, _, err = run_cli(
        capsys,
        ["dist", "--space", space, "--mu", mu, "--nu", nu,
         "--construction", "nonsense"],
    )
    assert code == 1

    code, _, err = run_cli(capsys, ["no-such-command"])
    assert code == 1

    code, _, err = run_cli(capsys, ["witness", "--space", space])
    assert code == 1


def test_internal_check_maps_to_exit_two(two_point, capsys, monkeypatch):
    space, mu, nu = two_point

    def explode(*args, **kwargs):
        raise InternalCheckError("forced for the exit-code test")

    monkeypatch.setattr("liftlab.cli._verify_lifted", explode)
    code, _, err = run_cli(
        capsys,
        ["dist", "--space", space, "--mu", mu, "--nu", nu, "--verify"],
    )
    assert code == 2
    assert "internal check failed" in err


def test_output_is_deterministic(two_point, capsys):
    space, mu, nu = two_point
    argv = ["dist", "--space", space, "--mu", mu, "--nu", nu,
            "--modality", "generally", "--witness", "--verify"]
    _, first, _ = run_cli(capsys, argv)
    _, second, _ = run_cli(capsys, argv)
    assert first == second
