import itertools
import json
import math

import pytest

import loaders
import main
from conftest import circle_placement
from errors import InternalError
from schemas import Status


def cycle(m, coloring=None):
    data = {"dim": 1, "vertex_count": m, "top_simplices": [[i, (i + 1) % m] for i in range(m)]}
    if coloring is not None:
        data["coloring"] = coloring
    return data


TETRA = {"dim": 2, "vertex_count": 4, "top_simplices": [list(s) for s in itertools.combinations(range(4), 3)]}


@pytest.fixture
def run_cli(tmp_path, capsys):
    def _run(*argv, **files):
        args = list(argv)
        for flag, data in files.items():
            path = tmp_path / f"{flag}.json"
            loaders.write_json(str(path), data)
            args += [f"--{flag.replace('_', '-')}", str(path)]
        code = main.main(args)
        out = capsys.readouterr().out
        return code, (json.loads(out) if out.strip() else None)
    return _run


# === check ===

def test_check_tetrahedron(run_cli):
    code, report = run_cli("check", input=TETRA)
    assert code == 0
    assert report["status"] == "pass"
    assert report["payload"]["f_vector"] == [4, 6, 4]


def test_check_reports_an_empty_square(run_cli):
    code, report = run_cli("check", "--flag-square", input=cycle(4))
    assert code == 0
    assert report["payload"]["flag"] is True
    assert report["payload"]["empty_square"] is True
    assert report["payload"]["empty_squares"] == [[0, 1, 2, 3]]


def test_check_characteristic(run_cli):
    code, report = run_cli("check", input=cycle(4), **{"lambda": {
        "kind": "characteristic", "rank": 2, "values": [[1, 0], [1, 0], [0, 1], [0, 1]],
    }})
    assert code == 1
    assert report["payload"]["characteristic"]["error"] == "RankDeficient"


def test_malformed_input(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2", encoding="utf-8")
    code = main.main(["check", "--input", str(path)])
    report = json.loads(capsys.readouterr().out)
    assert code == 3
    assert report["payload"]["error"] == "ParseError"


def test_usage_errors(run_cli):
    assert run_cli("frobnicate") == (3, None)
    assert run_cli("constants", "--n", "0") == (3, None)
    code, report = run_cli("check")
    assert code == 3
    assert report["payload"]["error"] == "UsageError"


# === realize ===

def test_realize_hexagon(run_cli):
    code, report = run_cli("realize", input=cycle(6, [1, 2, 1, 2, 1, 2]))
    assert code == 0
    payload = report["payload"]
    assert payload["complete"] is True
    assert payload["subdivided"] is False
    assert payload["k"] >= 1
    assert payload["cells"] == 6 * payload["k"]


def test_realize_subdivides_uncolored_input(run_cli):
    code, report = run_cli("realize", input=cycle(3))
    assert code == 0
    assert report["payload"]["subdivided"] is True


def test_realize_partial_on_small_budget(run_cli):
    code, report = run_cli("realize", "--budget", "1", input=cycle(6, [1, 2, 1, 2, 1, 2]))
    assert code == 2
    assert report["status"] == "partial"
    assert report["payload"]["complete"] is False


# === constants ===

def test_constants_n2(run_cli):
    code, report = run_cli("constants", "--n", "2")
    assert code == 0
    payload = report["payload"]
    assert payload["eps"] == pytest.approx(math.pi / 3)
    assert payload["rho"] == pytest.approx(1.316957897, abs=1e-9)
    assert payload["exact"]["cos_eps"] == "1/2"
    assert payload["sparse"]["ok"] is True


def test_constants_large_n_skips_sparse(run_cli):
    code, report = run_cli("constants", "--n", "6")
    assert code == 0
    assert "sparse" not in report["payload"]


@pytest.mark.parametrize("n", ["3", "9"])
def test_constants_diameter_flags_are_json_booleans(run_cli, n):
    code, report = run_cli("constants", "--n", n)
    assert code == 0
    assert report["status"] == "pass"
    assert report["payload"]["diameter_ok"] is True
    assert report["payload"]["diameter_equality"] is False


# === dominate ===

def test_dominate_map(run_cli):
    code, report = run_cli("dominate", **{"map": {
        "kind": "map", "source": cycle(6), "target": cycle(3), "vertex_map": [0, 1, 2, 0, 1, 2],
    }})
    assert code == 0
    assert abs(report["payload"]["degree"]) == 16
    assert report["payload"]["degree"] == report["payload"]["expected"]


def test_dominate_rejects_a_fold(run_cli):
    code, report = run_cli("dominate", **{"map": {
        "kind": "map", "source": cycle(6), "target": cycle(3), "vertex_map": [0, 1, 2, 1, 0, 1],
    }})
    assert code == 1
    assert report["payload"]["error"] == "ZeroDegreeInput"


def test_dominate_placement(run_cli):
    vectors = circle_placement(12, offset=0.1).tolist()
    code, report = run_cli("dominate", "--float", input={
        "kind": "placement", "complex": cycle(12), "vectors": vectors,
    })
    assert code == 0
    assert report["payload"]["m2"] == 6
    assert report["payload"]["degree"] != 0


# === covers ===

def test_covers_real_moment_angle(run_cli):
    code, report = run_cli("covers", "--real-moment-angle", input=cycle(3))
    assert code == 0
    assert report["payload"]["f_vector"] == [6, 12, 8]
    assert report["payload"]["euler"] == 2


def test_covers_small_cover(run_cli):
    code, report = run_cli("covers", input=cycle(4), **{"lambda": {
        "kind": "characteristic", "rank": 2, "values": [[1, 0], [0, 1], [1, 0], [0, 1]],
    }})
    assert code == 0
    assert report["payload"]["euler"] == 0


# === certify-fine ===

def test_certify_fine(run_cli):
    placement = {"kind": "placement", "complex": cycle(12), "vectors": circle_placement(12).tolist()}
    code, report = run_cli("certify-fine", "--float", "--eps", "1.0471975511965976", input=placement)
    assert code == 0
    assert abs(report["payload"]["degree"]) == 1

    code, report = run_cli("certify-fine", "--float", "--eps", "0.4", input=placement)
    assert code == 1
    assert report["payload"]["error"] == "DiameterExceeded"


# === algebra ===

def test_algebra_on_a_poset(run_cli):
    code, report = run_cli("algebra", "--trials", "40", input={"kind": "poset", "elements": 3, "less": [[0, 1]]})
    assert code == 0
    assert report["payload"]["semidirect"]["counterexamples"] == []


# === Erreurs internes ===

def test_invalid_report_is_an_internal_error(run_cli, monkeypatch):
    monkeypatch.setitem(main.COMMANDS, "constants", lambda config: ("maybe", {}))
    code, report = run_cli("constants", "--n", "2")
    assert code == InternalError.exit_code
    assert report["status"] == "fail"
    assert report["payload"]["error"] == "InternalError"
    assert report["payload"]["detail"].startswith("ValidationError")


def test_unserializable_payload_is_an_internal_error(run_cli, monkeypatch):
    monkeypatch.setitem(main.COMMANDS, "constants", lambda config: (Status.PASS, {"value": object()}))
    code, report = run_cli("constants", "--n", "2")
    assert code == InternalError.exit_code
    assert report["command"] == "constants"
    assert report["payload"]["error"] == "InternalError"
    assert "not serializable" in report["payload"]["detail"]
