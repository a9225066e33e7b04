import json

import pytest
from sympy import Rational

import loaders
from errors import ParseError
from schemas import OutputFormat, Report, Status
from simplicial import validate_pseudo_manifold

TRIANGLE = {"dim": 1, "vertex_count": 3, "top_simplices": [[0, 1], [1, 2], [2, 0]]}


@pytest.fixture
def write(tmp_path):
    def _write(name, data):
        path = tmp_path / name
        loaders.write_json(str(path), data)
        return str(path)
    return _write


def test_load_complex_remaps_orientation(write):
    path = write("triangle.json", {**TRIANGLE, "orientation": [1, 1, 1], "coloring": [1, 2, 1]})
    loaded = loaders.load_complex(path)
    index = loaded.complex.index
    assert loaded.orientation[index[(0, 1)]] == 1
    assert loaded.orientation[index[(1, 2)]] == 1
    assert loaded.orientation[index[(0, 2)]] == -1
    assert loaded.coloring == [1, 2, 1]
    z = validate_pseudo_manifold(loaded.complex, orientation=loaded.orientation)
    assert z.strongly_connected


def test_parse_errors(tmp_path, write):
    with pytest.raises(ParseError):
        loaders.load_complex(str(tmp_path / "missing.json"))

    broken = tmp_path / "broken.json"
    broken.write_text("{ not json", encoding="utf-8")
    with pytest.raises(ParseError):
        loaders.load_complex(str(broken))

    with pytest.raises(ParseError):
        loaders.read_json(write("list.json", [1, 2, 3]))

    with pytest.raises(ParseError) as exc:
        loaders.load_complex(write("short.json", {**TRIANGLE, "top_simplices": [[0, 1, 2]]}))
    assert exc.value.witness

    with pytest.raises(ParseError):
        loaders.load_complex(write("dup.json", {**TRIANGLE, "top_simplices": [[0, 1], [1, 0]]}))


def test_file_kind(write):
    assert loaders.file_kind(write("c.json", TRIANGLE)) == "complex"
    assert loaders.file_kind(write("p.json", {"kind": "poset", "elements": 2})) == "poset"


def test_load_poset(write):
    poset = loaders.load_poset(write("p.json", {"kind": "poset", "elements": 3, "less": [[0, 1], [1, 2]]}))
    assert poset.lt(0, 2)
    with pytest.raises(ParseError):
        loaders.load_poset(write("bad.json", {"kind": "poset", "elements": 2, "less": [[0, 5]]}))


def test_load_placement(write):
    exact = loaders.load_placement(write("exact.json", {
        "kind": "placement", "complex": TRIANGLE, "exact": True,
        "vectors": [["1", "0"], ["-1/2", "1/2"], ["-1/2", "-1/2"]],
    }))
    assert exact.exact[1] == [Rational(-1, 2), Rational(1, 2)]
    assert exact.vectors.shape == (3, 2)
    assert exact.vectors[1, 0] == -0.5

    with pytest.raises(ParseError):
        loaders.load_placement(write("float.json", {
            "kind": "placement", "complex": TRIANGLE, "vectors": [["1/2", 0], [0, 1], [-1, 0]],
        }))


def test_load_map(write):
    hexagon = {"dim": 1, "vertex_count": 6, "top_simplices": [[i, (i + 1) % 6] for i in range(6)]}
    loaded = loaders.load_map(write("map.json", {
        "kind": "map", "source": hexagon, "target": TRIANGLE, "vertex_map": [0, 1, 2, 0, 1, 2],
    }))
    assert loaded.map.vertex_map == (0, 1, 2, 0, 1, 2)
    assert loaded.target.complex.vertex_count == 3


def test_load_characteristic(write):
    rank, values = loaders.load_characteristic(write("l.json", {
        "kind": "characteristic", "rank": 2, "values": [[1, 0], [0, 1], [1, 0], [0, 1]],
    }))
    assert rank == 2
    assert values == [1, 2, 1, 2]
    with pytest.raises(ParseError):
        loaders.load_characteristic(write("bad.json", {"kind": "characteristic", "rank": 2, "values": [[1, 2]]}))


def test_load_pairings(write):
    images = loaders.load_pairings(write("p.json", {
        "kind": "pairings", "pairings": [{"omega": [2], "image": [1, 0]}],
    }))
    assert images == {0b10: [1, 0]}
    with pytest.raises(ParseError):
        loaders.load_pairings(write("bad.json", {"kind": "pairings", "pairings": [{"omega": [0], "image": []}]}))


def test_dump_report():
    report = Report(command="check", status=Status.PASS, payload={"dim": 2}, timing=0.5)
    assert json.loads(loaders.dump_report(report))["status"] == "pass"
    text = loaders.dump_report(report, OutputFormat.TEXT)
    assert text.splitlines()[0] == "check: pass"
    assert "  dim: 2" in text
