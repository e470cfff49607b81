import json
import subprocess
import sys

import pytest

from exactcat.cli import main
from exactcat.document import from_dict, parse, parse_text, serialize
from exactcat.errors import ParseError, ValidationError
from golden_cases import GOLDEN, cases, expected_path, render

MINIMAL = {
    "version": "exactcat/1",
    "modules": {"Z": {"generators": 1, "relations": []}},
    "complexes": {"X": {"objects": {"0": "Z"}, "differentials": {}}},
    "tasks": {"h": {"op": "homology", "complex": "X"}},
}


def test_minimal_document_parses():
    doc = from_dict(MINIMAL)
    assert doc.modules["Z"].invariants == (0,)
    assert doc.complexes["X"].obj(0).invariants == (0,)
    assert list(doc.tasks) == ["h"]


def test_ill_defined_morphism_is_named():
    raw = dict(MINIMAL, modules={"Z": {"generators": 1, "relations": []}, "Z2": {"invariants": [2]}},
               morphisms={"bad": {"source": "Z2", "target": "Z", "matrix": [[1]]}})
    with pytest.raises(ValidationError, match=r"morphisms\.bad"):
        from_dict(raw)


@pytest.mark.parametrize("text", ['{"version": "exactcat/0"}', "[1, 2]", "{", '{"version": "exactcat/1", "extra": {}}'])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_text(text)


def test_dangling_reference():
    raw = dict(MINIMAL, tasks={"h": {"op": "homology", "complex": "nope"}})
    with pytest.raises(ValidationError):
        from_dict(raw)


@pytest.mark.parametrize("path", sorted(p.name for p in GOLDEN.glob("*.json")
                                        if p.stem not in ("bad_version", "invalid_morphism")))
def test_round_trip(path):
    doc = parse(GOLDEN / path)
    again = parse_text(serialize(doc))
    assert again == doc
    assert serialize(again) == serialize(doc)
    assert json.loads(serialize(doc))["version"] == "exactcat/1"


@pytest.mark.parametrize("name,args", cases(), ids=[c[0] for c in cases()])
def test_golden(name, args):
    assert render(args) == expected_path(name).read_text()


def test_output_is_deterministic():
    args = ["suite", "--seed", "3", "--count", "3"]
    assert render(args) == render(args)


def test_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(MINIMAL))
    assert main(["run", str(good)]) == 0
    wrong = dict(MINIMAL, tasks={"h": {"op": "homology", "complex": "X", "expect": "acyclic"}})
    good.write_text(json.dumps(wrong))
    assert main(["run", str(good)]) == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    out = capsys.readouterr()
    assert "expectation acyclic not met" in out.out
    assert out.err.startswith("error: ParseError")


def test_module_entry_point(tmp_path):
    doc = tmp_path / "d.json"
    doc.write_text(json.dumps(MINIMAL))
    proc = subprocess.run([sys.executable, "-m", "exactcat", "run", str(doc)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["task h: homology", "  degree 0: [0]", "  verdict: nonacyclic"]
