import json
import shutil

import pytest

from provabs.bundled import fixture_dir
from provabs.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


COMPARE = (
    "compare", "--workflow", "fixtures/textmining.json",
    "--policies", "collapse-all,eliminate-all,collapse-selected,zoom",
    "--src", "pdfDirectoryPathIn", "--dst", "termCandidatesAboveTreshold",
)


def test_compare_prints_precision_rows(capsys):
    code, out, _ = run(capsys, *COMPARE)
    assert code == 0
    rows = [[c.strip() for c in line.split("|")] for line in out.splitlines()[2:]]
    assert [r[1:] for r in rows] == [["5/5", "0/4"], ["5/5", "0/9"], ["5/9", "4/8"], ["5/7", "0/6"]]
    assert "Collapse Selected" in rows[2][0]


def test_compare_json(capsys):
    code, out, _ = run(capsys, *COMPARE, "--format", "json")
    assert code == 0
    assert [r["activity"] for r in json.loads(out)] == [[5, 5], [5, 5], [5, 9], [5, 7]]


def test_flatten_textmining(capsys):
    code, out, _ = run(capsys, "flatten", "--workflow", "fixtures/textmining.json")
    assert code == 0
    assert len(json.loads(out)["activities"]) == 19
    code, out, _ = run(capsys, "flatten", "-w", "textmining", "--full")
    data = json.loads(out)
    assert len(data["ground_truth"]["groups"]) == 5 and data["promotion_map"]


def test_check_chain_eliminate(capsys):
    code, out, _ = run(capsys, "check", "--workflow", "fixtures/chain.json", "--policy", "eliminate-all.json")
    assert code == 0
    status = {line.split()[0]: line.split()[1] for line in out.splitlines()}
    assert status.pop("bipartiteness") == "FAIL"
    assert status.pop("trace_bipartiteness") == "FAIL"
    assert set(status.values()) == {"pass"}
    code, out, _ = run(capsys, "check", "-w", "chain", "-p", "eliminate-all", "--format", "json")
    assert json.loads(out)


def test_abstract_and_trace(capsys):
    code, out, _ = run(capsys, "abstract", "-w", "bypass", "-p", "zoom")
    assert code == 0 and json.loads(out)
    code, out, _ = run(capsys, "trace", "-w", "chain", "-p", "collapse-all")
    assert code == 0
    assert len(json.loads(out)["invocations"]) == 1
    code, out, _ = run(capsys, "trace", "-w", "chain", "--format", "dot")
    assert code == 0 and out.startswith("digraph")


def test_export_dot_default_format(capsys):
    code, out, _ = run(capsys, "export-dot", "-w", "chain")
    assert code == 0 and out.startswith('digraph "chain" {')


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.txt"
    code, out, _ = run(capsys, *COMPARE, "--output", str(target))
    assert code == 0 and out == ""
    assert "5/9" in target.read_text()


def test_repeat_runs_are_byte_identical(capsys):
    for argv in (COMPARE, ("flatten", "-w", "textmining"), ("trace", "-w", "diamond", "-p", "zoom")):
        first = run(capsys, *argv)[1]
        assert run(capsys, *argv)[1] == first


def test_domain_and_io_errors_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "flatten", "-w", str(tmp_path / "missing.json"))
    assert code == 1 and "missing.json" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"id": "w", "inputs": [,]}')
    code, _, err = run(capsys, "flatten", "-w", str(bad))
    assert code == 1 and "WorkflowSyntaxError" in err
    code, _, err = run(capsys, "compare", "-w", "bypass", "--policies", "zoom", "--src", "wi2", "--dst", "wo1")
    assert code == 1 and "UnreachableError" in err


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "flatten")[0] == 2
    assert run(capsys, "abstract", "-w", "chain")[0] == 2
    assert run(capsys, "compare", "-w", "chain", "--policies", "zoom")[0] == 2
    assert run(capsys, "flatten", "-w", "chain", "--format", "table")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_fixture_directory_override(capsys, tmp_path, monkeypatch):
    shutil.copy(fixture_dir() / "chain.json", tmp_path / "renamed.json")
    monkeypatch.setenv("PROVABS_FIXTURES", str(tmp_path))
    code, out, _ = run(capsys, "flatten", "-w", "renamed")
    assert code == 0 and len(json.loads(out)["activities"]) == 3


def test_demo_exits_zero(capsys):
    code, out, _ = run(capsys, "demo")
    assert code == 0
    assert "5/9" in out
