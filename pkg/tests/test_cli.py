import json
import subprocess
import sys

import pytest

from atommap.cli import main
from atommap.ilp import build_ilp2, build_ilp4, parse_lp
from atommap.chemio import parse_reaction_json
from atommap.mapping import ReactionInstance

import oracles

POOL_JSON = json.dumps({
    "molecules": [
        {"smiles": "C=CC=C"},
        {"smiles": "C=C"},
        {"smiles": "C1=CCCCC1"},
    ],
})

# hydrogen/oxygen recombinations: two cheap candidates, solved in a blink
PEROXIDE_POOL = json.dumps({
    "molecules": [
        {"smiles": "[H][H]"},
        {"smiles": "O=O"},
        {"smiles": "O"},
        {"smiles": "OO"},
    ],
})

WATER_DOC = json.dumps({
    "id": "water",
    "educts": [{"smiles": "[H][H]"}, {"smiles": "[O]"}],
    "products": [{"smiles": "O"}],
})


@pytest.fixture
def da_path(tmp_path):
    p = tmp_path / "da.json"
    p.write_text(oracles.da_document())
    return str(p)


@pytest.fixture
def water_path(tmp_path):
    p = tmp_path / "water.json"
    p.write_text(WATER_DOC)
    return str(p)


@pytest.fixture
def pool_path(tmp_path):
    p = tmp_path / "pool.json"
    p.write_text(POOL_JSON)
    return str(p)


@pytest.fixture
def peroxide_path(tmp_path):
    p = tmp_path / "peroxide.json"
    p.write_text(PEROXIDE_POOL)
    return str(p)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_map_json(capsys, da_path):
    code, out = run_cli(capsys, "map", da_path)
    assert code == 0
    payload = json.loads(out)
    assert payload["id"] == "diels-alder"
    assert payload["status"] == "found"
    assert payload["minCost"] == 6
    assert payload["solver"] == "altcyc"
    assert len(payload["atoms"]["educt"]) == 16
    # the textbook ring closure plus a hydrogen-shift route both cost 6
    assert len(payload["classes"]) == 2
    for cls in payload["classes"]:
        assert len(cls["map"]) == 16
        assert sum(abs(e["delta"]) for e in cls["transitionState"]) == 6
        assert cls["cycles"] and cls["mechanism"]


def test_map_text_and_mechanism_formats(capsys, water_path):
    code, out = run_cli(capsys, "map", water_path, "--format", "text")
    assert code == 0
    head = out.splitlines()[0]
    assert "id=water" in head and "minCost=4" in head
    assert "class 1 of 1:" in out
    assert "transition state:" in out

    code, out = run_cli(capsys, "map", water_path, "--format", "mechanism")
    assert code == 0
    assert "class 1 walk 1:" in out
    assert "+(" in out and "-(" in out
    assert "transition state:" not in out


def test_map_ilp_solver_agrees(capsys, da_path):
    code, out = run_cli(capsys, "map", da_path, "--solver", "ilp-internal")
    assert code == 0
    payload = json.loads(out)
    assert payload["minCost"] == 6
    assert len(payload["classes"]) == 2


def test_map_output_file(tmp_path, capsys, water_path):
    target = tmp_path / "result.json"
    code, out = run_cli(capsys, "map", water_path, "-o", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["minCost"] == 4


def test_map_exhausted_exit(capsys, da_path):
    code, out = run_cli(capsys, "map", da_path, "--max-cost", "4")
    assert code == 4
    assert json.loads(out)["status"] == "exhausted"
    code, out = run_cli(capsys, "map", da_path, "--max-cost", "4",
                        "--solver", "ilp-internal")
    assert code == 4


def test_map_timeout_exit(capsys, da_path):
    code, out = run_cli(capsys, "map", da_path, "--timeout-ms", "0")
    assert code == 5
    assert json.loads(out)["status"] == "timeout"


def test_unbalanced_exit(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"educts": [{"smiles": "C"}], "products": [{"smiles": "O"}]}')
    code, out = run_cli(capsys, "map", str(p))
    assert code == 3


def test_parse_errors_exit(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{nope")
    assert run_cli(capsys, "map", str(p))[0] == 2

    q = tmp_path / "smiles.json"
    q.write_text('{"educts": [{"smiles": "C("}], "products": [{"smiles": "C"}]}')
    assert run_cli(capsys, "map", str(q))[0] == 2

    assert run_cli(capsys, "map", str(tmp_path / "missing.json"))[0] == 2


def test_usage_errors(capsys, da_path, pool_path):
    assert main(["map", da_path, "--format", "lp"]) == 2
    assert main(["candidates", pool_path, "--k-max", "3"]) == 2
    assert main(["map", da_path, "--jobs", "0"]) == 2
    assert main([]) == 2


def test_stdin_input(capsys, monkeypatch):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO(WATER_DOC))
    code, out = run_cli(capsys, "map", "-")
    assert code == 0
    assert json.loads(out)["minCost"] == 4


def test_candidates_stream(capsys, pool_path):
    code, out = run_cli(capsys, "candidates", pool_path, "--k-max", "6")
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    assert len(rows) == 1  # hydrogens rule out the skeleton-only pairings
    row = rows[0]
    assert row["leftIds"] == [0, 1] and row["rightIds"] == [2]
    assert row["formula"] == "C6H10"
    assert row["status"] == "pass"
    assert row["minCost"] == 6 and row["classes"] == 2

    code, out = run_cli(capsys, "candidates", pool_path, "--k-max", "4")
    assert code == 0
    assert json.loads(out.splitlines()[0])["status"] == "fail"


def test_candidates_text_format(capsys, peroxide_path):
    code, out = run_cli(capsys, "candidates", peroxide_path, "--k-max", "4",
                        "--format", "text")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 2
    assert all(line.startswith("pass") for line in lines)
    assert "cost=4" in lines[0]


def test_candidates_jobs_byte_identical(capsys, peroxide_path):
    _, one = run_cli(capsys, "candidates", peroxide_path, "--k-max", "4")
    assert len(one.splitlines()) == 2
    _, three = run_cli(capsys, "candidates", peroxide_path, "--k-max", "4",
                       "--jobs", "3")
    assert one == three


def test_candidates_sampling(capsys, tmp_path):
    # ten isomorphic-formula carriers give many candidates to sample from
    mols = [{"smiles": "O"} for _ in range(6)]
    p = tmp_path / "many.json"
    p.write_text(json.dumps({"molecules": mols}))
    _, full = run_cli(capsys, "candidates", str(p), "--k-max", "0")
    n_full = len(full.splitlines())
    assert n_full > 3
    _, few = run_cli(capsys, "candidates", str(p), "--k-max", "0",
                     "--sample", "3")
    assert len(few.splitlines()) == 3
    _, again = run_cli(capsys, "candidates", str(p), "--k-max", "0",
                       "--sample", "3")
    assert few == again  # seeded
    _, other = run_cli(capsys, "candidates", str(p), "--k-max", "0",
                       "--sample", "3", "--seed", "5")
    assert other != few
    # sampled line sets are a subset of the full run
    assert set(few.splitlines()) <= set(full.splitlines())


def test_stats_formats(capsys, tmp_path):
    doc = {
        "molecules": [{"smiles": "O"}, {"smiles": "O"}, {"smiles": "[H][H]"},
                      {"smiles": "OO"}],
        "reactions": [{"educts": [2, 3], "products": [0, 1]}],
    }
    p = tmp_path / "pool.json"
    p.write_text(json.dumps(doc))
    code, out = run_cli(capsys, "stats", str(p))
    assert code == 0
    payload = json.loads(out)
    assert payload["isomerSetSizes"] == [[1, 2], [2, 1]]
    assert payload["participation"] == [[1, 4]]

    code, out = run_cli(capsys, "stats", str(p), "--format", "text")
    lines = out.splitlines()
    assert lines[0] == "table,key,count"
    assert "isomer_set_size,2,1" in lines
    assert "participation,1,4" in lines


def test_export_lp_round_trip(capsys, tmp_path, da_path):
    target = tmp_path / "model.lp"
    code, _ = run_cli(capsys, "export-lp", da_path, "-o", str(target))
    assert code == 0
    text = target.read_text()
    assert text.startswith("\\")
    inst = ReactionInstance.from_document(
        parse_reaction_json(oracles.da_document()))
    assert parse_lp(text) == build_ilp2(inst)

    code, out = run_cli(capsys, "export-lp", da_path, "--model", "ilp4")
    assert code == 0
    assert parse_lp(out) == build_ilp4(inst)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "atommap", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "map" in proc.stdout and "candidates" in proc.stdout
