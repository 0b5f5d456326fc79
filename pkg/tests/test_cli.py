import json
import math

import pytest

from nonlocal_bounds import cli, extremal


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def biased_boundary_file(tmp_path):
    p = tmp_path / "r.json"
    p.write_text(json.dumps(extremal.biased_boundary_realization().to_json()))
    return p


def test_verify_fixtures_passes_and_is_deterministic(capsys):
    code, first, _ = run(capsys, "verify-paper")
    assert code == 0
    assert first.count("0.9444444444444") >= 2
    _, second, _ = run(capsys, "verify-paper")
    assert first == second


def test_verify_fixtures_tight_tolerance_fails(capsys):
    code, _, err = run(capsys, "verify-paper", "--tol", "1e-15")
    assert code == 1
    assert "first failing fixture" in err


def test_protocol_rows(capsys, biased_boundary_file):
    code, out, _ = run(capsys, "protocol", "--realization", str(biased_boundary_file), "--n-max", "10")
    assert code == 0
    rows = out.splitlines()[1:]
    assert len(rows) == 10
    for n, row in enumerate(rows, start=1):
        assert float(row.split(",")[1]) == pytest.approx((17 / 18) ** n, rel=1e-12)
    t = extremal.biased_boundary_realization()
    code, out2, _ = run(capsys, "protocol", "--theta", repr(t.theta), "--angles", ",".join(map(repr, (*t.alice, *t.bob))))
    assert code == 0 and out2 == out


def test_mixing_table(capsys):
    code, out, _ = run(capsys, "mixing", "--lambdas", "0,0.25,0.5,1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("lambda,x,")
    assert len(lines) == 1 + 4 * 2


def test_bounds_reports(capsys, biased_boundary_file):
    code, out, _ = run(capsys, "bounds", "--realization", str(biased_boundary_file))
    assert code == 0
    reps = json.loads(out)
    assert len(reps) == 6
    ic = [r for r in reps if r["name"] == "ICtype4"][0]
    assert ic["saturated"]
    code, out, _ = run(capsys, "bounds", "--realization", str(biased_boundary_file), "--eps", "0.3333333333333333,0")
    assert len(json.loads(out)) == 7


def test_dtilde_commands(capsys, biased_boundary_file, tmp_path):
    code, out, _ = run(capsys, "dtilde", "--realization", str(biased_boundary_file), "--oracle")
    assert code == 0
    obj = json.loads(out)
    assert obj["dtilde"][1] == pytest.approx(math.sqrt(8) / 3)
    assert obj["dtilde_oracle"][1] == pytest.approx(math.sqrt(8) / 3, abs=1e-8)
    pair = tmp_path / "pair.json"
    pair.write_text(json.dumps({"rho": [[0.25, 0], [0, 0.25]], "sigma": [[0.5, 0], [0, 0]]}))
    code, out, _ = run(capsys, "dtilde", "--pair", str(pair))
    assert json.loads(out)["dtilde"] == pytest.approx(1 / math.sqrt(3))


def test_tilted_sweep(capsys):
    code, out, _ = run(capsys, "tilted-sweep", "--n-alpha", "3", "--n-theta", "4")
    assert code == 0
    assert len(out.splitlines()) == 1 + 12


def test_search_to_stdout_and_file(capsys, tmp_path):
    code, out, _ = run(capsys, "search", "--n", "3", "--seed", "7")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4
    assert json.loads(lines[-1])["n"] == 3
    target = tmp_path / "out.jsonl"
    code, out, _ = run(capsys, "search", "--n", "3", "--seed", "7", "--out", str(target))
    assert code == 0
    assert target.read_text().splitlines() == lines[:3]
    assert json.loads(out) == json.loads(lines[-1])


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "search", "--n", "0")[0] == 2
    assert run(capsys, "mixing", "--lambdas", "0,2")[0] == 2
    assert run(capsys, "verify-paper", "--tol", "-1")[0] == 2
    assert run(capsys, "bounds", "--realization", str(tmp_path / "absent.json"))[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "bounds", "--realization", str(bad))[0] == 3
    bad.write_text(json.dumps({"something": 1}))
    assert run(capsys, "bounds", "--realization", str(bad))[0] == 3
    assert run(capsys, "search", "--n", "1", "--out", str(tmp_path / "no" / "x.jsonl"))[0] == 3


def test_outputs_do_not_touch_inputs(capsys, biased_boundary_file, tmp_path):
    before = biased_boundary_file.read_bytes()
    out = tmp_path / "reports.json"
    assert run(capsys, "bounds", "--realization", str(biased_boundary_file), "--out", str(out))[0] == 0
    assert biased_boundary_file.read_bytes() == before
    assert len(json.loads(out.read_text())) == 6
    assert [p.name for p in tmp_path.iterdir() if p.name.startswith(".tmp-")] == []
