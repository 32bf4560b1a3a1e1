import json

import pytest

from daereg.cli import main
from daereg.io import DaeFileError, dae_to_json, load_dae, parse_dae_file
from daereg.models import robotic_arm, transistor_amplifier


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


ODE = {"schema": 1, "variables": ["x"], "equations": ["(+ (d x 1) (* -1 (var x)))"]}
SINGULAR = {"schema": 1, "variables": ["a", "b"],
            "equations": ["(var a)", "(* -1 (var a))"]}


def test_analyze_robot(capsys):
    code, out, _ = run(capsys, "analyze", "robot:N=1", "--format", "json")
    rep = json.loads(out)
    assert code == 2
    assert rep["delta_hat"] == 2 and rep["rank_1cm"] == 4 and rep["n"] == 5
    assert rep["lsm_substitution_rank"] == 4
    assert "duals" in rep["conventions"]


def test_analyze_toy_reports_layer_term_rank(capsys):
    code, out, _ = run(capsys, "analyze", "toy", "--format", "json")
    rep = json.loads(out)
    assert code == 2 and rep["rank_1cm"] == 5 and rep["layer_mixed"]["term_rank"] == 6


def test_analyze_text_and_regular(capsys, tmp_path):
    code, out, _ = run(capsys, "analyze", write(tmp_path, "ode.json", ODE))
    assert code == 0 and "regular" in out
    code, out, _ = run(capsys, "analyze", "robot:N=1")
    assert "* * * *" in out and "1CM rank: 4/5" in out


def test_structurally_singular(capsys, tmp_path):
    src = write(tmp_path, "s.json", SINGULAR)
    assert run(capsys, "analyze", src)[0] == 3
    out_path = tmp_path / "out.json"
    code, _, _ = run(capsys, "regularize", src, "--out", str(out_path))
    assert code == 3 and not out_path.exists()


def test_regularize_round_trip(capsys, tmp_path):
    out = tmp_path / "reg.json"
    ret = tmp_path / "ret.json"
    tr = tmp_path / "trace.json"
    code, stdout, _ = run(capsys, "regularize", "robot:N=1", "--out", str(out),
                          "--retrieval", str(ret), "--trace", str(tr))
    assert code == 0 and "[2, 0]" in stdout
    trace = json.loads(tr.read_text())
    assert trace["schema"] == 1 and trace["delta_hat"] == [2, 0]
    assert sum(t["vanishing_pair"] is not None for t in trace["trace"]) == 1
    assert run(capsys, "analyze", str(out))[0] == 0
    assert run(capsys, "analyze", str(ret))[0] == 0


def test_regularize_ringmod(capsys):
    code, out, _ = run(capsys, "regularize", "ringmod", "--format", "json")
    assert code == 0 and json.loads(out)["status"] == "Regularized"


def test_deterministic_output(capsys):
    a = run(capsys, "regularize", "toy", "--format", "json", "--probe")
    b = run(capsys, "regularize", "toy", "--format", "json", "--probe")
    assert a == b


def test_bench_json(capsys):
    code, out, _ = run(capsys, "bench", "--preset", "robot", "--n-range", "1..2", "--json")
    rows = json.loads(out)
    assert code == 0 and [r["n"] for r in rows] == [1, 2]
    assert rows[0]["iterations"] == 1 and rows[0]["delta_hat_initial"] == 2
    assert set(rows[0]) >= {"preset", "n", "m", "delta_hat_initial", "iterations", "millis"}
    assert json.loads(json.dumps(rows)) == rows


def test_validate(capsys, tmp_path):
    eye = [[int(i == j) for j in range(5)] for i in range(5)]
    V = [row[:] for row in eye]
    V[0][1], V[3][4] = -1, 1
    good = write(tmp_path, "pair.json", {"U": eye, "V": V})
    assert run(capsys, "validate", "robot:N=1", good)[0] == 0
    bad_U = [row[:] for row in eye]
    bad_U[2][2] = 0
    sing = write(tmp_path, "sing.json", {"U": bad_U, "V": V})
    code, out, _ = run(capsys, "validate", "robot:N=1", sing)
    assert code == 2 and "singular" in out
    ident = write(tmp_path, "id.json", {"U": eye, "V": eye})
    regular = robotic_arm(1)
    from daereg.transform import regularize

    fixed = tmp_path / "fixed.json"
    fixed.write_text(json.dumps(dae_to_json(regularize(regular).dae)))
    code, out, _ = run(capsys, "validate", str(fixed), ident)
    assert code == 2 and "term-rank" in out


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "analyze", "nonesuch")[0] == 1
    broken = tmp_path / "broken.json"
    broken.write_text('{"schema": 1,\n "variables": ["x"],\n "equations": ["(+ (d x 1)"]}')
    code, _, err = run(capsys, "analyze", str(broken))
    assert code == 1 and "equation 1" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  nope")
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 1 and "line 2" in err
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_file_round_trip():
    d = transistor_amplifier()
    doc = dae_to_json(d)
    back = parse_dae_file(json.loads(json.dumps(doc))).dae
    assert back.equations == d.equations and back.variables == d.variables


def test_undeclared_function_rejected():
    doc = {"schema": 1, "variables": ["x"], "equations": ["(fn q (var x))"]}
    with pytest.raises(DaeFileError):
        parse_dae_file(doc)
    doc["functions"] = [{"name": "q", "derivative": "q'"}]
    assert parse_dae_file(doc).dae.n == 1


def test_decomposition_in_file():
    f = load_dae("toy")
    assert f.layer is not None and f.target.n == 6


def test_decomposition_hints_from_file(capsys, tmp_path):
    from daereg.models import toy_decomposition, toy_example

    doc = dae_to_json(toy_example(), toy_decomposition())
    code, out, _ = run(capsys, "analyze", write(tmp_path, "toy.json", doc), "--format", "json")
    rep = json.loads(out)
    assert code == 2 and rep["n"] == 6 and rep["layer_mixed"]["term_rank"] == 6
