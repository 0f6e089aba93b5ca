import json

import pytest

from hofa_lab.cli import main


@pytest.fixture
def files(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return {
        "ap3": write("3ap.json", {"p": 5, "k": 2, "forms": [[1, 0], [1, 1], [1, 2]]}),
        "ap3_f3": write("3ap3.json", {"p": 3, "k": 2, "forms": [[1, 0], [1, 1], [1, 2]]}),
        "quad": write("quad.json", {"p": 5, "n": 1, "type": "power_phase", "degree": 2}),
        "ind0": write("ind0.json", {"p": 3, "n": 1, "type": "indicator", "set": [0]}),
        "big": write("big.json", {"p": 5, "n": 2, "type": "random_bounded", "seed": 1}),
        "bad": write("bad.json", {"p": 4, "k": 1, "forms": [[1]]}),
        "fq": write("fq.json", {"p": 3, "n": 2, "type": "polynomial_phase",
                                "poly": [{"exponents": [2, 0], "coeff": 1}, {"exponents": [0, 1], "coeff": 1}]}),
        "tmp": tmp_path,
    }


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_analyze_system(capsys, files):
    code, out = run(capsys, ["analyze-system", "--file", files["ap3"]])
    assert code == 0
    assert out["cs_complexity"] == 1 and out["true_complexity"] == 1
    assert out["homogeneous"] is True and out["witness"] == [1, 0]
    assert "runtime_ms" in out


@pytest.mark.parametrize("method", ["fourier", "recursive", "direct"])
def test_gowers(capsys, files, method):
    code, out = run(capsys, ["gowers", "--k", "2", "--fn", files["quad"], "--method", method])
    assert code == 0
    assert out["value"] == pytest.approx(0.6687403, abs=1e-7)


def test_average(capsys, files):
    code, out = run(capsys, ["average", "--system", files["ap3_f3"], "--fn", files["ind0"]])
    assert code == 0
    assert out["value"] == pytest.approx(1 / 9)


def test_fourier(capsys, files):
    code, out = run(capsys, ["fourier", "--fn", files["ind0"], "--method", "direct"])
    assert code == 0
    assert all(abs(re - 1 / 3) < 1e-12 and abs(im) < 1e-12 for re, im in out["value"])


def test_decompose(capsys, files):
    code, out = run(capsys, ["decompose", "--fn", files["fq"], "--d", "2", "--epsilon", "0.1"])
    assert code == 0
    assert out["status"] == "converged" and out["residual_norm"] < 1e-9


def test_budget_exit_code(capsys, files):
    code, out = run(capsys, ["gowers", "--k", "3", "--fn", files["big"], "--method", "direct", "--budget", "1000"])
    assert code == 3 and out["error"] == "budget"


def test_invalid_inputs_exit_2(capsys, files):
    code, out = run(capsys, ["analyze-system", "--file", str(files["tmp"] / "missing.json")])
    assert code == 2
    code, out = run(capsys, ["analyze-system", "--file", files["bad"]])
    assert code == 2 and out["error"] == "validation"


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_verify_single_criterion(capsys):
    code, out = run(capsys, ["verify", "--criterion", "4"])
    assert code == 0 and out["passed"]
    assert out["criteria"][0]["criterion"] == 4
