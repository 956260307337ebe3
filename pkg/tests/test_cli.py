import json

import pytest

from morrey_entropy.cli import main

CONFIG = {"params": [{"d": 1, "delta": "2/5", "u1": 2, "p1": 1, "u2": 2, "p2": 2}],
          "levels": {"min": 1, "max": 2}, "k": [1, 2, 3], "methods": ["volume", "schuett"], "seed": 1}


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(CONFIG))
    return p


def test_classify(config, tmp_path, capsys):
    assert main(["classify", "--config", str(config)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report[0]["kind"] == "AlphaGap"
    assert main(["classify", "--config", str(config), "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text()) == report


def test_sweep_and_fit(config, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["sweep", "--config", str(config), "--out", str(out), "--threads", "2"]) == 0
    assert (out / "sweep.csv").exists()
    capsys.readouterr()
    assert main(["fit", "--csv", str(out / "sweep.csv"), "--j", "2", "--mode", "geometric"]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["n"] == 3 and fit["slope"] < 0


def test_seed_override(config, capsys):
    assert main(["sweep", "--config", str(config), "--seed", "99"]) == 0
    assert "seed=99" in capsys.readouterr().out


def test_norm_opnorm_entropy(capsys):
    assert main(["norm", "--level", "1", "--u", "2", "--p", "1", "--values", "1,1"]) == 0
    assert json.loads(capsys.readouterr().out)["norm"] == pytest.approx(2**0.5)
    assert main(["opnorm", "--level", "2", "--source", "4,2", "--target", "2,1", "--budget", "500"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["case"] == "EQ2" and out["bruteforce"] == pytest.approx(2**0.5)
    assert main(["entropy", "--level", "0", "--source", "lp:inf", "--target", "lp:inf", "--eps", "0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["k"] == 2
    assert main(["entropy", "--level", "1", "--source", "2,1", "--target", "2,2", "--k", "1-3",
                 "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("k,lower,upper,methods")


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["classify", "--config", str(bad)]) == 1
    bad.write_text(json.dumps({"params": [], "k": [1]}))
    assert main(["sweep", "--config", str(bad)]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
    assert main(["entropy", "--level", "6", "--source", "lp:2", "--target", "lp:2", "--eps", "0.001"]) == 2


def test_selftest_subset(capsys):
    assert main(["selftest", "--only", "6"]) == 0
    assert "[PASS] 6." in capsys.readouterr().out
