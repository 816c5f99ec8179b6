import json

import jsonschema
import pytest

from heunref import verifier as ver
from heunref.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "argv,want",
    [
        (["hyp2f1", "1", "1", "2", "0.5"], "1.38629436111989"),
        (["ellip_k", "0"], "1.57079632679490"),
        (["heun_l", "2", "1", "1", "1", "1", "0", "0"], "1.00000000000000"),
        (["ellip_f", "1.5707963267948966", "0"], "1.57079632679490"),
    ],
)
def test_eval_values(capsys, argv, want):
    code, out, _ = run(capsys, "eval", *argv)
    assert code == 0
    assert out.strip() == want


def test_eval_negative_arguments(capsys):
    code, out, _ = run(capsys, "eval", "hyp2f1", "1", "1", "2", "-0.5")
    assert code == 0
    assert float(out) == pytest.approx(2 * 0.4054651081081644, rel=1e-14)


def test_eval_domain_error(capsys):
    code, _, err = run(capsys, "eval", "heun_l", "2", "0", "1", "1", "1", "1", "1.5")
    assert code == 2 and "error" in err


@pytest.mark.parametrize("argv", [["nope", "1"], ["ellip_k"], ["ellip_k", "x"]])
def test_eval_bad_usage(capsys, argv):
    assert run(capsys, "eval", *argv)[0] == 4


def test_list_text(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    assert len(out.strip().splitlines()) >= 18


def test_list_filter(capsys):
    _, out, _ = run(capsys, "list", "--filter", "ID-HHH*")
    assert [l.split("\t")[0] for l in out.strip().splitlines()] == ["ID-HHH1", "ID-HHH1N", "ID-HHH1NT"]


def test_list_json_and_warning(capsys):
    _, out, _ = run(capsys, "list", "--format", "json")
    assert len(json.loads(out)) >= 18
    code, out, err = run(capsys, "list", "--filter", "NOPE*")
    assert code == 0 and "warning" in err


def test_verify_known_formula_to_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--only", "ID-PRUDF", "--seed", "42", "--draws", "3", "--out", str(path))
    assert code == 0
    doc = json.loads(path.read_text())
    jsonschema.validate(doc, ver.REPORT_SCHEMA)
    assert "ID-PRUDF" in out


def test_verify_stdout_csv(capsys):
    code, out, err = run(capsys, "verify", "--only", "ID-F12", "--draws", "2", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0].startswith("identity,variant")
    assert "ID-F12" in err


def test_verify_refuted_exit_code(capsys):
    code, _, err = run(capsys, "verify", "--only", "ID-AUF1", "--draws", "2")
    assert code == 1
    assert "reading-2-plus-tau" in err


def test_verify_perturbation_refutes(capsys):
    assert run(capsys, "verify", "--only", "ID-F12", "--draws", "2", "--perturb", "1e-3")[0] == 1


def test_verify_inconclusive_exit_code(capsys, tmp_path):
    # tolerance below rounding level with a wide refute band: residuals land in between
    cfg = tmp_path / "plan.toml"
    cfg.write_text("tol = 1e-17\nrefute_factor = 1e12\n")
    assert run(capsys, "verify", "--only", "ID-F12", "--draws", "2", "--config", str(cfg))[0] == 3


@pytest.mark.parametrize(
    "argv",
    [["--only", "NO-SUCH-ID"], ["--draws", "0"], ["--tol", "-1"], ["--format", "xml"], ["--config", "/no/such.toml"]],
)
def test_verify_config_errors(capsys, argv):
    code, _, err = run(capsys, "verify", *argv)
    assert code == 4


def test_no_match_message(capsys):
    _, _, err = run(capsys, "verify", "--only", "NO-SUCH-ID")
    assert "no identities matched" in err


def test_toml_config_with_overrides(capsys, tmp_path):
    cfg = tmp_path / "plan.toml"
    cfg.write_text('only = ["ID-F12"]\ndraws = 2\nseed = 7\ntol = 1e-8\n')
    out = tmp_path / "r.json"
    assert run(capsys, "verify", "--config", str(cfg), "--seed", "9", "--out", str(out))[0] == 0
    plan = json.loads(out.read_text())["plan"]
    assert plan["n_param_draws"] == 2 and plan["rng_seed"] == 9


def test_json_config(capsys, tmp_path):
    cfg = tmp_path / "plan.json"
    cfg.write_text(json.dumps({"patterns": ["ID-HFE"], "draws": 2, "param_ranges": {"alpha": [0.2, 0.3]}}))
    out = tmp_path / "r.json"
    assert run(capsys, "verify", "--config", str(cfg), "--out", str(out))[0] == 0
    doc = json.loads(out.read_text())
    assert all(0.2 <= d["params"]["alpha"] <= 0.3 for d in doc["reports"][0]["draws"])


@pytest.mark.parametrize("body,suffix", [("bogus = 1\n", ".toml"), ("not toml [", ".toml"), ("[1, 2]", ".json"), ("{}", ".yaml")])
def test_bad_config_files(capsys, tmp_path, body, suffix):
    cfg = tmp_path / f"plan{suffix}"
    cfg.write_text(body)
    assert run(capsys, "verify", "--config", str(cfg))[0] == 4


def test_same_seed_same_report(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        run(capsys, "verify", "--only", "ID-HN", "--draws", "2", "--out", str(p))
    a, b = (ver.strip_header(p.read_text()) for p in paths)
    assert a == b


def test_missing_subcommand(capsys):
    assert run(capsys)[0] == 4
