import json

import pytest

from dworkzeta import cli
from dworkzeta.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    rows = [json.loads(line) for line in out.splitlines() if line.strip()]
    return code, rows


def test_count_all_lambdas_oracle_consistent(capsys):
    code, rows = run(capsys, "count", "--n", "2", "--p", "7", "--r", "1",
                     "--lambda", "all", "--method", "both")
    assert code == 0
    assert len(rows) == 7  # lambda = 0 and the six units
    assert sum(1 for rec in rows if rec["lambda_dlog"] is None) == 1
    for rec in rows:
        assert int(rec["X"]) * 6 == int(rec["Nf"]) - 1


def test_count_extension_records(capsys):
    code, rows = run(capsys, "count", "--n", "3", "--p", "2", "--r", "1",
                     "--k", "3", "--lambda", "zero", "--method", "both")
    assert code == 0
    assert [rec["k"] for rec in rows] == [1, 2, 3]


def test_count_missing_n_is_config_error(capsys):
    code = main(["count", "--p", "7"])
    assert code == cli.EXIT_CONFIG


def test_bad_lambda_is_config_error(capsys):
    code = main(["count", "--n", "2", "--p", "7", "--lambda", "nope"])
    assert code == cli.EXIT_CONFIG


def test_congruence_all_pass(capsys):
    code, rows = run(capsys, "congruence", "--n", "2", "--p", "7",
                     "--lambda", "all", "--k", "2")
    assert code == 0
    summary = rows[-1]
    assert summary["failures"] == 0 and summary["rows"] == 14
    assert all(r["verdict"] == "pass" for r in rows[:-1])
    assert all(r["x_torus_form"] == "pass" for r in rows[:-1])


def test_congruence_detects_perturbed_count(capsys, monkeypatch):
    real = cli.count_Y

    def perturbed(ngstar, n, q):
        return real(ngstar, n, q) + 1

    monkeypatch.setattr(cli, "count_Y", perturbed)
    code, rows = run(capsys, "congruence", "--n", "2", "--p", "5",
                     "--lambda", "zero", "--k", "1")
    assert code == cli.EXIT_CONGRUENCE
    assert rows[0]["verdict"] == "fail"
    assert rows[0]["residue_diff"] != "0"


def test_zeta_smooth_lambda(capsys):
    # lambda token is a dlog exponent; 0 means lambda = 1, smooth over F_5
    code, rows = run(capsys, "zeta", "--n", "2", "--p", "5", "--lambda", "0")
    assert code == 0
    row = rows[0]
    assert row["smoothness"] == "unknown"
    assert row["X"]["numerator_coeffs"] == row["Y"]["numerator_coeffs"]
    assert len(row["X"]["numerator_coeffs"]) == 3
    assert row["R_coeffs"] == ["1"]
    assert float(row["purity_X_dev"]) < 1e-8


def test_zeta_singular_lambda_guarded(capsys):
    # dlog 1 -> lambda = 2 over F_5, a degenerate fiber: Q only, no P
    code, rows = run(capsys, "zeta", "--n", "2", "--p", "5", "--lambda", "1")
    assert code == 0
    row = rows[0]
    assert row["smoothness"] == "singular"
    assert "Y" in row and "X" not in row


def test_slope_command_elliptic(capsys):
    code, rows = run(capsys, "slope", "--n", "2", "--p", "7", "--lambda", "zero")
    assert code == 0
    row = rows[0]
    assert row["fe_X"] == "pass" and row["fe_Y"] == "pass"
    assert row["slope_zeta_X"] == {} == row["slope_zeta_Y"]
    assert row["slope_mirror_symmetry"] is True
    assert row["X_ordinary"] is True
    assert row["X_newton_above_hodge"] is True


def test_slope_command_k3_mirror(capsys):
    # p = 5 = 1 mod 4: the lam = 0 mirror is ordinary
    code, rows = run(capsys, "slope", "--n", "3", "--p", "5", "--lambda", "zero")
    assert code == 0
    row = rows[0]
    assert row["fe_Y"] == "pass"
    assert row["Y_ordinary"] is True
    assert row["slope_zeta_Y"] == {"0/1": -2, "1/1": -2, "2/1": -2}


def test_slope_command_k3_supersingular_fiber(capsys):
    # p = 7 = 3 mod 4: the lam = 0 mirror numerator has slopes {1,1,1}
    code, rows = run(capsys, "slope", "--n", "3", "--p", "7", "--lambda", "zero")
    assert code == 0
    row = rows[0]
    assert row["fe_Y"] == "pass"
    assert row["Y_ordinary"] is False
    assert row["slope_zeta_Y"] == {"0/1": -1, "1/1": -4, "2/1": -1}


def test_gauss_dump_matches_engine(capsys):
    code, rows = run(capsys, "gauss", "--p", "3", "--r", "2", "--N", "4")
    assert code == 0
    header, table = rows[0], rows[1:]
    assert header["p"] == 3 and header["r"] == 2 and header["N"] == 4
    assert len(table) == 9  # one record per k in [0, q-1]
    from dworkzeta.ff import build_field
    from dworkzeta.padic import build_tower

    T = build_tower(build_field(3, 2, 0), 4)
    for rec in table:
        g = T.gauss_sum(rec["k"])
        flat = [str(c) for row_ in g.rows for c in row_]
        assert rec["coords"] == flat


def test_sweep_roundtrip(tmp_path, capsys):
    cfg = {"n_list": [2], "prime_list": [3, 5], "r_list": [1], "k_max": 2,
           "lambda_mode": "all", "zeta_n_max": 2, "seed": 0,
           "out_dir": str(tmp_path / "a")}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    code = main(["sweep", "--config", str(cfg_path), "--out",
                 str(tmp_path / "a")])
    assert code == 0
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["congruence_failures"] == 0
    assert summary["completed"] == summary["instances"] == 8
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["failures"] == []
    # determinism: rerun into a second directory, compare bytes
    code = main(["sweep", "--config", str(cfg_path), "--out",
                 str(tmp_path / "b"), "--threads", "2"])
    assert code == 0
    for name in ("counts.jsonl", "congruence.jsonl", "zeta.jsonl",
                 "summary.json", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_sweep_empty_grid(tmp_path, capsys):
    cfg = {"n_list": [], "prime_list": [5], "r_list": [1], "k_max": 1,
           "lambda_mode": "all", "seed": 0, "out_dir": str(tmp_path / "e")}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    code = main(["sweep", "--config", str(cfg_path), "--out",
                 str(tmp_path / "e")])
    assert code == 0
    summary = json.loads((tmp_path / "e" / "summary.json").read_text())
    assert summary["instances"] == 0


def test_sweep_cap_exceeded(tmp_path, capsys):
    cfg = {"n_list": [2], "prime_list": [5], "r_list": [1], "k_max": 20,
           "lambda_mode": "zero", "seed": 0, "out_dir": str(tmp_path / "c"),
           "lambda_list": []}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    code = main(["sweep", "--config", str(cfg_path), "--out",
                 str(tmp_path / "c")])
    assert code == cli.EXIT_CAP
