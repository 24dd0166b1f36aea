import csv
import io
import json

import pytest

from deltashell import cli
from deltashell.errors import QuadratureError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def reason(err):
    return json.loads(err.strip().splitlines()[-1])


def test_fit_disk_delta(capsys):
    code, out, _ = run(capsys, "fit", "--set", "interaction.alpha=1")
    assert code == 0
    doc = json.loads(out)
    assert doc["C_ref"] == pytest.approx(2.0, rel=1e-12)
    assert doc["rel_error"] < 0.01
    assert doc["verdict"] == {"constant": True, "remainder": True}
    assert doc["config"]["interaction"]["alpha"] == "1"
    for key in ("exponent", "C_est", "C_ref", "rel_error", "remainder_slope", "window"):
        assert key in doc


def test_constants_sphere_deltaprime_free(capsys):
    code, out, _ = run(capsys, "constants", "--set", "geometry.shape=sphere", "--set",
                       "interaction.kind=deltaprime_vs_free", "--set", "interaction.beta=1")
    assert code == 0
    doc = json.loads(out)
    assert doc["C"] == pytest.approx(0.5, rel=1e-10)
    assert doc["closed_form"]["C"] == pytest.approx(0.5, rel=1e-14)


def test_missing_beta_exit_code(capsys):
    code, out, err = run(capsys, "fit", "--set", "interaction.kind=deltaprime_vs_neumann")
    assert code == 2
    assert out == ""
    assert reason(err) == {"error": "config", "reason": "beta required and non-zero"}


def test_admissibility_exit_code(capsys):
    code, _, err = run(capsys, "modes", "--set", "interaction.alpha=3")
    assert code == 3
    assert "smallest admissible m0" in reason(err)["reason"]


def test_numerical_failure_exit_code(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise QuadratureError("did not converge")
    monkeypatch.setattr(cli, "predict", boom)
    code, _, err = run(capsys, "constants", "--set", "interaction.alpha=1")
    assert code == 4
    assert reason(err)["error"] == "numerical"


def test_bad_usage(capsys):
    assert run(capsys, "explode")[0] == 2
    assert run(capsys, "fit", "--threads", "0", "--set", "interaction.alpha=1")[0] == 2
    code, _, err = run(capsys, "modes", "--set", "geometry.shape=ellipse", "--set",
                       "geometry.a=2", "--set", "geometry.b=1", "--set", "interaction.alpha=1")
    assert code == 2
    assert "circle or sphere" in reason(err)["reason"]


def test_modes_csv_layout(capsys):
    code, out, _ = run(capsys, "modes", "--set", "interaction.alpha=1", "--set",
                       "solver.mode_cutoff=20")
    assert code == 0
    lines = out.splitlines()
    comments = [l for l in lines if l.startswith("#")]
    assert "# interaction.alpha=1" in comments
    rows = list(csv.reader(io.StringIO("\n".join(l for l in lines if not l.startswith("#")))))
    assert rows[0] == ["j", "s", "mode", "mult", "jp_s"]
    assert len(rows) - 1 == 41
    s = [float(r[1]) for r in rows[1:]]
    assert s == sorted(s, reverse=True)


def test_reruns_are_bitwise_identical(tmp_path, capsys):
    args = ["modes", "--set", "interaction.alpha=1", "--set", "solver.mode_cutoff=500"]
    out = tmp_path / "spectrum.csv"
    assert run(capsys, *args, "--out", str(out))[0] == 0
    first = out.read_bytes()
    assert run(capsys, *args, "--out", str(out), "--threads", "3")[0] == 0
    assert out.read_bytes() == first


def test_embedded_config_reproduces_output(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[geometry]\nshape = sphere\n[interaction]\nkind = deltaprime_vs_neumann\n"
                   "beta = 2\n[solver]\nmode_cutoff = 30\n")
    code, first, _ = run(capsys, "modes", "--config", str(cfg))
    assert code == 0
    sets = [l[2:] for l in first.splitlines() if l.startswith("# ")]
    args = [x for item in sets if not item.endswith("=") for x in ("--set", item)]
    code, second, _ = run(capsys, "modes", *args)
    assert second == first


def test_symbols_grid(capsys):
    code, out, _ = run(capsys, "symbols", "--set", "interaction.alpha=1")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    header = rows[0].split(",")
    assert header[:2] == ["t", "xi1"]
    data = [dict(zip(header, map(float, r.split(",")))) for r in rows[1:]]
    assert len(data) == 32
    for d in data:
        assert d["operator_symbol"] == pytest.approx(0.25)
        assert d["p_gamma_nu"] * d["p_nu_gamma"] == pytest.approx(1.0)


def test_json_output_for_tables(capsys):
    code, out, _ = run(capsys, "modes", "--set", "interaction.alpha=1", "--set",
                       "solver.mode_cutoff=5", "--set", "output.format=json")
    doc = json.loads(out)
    assert doc["columns"] == ["j", "s", "mode", "mult", "jp_s"]
    assert len(doc["rows"]) == 11
    assert "config" in doc


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--set", "interaction.alpha=1")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert set(doc["groups"]) == {"symbols", "bessel", "krein", "adjoint"}


def test_oracle_table(capsys):
    code, out, _ = run(capsys, "oracle", "--set", "interaction.alpha=1", "--set",
                       "solver.mode_cutoff=1")
    assert code == 0
    rows = [l.split(",") for l in out.splitlines() if not l.startswith("#")]
    assert rows[0] == ["quantity", "mode", "h", "value", "reference", "error", "order"]
    orders = [float(r[6]) for r in rows[1:] if r[6] != "nan"]
    assert len(orders) == 2 * 3 * 2
    assert min(orders) >= 1.8


def test_galerkin_fit_small(capsys):
    code, out, _ = run(capsys, "fit", "--set", "interaction.alpha=2,0.5", "--set",
                       "coefficients.m0=2", "--set", "solver.mode_cutoff=400")
    doc = json.loads(out)
    assert doc["law"]["C"] == pytest.approx(3.8228221640, rel=1e-9)
    assert code in (0, 1)
