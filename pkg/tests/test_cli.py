import csv
import math
import subprocess
import sys

import pytest

from grazecont import ImpactPoint, ModelParams, vivid
from grazecont.cli import ConfigError, RunConfig, fmt, main, parse_config, sidecar


def run(tmp_path, text, command, out="out.csv", extra=()):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(text, encoding="utf-8")
    path = tmp_path / out
    code = main([command, "--config", str(cfg), "--out", str(path), *extra])
    return code, path


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_defaults_and_comments():
    cfg = parse_config("# a comment\n\nzeta = 0.05  # trailing\nn_steps = 3\nloop_rule = crossing\n")
    assert cfg.zeta == 0.05 and cfg.n_steps == 3 and cfg.loop_rule == "crossing"
    assert parse_config("") == RunConfig()


@pytest.mark.parametrize("text", [
    "zeta = 0", "zeta = abc", "bogus = 1", "zeta = 0.1\nzeta = 0.2", "n_steps = 1.5",
    "zeta 0.1", "omega = nan", "dy_imp = 0", "omega_min = 1.0\nomega_max = 0.5",
    "loop_rule = other", "newton_norm = l1", "seed_y_imp = 0.1", "kinds = PD,XX", "command = fly",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_bad_config_exit_code(tmp_path, capsys):
    code, path = run(tmp_path, "zeta = 0\n", "graze")
    assert code == 1 and not path.exists()
    assert "zeta" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["graze", "--config", str(tmp_path / "nope.cfg")]) == 1
    assert main(["graze"]) == 1


def test_unknown_command_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["fly"])
    assert exc.value.code == 1


def test_graze_single_row(tmp_path):
    code, path = run(tmp_path, "omega_min = 0.81\nomega_max = 0.81\nn_steps = 1\n", "graze")
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "omega,a_graz,z_graz"
    assert len(lines) == 2
    w, a, z = (float(v) for v in lines[1].split(","))
    assert w == 0.81
    assert a == pytest.approx(0.3454229, abs=1e-7)
    assert z == pytest.approx(math.atan2(0.0324, 0.3439), abs=1e-15)


def test_graze_at_unit_frequency(tmp_path):
    code, path = run(tmp_path, "omega_min = 1\nomega_max = 1\nn_steps = 1\n", "graze")
    assert code == 0
    row = read_rows(path)[0]
    assert float(row["z_graz"]) == math.pi / 2


def test_graze_empty_range(tmp_path):
    code, path = run(tmp_path, "n_steps = 0\n", "graze")
    assert code == 0
    assert path.read_text() == "omega,a_graz,z_graz\n"


def test_fmt():
    assert fmt(None) == "" and fmt(True) == "1" and fmt(3) == "3"
    assert float(fmt(0.1)) == 0.1 and fmt(0.1) == "0.10000000000000001"


def test_sidecar_names(tmp_path):
    assert sidecar(tmp_path / "a.csv", "bif").name == "a_bif.csv"
    assert sidecar(tmp_path / "a", "pd").name == "a_pd.csv"


BRANCH_CFG = """\
omega = 0.81
amp = 0.355
seed_y_imp = 0.006
seed_z_imp = 0.09
dy_imp = -1e-3
n_steps = 12
"""


def test_branch_output(tmp_path):
    code, path = run(tmp_path, BRANCH_CFG, "branch")
    assert code == 0
    rows = read_rows(path)
    assert len(rows) == 13
    assert [int(r["step"]) for r in rows] == list(range(13))
    for r in rows:
        y = float(r["y_imp"])
        assert r["virtual"] == ("1" if y < 0 else "0")
        if abs(y) < 1e-6:
            assert r["l1_re"] == r["l1_im"] == r["l2_re"] == r["l2_im"] == ""
            assert r["stable"] == "0"
        else:
            assert r["l1_re"] != ""
        z = float(r["z_imp"])
        assert 0.0 <= z < 2 * math.pi
    assert any(abs(float(r["y_imp"])) < 1e-6 for r in rows)
    assert sidecar(path, "bif").read_text().startswith("kind,omega,amp,y_imp,z_imp\n")


def test_branch_rows_are_zeros(tmp_path):
    code, path = run(tmp_path, BRANCH_CFG, "branch")
    assert code == 0
    for r in read_rows(path):
        params = ModelParams(0.02, 0.9, float(r["omega"]), float(r["amp"]))
        v = vivid(ImpactPoint(float(r["y_imp"]), float(r["z_imp"])), 2, params)
        assert v.norm() < 1e-10


def test_seed_command(tmp_path):
    code, path = run(tmp_path, "omega = 0.81\namp = 0.355\n", "seed")
    assert code == 0
    (row,) = read_rows(path)
    assert float(row["y_imp"]) == pytest.approx(0.27840883, abs=1e-6)
    assert row["stable"] == "1"


def test_seed_failure_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "omega = 0.81\namp = 0.34\ntransient_steps = 100\n", "seed")
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err


def test_run_takes_command_from_config(tmp_path):
    out = tmp_path / "g.csv"
    cfg = f"command = graze\noutput_path = {out}\nn_steps = 3\n"
    (tmp_path / "r.cfg").write_text(cfg)
    assert main(["run", "--config", str(tmp_path / "r.cfg")]) == 0
    assert len(out.read_text().splitlines()) == 4
    (tmp_path / "s.cfg").write_text("n_steps = 3\n")
    assert main(["run", "--config", str(tmp_path / "s.cfg")]) == 1


def test_selftest_passes(tmp_path, capsys):
    out = tmp_path / "self.csv"
    assert main(["selftest", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "FAIL" not in text and text.count("PASS") == 6
    assert all(r["passed"] == "1" for r in read_rows(out))


def test_selftest_detects_loose_tolerance(tmp_path, capsys):
    code, path = run(tmp_path, "time_tol = 1\n", "selftest")
    assert code == 2
    rows = {r["check"]: r["passed"] for r in read_rows(path)}
    assert rows["section_membership"] == "0"
    assert "section_membership" in capsys.readouterr().err


def test_branch_is_deterministic(tmp_path):
    _, a = run(tmp_path, BRANCH_CFG, "branch", out="a.csv")
    _, b = run(tmp_path, BRANCH_CFG, "branch", out="b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_codim2_graze_matches_graze_command(tmp_path):
    text = "kinds = GRAZE\nn_steps = 25\n"
    _, g = run(tmp_path, text, "graze", out="g.csv")
    _, c = run(tmp_path, text, "codim2", out="c.csv")
    curve = read_rows(sidecar(c, "graze"))
    graze = read_rows(g)
    assert len(curve) == len(graze) == 25
    for a, b in zip(curve, graze):
        assert a["kind"] == "GRAZE" and a["y_imp"] == "0"
        assert a["omega"] == b["omega"] and a["amp"] == b["a_graz"]
        assert a["z_imp"] == b["z_graz"]


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "m.cfg"
    cfg.write_text("n_steps = 2\n")
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "grazecont", "graze", "--config", str(cfg),
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 3
