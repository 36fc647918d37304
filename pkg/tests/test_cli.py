import json
import re
import subprocess
import sys

import pytest

from nvchern.cli import main, make_parser


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def chern_of(text):
    return float(re.search(r"C = (\S+)", text).group(1))


def test_berry_csv_and_summary(capsys, tmp_path):
    path = tmp_path / "b.csv"
    code, out, _ = run(capsys, "berry", "--hr", "2.25", "--h0", "0.23", "--out", str(path))
    assert code == 0
    assert abs(chern_of(out) - 3) < 0.4
    assert "(dynamic, alpha=2)" in out
    lines = path.read_text().splitlines()
    assert lines[0] == "theta_rad,sigma_y_sum,f_phi,sy_m-1,sy_m0,sy_m+1"
    assert len(lines) == 182


def test_berry_stdout_mode(capsys):
    code, out, err = run(capsys, "berry", "--hr", "0.5", "--h0", "10")
    assert code == 0
    assert out.startswith("theta_rad,")
    assert abs(chern_of(err)) < 0.05


def test_berry_small_sphere_summary(capsys):
    # Required bound |C| <= 0.15; the closed-system simulation gives 0.30 here.
    code, _, err = run(capsys, "berry", "--hr", "0.2", "--h0", "0.23")
    assert code == 0
    assert abs(chern_of(err)) <= 0.15


@pytest.mark.parametrize(
    "argv,expected,tol",
    [
        (["--method", "count", "--hr", "2.25", "--h0", "0.23"], 3, 0),
        (["--method", "fhs", "--hr", "0.9", "--h0", "0"], 1, 1e-6),
        (["--method", "dynamic", "--hr", "0.9", "--h0", "0", "--alpha", "8"], 1, 0.1),
    ],
)
def test_chern_methods(capsys, argv, expected, tol):
    code, out, _ = run(capsys, "chern", *argv)
    assert code == 0
    assert abs(chern_of(out) - expected) <= tol
    doc = json.loads(out.splitlines()[1])
    assert abs(doc["value"] - expected) <= tol


def test_chern_json_file(capsys, tmp_path):
    path = tmp_path / "c.json"
    code, _, _ = run(capsys, "chern", "--method", "count", "--hr", "1.0", "--h0", "0.5", "--json", str(path))
    assert code == 0
    assert json.loads(path.read_text())["value"] == 2


def test_phase_diagram_count(capsys, tmp_path):
    svg = tmp_path / "m.svg"
    code, out, _ = run(
        capsys, "phase-diagram", "--system", "nv", "--method", "count",
        "--x", "-2.25:2.25:45", "--y", "0.25:2.25:41", "--svg", str(svg),
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "h0_tilde,h_r_tilde,chern,method,min_gap,flag"
    assert len(lines) == 45 * 41 + 1
    assert {ln.split(",")[2] for ln in lines[1:]} <= {"0", "1", "2", "3"}
    assert svg.read_text().startswith("<svg")


def test_phase_diagram_jobs_deterministic(capsys, tmp_path):
    outs = []
    for jobs in ("1", "2"):
        path = tmp_path / f"g{jobs}.csv"
        code, _, _ = run(
            capsys, "phase-diagram", "--method", "dynamic", "--x", "-1:1:3", "--y", "0.4:2:3",
            "--jobs", jobs, "--out", str(path),
        )
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_phase_diagram_three_qubit(capsys):
    code, out, _ = run(capsys, "phase-diagram", "--system", "3q", "--x", "0:1.5:4", "--y", "0.5:2.5:3")
    assert code == 0
    assert out.splitlines()[0] == "g_tilde_prime,h0_tilde_prime,chern,method,min_gap,flag"


def test_lz(capsys):
    code, out, _ = run(capsys, "lz", "--hr", "1", "--h0", "0", "--sectors", "0", "--alphas", "0.1,0.5,1,2,4,8")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "alpha,ground_pop,sz_final"
    pops = [float(ln.split(",")[1]) for ln in lines[1:]]
    assert pops[0] < 0.5 and pops[-1] > 0.99
    assert all(b > a for a, b in zip(pops[1:], pops[2:]))


@pytest.mark.parametrize("argv,expected", [(["--hr", "1", "--h0", "0"], "0.5,0"), (["--hr", "2", "--h0", "0.5"], "0,0.5")])
def test_project(capsys, argv, expected):
    code, out, _ = run(capsys, "project", *argv)
    assert code == 0
    assert out.strip() == expected


def test_project_domain_error(capsys):
    code, _, err = run(capsys, "project", "--h0", "1.6")
    assert code == 2
    assert "radicand" in err


def test_radial(capsys):
    code, out, _ = run(capsys, "radial", "--h0-list", "0", "--hr", "0.5:1:2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "h0_tilde,h_r_tilde,g_tilde_prime,h0_tilde_prime,chern"
    assert lines[1].startswith("0,0.5,1,0,")


def test_exit_codes(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["chern", "--hr", "abc", "--h0", "0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["phase-diagram", "--x", "1:0:3", "--y", "0:1:2"])
    assert exc.value.code == 2
    # degenerate start: a computation failure
    code, _, err = run(capsys, "chern", "--hr", "1", "--h0", "0")
    assert code == 1
    assert "perturb" in err
    code, _, _ = run(capsys, "chern", "--hr", "1", "--h0", "0", "--dt", "-1")
    assert code == 2


def test_help_documents_units():
    parser = make_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, p in sub.choices.items():
        text = p.format_help()
        assert "A_par" in text or "normalized" in text, name
    berry = sub.choices["berry"].format_help()
    assert "Hz" in berry and "seconds" in berry


def test_config_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nalpha = 8\n")
    _, out, _ = run(capsys, "chern", "--hr", "0.9", "--h0", "0", "--config", str(cfg))
    assert json.loads(out.splitlines()[1])["alpha"] == 8
    _, out, _ = run(capsys, "chern", "--hr", "0.9", "--h0", "0", "--config", str(cfg), "--alpha", "4")
    assert json.loads(out.splitlines()[1])["alpha"] == 4
    monkeypatch.setenv("NVCHERN_CONFIG", str(cfg))
    _, out, _ = run(capsys, "chern", "--hr", "0.9", "--h0", "0")
    assert json.loads(out.splitlines()[1])["alpha"] == 8
    bad = tmp_path / "bad.cfg"
    bad.write_text("speed = 3\n")
    code, _, err = run(capsys, "chern", "--hr", "0.9", "--h0", "0", "--config", str(bad))
    assert code == 2 and "speed" in err


def test_deterministic_output(capsys):
    a = run(capsys, "berry", "--hr", "1.36", "--h0", "0.23")
    b = run(capsys, "berry", "--hr", "1.36", "--h0", "0.23")
    assert a == b


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "nvchern.cli", "project", "--hr", "1", "--h0", "0"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.strip() == "0.5,0"
