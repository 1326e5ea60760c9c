import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from charex.cli import main
from charex.distributions import Exponential, make_stream, sample
from charex.reporting import strip_volatile, validate_envelope


def run(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    envelope = json.loads(out.read_text()) if out.exists() else None
    return code, envelope, out


@pytest.fixture
def exp_csv(tmp_path):
    p = tmp_path / "sample.csv"
    xs = sample(Exponential(1.0), make_stream(123), 2000)
    p.write_text("x\n" + "\n".join(repr(v) for v in xs.tolist()) + "\n")
    return p


@pytest.mark.parametrize(
    "args,want",
    [
        (["identities", "--lemmas", "L1,L2,L3,L4", "--kmax", "8", "--nmax", "8", "--rmax", "6"], 0),
        (["identities", "--lemmas", "L1", "--kmax", "1"], 2),
        (["identities", "--lemmas", "L4", "--kmax", "1", "--nmax", "1", "--rmax", "5"], 0),
        (["derivatives", "--mmax", "6", "--rmax", "12"], 0),
        (["derivatives", "--mmax", "0", "--rmax", "0"], 0),
        (["derivatives", "--maclaurin", "--rate", "2", "--x", "1", "--terms", "40", "--tol", "1e-10"], 0),
        (["derivatives", "--maclaurin", "--rate", "1", "--x", "4", "--terms", "3", "--tol", "1e-10"], 1),
        (["density", "--statement", "T1:k=2,n=2", "--dist", "exp:rate=1", "--expect", "equal", "--tol", "1e-6"], 0),
        (["density", "--statement", "T1:k=2,n=2", "--dist", "unif:upper=1", "--expect", "differ", "--threshold", "0.1"], 0),
        (["density", "--statement", "T1:k=2,n=2", "--dist", "unif:upper=1", "--expect", "equal"], 1),
        (["density", "--statement", "T1:k=1,n=2"], 2),
        (["density", "--statement", "bogus"], 2),
        (["density", "--statement", "T1:k=2,n=2", "--dist", "cauchy"], 2),
        (["mc", "--statement", "T3:k=3,n=3", "--dist", "exp:rate=1", "--n", "5000", "--seed", "42"], 0),
        (["mc", "--statement", "T1:k=2,n=2", "--dist", "unif:upper=1", "--n", "5000"], 1),
    ],
)
def test_documented_exit_codes(args, want, tmp_path):
    code, envelope, _ = run(args, tmp_path)
    assert code == want
    if want != 2:
        validate_envelope(envelope)
        assert envelope["manifest"]["outcome"]["exit_code"] == want


def test_singular_case_summary(tmp_path):
    code, env, _ = run(["derivatives", "--mmax", "0", "--rmax", "0"], tmp_path)
    assert code == 0 and env["report"]["total_cases"] == 1


def test_usage_errors_have_messages(capsys):
    assert main(["density", "--statement", "T9:k=2"]) == 2
    assert "malformed statement" in capsys.readouterr().err
    assert main(["nonsense"]) == 2
    assert main([]) == 2


def test_gof_examples(tmp_path, exp_csv):
    code, env, _ = run(["gof", "--data", str(exp_csv), "--statement", "T3:k=2,n=2", "--seed", "7"], tmp_path)
    assert code in (0, 1)
    validate_envelope(env)
    assert env["report"]["base"] == "data"
    tiny = tmp_path / "tiny.csv"
    tiny.write_text("\n".join(str(v) for v in range(1, 11)))
    code, env, out = run(["gof", "--data", str(tiny)], tmp_path, "tiny.json")
    assert code == 2 and not out.exists()
    assert main(["gof", "--data", str(tmp_path / "missing.csv")]) == 2


def test_gof_acceptance_rate(tmp_path, exp_csv):
    codes = [main(["gof", "--data", str(exp_csv), "--seed", str(s)]) for s in range(60)]
    assert set(codes) <= {0, 1}
    assert codes.count(0) / len(codes) >= 0.85


@pytest.mark.parametrize(
    "args",
    [
        ["identities", "--kmax", "5", "--nmax", "6", "--rmax", "4"],
        ["derivatives", "--maclaurin"],
        ["density", "--statement", "T3:k=3,n=4", "--dist", "weibull:shape=2,scale=1", "--expect", "differ"],
        ["mc", "--statement", "T3:k=3,n=3", "--n", "5000", "--seed", "42"],
        ["mc", "--statement", "T2:k=2,n=3", "--n", "80", "--seed", "1", "--statistic", "cvm"],
    ],
    ids=lambda a: a[0],
)
def test_byte_identical_reruns(args, tmp_path):
    _, _, a = run(args, tmp_path, "a.json")
    _, _, b = run(args, tmp_path, "b.json")
    first = strip_volatile(json.loads(a.read_text()))
    second = strip_volatile(json.loads(b.read_text()))
    assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)
    assert "started_at" not in first["manifest"]


def test_gof_byte_identical(tmp_path, exp_csv):
    args = ["gof", "--data", str(exp_csv), "--seed", "7", "--statistic", "cvm"]
    _, _, a = run(args, tmp_path, "a.json")
    ta = strip_volatile(json.loads(a.read_text()))
    _, _, b = run(args, tmp_path, "a.json")
    assert ta == strip_volatile(json.loads(b.read_text()))


def test_json_to_stdout(capsys):
    assert main(["derivatives", "--mmax", "2", "--rmax", "3", "--json"]) == 0
    env = json.loads(capsys.readouterr().out)
    validate_envelope(env)
    assert env["report"]["total_cases"] == 12


def test_summary_without_json(capsys):
    assert main(["identities", "--kmax", "3", "--nmax", "3", "--rmax", "1"]) == 0
    assert "failures" in capsys.readouterr().out


def test_density_plot_and_csv(tmp_path):
    svg = tmp_path / "overlay.svg"
    csv = tmp_path / "grid.csv"
    code, env, _ = run(
        ["density", "--statement", "T1:k=2,n=2", "--dist", "unif:upper=1", "--expect", "differ",
         "--plot", str(svg), "--csv", str(csv), "--points", "40"],
        tmp_path,
    )
    assert code == 0
    root = ET.fromstring(svg.read_text())
    assert root.tag.endswith("svg")
    assert len([e for e in root.iter() if e.tag.endswith("polyline")]) == 2
    assert "href" not in svg.read_text() and "<script" not in svg.read_text()
    rows = csv.read_text().strip().splitlines()
    assert len(rows) == 41
    vals = np.array([[float(t) for t in r.split(",")] for r in rows[1:]])
    np.testing.assert_allclose(vals[:, 0], env["report"]["grid"])


def test_density_report_fields(tmp_path):
    code, env, _ = run(["density", "--statement", "T2:k=2,n=3", "--dist", "exp:rate=2"], tmp_path)
    rep = env["report"]
    assert code == 0
    assert len(rep["grid"]) == len(rep["lhs"]) == len(rep["rhs"]) == 100
    assert rep["grid"][-1] == pytest.approx(2.5)
    assert rep["sup_deviation"] < 1e-6


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for this run\nstatement = T3:k=2,n=3\nn = 400\nseed = 9\n")
    code, env, _ = run(["mc", "--config", str(cfg)], tmp_path)
    assert code in (0, 1)
    assert env["report"]["statement"] == "T3:k=2,n=3"
    assert env["report"]["n_samples"] == [400, 400] and env["report"]["seed"] == 9
    code, env, _ = run(["mc", "--config", str(cfg), "--seed", "10", "--n", "300"], tmp_path)
    assert env["report"]["seed"] == 10 and env["report"]["n_samples"] == [300, 300]


def test_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["mc", "--statement", "T3:k=2,n=2", "--config", str(cfg)]) == 2
    cfg.write_text("n = many\n")
    assert main(["mc", "--statement", "T3:k=2,n=2", "--config", str(cfg)]) == 2
    assert main(["mc", "--statement", "T3:k=2,n=2", "--config", str(tmp_path / "none.cfg")]) == 2


def test_thread_cap(tmp_path, monkeypatch):
    args = ["identities", "--kmax", "6", "--nmax", "6", "--rmax", "3", "--workers", "4"]
    monkeypatch.setenv("CHAREX_THREADS", "1")
    _, a, _ = run(args, tmp_path, "a.json")
    monkeypatch.setenv("CHAREX_THREADS", "2")
    _, b, _ = run(args, tmp_path, "b.json")
    assert a["report"] == b["report"]
    monkeypatch.setenv("CHAREX_THREADS", "lots")
    assert main(args) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "charex", "derivatives", "--mmax", "1", "--rmax", "2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "6 coefficient cases" in proc.stdout


def test_stdout_and_file_payloads_agree(tmp_path, capsys):
    args = ["mc", "--statement", "T1:k=2,n=3", "--n", "500", "--seed", "3"]
    _, env, _ = run(args, tmp_path)
    capsys.readouterr()
    main(args + ["--json"])
    assert strip_volatile(json.loads(capsys.readouterr().out)) == strip_volatile(env)
