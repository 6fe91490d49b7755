"""CLI subcommands, config validation, exit codes, and report artifacts."""

import json
import math

import numpy as np
import pytest

from bslab.certlab import BoundCertificate, certificate_json, summary_csv
from bslab.cli import ConfigError, emit_report, load_config, main as cli_main
from bslab.lattice import TorusGrid
from bslab.potentials import PotentialSpec, write_potential_file


def base_config(**overrides):
    doc = {
        "operator": {"kind": "fractional_laplacian", "d": 1, "s": 1.5},
        "grid": {"N": 32, "L": 20.0},
        "potential": {
            "family": "gaussian",
            "params": {"amplitude": [-4.0, 0.0], "width": 1.0},
        },
        "run": {
            "seed": 0,
            "q": 1.0,
            "eps": 0.5,
            "theorems": ["schatten-scaling", "weighted-sums"],
            "region": {
                "shape": "rectangle",
                "bounds": [-6.0, -0.05, -0.4, 0.4],
                "clearance": 0.04,
            },
            "ray": {
                "type": "fixed_argument",
                "theta": math.pi,
                "r_lo": 0.5,
                "r_hi": 8.0,
                "count": 9,
            },
        },
    }
    for key, val in overrides.items():
        if isinstance(val, dict) and isinstance(doc.get(key), dict):
            doc[key].update(val)
        else:
            doc[key] = val
    return doc


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def run_dirs(out_root):
    return sorted(p for p in out_root.iterdir() if p.name.startswith("run-"))


# ---------------------------------------------------------------------------
# config loading


def test_load_config_builds_grid_and_potential(tmp_path):
    cfg = load_config(write_config(tmp_path, base_config()))
    assert cfg.spec.s == 1.5 and cfg.grid.N == 32 and cfg.grid.L == 20.0
    assert cfg.potential.values.min().real < -3.9  # the well is materialized
    assert cfg.theorems == ["schatten-scaling", "weighted-sums"]


def test_load_config_field_errors(tmp_path):
    cases = [
        ({"operator": None}, "operator"),
        (base_config(operator={"kind": "heat_semigroup", "d": 1}), "operator.kind"),
        (base_config(operator={"kind": "fractional_laplacian", "d": "one"}), "operator.d"),
        (base_config(run={"theorems": ["schatten-scaling", "nope"]}), "run.theorems"),
        (base_config(run={"seed": 0.5}), "run.seed"),
        (base_config(run={"workers": 0}), "run.workers"),
        (base_config(grid={"refine": "yes"}), "grid.refine"),
    ]
    for doc, path in cases:
        if doc.get("operator") is None:
            doc = {k: v for k, v in base_config().items() if k != "operator"}
        with pytest.raises(ConfigError) as einfo:
            load_config(write_config(tmp_path, doc))
        assert einfo.value.path == path, (path, str(einfo.value))


def test_potential_file_reference_resolves_relative(tmp_path):
    grid = TorusGrid(1, 32, 20.0)
    spec = PotentialSpec("gaussian", {"amplitude": complex(-4.0, 0.0), "width": 1.0})
    write_potential_file(tmp_path / "well.pot", grid, spec)
    doc = base_config(potential={"file": "well.pot"})
    doc["potential"].pop("family", None)
    doc["potential"].pop("params", None)
    cfg = load_config(write_config(tmp_path, doc))
    assert cfg.potential.values.min().real < -3.9


def test_potential_file_grid_mismatch_is_config_error(tmp_path):
    write_potential_file(
        tmp_path / "well.pot",
        TorusGrid(1, 32, 10.0),
        PotentialSpec("gaussian", {"amplitude": complex(-4.0, 0.0), "width": 1.0}),
    )
    doc = base_config(potential={"file": "well.pot"})
    doc["potential"].pop("family", None)
    doc["potential"].pop("params", None)
    with pytest.raises(ConfigError) as einfo:
        load_config(write_config(tmp_path, doc))
    assert einfo.value.path == "potential.file"


def test_potential_file_upsamples_onto_finer_config_grid(tmp_path):
    write_potential_file(
        tmp_path / "well.pot",
        TorusGrid(1, 16, 20.0),
        PotentialSpec("gaussian", {"amplitude": complex(-4.0, 0.0), "width": 1.0}),
    )
    doc = base_config(potential={"file": "well.pot"})
    doc["potential"].pop("family", None)
    doc["potential"].pop("params", None)
    cfg = load_config(write_config(tmp_path, doc))
    assert cfg.potential.grid.N == 32


# ---------------------------------------------------------------------------
# subcommands


def test_symbols_prints_table(tmp_path, capsys):
    rc = cli_main(["symbols", "--config", write_config(tmp_path, base_config())])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "fractional_laplacian"
    assert doc["critical_values"] == [[0.0, 0.0]]
    assert doc["dispersion_min"] == 0.0 and doc["dispersion_max"] > 0.0
    assert doc["grid"] == {"d": 1, "N": 32, "L": 20.0}


def test_spectrum_writes_classified_csv(tmp_path):
    out = tmp_path / "runs"
    rc = cli_main([
        "spectrum", "--config", write_config(tmp_path, base_config()), "--out", str(out),
    ])
    assert rc == 0
    (run_dir,) = run_dirs(out)
    lines = (run_dir / "spectra.csv").read_text().strip().splitlines()
    assert lines[0] == "re,im,dist_sigma,drift,label,cond"
    assert len(lines) == 1 + 32
    labels = {row.split(",")[4] for row in lines[1:]}
    assert "Discrete" in labels  # the deep well binds eigenvalues


def test_spectrum_without_refinement_leaves_points_undecided(tmp_path):
    doc = base_config(grid={"N": 32, "L": 20.0, "refine": False})
    out = tmp_path / "runs"
    rc = cli_main(["spectrum", "--config", write_config(tmp_path, doc), "--out", str(out)])
    assert rc == 0
    (run_dir,) = run_dirs(out)
    rows = (run_dir / "spectra.csv").read_text().strip().splitlines()[1:]
    assert {row.split(",")[4] for row in rows} == {"Undecided"}
    assert all(row.split(",")[3] == "nan" for row in rows)


def test_bs_scan_writes_contour_csv(tmp_path):
    out = tmp_path / "runs"
    rc = cli_main([
        "bs", "--config", write_config(tmp_path, base_config()), "--out", str(out),
    ])
    assert rc == 0
    (run_dir,) = run_dirs(out)
    lines = (run_dir / "bs-scan.csv").read_text().strip().splitlines()
    assert lines[0] == "re,im,sigma1,schatten,det_log_abs,det_phase"
    assert len(lines) == 1 + 9
    sig1 = [float(row.split(",")[2]) for row in lines[1:]]
    assert sig1[0] > sig1[-1] > 0.0  # norms decay along the outgoing ray


def test_verify_writes_certificate_and_report(tmp_path):
    out = tmp_path / "runs"
    rc = cli_main([
        "verify", "schatten-scaling",
        "--config", write_config(tmp_path, base_config()),
        "--out", str(out), "--deterministic",
    ])
    assert rc == 0
    (run_dir,) = run_dirs(out)
    cert = json.loads((run_dir / "certificate-schatten-scaling.json").read_text())
    assert cert["verdict"] == "PASS"
    assert abs(cert["lhs"] + 1.0 / 3.0) <= 0.1
    assert cert["runtime_s"] == 0.0
    assert (run_dir / "report.json").exists()
    assert (run_dir / "summary.csv").exists()


def test_scan_writes_all_artifacts(tmp_path):
    out = tmp_path / "runs"
    rc = cli_main([
        "scan", "--config", write_config(tmp_path, base_config()),
        "--out", str(out), "--deterministic", "--format", "markdown-summary",
    ])
    assert rc == 0
    (run_dir,) = run_dirs(out)
    names = {p.name for p in run_dir.iterdir()}
    assert names == {
        "certificate-schatten-scaling.json",
        "certificate-weighted-sums.json",
        "summary.csv",
        "spectra.csv",
        "plot-data.csv",
        "report.md",
    }
    series = {row.split(",")[0] for row in (run_dir / "plot-data.csv").read_text().splitlines()[1:]}
    assert series == {"schatten-norm", "weighted-sum"}
    report = (run_dir / "report.md").read_text()
    assert "| schatten-scaling | PASS |" in report
    assert "2 certificates" in report


def test_scan_requires_theorem_list(tmp_path, capsys):
    doc = base_config(run={"theorems": []})
    rc = cli_main(["scan", "--config", write_config(tmp_path, doc)])
    assert rc == 2
    assert "run.theorems" in capsys.readouterr().err


def test_zero_potential_main_certifies_zero_sum(tmp_path):
    doc = base_config(run={"theorems": ["main"]})
    del doc["potential"]
    out = tmp_path / "runs"
    rc = cli_main([
        "verify", "main", "--config", write_config(tmp_path, doc),
        "--out", str(out), "--deterministic",
    ])
    assert rc == 0  # REPORT-ONLY is not a failure
    (run_dir,) = run_dirs(out)
    cert = json.loads((run_dir / "certificate-main.json").read_text())
    assert cert["lhs"] == 0.0
    assert cert["verdict"] == "REPORT-ONLY"
    assert "no eigenvalue" in cert["inputs"]["threshold"]


def test_exponent_window_violation_exits_2_with_field_path(tmp_path, capsys):
    doc = base_config(run={"q": 0.5, "theorems": ["main"]})
    rc = cli_main(["verify", "main", "--config", write_config(tmp_path, doc)])
    assert rc == 2
    err = capsys.readouterr().err
    assert err.startswith("config error at run.q:")
    assert "0.5" in err


def test_imaginary_rejects_complex_potential_block(tmp_path, capsys):
    doc = base_config(
        potential={"family": "gaussian", "params": {"amplitude": [0.0, 2.0], "width": 1.0}},
        run={"theorems": ["imaginary"]},
    )
    rc = cli_main(["verify", "imaginary", "--config", write_config(tmp_path, doc)])
    assert rc == 2
    assert "config error at potential:" in capsys.readouterr().err


def test_imaginary_verifier_through_cli(tmp_path):
    doc = base_config(
        operator={"kind": "fractional_laplacian", "d": 1, "s": 1.0},
        grid={"N": 96, "L": 24.0},
        potential={"family": "gaussian", "params": {"amplitude": [2.0, 0.0], "width": 1.0}},
        run={"theorems": ["imaginary"]},
    )
    out = tmp_path / "runs"
    rc = cli_main([
        "verify", "imaginary", "--config", write_config(tmp_path, doc),
        "--out", str(out), "--deterministic",
    ])
    assert rc == 0
    (run_dir,) = run_dirs(out)
    cert = json.loads((run_dir / "certificate-imaginary.json").read_text())
    assert cert["verdict"] == "PASS"
    assert cert["inputs"]["eigenvalues_checked"] > 0


def test_missing_ray_block_is_named(tmp_path, capsys):
    doc = base_config(run={"theorems": ["schatten-scaling"]})
    del doc["run"]["ray"]
    rc = cli_main(["scan", "--config", write_config(tmp_path, doc)])
    assert rc == 2
    assert "run.ray" in capsys.readouterr().err


def test_unknown_ray_type_is_named(tmp_path, capsys):
    doc = base_config(run={"ray": {"type": "spiral"}})
    rc = cli_main(["verify", "schatten-scaling", "--config", write_config(tmp_path, doc)])
    assert rc == 2
    assert "run.ray.type" in capsys.readouterr().err


def test_unknown_theorem_rejected_by_parser(tmp_path):
    with pytest.raises(SystemExit) as einfo:
        cli_main(["verify", "riemann-hypothesis", "--config", "x.json"])
    assert einfo.value.code == 2


# ---------------------------------------------------------------------------
# exit codes for failures


def test_exit_1_when_a_certificate_fails(tmp_path, monkeypatch):
    fake = BoundCertificate(
        theorem="schatten-scaling",
        inputs={},
        lhs=1.0,
        rhs=0.5,
        constant=None,
        verdict="FAIL",
        seed=0,
        runtime_s=0.0,
        grid={"d": 1, "N": 32, "L": 20.0},
    )
    monkeypatch.setattr("bslab.cli.verify_schatten_scaling", lambda *a, **k: fake)
    doc = base_config(run={"theorems": ["schatten-scaling"]})
    rc = cli_main([
        "scan", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "runs"),
    ])
    assert rc == 1


def test_exit_3_when_a_job_raises(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise RuntimeError("singular value sweep diverged")

    monkeypatch.setattr("bslab.cli.verify_schatten_scaling", boom)
    doc = base_config(run={"theorems": ["schatten-scaling"]})
    rc = cli_main([
        "scan", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "runs"),
    ])
    assert rc == 3
    err = capsys.readouterr().err
    assert "compute failure" in err and "schatten-scaling" in err


def test_exit_3_on_unwritable_destination(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    doc = base_config(run={"theorems": ["schatten-scaling"]})
    rc = cli_main([
        "verify", "schatten-scaling", "--config", write_config(tmp_path, doc),
        "--out", str(blocker / "runs"),
    ])
    assert rc == 3
    assert "compute failure" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# determinism and parallelism


def test_scan_reruns_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path, base_config())
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        rc = cli_main(["scan", "--config", cfg, "--out", str(out), "--deterministic"])
        assert rc == 0
    (da,), (db,) = run_dirs(outs[0]), run_dirs(outs[1])
    names = sorted(p.name for p in da.iterdir())
    assert names == sorted(p.name for p in db.iterdir())
    for name in names:
        assert (da / name).read_bytes() == (db / name).read_bytes(), name


def test_parallel_workers_match_serial(tmp_path):
    cfg = write_config(tmp_path, base_config())
    rc1 = cli_main(["scan", "--config", cfg, "--out", str(tmp_path / "s"), "--deterministic"])
    rc2 = cli_main([
        "scan", "--config", cfg, "--out", str(tmp_path / "p"),
        "--deterministic", "--workers", "2",
    ])
    assert rc1 == rc2 == 0
    (ds,), (dp,) = run_dirs(tmp_path / "s"), run_dirs(tmp_path / "p")
    assert (ds / "summary.csv").read_bytes() == (dp / "summary.csv").read_bytes()


def test_output_root_env_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("BSLAB_OUTPUT_DIR", str(tmp_path / "from-env"))
    rc = cli_main(["spectrum", "--config", write_config(tmp_path, base_config())])
    assert rc == 0
    assert run_dirs(tmp_path / "from-env")


# ---------------------------------------------------------------------------
# emit_report


def _two_certs():
    a = BoundCertificate(
        theorem="schatten-scaling",
        inputs={"ray": [complex(-1.0, 0.5)], "measured": [0.25]},
        lhs=-0.33,
        rhs=-1.0 / 3.0,
        constant=0.8,
        verdict="PASS",
        seed=3,
        runtime_s=1.25,
        grid={"d": 1, "N": 32, "L": 20.0},
    )
    b = BoundCertificate(
        theorem="weighted-sums",
        inputs={"note": "no Discrete eigenvalues at any probed coupling"},
        lhs=0.0,
        rhs=None,
        constant=None,
        verdict="REPORT-ONLY",
        seed=3,
        runtime_s=0.5,
        grid={"d": 1, "N": 32, "L": 20.0},
    )
    return [a, b]


def test_emit_report_json_reparses_to_memory_fields(tmp_path):
    certs = _two_certs()
    path = emit_report(certs, "json", tmp_path, deterministic=True)
    reparsed = json.loads(path.read_text())
    assert reparsed == [certificate_json(c, deterministic=True) for c in certs]


def test_emit_report_csv_matches_summary(tmp_path):
    certs = _two_certs()
    path = emit_report(certs, "csv", tmp_path)
    assert path.read_text() == summary_csv(certs)


def test_emit_report_markdown_tabulates_and_totals(tmp_path):
    path = emit_report(_two_certs(), "markdown-summary", tmp_path)
    text = path.read_text()
    assert "| theorem | verdict | lhs | rhs | constant |" in text
    assert "| weighted-sums | REPORT-ONLY | 0 |  |  |" in text
    assert "2 certificates: 1 PASS, 0 FAIL, 1 REPORT-ONLY" in text


def test_emit_report_input_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_report([], "json", tmp_path)
    with pytest.raises(ValueError):
        emit_report(_two_certs(), "yaml", tmp_path)
