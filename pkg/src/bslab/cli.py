"""Command-line shell: declarative experiment configs, verifiers, and reports.

The CLI is a thin layer over the library: a single JSON config file with
``operator`` / ``grid`` / ``potential`` / ``run`` blocks describes the whole
experiment, and no command-line flag can override physics parameters -- only
output paths, report format, and worker counts.  Certificates written by a
run therefore fully describe it, and a rerun of the same config and seed
reproduces them byte for byte (with ``--deterministic`` zeroing wall-clock
fields).

Exit codes: 0 when every certificate is PASS or REPORT-ONLY, 1 when some
certificate FAILs, 2 for configuration or validation errors (the message
names the offending config field path), 3 for compute failures (the message
names the failing job id).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .birman_schwinger import assemble_bs, bs_det_evaluator, schatten_norm, schatten_order
from .certlab import (
    BoundCertificate,
    JobError,
    Region,
    THEOREM_IDS,
    VerifyJob,
    boundary_ray,
    certificate_json,
    fixed_argument_ray,
    imaginary_q_window,
    run_jobs,
    summary_csv,
    uniform_p_window,
    verify_imaginary,
    verify_individual_bounds,
    verify_main,
    verify_schatten_scaling,
    verify_uniform_resolvent,
    verify_weighted_sums,
)
from .certlab import _case_a, _check_q_window  # shared regime rules
from .lattice import TorusGrid
from .potentials import (
    PotentialField,
    PotentialFormatError,
    PotentialSpec,
    parse_potential_file,
    resample,
    sample_potential,
)
from .spectra import (
    SpectralLabel,
    SpectralPoint,
    assemble_hamiltonian,
    classify,
    dist_to_spectrum,
    eigensolve,
    spectrum_csv,
)
from .symbols import SymbolKind, SymbolSpec, critical_values, dispersion_values

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "emit_report", "main"]

OUTPUT_DIR_ENV = "BSLAB_OUTPUT_DIR"
REPORT_FORMATS = ("json", "csv", "markdown-summary")


class ConfigError(Exception):
    """Invalid configuration; carries the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass
class ExperimentConfig:
    """Parsed and validated experiment description."""

    spec: SymbolSpec
    grid: TorusGrid
    refine: bool
    potential: PotentialField
    run: dict
    seed: int
    workers: int
    theorems: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# config loading


def _get_block(doc: dict, name: str, required: bool = True) -> dict:
    block = doc.get(name)
    if block is None:
        if required:
            raise ConfigError(name, "required block is missing")
        return {}
    if not isinstance(block, dict):
        raise ConfigError(name, "must be a JSON object")
    return block


def _coerce_param(key: str, value):
    # [re, im] pairs denote complex numbers everywhere except center points
    if (
        key != "center"
        and isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, (int, float)) for v in value)
    ):
        return complex(value[0], value[1])
    return value


def _load_operator(doc: dict) -> SymbolSpec:
    block = _get_block(doc, "operator")
    kind_name = block.get("kind")
    try:
        kind = SymbolKind(kind_name)
    except ValueError:
        options = ", ".join(k.value for k in SymbolKind if k is not SymbolKind.CUSTOM)
        raise ConfigError("operator.kind", f"unknown kind {kind_name!r}; options: {options}")
    if kind is SymbolKind.CUSTOM:
        raise ConfigError("operator.kind", "custom symbols need the library API, not the CLI")
    d = block.get("d")
    if not isinstance(d, int):
        raise ConfigError("operator.d", "must be an integer dimension")
    kwargs = {"kind": kind, "d": d}
    if "s" in block:
        kwargs["s"] = block["s"]
    try:
        return SymbolSpec(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError("operator", str(err))


def _load_grid(doc: dict, d: int) -> tuple[TorusGrid, bool]:
    block = _get_block(doc, "grid")
    try:
        grid = TorusGrid(d=d, N=block.get("N"), L=block.get("L"))
    except (TypeError, ValueError) as err:
        raise ConfigError("grid", str(err))
    refine = block.get("refine", True)
    if not isinstance(refine, bool):
        raise ConfigError("grid.refine", "must be true or false")
    return grid, refine


def _load_potential(doc: dict, grid: TorusGrid, config_dir: Path) -> PotentialField:
    block = _get_block(doc, "potential", required=False)
    if not block:
        return PotentialField(grid, np.zeros(grid.shape, dtype=complex))
    if "file" in block:
        path = Path(block["file"])
        if not path.is_absolute():
            path = config_dir / path
        try:
            fgrid, pspec = parse_potential_file(path)
        except (OSError, PotentialFormatError) as err:
            raise ConfigError("potential.file", str(err))
        if fgrid.d != grid.d or abs(fgrid.L - grid.L) > 1e-12 * grid.L:
            raise ConfigError(
                "potential.file",
                f"samples live on d={fgrid.d}, L={fgrid.L}, but the grid block says "
                f"d={grid.d}, L={grid.L}",
            )
        fld = sample_potential(pspec, fgrid)
        if fgrid.N != grid.N:
            try:
                fld = resample(fld, grid)
            except ValueError as err:
                raise ConfigError("potential.file", str(err))
        return fld
    family = block.get("family")
    params = {k: _coerce_param(k, v) for k, v in block.get("params", {}).items()}
    try:
        return sample_potential(PotentialSpec(family, params), grid)
    except (TypeError, ValueError) as err:
        raise ConfigError("potential", str(err))


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON experiment config; raises ConfigError."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ConfigError(str(path), str(err))
    except json.JSONDecodeError as err:
        raise ConfigError(str(path), f"not valid JSON: {err}")
    if not isinstance(doc, dict):
        raise ConfigError(str(path), "top level must be a JSON object")
    spec = _load_operator(doc)
    grid, refine = _load_grid(doc, spec.d)
    potential = _load_potential(doc, grid, path.parent)
    run = _get_block(doc, "run", required=False)
    seed = run.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("run.seed", "must be an integer")
    workers = run.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("run.workers", "must be a positive integer")
    theorems = run.get("theorems", [])
    if not isinstance(theorems, list) or not all(isinstance(t, str) for t in theorems):
        raise ConfigError("run.theorems", "must be a list of theorem ids")
    for t in theorems:
        if t not in THEOREM_IDS:
            raise ConfigError("run.theorems", f"unknown id {t!r}; options: {THEOREM_IDS}")
    if len(set(theorems)) != len(theorems):
        raise ConfigError("run.theorems", "theorem ids must be unique")
    return ExperimentConfig(
        spec=spec,
        grid=grid,
        refine=refine,
        potential=potential,
        run=run,
        seed=seed,
        workers=workers,
        theorems=theorems,
    )


# ---------------------------------------------------------------------------
# run-block accessors and regime validation


def _run_number(cfg: ExperimentConfig, key: str, thm: str) -> float:
    if key not in cfg.run:
        raise ConfigError(f"run.{key}", f"required by verifier {thm!r}")
    val = cfg.run[key]
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(f"run.{key}", "must be a number")
    return float(val)


def _run_region(cfg: ExperimentConfig, thm: str) -> Region:
    block = cfg.run.get("region")
    if not isinstance(block, dict):
        raise ConfigError("run.region", f"required by verifier {thm!r}")
    try:
        region = Region(
            shape=block.get("shape", "rectangle"),
            bounds=tuple(block.get("bounds", ())),
            clearance=block.get("clearance", 0.1),
        )
        region.validate_for(cfg.spec)
    except (TypeError, ValueError) as err:
        raise ConfigError("run.region", str(err))
    return region


def _run_ray(cfg: ExperimentConfig, thm: str) -> list[complex]:
    block = cfg.run.get("ray")
    if not isinstance(block, dict):
        raise ConfigError("run.ray", f"required by verifier {thm!r}")
    kind = block.get("type")
    try:
        if kind == "fixed_argument":
            return fixed_argument_ray(
                block["theta"], block["r_lo"], block["r_hi"], block.get("count", 9)
            )
        if kind == "boundary":
            return boundary_ray(
                block["re_lo"], block["re_hi"], block["height"], block.get("count", 9)
            )
    except KeyError as err:
        raise ConfigError("run.ray", f"missing field {err.args[0]!r} for type {kind!r}")
    except (TypeError, ValueError) as err:
        raise ConfigError("run.ray", str(err))
    raise ConfigError("run.ray.type", f"unknown ray type {kind!r}; options: fixed_argument, boundary")


def _validate_theorem(cfg: ExperimentConfig, thm: str) -> None:
    """Exponent-regime checks before any compute; raises ConfigError."""
    spec = cfg.spec
    try:
        if thm == "main":
            _check_q_window(spec, _run_number(cfg, "q", thm))
            _run_region(cfg, thm)
        elif thm == "uniform-resolvent":
            _run_region(cfg, thm)
            p = cfg.run.get("p")
            if p is not None and not isinstance(p, (int, float)):
                raise ConfigError("run.p", "must be a number or null")
            uniform_p_window(spec, None if p is None else float(p))
        elif thm == "schatten-scaling":
            if _case_a(spec):
                _check_q_window(spec, _run_number(cfg, "q", thm))
            else:
                _run_number(cfg, "q", thm)
            _run_ray(cfg, thm)
        elif thm == "individual-bounds":
            if not 0.0 < spec.s < spec.d:
                raise ConfigError(
                    "operator.s", f"the sectorial bound regime needs 0 < s < d, got s={spec.s}"
                )
            q = _run_number(cfg, "q", thm)
            if q < spec.d / spec.s - 1e-12:
                raise ConfigError(
                    "run.q", f"q={q} below the exponent floor d/s = {spec.d / spec.s:.6g}"
                )
        elif thm == "imaginary":
            imaginary_q_window(spec, _run_number(cfg, "q", thm))
            vals = cfg.potential.values
            if cfg.potential.is_matrix or np.any(np.abs(vals.imag) > 0) or np.any(vals.real < 0):
                raise ConfigError(
                    "potential", "the imaginary verifier reads W from this block: "
                    "need real nonnegative scalar samples"
                )
        elif thm == "weighted-sums":
            _run_number(cfg, "q", thm)
            eps = _run_number(cfg, "eps", thm)
            if eps <= 0.0:
                raise ConfigError("run.eps", "must be positive")
            variant = cfg.run.get("variant", "auto")
            if variant not in ("auto", "inverse_sqrt"):
                raise ConfigError("run.variant", f"unknown variant {variant!r}")
            kind = spec.kind
            needs_alpha = not (
                kind is SymbolKind.FRACTIONAL_LAPLACIAN
                or (kind is SymbolKind.RELATIVISTIC and variant == "inverse_sqrt")
            )
            if needs_alpha:
                alpha = _run_number(cfg, "alpha", thm)
                if spec.d == 2 and alpha != 3.0:
                    raise ConfigError("run.alpha", f"alpha must be 3 when d = 2, got {alpha}")
                if spec.d != 2 and alpha <= spec.d:
                    raise ConfigError("run.alpha", f"alpha must exceed d = {spec.d}, got {alpha}")
            if kind is SymbolKind.FRACTIONAL_LAPLACIAN:
                _check_q_window(spec, cfg.run["q"], strict_lower=True)
            if kind is SymbolKind.RELATIVISTIC and variant == "inverse_sqrt":
                if 2.0 * cfg.run["q"] <= spec.d + 1e-12:
                    raise ConfigError("run.q", "the inverse_sqrt substitution needs 2q > d")
    except ConfigError:
        raise
    except ValueError as err:
        # regime helpers name the parameter; attach the config path
        key = "run.p" if thm == "uniform-resolvent" else "run.q"
        raise ConfigError(key, str(err))


def _build_job(cfg: ExperimentConfig, thm: str) -> VerifyJob:
    spec, grid, V, run, seed = cfg.spec, cfg.grid, cfg.potential, cfg.run, cfg.seed
    if thm == "main":
        K, q = _run_region(cfg, thm), float(run["q"])
        t_max = float(run.get("t_max", 32.0))
        fn = lambda: verify_main(spec, grid, V, K, q, t_max=t_max, seed=seed)
    elif thm == "uniform-resolvent":
        K = _run_region(cfg, thm)
        p = run.get("p")
        p = None if p is None else float(p)
        fn = lambda: verify_uniform_resolvent(spec, grid, K, p, seed=seed)
    elif thm == "schatten-scaling":
        q, ray = float(run["q"]), _run_ray(cfg, thm)
        fn = lambda: verify_schatten_scaling(spec, grid, q, ray, V, seed=seed)
    elif thm == "individual-bounds":
        q = float(run["q"])
        fn = lambda: verify_individual_bounds(spec, grid, V, q, seed=seed)
    elif thm == "imaginary":
        q = float(run["q"])
        W = PotentialField(grid, V.values.real.copy())
        fn = lambda: verify_imaginary(spec, W, q, seed=seed)
    else:  # weighted-sums
        q, eps = float(run["q"]), float(run["eps"])
        alpha = run.get("alpha")
        alpha = None if alpha is None else float(alpha)
        z0 = run.get("z0")
        z0 = None if z0 is None else complex(*z0) if isinstance(z0, list) else complex(z0)
        variant = run.get("variant", "auto")
        fn = lambda: verify_weighted_sums(
            spec, grid, V, q, alpha, eps, z0, variant=variant, seed=seed
        )
    return VerifyJob(job_id=thm, fn=fn)


# ---------------------------------------------------------------------------
# artifacts


def _artifact_dir(out_root: Optional[str]) -> Path:
    root = Path(out_root or os.environ.get(OUTPUT_DIR_ENV) or "runs")
    base = time.strftime("run-%Y%m%d-%H%M%S")
    path = root / base
    k = 2
    while path.exists():
        path = root / f"{base}-{k}"
        k += 1
    path.mkdir(parents=True)
    return path


def plot_data_csv(certs: Sequence[BoundCertificate]) -> Optional[str]:
    """Long-format curve data (series, x, y) extracted from certificate inputs."""
    rows = []
    for c in certs:
        inp = c.inputs
        if c.theorem == "schatten-scaling" and "measured" in inp:
            for z, val in zip(inp["ray"], inp["measured"]):
                rows.append(("schatten-norm", abs(complex(z)), val))
        elif c.theorem == "uniform-resolvent" and "scan_values" in inp:
            for z, val in zip(inp["scan_points"], inp["scan_values"]):
                rows.append(("resolvent-norm", abs(complex(z)), val))
        elif c.theorem == "weighted-sums" and "sums" in inp:
            for v, ssum in zip(inp["vnorms"], inp["sums"]):
                rows.append(("weighted-sum", v, ssum))
    if not rows:
        return None
    lines = ["series,x,y"] + [f"{s},{x!r},{y!r}" for s, x, y in rows]
    return "\n".join(lines) + "\n"


def emit_report(
    certs: Sequence[BoundCertificate],
    fmt: str,
    dest: Path,
    deterministic: bool = False,
) -> Path:
    """Write the run report in the requested format; returns the file path."""
    if not certs:
        raise ValueError("cannot report on an empty certificate list")
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"unknown report format {fmt!r}; options: {REPORT_FORMATS}")
    if fmt == "json":
        path = dest / "report.json"
        docs = [certificate_json(c, deterministic=deterministic) for c in certs]
        path.write_text(json.dumps(docs, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    elif fmt == "csv":
        path = dest / "report.csv"
        path.write_text(summary_csv(certs, deterministic=deterministic), encoding="utf-8")
    else:
        path = dest / "report.md"
        lines = [
            "| theorem | verdict | lhs | rhs | constant |",
            "| --- | --- | --- | --- | --- |",
        ]
        for c in certs:
            rhs = "" if c.rhs is None else f"{c.rhs:.6g}"
            const = "" if c.constant is None else f"{c.constant:.6g}"
            lines.append(f"| {c.theorem} | {c.verdict} | {c.lhs:.6g} | {rhs} | {const} |")
        counts = {v: sum(1 for c in certs if c.verdict == v) for v in ("PASS", "FAIL", "REPORT-ONLY")}
        lines.append("")
        lines.append(
            f"{len(certs)} certificates: {counts['PASS']} PASS, {counts['FAIL']} FAIL, "
            f"{counts['REPORT-ONLY']} REPORT-ONLY"
        )
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _classified_points(cfg: ExperimentConfig) -> list[SpectralPoint]:
    sol = eigensolve(assemble_hamiltonian(cfg.spec, cfg.grid, cfg.potential))
    if not cfg.refine:
        # no refinement pair -> drift is unknowable, leave every point Undecided
        return [
            SpectralPoint(
                z=complex(z),
                dist_sigma=dist_to_spectrum(cfg.spec, z),
                refinement_drift=math.nan,
                label=SpectralLabel.UNDECIDED,
            )
            for z in sol.values
        ]
    fine = cfg.grid.refined(2)
    eigs_f = eigensolve(assemble_hamiltonian(cfg.spec, fine, resample(cfg.potential, fine))).values
    return classify(sol.values, eigs_f, cfg.spec, cfg.grid, fine)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_symbols(cfg: ExperimentConfig, args) -> int:
    levels = dispersion_values(cfg.spec, cfg.grid.xi())
    doc = {
        "kind": cfg.spec.kind.value,
        "d": cfg.spec.d,
        "s": cfg.spec.s,
        "spinor_dim": cfg.spec.n,
        "critical_values": [[z.real, z.imag] for z in critical_values(cfg.spec)],
        "dispersion_min": float(levels.min()),
        "dispersion_max": float(levels.max()),
        "grid": {"d": cfg.grid.d, "N": cfg.grid.N, "L": cfg.grid.L},
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _cmd_spectrum(cfg: ExperimentConfig, args) -> int:
    points = _classified_points(cfg)
    dest = _artifact_dir(args.out)
    path = dest / "spectra.csv"
    spectrum_csv(points, path)
    labels = {}
    for p in points:
        labels[p.label.value] = labels.get(p.label.value, 0) + 1
    tally = ", ".join(f"{k}: {v}" for k, v in sorted(labels.items()))
    print(f"{len(points)} spectral points ({tally})")
    print(f"wrote {path}")
    return 0


def _cmd_bs(cfg: ExperimentConfig, args) -> int:
    ray = _run_ray(cfg, "bs scan")
    alpha = cfg.run.get("alpha")
    if alpha is None:
        q = cfg.run.get("q")
        if q is not None and _case_a(cfg.spec) and cfg.spec.d > 1:
            alpha = schatten_order(cfg.spec.d, float(q))
        else:
            alpha = 2.0
    alpha = float(alpha)
    order = max(2, math.ceil(alpha))
    det = bs_det_evaluator(cfg.spec, cfg.grid, cfg.potential, order)
    lines = ["re,im,sigma1,schatten,det_log_abs,det_phase"]
    for z in ray:
        op = assemble_bs(cfg.spec, cfg.grid, cfg.potential, z)
        sig1 = float(op.singular_values[0])
        snorm = schatten_norm(op, alpha).norm
        dv = det(z)
        lines.append(f"{z.real!r},{z.imag!r},{sig1!r},{snorm!r},{dv.log_abs!r},{dv.phase!r}")
    dest = _artifact_dir(args.out)
    path = dest / "bs-scan.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"scanned {len(ray)} contour points (Schatten order {alpha:g}, det order {order})")
    print(f"wrote {path}")
    return 0


def _run_verifiers(cfg: ExperimentConfig, theorems: list[str], args, with_spectra: bool) -> int:
    for thm in theorems:
        _validate_theorem(cfg, thm)
    jobs = [_build_job(cfg, thm) for thm in theorems]
    workers = args.workers if args.workers is not None else cfg.workers
    certs = run_jobs(jobs, workers=workers)
    dest = _artifact_dir(args.out)
    for cert in certs:
        doc = certificate_json(cert, deterministic=args.deterministic)
        path = dest / f"certificate-{cert.theorem}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (dest / "summary.csv").write_text(
        summary_csv(certs, deterministic=args.deterministic), encoding="utf-8"
    )
    if with_spectra:
        spectrum_csv(_classified_points(cfg), dest / "spectra.csv")
    curves = plot_data_csv(certs)
    if curves is not None:
        (dest / "plot-data.csv").write_text(curves, encoding="utf-8")
    emit_report(certs, args.format, dest, deterministic=args.deterministic)
    for cert in certs:
        print(f"{cert.theorem}: {cert.verdict} (lhs={cert.lhs:.6g})")
    print(f"wrote {dest}")
    return 1 if any(c.verdict == "FAIL" for c in certs) else 0


def _cmd_verify(cfg: ExperimentConfig, args) -> int:
    return _run_verifiers(cfg, [args.theorem], args, with_spectra=False)


def _cmd_scan(cfg: ExperimentConfig, args) -> int:
    if not cfg.theorems:
        raise ConfigError("run.theorems", "a scan needs at least one theorem id")
    return _run_verifiers(cfg, cfg.theorems, args, with_spectra=True)


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bslab",
        description="Spectral experiments on periodic grids, driven by a JSON config.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, reports=False):
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", default=None, help=f"output root (default ${OUTPUT_DIR_ENV} or ./runs)")
        if reports:
            p.add_argument("--format", choices=REPORT_FORMATS, default="json")
            p.add_argument("--deterministic", action="store_true",
                           help="zero wall-clock fields so reruns compare byte for byte")
            p.add_argument("--workers", type=int, default=None,
                           help="thread count (overrides run.workers)")

    common(sub.add_parser("symbols", help="print the symbol and critical-value table"))
    common(sub.add_parser("spectrum", help="eigensolve, classify, and write spectra CSV"))
    common(sub.add_parser("bs", help="Schatten/determinant scan along the configured contour"))
    p_verify = sub.add_parser("verify", help="run one verifier and write its certificate")
    p_verify.add_argument("theorem", choices=THEOREM_IDS)
    common(p_verify, reports=True)
    common(sub.add_parser("scan", help="run every verifier listed in the config"), reports=True)
    return parser


_HANDLERS = {
    "symbols": _cmd_symbols,
    "spectrum": _cmd_spectrum,
    "bs": _cmd_bs,
    "verify": _cmd_verify,
    "scan": _cmd_scan,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if not hasattr(args, "format"):
        args.format = "json"
        args.deterministic = False
        args.workers = None
    try:
        cfg = load_config(args.config)
        return _HANDLERS[args.command](cfg, args)
    except ConfigError as err:
        print(f"config error at {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except JobError as err:
        print(f"compute failure: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"compute failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
