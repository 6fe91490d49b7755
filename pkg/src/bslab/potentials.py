"""Potential fields: named families, file I/O, resampling, scaling family.

A potential file is line-oriented: a grid header (d, N, L), then either a
named family with parameters or a raw row-major value table::

    # attractive complex Gaussian well
    d 1
    N 256
    L 20.0
    family gaussian
    amplitude -3+0.5j
    width 1.5
    center 0

    d 1
    N 8
    L 1.0
    values
    -1 0 0 0.5j 0 0 0 -1

Complex numbers use Python literal syntax (optionally parenthesized).
Families: gaussian(amplitude, width, center), step(amplitude, radius, center),
coulomb_regularized(amplitude, softening, center),
random_seeded(amplitude, seed, modes) -- a band-limited random field whose
Fourier coefficients are drawn in fixed mode order, so samples on any grid
with N >= modes agree (refinement-stable), and table(values).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .lattice import GridFunction, TorusGrid, lp_norm

__all__ = [
    "PotentialField",
    "PotentialFormatError",
    "PotentialSpec",
    "imaginary_potential",
    "parse_potential_file",
    "potential_norm",
    "resample",
    "sample_potential",
    "scaled_field",
    "write_potential_file",
]

_FAMILIES = ("gaussian", "step", "coulomb_regularized", "random_seeded", "table")


class PotentialFormatError(ValueError):
    """Malformed potential file or family parameters; message carries the field path."""


@dataclass
class PotentialField:
    """Sampled potential on a grid.

    values: grid.shape (scalar multiplication operator) or grid.shape + (n, n)
    (site-wise matrix acting on spinors). imaginary_nonneg certifies the form
    V = iW with W >= 0 (Hermitian PSD site-wise in the matrix case).
    """

    grid: TorusGrid
    values: np.ndarray
    imaginary_nonneg: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        sh = self.values.shape
        d = self.grid.d
        if sh[:d] != self.grid.shape or len(sh) not in (d, d + 2):
            raise ValueError(f"potential shape {sh} incompatible with grid {self.grid.shape}")
        if len(sh) == d + 2 and sh[-1] != sh[-2]:
            raise ValueError(f"matrix potential blocks must be square, got {sh[-2:]}")

    @property
    def is_matrix(self) -> bool:
        return self.values.ndim == self.grid.d + 2

    def as_gridfunction(self) -> GridFunction:
        if self.is_matrix:
            raise ValueError("matrix potentials are not scalar grid functions")
        return GridFunction(self.grid, self.values)

    def scaled(self, c: complex) -> "PotentialField":
        keep_flag = self.imaginary_nonneg and float(np.real(c)) == c and np.real(c) >= 0
        return PotentialField(self.grid, c * self.values, imaginary_nonneg=keep_flag)


@dataclass(frozen=True)
class PotentialSpec:
    """Named potential family plus parameters; sampled on demand on any grid."""

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise PotentialFormatError(
                f"potential.family: unknown family {self.family!r}; options: {_FAMILIES}"
            )


def _param(spec: PotentialSpec, name: str, default=None, required=True):
    if name in spec.params:
        return spec.params[name]
    if required and default is None:
        raise PotentialFormatError(f"potential.{name}: required for family {spec.family!r}")
    return default


def _center(spec: PotentialSpec, d: int) -> np.ndarray:
    c = np.atleast_1d(np.asarray(spec.params.get("center", 0.0), dtype=float))
    if c.size == 1:
        c = np.full(d, float(c[0]))
    if c.shape != (d,):
        raise PotentialFormatError(f"potential.center: need a scalar or {d} components")
    return c


def sample_potential(spec: PotentialSpec, grid: TorusGrid) -> PotentialField:
    """Materialize a named family on a grid."""
    if spec.family == "table":
        native = TorusGrid(int(_param(spec, "d")), int(_param(spec, "N")), float(_param(spec, "L")))
        vals = np.asarray(_param(spec, "values"), dtype=complex).reshape(native.shape)
        fld = PotentialField(native, vals)
        return fld if native == grid else resample(fld, grid)

    if spec.family == "random_seeded":
        return _sample_random(spec, grid)

    r = np.linalg.norm(grid.x_folded(_center(spec, grid.d)), axis=-1)
    amp = complex(_param(spec, "amplitude"))
    if spec.family == "gaussian":
        width = float(_param(spec, "width"))
        if width <= 0:
            raise PotentialFormatError("potential.width: must be positive")
        vals = amp * np.exp(-(r**2) / (2.0 * width**2))
    elif spec.family == "step":
        radius = float(_param(spec, "radius"))
        if radius <= 0:
            raise PotentialFormatError("potential.radius: must be positive")
        vals = amp * (r <= radius)
    else:  # coulomb_regularized
        soft = float(_param(spec, "softening"))
        if soft <= 0:
            raise PotentialFormatError("potential.softening: must be positive")
        vals = amp / np.sqrt(r**2 + soft**2)
    return PotentialField(grid, vals)


def _sample_random(spec: PotentialSpec, grid: TorusGrid) -> PotentialField:
    amp = complex(_param(spec, "amplitude"))
    seed = int(_param(spec, "seed"))
    modes = int(_param(spec, "modes", default=8))
    if modes % 2 != 0 or modes < 2 or modes > grid.N:
        raise PotentialFormatError(
            f"potential.modes: need an even band limit 2 <= modes <= N, got {modes}"
        )
    rng = np.random.default_rng(seed)
    ks = np.arange(-modes // 2, modes // 2)
    # Fixed lexicographic mode order keeps the field identical across grids.
    coeffs = np.empty((modes,) * grid.d, dtype=complex)
    for idx in np.ndindex(*coeffs.shape):
        re, im = rng.standard_normal(2)
        coeffs[idx] = (re + 1j * im) / np.sqrt(2.0)
    spectrum = np.zeros(grid.shape, dtype=complex)
    for idx in np.ndindex(*coeffs.shape):
        k = tuple(int(ks[i]) % grid.N for i in idx)
        spectrum[k] = coeffs[idx]
    vals = np.fft.ifftn(spectrum) * grid.size / modes**grid.d
    return PotentialField(grid, amp * vals)


def resample(fld: PotentialField, grid: TorusGrid) -> PotentialField:
    """Trigonometric interpolation onto a finer grid (same box, larger even N)."""
    old = fld.grid
    if grid.d != old.d or grid.L != old.L or grid.N < old.N:
        raise ValueError("resample targets the same box with N2 >= N")
    if grid.N == old.N:
        return PotentialField(grid, fld.values.copy(), fld.imaginary_nonneg)
    coeffs = np.fft.fftn(fld.values, axes=old.axes()) / old.size
    for ax in range(old.d):
        coeffs = _pad_axis(coeffs, ax, old.N, grid.N)
    vals = np.fft.ifftn(coeffs, axes=grid.axes()) * grid.size
    return PotentialField(grid, vals, fld.imaginary_nonneg)


def _pad_axis(c: np.ndarray, ax: int, n_old: int, n_new: int) -> np.ndarray:
    sh = list(c.shape)
    sh[ax] = n_new
    out = np.zeros(sh, dtype=complex)
    half = n_old // 2
    sl_out, sl_in = [slice(None)] * c.ndim, [slice(None)] * c.ndim
    sl_out[ax], sl_in[ax] = slice(0, half), slice(0, half)
    out[tuple(sl_out)] = c[tuple(sl_in)]
    sl_out[ax], sl_in[ax] = slice(n_new - half + 1, n_new), slice(n_old - half + 1, n_old)
    out[tuple(sl_out)] = c[tuple(sl_in)]
    # Split the Nyquist coefficient between +N/2 and -N/2 on the wide grid.
    sl_in[ax] = half
    for pos in (half, n_new - half):
        sl_out[ax] = pos
        out[tuple(sl_out)] += 0.5 * c[tuple(sl_in)]
    return out


def scaled_field(fld: PotentialField, t: float, s: float) -> PotentialField:
    """Exact scaling family V_t(x) = t^s V(t x): same samples times t^s on the box L/t."""
    if t <= 0:
        raise ValueError("t must be positive")
    return PotentialField(fld.grid.rescaled(t), (t**s) * fld.values, fld.imaginary_nonneg)


def imaginary_potential(w: PotentialField | np.ndarray, grid: Optional[TorusGrid] = None) -> PotentialField:
    """Build V = iW from a nonnegative profile W (Hermitian PSD site-wise if matrix)."""
    if isinstance(w, PotentialField):
        grid, wvals = w.grid, w.values
    else:
        wvals = np.asarray(w, dtype=complex)
    if np.abs(wvals.imag).max(initial=0.0) > 1e-14 * max(1.0, np.abs(wvals).max()):
        raise ValueError("W must be real (Hermitian in the matrix case)")
    if wvals.ndim == grid.d + 2:
        herm = np.abs(wvals - np.conj(np.swapaxes(wvals, -1, -2))).max()
        if herm > 1e-12 * max(1.0, np.abs(wvals).max()):
            raise ValueError("matrix W must be Hermitian site-wise")
        eigs = np.linalg.eigvalsh(wvals)
        if eigs.min() < -1e-12 * max(1.0, eigs.max(initial=0.0)):
            raise ValueError("matrix W must be PSD site-wise")
    elif wvals.real.min() < 0:
        raise ValueError("W must be nonnegative")
    return PotentialField(grid, 1j * wvals.real if wvals.ndim == grid.d else 1j * wvals,
                          imaginary_nonneg=True)


def potential_norm(fld: PotentialField, q: float) -> float:
    """Weighted L^q norm of the potential (site-wise spectral norm if matrix)."""
    if fld.is_matrix:
        mags = np.linalg.norm(fld.values, ord=2, axis=(-2, -1))
        if np.isinf(q):
            return float(mags.max())
        return float((fld.grid.weight * np.sum(mags**q)) ** (1.0 / q))
    return lp_norm(GridFunction(fld.grid, fld.values), q)


# ---------------------------------------------------------------------------
# file format


def parse_potential_file(path) -> tuple[TorusGrid, PotentialSpec]:
    """Parse a potential file; returns the declared grid and the family spec."""
    header: dict[str, str] = {}
    family = None
    params: dict = {}
    values: list[complex] = []
    mode = "header"
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if mode == "values":
                values.extend(_parse_complex(tok, ln) for tok in line.split())
                continue
            key, _, rest = line.partition(" ")
            rest = rest.strip()
            if key in ("d", "N", "L"):
                header[key] = rest
            elif key == "family":
                family = rest
            elif key == "values":
                mode = "values"
            else:
                params[key] = rest
    for k in ("d", "N", "L"):
        if k not in header:
            raise PotentialFormatError(f"potential.{k}: missing from header")
    try:
        grid = TorusGrid(int(header["d"]), int(header["N"]), float(header["L"]))
    except ValueError as exc:
        raise PotentialFormatError(f"potential.grid: {exc}") from exc
    if mode == "values":
        if len(values) != grid.size:
            raise PotentialFormatError(
                f"potential.values: expected {grid.size} entries, got {len(values)}"
            )
        return grid, PotentialSpec(
            "table", {"d": grid.d, "N": grid.N, "L": grid.L, "values": values}
        )
    if family is None:
        raise PotentialFormatError("potential.family: missing (or provide a values table)")
    spec = PotentialSpec(family, _coerce_params(params))
    sample_potential(spec, grid)  # validate parameters eagerly
    return grid, spec


def _parse_complex(tok: str, ln: int) -> complex:
    try:
        return complex(tok.strip("()"))
    except ValueError as exc:
        raise PotentialFormatError(f"potential.values: bad complex literal {tok!r} on line {ln}") from exc


def _coerce_params(raw: dict[str, str]) -> dict:
    out: dict = {}
    for key, val in raw.items():
        if key in ("seed", "modes"):
            out[key] = int(val)
        elif key == "center":
            out[key] = [float(tok) for tok in val.split()]
        elif key == "amplitude":
            out[key] = complex(val.strip("()"))
        else:
            out[key] = float(val)
    return out


def write_potential_file(path, grid: TorusGrid, spec: PotentialSpec) -> None:
    """Serialize a grid + family spec in the line format parse_potential_file reads."""
    lines = [f"d {grid.d}", f"N {grid.N}", f"L {grid.L!r}"]
    if spec.family == "table":
        lines.append("values")
        vals = np.asarray(spec.params["values"], dtype=complex).reshape(-1)
        lines.extend(" ".join(f"({float(v.real)!r}{float(v.imag):+}j)" for v in chunk)
                     for chunk in np.split(vals, range(8, vals.size, 8)))
    else:
        lines.append(f"family {spec.family}")
        for key, val in spec.params.items():
            if key == "center":
                lines.append("center " + " ".join(repr(float(c)) for c in np.atleast_1d(val)))
            elif isinstance(val, complex):
                lines.append(f"{key} ({float(val.real)!r}{float(val.imag):+}j)")
            else:
                lines.append(f"{key} {val!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
