"""Periodic grid, Fourier transforms, and weighted norms.

The spatial grid on the torus [0, L)^d has N points per axis at x_j = j*L/N;
the dual frequency lattice is xi_k = k/L for k in {-N/2, ..., N/2-1}^d, stored
in FFT order. Plane waves are e^{2*pi*i x.xi}, so the forward transform

    fhat(xi_k) = (L/N)^d * sum_x f(x) e^{-2*pi*i x.xi_k}

approximates the continuum Fourier integral and the inverse

    f(x) = L^{-d} * sum_k fhat(xi_k) e^{2*pi*i x.xi_k}

is the matching Riemann sum over the frequency lattice (mesh 1/L per axis).
Parseval then reads (L/N)^d sum|f|^2 = L^{-d} sum|fhat|^2.

Grid functions carry an optional trailing spinor axis; multipliers may be
scalar per mode or (n, n) matrices per mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "GridFunction",
    "TorusGrid",
    "apply_multiplier",
    "fft_coeffs",
    "from_fft_coeffs",
    "inner",
    "lp_norm",
    "multiplier_matrix",
    "smooth_cutoff",
]

_N_CAP = {1: 4096, 2: 64, 3: 16}
_DENSE_CAP = 8192  # hard cap on N^d * n for dense operator assembly


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid: d dimensions, N points per axis, side length L."""

    d: int
    N: int
    L: float

    def __post_init__(self):
        if self.d not in _N_CAP:
            raise ValueError(f"d={self.d} unsupported; need 1 <= d <= 3")
        if self.N % 2 != 0 or self.N < 8:
            raise ValueError(f"N={self.N} must be even and >= 8")
        if self.N > _N_CAP[self.d]:
            raise ValueError(f"N={self.N} exceeds the d={self.d} cap {_N_CAP[self.d]}")
        if not self.L > 0:
            raise ValueError(f"L={self.L} must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N**self.d

    @property
    def dx(self) -> float:
        """Spatial mesh L/N."""
        return self.L / self.N

    @property
    def weight(self) -> float:
        """Quadrature weight per site, (L/N)^d."""
        return (self.L / self.N) ** self.d

    def axes(self) -> tuple[int, ...]:
        return tuple(range(self.d))

    def xi(self) -> np.ndarray:
        """Frequency vectors in FFT order, shape (N,)*d + (d,)."""
        return _xi_cached(self.d, self.N, self.L).copy()

    def x(self) -> np.ndarray:
        """Site coordinates j*L/N, shape (N,)*d + (d,)."""
        ax = np.arange(self.N) * self.dx
        mesh = np.meshgrid(*([ax] * self.d), indexing="ij")
        return np.stack(mesh, axis=-1)

    def x_folded(self, center=0.0) -> np.ndarray:
        """Minimum-image displacement x - center, folded into [-L/2, L/2)^d."""
        c = np.broadcast_to(np.atleast_1d(np.asarray(center, dtype=float)), (self.d,))
        disp = self.x() - c
        return (disp + self.L / 2.0) % self.L - self.L / 2.0

    def refined(self, factor: int = 2) -> "TorusGrid":
        """Same box with factor*N points per axis."""
        return TorusGrid(self.d, self.N * factor, self.L)

    def rescaled(self, t: float) -> "TorusGrid":
        """Same N on the box of side L/t (frequencies stretch by t)."""
        return TorusGrid(self.d, self.N, self.L / t)


@lru_cache(maxsize=64)
def _xi_cached(d: int, N: int, L: float) -> np.ndarray:
    freqs = np.fft.fftfreq(N, d=L / N)
    mesh = np.meshgrid(*([freqs] * d), indexing="ij")
    out = np.stack(mesh, axis=-1)
    out.setflags(write=False)
    return out


@dataclass
class GridFunction:
    """Sampled function on a TorusGrid.

    values has shape grid.shape for scalar fields and grid.shape + (n,) for
    spinor fields.
    """

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        sh = self.values.shape
        if sh[: self.grid.d] != self.grid.shape or len(sh) > self.grid.d + 1:
            raise ValueError(
                f"values shape {sh} incompatible with grid shape {self.grid.shape}"
            )

    @property
    def spinor_dim(self) -> int:
        sh = self.values.shape
        return 1 if len(sh) == self.grid.d else sh[-1]

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())


def fft_coeffs(f: GridFunction) -> np.ndarray:
    """Continuum-normalized Fourier coefficients on the frequency lattice."""
    return np.fft.fftn(f.values, axes=f.grid.axes()) * f.grid.weight


def from_fft_coeffs(grid: TorusGrid, coeffs: np.ndarray) -> GridFunction:
    """Inverse of fft_coeffs: Riemann sum over the frequency lattice."""
    vals = np.fft.ifftn(coeffs, axes=grid.axes()) * (grid.N / grid.L) ** grid.d
    return GridFunction(grid, vals)


def apply_multiplier(m, f: GridFunction) -> GridFunction:
    """Apply a Fourier multiplier to a grid function.

    m is either a callable taking the (..., d) frequency array, or a
    precomputed array of multiplier values in FFT order: shape grid.shape
    for scalar multipliers, grid.shape + (n, n) for matrix multipliers
    acting on spinor fields.
    """
    grid = f.grid
    mvals = np.asarray(m(grid.xi()) if callable(m) else m, dtype=complex)
    spectrum = np.fft.fftn(f.values, axes=grid.axes())
    if mvals.shape == grid.shape:
        if f.values.ndim == grid.d:
            spectrum = mvals * spectrum
        else:
            spectrum = mvals[..., None] * spectrum
    elif mvals.ndim == grid.d + 2:
        if f.values.ndim != grid.d + 1 or mvals.shape[-1] != f.values.shape[-1]:
            raise ValueError("matrix multiplier needs a matching spinor field")
        spectrum = np.einsum("...ij,...j->...i", mvals, spectrum)
    else:
        raise ValueError(f"multiplier shape {mvals.shape} does not match the grid")
    return GridFunction(grid, np.fft.ifftn(spectrum, axes=grid.axes()))


def inner(f: GridFunction, g: GridFunction) -> complex:
    """Weighted L^2 inner product (conjugate-linear in the first slot)."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    return complex(np.vdot(f.values, g.values) * f.grid.weight)


def lp_norm(f: GridFunction, p: float) -> float:
    """Weighted L^p norm, 1 <= p <= inf.

    Scalar fields use |f(x)|, spinor fields the pointwise Euclidean norm.
    """
    grid = f.grid
    vals = np.asarray(f.values)
    mags = np.abs(vals) if vals.ndim == grid.d else np.linalg.norm(vals, axis=-1)
    if np.isinf(p):
        return float(mags.max())
    if p < 1:
        raise ValueError(f"p={p} out of range; need 1 <= p <= inf")
    return float((grid.weight * np.sum(mags**p)) ** (1.0 / p))


def smooth_cutoff(grid: TorusGrid, center, r_inner: float, r_outer: float) -> GridFunction:
    """C-infinity radial cutoff: 1 inside |x-c| <= r_inner, 0 outside r_outer.

    Uses the standard exp(-1/t) partition ramp between the two radii
    (minimum-image distance on the torus).
    """
    if not 0 < r_inner < r_outer:
        raise ValueError("need 0 < r_inner < r_outer")
    r = np.linalg.norm(grid.x_folded(center), axis=-1)
    t = np.clip((r_outer - r) / (r_outer - r_inner), 0.0, 1.0)

    def _ramp(u):
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-1.0 / u[pos])
        return out

    up, down = _ramp(t), _ramp(1.0 - t)
    return GridFunction(grid, up / (up + down))


def multiplier_matrix(m, grid: TorusGrid, n: int = 1) -> np.ndarray:
    """Dense matrix of a Fourier multiplier on coefficient vectors.

    Index layout is site-major, spinor-minor (row-major sites); the matrix
    acts on f.values.reshape(-1). Assembly is capped at N^d * n <= 8192.
    """
    mvals = np.asarray(m(grid.xi()) if callable(m) else m, dtype=complex)
    dim = grid.size * n
    if dim > _DENSE_CAP:
        raise ValueError(f"dense assembly size {dim} exceeds the cap {_DENSE_CAP}")
    scalar = mvals.shape == grid.shape
    if not scalar and mvals.shape != grid.shape + (n, n):
        raise ValueError(f"multiplier shape {mvals.shape} does not match grid/spinor")
    axes = tuple(range(1, grid.d + 1))
    out = np.empty((dim, dim), dtype=complex)
    chunk = max(1, min(dim, (1 << 23) // dim))
    for lo in range(0, dim, chunk):
        hi = min(lo + chunk, dim)
        block = np.zeros((hi - lo, dim), dtype=complex)
        block[np.arange(hi - lo), np.arange(lo, hi)] = 1.0
        fields = block.reshape((hi - lo,) + grid.shape + ((n,) if n > 1 else ()))
        spec = np.fft.fftn(fields, axes=axes)
        if scalar:
            spec = spec * (mvals[None, ..., None] if n > 1 else mvals[None])
        else:
            spec = np.einsum("...ij,b...j->b...i", mvals, spec)
        cols = np.fft.ifftn(spec, axes=axes).reshape(hi - lo, dim)
        out[:, lo:hi] = cols.T
    return out
