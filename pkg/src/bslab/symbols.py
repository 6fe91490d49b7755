"""Kinetic symbols for the four shipped operator families.

Scalar families (spinor dimension 1):

* ``fractional_laplacian`` -- T(xi) = |xi|^s
* ``relativistic``         -- T(xi) = (1 + |xi|^2)^(s/2) - 1

Dirac families (s fixed to 1, spinor dimension 2 for d <= 2 and 4 for d = 3):

* ``dirac_massless``       -- T(xi) = sum_j alpha_j xi_j
* ``dirac_massive``        -- T(xi) = sum_j alpha_j xi_j + beta

with alpha_j, beta a Hermitian Clifford family (alpha_i alpha_j + alpha_j
alpha_i = 2 delta_ij, beta anticommutes with every alpha_j, beta^2 = 1).
A fifth ``custom`` kind carries a user-supplied radial profile so that
multiplier plumbing can be exercised on symbols outside the shipped table.

Frequencies are plain vectors; the 2*pi convention lives entirely in the
lattice transforms, which pair these symbols with the frequency grid k/L.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

__all__ = [
    "SymbolKind",
    "SymbolSpec",
    "clifford_generators",
    "critical_values",
    "dispersion_values",
    "eval_symbol",
    "spinor_dim",
]

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


class SymbolKind(str, Enum):
    FRACTIONAL_LAPLACIAN = "fractional_laplacian"
    RELATIVISTIC = "relativistic"
    DIRAC_MASSLESS = "dirac_massless"
    DIRAC_MASSIVE = "dirac_massive"
    CUSTOM = "custom"


_DIRAC_KINDS = (SymbolKind.DIRAC_MASSLESS, SymbolKind.DIRAC_MASSIVE)
_SCALAR_KINDS = (SymbolKind.FRACTIONAL_LAPLACIAN, SymbolKind.RELATIVISTIC)


def clifford_generators(d: int) -> tuple[list[np.ndarray], np.ndarray]:
    """Return the fixed Hermitian Clifford family (alphas, beta) for dimension d.

    d = 1: alpha_1 = sigma_x, beta = sigma_z (2x2).
    d = 2: alpha_1 = sigma_x, alpha_2 = sigma_y (off-diagonal involutions),
           beta = sigma_z (diagonal).
    d = 3: the standard 4x4 family alpha_j = offdiag(sigma_j, sigma_j),
           beta = diag(1, 1, -1, -1).
    """
    if d == 1:
        return [_SIGMA_X.copy()], _SIGMA_Z.copy()
    if d == 2:
        return [_SIGMA_X.copy(), _SIGMA_Y.copy()], _SIGMA_Z.copy()
    if d == 3:
        alphas = []
        for sig in (_SIGMA_X, _SIGMA_Y, _SIGMA_Z):
            a = np.zeros((4, 4), dtype=complex)
            a[:2, 2:] = sig
            a[2:, :2] = sig
            alphas.append(a)
        beta = np.zeros((4, 4), dtype=complex)
        beta[:2, :2] = _I2
        beta[2:, 2:] = -_I2
        return alphas, beta
    raise ValueError(f"no Clifford family shipped for d={d}; supported d: 1, 2, 3")


def spinor_dim(kind: SymbolKind, d: int) -> int:
    """Spinor dimension n: 1 for scalar kinds, 2 for Dirac in d <= 2, 4 in d = 3."""
    if kind in _DIRAC_KINDS:
        return 4 if d == 3 else 2
    return 1


@dataclass(frozen=True)
class SymbolSpec:
    """Validated description of a kinetic symbol.

    Parameters
    ----------
    kind : SymbolKind or str
        One of the four shipped families, or ``custom``.
    d : int
        Space dimension, 1 <= d <= 3.
    s : float
        Symbol order. Must be positive; forced to 1 for Dirac kinds.
    profile : callable, optional
        Radial profile r -> T(r) for ``kind='custom'`` only.
    """

    kind: SymbolKind
    d: int
    s: float = 1.0
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        object.__setattr__(self, "kind", SymbolKind(self.kind))
        if not 1 <= self.d <= 3:
            raise ValueError(f"d={self.d} unsupported; need 1 <= d <= 3")
        if self.kind in _DIRAC_KINDS:
            if self.s != 1.0:
                raise ValueError(f"s is fixed to 1 for Dirac kinds, got s={self.s}")
        elif not 0.0 < float(self.s) < float("inf"):
            raise ValueError(f"s={self.s} out of range; need s > 0")
        if self.kind is SymbolKind.CUSTOM:
            if self.profile is None:
                raise ValueError("custom symbols need a radial profile callable")
        elif self.profile is not None:
            raise ValueError("profile is only accepted for kind='custom'")

    @property
    def n(self) -> int:
        return spinor_dim(self.kind, self.d)

    @property
    def is_dirac(self) -> bool:
        return self.kind in _DIRAC_KINDS


def eval_symbol(spec: SymbolSpec, xi) -> float | np.ndarray:
    """Evaluate T(xi) at a single frequency vector.

    Returns a real scalar for spinor dimension 1 and a Hermitian (n, n)
    complex matrix for the Dirac kinds.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (spec.d,):
        raise ValueError(f"frequency must have shape ({spec.d},), got {xi.shape}")
    if spec.kind is SymbolKind.FRACTIONAL_LAPLACIAN:
        return float(np.linalg.norm(xi) ** spec.s)
    if spec.kind is SymbolKind.RELATIVISTIC:
        return float((1.0 + np.dot(xi, xi)) ** (spec.s / 2.0) - 1.0)
    if spec.kind is SymbolKind.CUSTOM:
        return float(spec.profile(np.linalg.norm(xi)))
    alphas, beta = clifford_generators(spec.d)
    mat = sum(a * x for a, x in zip(alphas, xi))
    if spec.kind is SymbolKind.DIRAC_MASSIVE:
        mat = mat + beta
    return mat


def dispersion_values(spec: SymbolSpec, xi_array: np.ndarray) -> np.ndarray:
    """Eigenvalue branches of T over an array of frequencies.

    Parameters
    ----------
    xi_array : ndarray, shape (..., d)

    Returns
    -------
    ndarray, shape (..., n)
        For scalar kinds the single branch; for Dirac kinds the branches
        -lambda(xi) and +lambda(xi), each with multiplicity n/2, where
        lambda = |xi| (massless) or sqrt(1 + |xi|^2) (massive).
    """
    xi_array = np.asarray(xi_array, dtype=float)
    if xi_array.shape[-1] != spec.d:
        raise ValueError(f"last axis must have length d={spec.d}")
    r2 = np.sum(xi_array**2, axis=-1)
    if spec.kind is SymbolKind.FRACTIONAL_LAPLACIAN:
        return (r2 ** (spec.s / 2.0))[..., None]
    if spec.kind is SymbolKind.RELATIVISTIC:
        return ((1.0 + r2) ** (spec.s / 2.0) - 1.0)[..., None]
    if spec.kind is SymbolKind.CUSTOM:
        return np.vectorize(spec.profile)(np.sqrt(r2))[..., None]
    lam = np.sqrt(r2) if spec.kind is SymbolKind.DIRAC_MASSLESS else np.sqrt(1.0 + r2)
    half = spec.n // 2
    return np.stack([-lam] * half + [lam] * half, axis=-1)


def critical_values(spec: SymbolSpec) -> tuple[float, ...]:
    """Critical values Lambda_c of the dispersion (values at gradient zeros).

    fractional_laplacian: {0} if s > 1 else empty;
    relativistic: {0}; dirac_massless: empty; dirac_massive: {1, -1}.
    """
    if spec.kind is SymbolKind.FRACTIONAL_LAPLACIAN:
        return (0.0,) if spec.s > 1.0 else ()
    if spec.kind is SymbolKind.RELATIVISTIC:
        return (0.0,)
    if spec.kind is SymbolKind.DIRAC_MASSLESS:
        return ()
    if spec.kind is SymbolKind.DIRAC_MASSIVE:
        return (1.0, -1.0)
    raise ValueError("critical values are not defined for custom symbols")
