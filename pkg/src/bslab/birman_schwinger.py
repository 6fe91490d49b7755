"""Birman-Schwinger operators M(z) = |V|^{1/2} (T(D) - z)^{-1} V^{1/2}.

Assembles the sandwiched resolvent as a dense matrix, computes Schatten
norms from its singular values and regularized Fredholm determinants
det_n(I + M) from its eigenvalues, and locates determinant zeros inside
rectangles of the complex plane by an argument-principle bisection with
secant polishing.  For z off the dispersion levels of T, the finite model
makes the eigenvalue correspondence exact: z is an eigenvalue of H_0 + V
iff -1 is an eigenvalue of M(z).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lattice import TorusGrid, multiplier_matrix
from .potentials import PotentialField
from .resolvent import resolvent_multiplier
from .symbols import SymbolSpec

__all__ = [
    "BSOperator",
    "SchattenReport",
    "DetValue",
    "half_potentials",
    "assemble_bs",
    "schatten_order",
    "schatten_norm",
    "regularized_det",
    "det_bound_constant",
    "bs_principle_check",
    "bs_det_evaluator",
    "det_contour_roots",
]

# Singular values below this fraction of sigma_1 are transform round-off
# and are dropped from Schatten sums (keeps norms monotone in alpha).
_SV_TRUNCATION = 1e-13

_VARIANTS = ("abs_first", "signed_first")


# ---------------------------------------------------------------------------
# half potentials


def half_potentials(V: PotentialField) -> tuple[PotentialField, PotentialField]:
    """Split V into the factors |V|^{1/2} and V^{1/2} with V^{1/2}|V|^{1/2} = V.

    Scalar case: |V|^{1/2} = sqrt(|V|) and V^{1/2} = sqrt(|V|) e^{i arg V},
    so the product recovers V pointwise (zeros map to zeros).  Matrix case:
    polar decomposition V = U|V| site-wise via SVD, |V|^{1/2} = (V*V)^{1/4}
    and V^{1/2} = U |V|^{1/2}.
    """
    vals = V.values
    if not V.is_matrix:
        mag_root = np.sqrt(np.abs(vals))
        signed = mag_root * np.exp(1j * np.angle(vals))
        return (
            PotentialField(V.grid, mag_root),
            PotentialField(V.grid, signed),
        )

    u, sig, vh = np.linalg.svd(vals)
    root = np.sqrt(sig)
    abs_half = np.swapaxes(vh, -1, -2).conj() @ (root[..., :, None] * vh)
    signed_half = u @ (root[..., :, None] * vh)
    return (
        PotentialField(V.grid, abs_half),
        PotentialField(V.grid, signed_half),
    )


# ---------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class BSOperator:
    """Dense Birman-Schwinger matrix at a fixed spectral parameter z.

    variant "abs_first" is |V|^{1/2} R_0(z) V^{1/2}; "signed_first" swaps the
    two half potentials.  Singular values are computed once at assembly and
    cached nonincreasing.
    """

    matrix: np.ndarray
    z: complex
    grid: TorusGrid
    singular_values: np.ndarray
    variant: str = "abs_first"

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"BS matrix must be square, got shape {m.shape}")
        if m.shape[0] % self.grid.size != 0:
            raise ValueError(
                f"matrix dimension {m.shape[0]} does not tile grid size {self.grid.size}"
            )
        sv = self.singular_values
        if np.any(sv < 0) or np.any(np.diff(sv) > 0):
            raise ValueError("singular values must be nonnegative and nonincreasing")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spinor_dim(self) -> int:
        return self.dim // self.grid.size


def _sandwich(left: np.ndarray, rmat: np.ndarray, right: np.ndarray, grid: TorusGrid, n: int) -> np.ndarray:
    """diag-block(left) @ rmat @ diag-block(right) for site-local factors."""
    if left.ndim == grid.d:
        lvec = np.repeat(left.ravel(), n)
        rvec = np.repeat(right.ravel(), n)
        return lvec[:, None] * rmat * rvec[None, :]
    size = grid.size
    lb = left.reshape(size, n, n)
    rb = right.reshape(size, n, n)
    m = rmat.reshape(size, n, size, n)
    out = np.einsum("xab,xbyc,ycd->xayd", lb, m, rb, optimize=True)
    return out.reshape(size * n, size * n)


def _bs_matrix(
    spec: SymbolSpec,
    grid: TorusGrid,
    V: PotentialField,
    z: complex,
    variant: str = "abs_first",
) -> np.ndarray:
    if variant not in _VARIANTS:
        raise ValueError(f"unknown order variant {variant!r}; options: {_VARIANTS}")
    if V.grid != grid:
        raise ValueError("potential grid does not match the requested grid")
    n = spec.n
    if V.is_matrix and V.values.shape[-1] != n:
        raise ValueError(
            f"matrix potential blocks are {V.values.shape[-1]}x{V.values.shape[-1]}, "
            f"symbol needs {n}x{n}"
        )
    abs_half, signed_half = half_potentials(V)
    rmat = multiplier_matrix(resolvent_multiplier(spec, grid, z), grid, n=n)
    if variant == "abs_first":
        return _sandwich(abs_half.values, rmat, signed_half.values, grid, n)
    return _sandwich(signed_half.values, rmat, abs_half.values, grid, n)


def assemble_bs(
    spec: SymbolSpec,
    grid: TorusGrid,
    V: PotentialField,
    z: complex,
    variant: str = "abs_first",
) -> BSOperator:
    """Assemble the dense BS matrix at z and cache its singular values."""
    mat = _bs_matrix(spec, grid, V, z, variant)
    sv = np.linalg.svd(mat, compute_uv=False)
    return BSOperator(matrix=mat, z=complex(z), grid=grid, singular_values=sv, variant=variant)


# ---------------------------------------------------------------------------
# Schatten norms


def schatten_order(d: int, q: float) -> float:
    """Schatten exponent alpha = q(d-1)/(d-q) for the resolvent sandwich.

    The quotient degenerates to 0/0 at d = 1; along the admissible family
    q -> (d+1)/2 the interpolation limit is the Hilbert-Schmidt value 2,
    which is what the d = 1 bound actually delivers.
    """
    if d == 1:
        return 2.0
    if not 1.0 <= q < d:
        raise ValueError(f"need 1 <= q < d for the Schatten exponent, got q={q}, d={d}")
    return q * (d - 1) / (d - q)


def _singvals(M) -> np.ndarray:
    if isinstance(M, BSOperator):
        return M.singular_values
    return np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)


@dataclass(frozen=True)
class SchattenReport:
    """(sum sigma_j^alpha)^{1/alpha} over the retained singular values."""

    alpha: float
    norm: float
    retained: int


def schatten_norm(M, alpha: float) -> SchattenReport:
    """Schatten alpha-norm from singular values; alpha = inf gives sigma_1."""
    if alpha < 1:
        raise ValueError(f"Schatten exponent must be >= 1, got {alpha}")
    sv = _singvals(M)
    if sv.size == 0 or sv[0] == 0.0:
        return SchattenReport(alpha=float(alpha), norm=0.0, retained=0)
    kept = sv[sv >= _SV_TRUNCATION * sv[0]]
    if math.isinf(alpha):
        return SchattenReport(alpha=float(alpha), norm=float(sv[0]), retained=kept.size)
    # factor out sigma_1 so large exponents cannot overflow
    norm = float(sv[0] * np.sum((kept / sv[0]) ** alpha) ** (1.0 / alpha))
    return SchattenReport(alpha=float(alpha), norm=norm, retained=int(kept.size))


# ---------------------------------------------------------------------------
# regularized determinants


@dataclass(frozen=True)
class DetValue:
    """det_n(I + M) with the magnitude kept in log form to avoid overflow."""

    order: int
    value: complex
    log_abs: float
    phase: float


def regularized_det(M, order: int) -> DetValue:
    """Regularized determinant det_n(I+M) = prod_j (1+mu_j) exp(sum_{k<n} (-mu_j)^k / k).

    Evaluated from the eigenvalues mu_j of M rather than traces of powers,
    which stays stable on the contours used for root finding where |mu_j|
    sits near 1.  Magnitude and phase accumulate separately in log form.
    """
    order = int(order)
    if order < 1:
        raise ValueError(f"determinant regularization order must be >= 1, got {order}")
    mat = M.matrix if isinstance(M, BSOperator) else np.asarray(M, dtype=complex)
    mu = np.linalg.eigvals(mat)

    one_plus = 1.0 + mu
    log_abs = 0.0
    phase = 0.0
    if np.any(one_plus == 0):
        log_abs = -math.inf
    else:
        log_abs += float(np.sum(np.log(np.abs(one_plus))))
        phase += float(np.sum(np.angle(one_plus)))
    # regularizing factor exp(sum_{k=1}^{n-1} (-1)^k mu^k / k), exact in log form
    reg = np.zeros_like(mu)
    term = np.ones_like(mu)
    for k in range(1, order):
        term = term * (-mu)
        reg = reg + term / k
    log_abs += float(np.sum(reg.real))
    phase += float(np.sum(reg.imag))

    if log_abs == -math.inf:
        value = 0j
    else:
        try:
            value = cmath.rect(math.exp(log_abs), phase)
        except OverflowError:
            value = cmath.rect(math.inf, phase)
    return DetValue(order=order, value=value, log_abs=log_abs, phase=phase)


def det_bound_constant(order: int) -> float:
    """Constant C_n in log|det_n(I+M)| <= C_n ||M||_{S^n}^n (orders 1 and 2)."""
    if order == 1:
        return 1.0
    if order == 2:
        return 0.5
    raise ValueError(f"no sharp constant wired in for order {order}")


# ---------------------------------------------------------------------------
# eigenvalue correspondence


def bs_principle_check(
    spec: SymbolSpec,
    grid: TorusGrid,
    V: PotentialField,
    z_candidate: complex,
    variant: str = "abs_first",
) -> float:
    """min_j |mu_j(M(z)) + 1|; near zero certifies z as an eigenvalue of H_0+V."""
    mat = _bs_matrix(spec, grid, V, z_candidate, variant)
    mu = np.linalg.eigvals(mat)
    return float(np.min(np.abs(mu + 1.0)))


def bs_det_evaluator(
    spec: SymbolSpec,
    grid: TorusGrid,
    V: PotentialField,
    order: int,
    variant: str = "abs_first",
) -> Callable[[complex], DetValue]:
    """z -> det_order(I + M(z)), skipping the SVD that assemble_bs would do."""
    abs_half, signed_half = half_potentials(V)
    if variant == "abs_first":
        left, right = abs_half.values, signed_half.values
    elif variant == "signed_first":
        left, right = signed_half.values, abs_half.values
    else:
        raise ValueError(f"unknown order variant {variant!r}; options: {_VARIANTS}")
    n = spec.n

    def evaluate(z: complex) -> DetValue:
        rmat = multiplier_matrix(resolvent_multiplier(spec, grid, z), grid, n=n)
        return regularized_det(_sandwich(left, rmat, right, grid, n), order)

    return evaluate


# ---------------------------------------------------------------------------
# contour root search


class _DetSampler:
    """Caching (log_abs, phase) sampler with an evaluation budget."""

    def __init__(self, det_fn: Callable[[complex], DetValue], budget: int):
        self.det_fn = det_fn
        self.budget = budget
        self.cache: dict[complex, tuple[float, float]] = {}
        self.evals = 0

    def __call__(self, z: complex) -> tuple[float, float]:
        hit = self.cache.get(z)
        if hit is not None:
            return hit
        if self.evals >= self.budget:
            raise RuntimeError(
                f"contour search exceeded its evaluation budget ({self.budget})"
            )
        dv = self.det_fn(z)
        self.evals += 1
        val = (dv.log_abs, dv.phase)
        self.cache[z] = val
        return val


_TWO_PI = 2.0 * math.pi


def _phase_change(sampler: _DetSampler, a: complex, b: complex, min_len: float):
    """Continuous phase increment of det along [a, b]; None if a zero sits on it.

    Every interval is verified against its own midpoint: the direct step and
    the two half steps are congruent mod 2 pi by construction, so any
    discrepancy is an integer number of hidden whirls and forces refinement.
    Tameness of each half (phase step <= pi/2, log-magnitude step <= 1)
    guards against a whirl aligned so the midpoint fails to reveal it.
    """
    la, pa = sampler(a)
    lb, pb = sampler(b)
    direct = math.remainder(pb - pa, _TWO_PI)
    if abs(b - a) < min_len:
        if math.isfinite(la) and math.isfinite(lb) and abs(direct) <= 0.5 * math.pi and abs(lb - la) <= 1.0:
            return direct
        return None
    mid = 0.5 * (a + b)
    lm, pm = sampler(mid)
    s1 = math.remainder(pm - pa, _TWO_PI)
    s2 = math.remainder(pb - pm, _TWO_PI)
    if (
        math.isfinite(la)
        and math.isfinite(lm)
        and math.isfinite(lb)
        and abs(s1) <= 0.5 * math.pi
        and abs(s2) <= 0.5 * math.pi
        and abs(la - lm) <= 1.0
        and abs(lm - lb) <= 1.0
        and abs(direct - (s1 + s2)) < 1e-6
    ):
        return s1 + s2
    left = _phase_change(sampler, a, mid, min_len)
    if left is None:
        return None
    right = _phase_change(sampler, mid, b, min_len)
    if right is None:
        return None
    return left + right


def _winding_at(sampler: _DetSampler, x0, x1, y0, y1, min_len, segments):
    corners = [
        complex(x0, y0),
        complex(x1, y0),
        complex(x1, y1),
        complex(x0, y1),
    ]
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        for k in range(segments):
            p = a + (b - a) * (k / segments)
            qq = a + (b - a) * ((k + 1) / segments) if k < segments - 1 else b
            step = _phase_change(sampler, p, qq, min_len)
            if step is None:
                return None
            total += step
    return int(round(total / _TWO_PI))


def _winding(sampler: _DetSampler, x0, x1, y0, y1, min_len, segments):
    """Winding number, base sampling tripled until two levels agree.

    The adaptive walk alone can alias past a picket fence of zeros or
    resolvent resonances lying just outside an edge (each coarse step looks
    tame mod 2 pi).  Agreement between two refinement levels is the
    practical stability certificate; tripling keeps the levels non-nested,
    so correlated aliasing across levels is broken.
    """
    prev = None
    seg = segments
    while True:
        w = _winding_at(sampler, x0, x1, y0, y1, min_len, seg)
        if w is None:
            return None
        if prev is not None and w == prev:
            return w
        prev = w
        seg *= 3
        if seg > 9000:
            raise RuntimeError(
                "winding number failed to stabilize under refinement; the "
                "rectangle boundary runs too close to a cluster of zeros or "
                "to the dispersion levels of the symbol"
            )


def _secant_polish(sampler: _DetSampler, z0: complex, z1: complex, tol: float, max_iter: int = 60):
    """Secant iteration on exp(log_abs - shift + i phase); None if it wanders."""
    la0, ph0 = sampler(z0)
    la1, ph1 = sampler(z1)
    if la0 == -math.inf:
        return z0
    if la1 == -math.inf:
        return z1
    shift = max(la0, la1)
    h0 = cmath.rect(math.exp(min(la0 - shift, 500.0)), ph0)
    h1 = cmath.rect(math.exp(min(la1 - shift, 500.0)), ph1)
    for _ in range(max_iter):
        denom = h1 - h0
        if denom == 0:
            return None
        z2 = z1 - h1 * (z1 - z0) / denom
        if not (math.isfinite(z2.real) and math.isfinite(z2.imag)):
            return None
        if abs(z2 - z1) <= tol:
            return z2
        la2, ph2 = sampler(z2)
        z0, h0 = z1, h1
        z1 = z2
        h1 = cmath.rect(math.exp(min(la2 - shift, 500.0)), ph2)
    return None


def det_contour_roots(
    det_fn: Callable[[complex], DetValue],
    lo: complex,
    hi: complex,
    *,
    segments: int = 8,
    max_evals: int = 40000,
    min_box_rel: float = 1e-9,
    polish_rel: float = 5e-13,
) -> list[complex]:
    """Zeros of det_fn inside the open rectangle with corners lo, hi.

    Winding numbers along rectangle boundaries (adaptively refined phase
    tracking) drive a bisection; once a box holds a single zero a secant
    iteration polishes it.  Returns roots with multiplicity, sorted by
    (real, imag).  Zeros pinned on a cut are dodged by shifting the cut;
    a zero on the outer boundary raises.  The rectangle must lie in the
    resolvent set of H_0: poles of z -> M(z) corrupt the winding count.
    """
    lo = complex(lo)
    hi = complex(hi)
    if not (lo.real < hi.real and lo.imag < hi.imag):
        raise ValueError("need lo.real < hi.real and lo.imag < hi.imag")
    scale = max(hi.real - lo.real, hi.imag - lo.imag)
    min_len = 1e-12 * scale
    min_box = min_box_rel * scale
    polish_tol = polish_rel * scale
    sampler = _DetSampler(det_fn, max_evals)

    roots: list[complex] = []

    def solve(x0, x1, y0, y1, depth):
        w = _winding(sampler, x0, x1, y0, y1, min_len, segments)
        if w is None:
            raise RuntimeError(
                "determinant zero sits on the search rectangle boundary; "
                "shift the rectangle"
            )
        if w == 0:
            return
        if w < 0:
            raise RuntimeError(
                "negative winding number: the rectangle contains resolvent poles "
                "(dispersion levels of the symbol); choose a rectangle in the "
                "resolvent set of H_0"
            )
        if depth > 80:
            raise RuntimeError("contour bisection exceeded maximum depth")
        cx = 0.5 * (x0 + x1)
        cy = 0.5 * (y0 + y1)
        if w == 1:
            center = complex(cx, cy)
            offset = 0.01 * complex(x1 - x0, y1 - y0)
            polished = _secant_polish(sampler, center, center + offset, polish_tol)
            if polished is not None and (
                x0 - min_len <= polished.real <= x1 + min_len
                and y0 - min_len <= polished.imag <= y1 + min_len
            ):
                roots.append(polished)
                return
        if max(x1 - x0, y1 - y0) <= min_box:
            roots.extend([complex(cx, cy)] * w)
            return
        split_x = (x1 - x0) >= (y1 - y0)
        for frac in (0.5, 0.57, 0.43, 0.61, 0.37):
            cut = x0 + frac * (x1 - x0) if split_x else y0 + frac * (y1 - y0)
            before = len(roots)
            try:
                if split_x:
                    solve(x0, cut, y0, y1, depth + 1)
                    solve(cut, x1, y0, y1, depth + 1)
                else:
                    solve(x0, x1, y0, cut, depth + 1)
                    solve(x0, x1, cut, y1, depth + 1)
                return
            except RuntimeError as err:
                if "boundary" not in str(err):
                    raise
                del roots[before:]
        raise RuntimeError("a determinant zero blocked every attempted cut")

    solve(lo.real, hi.real, lo.imag, hi.imag, 0)
    return sorted(roots, key=lambda z: (z.real, z.imag))
