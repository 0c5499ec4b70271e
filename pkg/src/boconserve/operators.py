"""Finite-rank realization of the resolvent-weighted multiplication operator.

For a mean-zero real q on the circle and kappa >= 1, the operator acts on the
positive-frequency lattice xi_j = 2*pi*j, j = 1..dim, with matrix

    A[j, k] = qhat(xi_j - xi_k) / sqrt((kappa + xi_j) * (kappa + xi_k)).

It is Hermitian for real q and banded with bandwidth equal to the band limit
of q.  The conserved scalar is

    alpha = sum_{l >= 2} tr(A^l) / l,

computed either by the truncated power series or, for Hermitian A with all
eigenvalues below 1, exactly at this truncation as

    alpha = sum_i ( -log(1 - lambda_i) - lambda_i ).

The dimension must dominate the band of q; the default policy keeps
dim >= 4 * band so the discarded rows decay like (kappa + xi)^(-2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier import TWO_PI, CircleFunction
from .norms import sobolev_norm

#: Default ratio of truncation dimension to the band limit of q.
DEFAULT_DIM_FACTOR = 4

#: Mean is considered zero when |qhat(0)| <= this times max(1, max|qhat|).
MEAN_ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class OperatorA:
    """Dense Hermitian matrix on the truncated positive-frequency lattice."""

    kappa: float
    dim: int
    entries: np.ndarray
    source_band: int

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.complex128)
        if e.shape != (self.dim, self.dim):
            raise ValueError("entries must be dim x dim")
        e = e.copy()
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)


@dataclass(frozen=True)
class AlphaReport:
    """Value of alpha together with method and truncation metadata."""

    alpha: float
    method: str              # "series" | "logdet"
    hs_norm: float
    truncation_dim: int
    tail_bound: float
    ell_max: int | None = None

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "method": self.method,
            "hs_norm": self.hs_norm,
            "truncation_dim": self.truncation_dim,
            "tail_bound": self.tail_bound,
            "ell_max": self.ell_max,
        }


def default_dim(q: CircleFunction) -> int:
    return DEFAULT_DIM_FACTOR * max(q.band_limit, 1)


def _require_mean_zero(q: CircleFunction) -> None:
    scale = max(1.0, float(np.max(np.abs(q.coeffs))) if q.coeffs.size else 0.0)
    if abs(q.mean) > MEAN_ZERO_RTOL * scale:
        raise ValueError(
            "q must have mean zero; remove the mean with a Galilei boost first "
            f"(|qhat(0)| = {abs(q.mean):.3e})"
        )


def resolvent_weights(kappa: float, dim: int) -> np.ndarray:
    """(kappa + xi_j)^(-1/2) on the lattice xi_j = 2*pi*j, j = 1..dim."""
    xi = TWO_PI * np.arange(1, dim + 1)
    return 1.0 / np.sqrt(kappa + xi)


def toeplitz_symbol_matrix(g: CircleFunction, dim: int) -> np.ndarray:
    """Matrix ghat(xi_j - xi_k) of multiplication by g compressed to the lattice."""
    padded = np.zeros(2 * dim + 1, dtype=np.complex128)
    b = min(g.band_limit, dim)
    padded[dim - b: dim + b + 1] = g.coeffs[g.band_limit - b: g.band_limit + b + 1]
    j = np.arange(1, dim + 1)
    return padded[(j[:, None] - j[None, :]) + dim]


def build_A(q: CircleFunction, kappa: float, dim: int | None = None) -> OperatorA:
    """Assemble the operator matrix for mean-zero real q at kappa >= 1.

    Linear in q entrywise.  Raises for kappa < 1, non-mean-zero q, or a
    dimension below the band of q.
    """
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    _require_mean_zero(q)
    if dim is None:
        dim = default_dim(q)
    if dim < q.band_limit:
        raise ValueError(f"dim = {dim} is below the band limit {q.band_limit} of q")
    w = resolvent_weights(kappa, dim)
    entries = toeplitz_symbol_matrix(q, dim) * np.outer(w, w)
    return OperatorA(kappa=float(kappa), dim=dim, entries=entries,
                     source_band=q.band_limit)


def hs_norm(a: OperatorA) -> float:
    """Hilbert-Schmidt (Frobenius) norm of the truncated matrix."""
    return float(np.linalg.norm(a.entries))


def _hermitian_eigenvalues(a: OperatorA) -> np.ndarray:
    return np.linalg.eigvalsh(a.entries)


def alpha_logdet(a: OperatorA) -> AlphaReport:
    """alpha at this truncation via the Hermitian eigendecomposition.

    Exact (no series truncation): alpha = sum_i (-log(1 - lambda_i) - lambda_i).
    Rejects any eigenvalue >= 1 - 1e-9.
    """
    h = hs_norm(a)
    if a.dim == 0 or h == 0.0:
        return AlphaReport(0.0, "logdet", h, a.dim, 0.0)
    lam = _hermitian_eigenvalues(a)
    if np.max(lam) >= 1.0 - 1e-9:
        raise ValueError(f"eigenvalue {np.max(lam):.6f} too close to 1; raise kappa")
    alpha = float(np.sum(-np.log1p(-lam) - lam))
    return AlphaReport(alpha, "logdet", h, a.dim, 0.0)


def series_tail_bound(h: float, ell_max: int) -> float:
    """Geometric remainder sum_{l > ell_max} h^l / l for h < 1."""
    if h >= 1.0:
        raise ValueError("tail bound requires Hilbert-Schmidt norm < 1")
    return h ** (ell_max + 1) / ((ell_max + 1) * (1.0 - h))


def alpha_series(a: OperatorA, ell_max: int) -> AlphaReport:
    """Truncated series sum_{l=2}^{ell_max} tr(A^l)/l with a rigorous tail bound.

    Requires hs_norm(A) < 1 and ell_max >= 2.  The accumulated trace must be
    real to within 1e-12 relative; larger imaginary residue signals a kernel
    bug and raises ArithmeticError.
    """
    if ell_max < 2:
        raise ValueError("ell_max must be >= 2")
    h = hs_norm(a)
    if h >= 1.0:
        raise ValueError("alpha series requires Hilbert-Schmidt norm < 1")
    if h == 0.0:
        return AlphaReport(0.0, "series", 0.0, a.dim, 0.0, ell_max)
    power = a.entries @ a.entries
    total = np.trace(power) / 2.0
    for ell in range(3, ell_max + 1):
        power = power @ a.entries
        total += np.trace(power) / ell
    if abs(total.imag) > 1e-12 * max(abs(total), 1e-300):
        raise ArithmeticError(
            f"non-real alpha series: imag {total.imag:.3e} vs |alpha| {abs(total):.3e}"
        )
    return AlphaReport(float(total.real), "series", h, a.dim,
                       series_tail_bound(h, ell_max), ell_max)


def trace_product(ops: list[OperatorA]) -> complex:
    """tr(A_1 ... A_n) via matrix products; cyclic in the list order."""
    if len(ops) < 2:
        raise ValueError("need at least two operators")
    first = ops[0]
    for op in ops[1:]:
        if op.dim != first.dim or op.kappa != first.kappa:
            raise ValueError("operators must share kappa and dimension")
    prod = ops[0].entries
    for op in ops[1:-1]:
        prod = prod @ op.entries
    # close the trace without forming the final full product
    return complex(np.sum(prod * ops[-1].entries.T))


@dataclass(frozen=True)
class KappaThreshold:
    """Bisection threshold plus the calibrated closed-form candidate."""

    kappa0: float
    hs_at_kappa0: float
    formula_kappa: float
    constant: float
    s: float
    margin: float


_CALIBRATION_CACHE: dict = {}


def _bisect_kappa(q: CircleFunction, bound: float, dim: int) -> float:
    """Smallest kappa >= 1 with hs_norm(build_A(q, kappa)) <= bound, to 1e-3 relative."""
    if hs_norm(build_A(q, 1.0, dim)) <= bound:
        return 1.0
    lo, hi = 1.0, 2.0
    while hs_norm(build_A(q, hi, dim)) > bound:
        lo, hi = hi, 2.0 * hi
        if hi > 1e9:
            raise ValueError("no kappa <= 1e9 satisfies the smallness bound")
    while (hi - lo) > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        if hs_norm(build_A(q, mid, dim)) <= bound:
            hi = mid
        else:
            lo = mid
    return hi


def calibrate_threshold_constant(s: float, n_samples: int = 200,
                                 band: int = 32) -> float:
    """Corpus-calibrated constant C(s) for the closed-form threshold.

    Defined as twice the largest per-sample constant (kappa0 - 1) /
    ||q||_{H^s}^{2/(1+2s)} over a fixed seeded corpus, where kappa0 is the
    smallest kappa putting the Hilbert-Schmidt norm at 1/3.
    """
    from .fourier import random_rough

    key = (round(s, 12), n_samples, band)
    if key in _CALIBRATION_CACHE:
        return _CALIBRATION_CACHE[key]
    worst = 0.0
    dim = DEFAULT_DIM_FACTOR * band
    for seed in range(n_samples):
        amp = 2.0 ** ((seed % 5) - 2)
        q = random_rough(s, seed, band, amplitude=amp)
        kappa0 = _bisect_kappa(q, 1.0 / 3.0, dim)
        denom = sobolev_norm(q, s) ** (2.0 / (1.0 + 2.0 * s))
        if denom > 0:
            worst = max(worst, (kappa0 - 1.0) / denom)
    const = 2.0 * worst
    _CALIBRATION_CACHE[key] = const
    return const


def kappa_threshold(q: CircleFunction, s: float, margin: float,
                    dim: int | None = None) -> KappaThreshold:
    """Smallest kappa >= 1 with hs_norm^2 <= (1/9)(1 - margin)^2, by bisection.

    Also reports the calibrated closed-form value 1 + C(s) * ||q||_{H^s}^{2/(1+2s)}.
    """
    if not (-0.5 < s < 0.0):
        raise ValueError("s must lie in (-1/2, 0)")
    if not (0.0 < margin < 1.0):
        raise ValueError("margin must lie in (0, 1)")
    _require_mean_zero(q)
    if dim is None:
        dim = default_dim(q)
    bound = (1.0 - margin) / 3.0
    kappa0 = _bisect_kappa(q, bound, dim)
    const = calibrate_threshold_constant(s)
    formula = 1.0 + const * sobolev_norm(q, s) ** (2.0 / (1.0 + 2.0 * s))
    return KappaThreshold(
        kappa0=kappa0,
        hs_at_kappa0=hs_norm(build_A(q, kappa0, dim)),
        formula_kappa=formula,
        constant=const,
        s=s,
        margin=margin,
    )
