"""Sobolev and Besov norms on the circle, and the kappa-weighted quadratic form.

The Besov norm aggregates dyadic frequency blocks: the low block collects
|xi| <= 1 (on the 2*pi*Z lattice that is just the mean), and the blocks
N = 2, 4, 8, ... collect N <= |xi| < 2N.  On the lattice there are no points
with 1 < |xi| < 2, so the blocks partition the stored band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import TWO_PI, CircleFunction


@dataclass(frozen=True)
class BesovParams:
    """Regularity s in (-1/2, 0) and summability index r in [1, inf]."""

    s: float
    r: float

    def __post_init__(self):
        if not (-0.5 < self.s < 0.0):
            raise ValueError("s must lie in (-1/2, 0)")
        if not (self.r >= 1.0):
            raise ValueError("r must be >= 1 (math.inf for the sup norm)")


def sobolev_norm(f: CircleFunction, s: float) -> float:
    """(sum over the stored band of (1+|xi|^2)^s |qhat(xi)|^2)^(1/2)."""
    xi = f.frequencies
    total = np.sum((1.0 + xi * xi) ** s * np.abs(f.coeffs) ** 2)
    return float(np.sqrt(total))


def dyadic_scales(band_limit: int) -> list[float]:
    """Block scales: 1 for the low block, then dyadic N = 2, 4, ... up to 4*pi*M."""
    scales = [1.0]
    top = 4.0 * math.pi * max(band_limit, 1)
    n = 2.0
    while n <= top:
        scales.append(n)
        n *= 2.0
    return scales


def dyadic_blocks(f: CircleFunction) -> list[tuple[float, float]]:
    """List of (N, block mass), block mass the l^2 norm of qhat over N <= |xi| < 2N.

    The N = 1 entry is the mass over |xi| <= 1 (only xi = 0 on this lattice).
    """
    xi = np.abs(f.frequencies)
    mag2 = np.abs(f.coeffs) ** 2
    out = []
    for n in dyadic_scales(f.band_limit):
        if n == 1.0:
            sel = xi <= 1.0
        else:
            sel = (xi >= n) & (xi < 2.0 * n)
        out.append((n, float(np.sqrt(np.sum(mag2[sel])))))
    return out


def besov_norm(f: CircleFunction, params: BesovParams) -> float:
    """B^{s,2}_r norm: l^r over blocks of N^s * mass, low block unweighted."""
    blocks = dyadic_blocks(f)
    terms = []
    for n, mass in blocks:
        terms.append(mass if n == 1.0 else n ** params.s * mass)
    terms = np.asarray(terms)
    if math.isinf(params.r):
        return float(np.max(terms)) if len(terms) else 0.0
    return float(np.sum(terms ** params.r) ** (1.0 / params.r))


def t_kappa_multiplier(xi: np.ndarray, kappa: float) -> np.ndarray:
    """The weight log(2 + |xi|/kappa) / sqrt(kappa^2 + xi^2)."""
    axi = np.abs(xi)
    return np.log(2.0 + axi / kappa) / np.sqrt(kappa * kappa + xi * xi)


def t_kappa_form(f: CircleFunction, kappa: float) -> float:
    """Quadratic form sum_xi m_kappa(xi) |qhat(xi)|^2 over the stored band.

    The xi = 0 term is included; callers enforcing mean-zero lose nothing.
    """
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    xi = f.frequencies
    return float(np.sum(t_kappa_multiplier(xi, kappa) * np.abs(f.coeffs) ** 2))
