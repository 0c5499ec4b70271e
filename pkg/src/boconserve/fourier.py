"""Band-limited functions on the unit circle, represented by Fourier coefficients.

Conventions. A function q on R/Z is expanded as

    q(x) = sum_{xi in 2*pi*Z} qhat(xi) * exp(i*x*xi),
    qhat(xi) = integral_0^1 exp(-i*x*xi) q(x) dx,

so the stored lattice index k corresponds to the frequency xi = 2*pi*k.
Reality of q is equivalent to the Hermitian symmetry
qhat(-xi) = conj(qhat(xi)).  All operations in this module are pure; a
CircleFunction is immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

#: Relative tolerance used when validating Hermitian symmetry of input modes.
SYMMETRY_RTOL = 1e-12


class SymmetryError(ValueError):
    """Raised when coefficients violate Hermitian symmetry beyond tolerance."""


@dataclass(frozen=True)
class CircleFunction:
    """Truncated Fourier series on R/Z.

    coeffs[k + band_limit] holds qhat(2*pi*k) for k in [-band_limit, band_limit].
    The array is read-only; coefficients outside the stored band are zero.
    """

    coeffs: np.ndarray
    band_limit: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if self.band_limit < 0:
            raise ValueError("band_limit must be nonnegative")
        if c.shape != (2 * self.band_limit + 1,):
            raise ValueError("coefficient array must have length 2*band_limit + 1")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficient")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def coeff(self, k: int) -> complex:
        """Coefficient qhat(2*pi*k); zero outside the stored band."""
        if abs(k) > self.band_limit:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + self.band_limit])

    @property
    def mean(self) -> complex:
        return complex(self.coeffs[self.band_limit])

    @property
    def frequencies(self) -> np.ndarray:
        """The lattice xi = 2*pi*k over the stored band, in index order."""
        return TWO_PI * np.arange(-self.band_limit, self.band_limit + 1)

    def is_mean_zero(self, tol: float = 0.0) -> bool:
        return abs(self.mean) <= tol

    def is_real(self, rtol: float = SYMMETRY_RTOL) -> bool:
        """True when the stored modes satisfy Hermitian symmetry within rtol."""
        c = self.coeffs
        scale = max(np.max(np.abs(c)), 1e-300)
        return bool(np.max(np.abs(c - np.conj(c[::-1]))) <= rtol * scale)

    def scaled(self, factor: complex) -> "CircleFunction":
        return CircleFunction(self.coeffs * factor, self.band_limit)

    def __add__(self, other: "CircleFunction") -> "CircleFunction":
        m = max(self.band_limit, other.band_limit)
        out = np.zeros(2 * m + 1, dtype=np.complex128)
        out[m - self.band_limit: m + self.band_limit + 1] += self.coeffs
        out[m - other.band_limit: m + other.band_limit + 1] += other.coeffs
        return CircleFunction(out, m)

    def __sub__(self, other: "CircleFunction") -> "CircleFunction":
        return self + other.scaled(-1.0)


@dataclass(frozen=True)
class GridSamples:
    """Real samples of q at x_j = j/n, with n a power of two."""

    values: np.ndarray
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if self.n < 1 or (self.n & (self.n - 1)) != 0:
            raise ValueError("grid size must be a power of two")
        if v.shape != (self.n,):
            raise ValueError("values must have length n")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def zero_function(band_limit: int = 0) -> CircleFunction:
    return CircleFunction(np.zeros(2 * band_limit + 1, dtype=np.complex128), band_limit)


def synthesize(modes, band_limit: int | None = None) -> CircleFunction:
    """Build a validated real CircleFunction from a mapping k -> qhat(2*pi*k).

    The input must satisfy qhat(-xi) = conj(qhat(xi)) within SYMMETRY_RTOL
    relative to the overall coefficient scale; the result is symmetrized by
    averaging qhat(xi) with conj(qhat(-xi)).  Rejects non-finite input.
    """
    items = dict(modes)
    if band_limit is None:
        band_limit = max((abs(int(k)) for k in items), default=0)
    c = np.zeros(2 * band_limit + 1, dtype=np.complex128)
    for k, v in items.items():
        k = int(k)
        if abs(k) > band_limit:
            raise ValueError(f"mode {k} outside band limit {band_limit}")
        if not np.isfinite(v):
            raise ValueError(f"non-finite coefficient at mode {k}")
        c[k + band_limit] = v
    scale = max(np.max(np.abs(c)), 1e-300)
    mismatch = np.max(np.abs(c - np.conj(c[::-1])))
    if mismatch > SYMMETRY_RTOL * scale:
        raise SymmetryError(
            f"Hermitian symmetry violated: |qhat(-xi) - conj(qhat(xi))| = {mismatch:.3e} "
            f"exceeds {SYMMETRY_RTOL:g} * {scale:.3e}"
        )
    sym = 0.5 * (c + np.conj(c[::-1]))
    return CircleFunction(sym, band_limit)


def hilbert_transform(f: CircleFunction) -> CircleFunction:
    """Fourier multiplier -i*sgn(xi); the zero mode is annihilated."""
    k = np.arange(-f.band_limit, f.band_limit + 1)
    return CircleFunction(-1j * np.sign(k) * f.coeffs, f.band_limit)


def cauchy_project(f: CircleFunction, sign: int) -> CircleFunction:
    """Projection (f + sign*i*H f)/2 onto positive (+1) or negative (-1) frequencies.

    The zero mode maps to half of itself under either sign, so that the two
    projections sum to the identity on all of L^2.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    k = np.arange(-f.band_limit, f.band_limit + 1)
    mask = 0.5 * (1.0 + sign * np.sign(k))
    mask[f.band_limit] = 0.5
    return CircleFunction(mask * f.coeffs, f.band_limit)


def derivative(f: CircleFunction) -> CircleFunction:
    """d/dx on the Fourier side: qhat(xi) -> i*xi*qhat(xi)."""
    return CircleFunction(1j * f.frequencies * f.coeffs, f.band_limit)


def translate(f: CircleFunction, a: float) -> CircleFunction:
    """Spatial translation x -> x - a, i.e. qhat(xi) -> exp(-i*xi*a)*qhat(xi)."""
    return CircleFunction(np.exp(-1j * f.frequencies * a) * f.coeffs, f.band_limit)


def l2_norm(f: CircleFunction) -> float:
    """L^2(R/Z) norm via Plancherel."""
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def _grid_values(f: CircleFunction, n: int) -> np.ndarray:
    """Complex samples of f at x_j = j/n (n >= 2*band+1 for exactness)."""
    bins = np.zeros(n, dtype=np.complex128)
    m = f.band_limit
    for k in range(-m, m + 1):
        bins[k % n] += f.coeffs[k + m]
    return np.fft.ifft(bins) * n


def _coeffs_from_grid(values: np.ndarray, band: int) -> np.ndarray:
    n = len(values)
    spec = np.fft.fft(values) / n
    out = np.empty(2 * band + 1, dtype=np.complex128)
    for k in range(-band, band + 1):
        out[k + band] = spec[k % n]
    return out


def grid_synthesize(f: CircleFunction, n: int) -> GridSamples:
    """Sample a real CircleFunction on the uniform grid of power-of-two size n."""
    vals = _grid_values(f, n)
    return GridSamples(np.real(vals), n)


def grid_analyze(samples: GridSamples, band_limit: int) -> CircleFunction:
    """Recover coefficients up to band_limit from grid samples.

    Exact round trip against grid_synthesize for band-limited input when
    n >= 2*band_limit + 1.
    """
    return CircleFunction(_coeffs_from_grid(samples.values.astype(np.complex128), band_limit),
                          band_limit)


def pointwise_product(f: CircleFunction, g: CircleFunction, dealias: bool = False) -> CircleFunction:
    """Product f*g.

    With dealias off the result is the exact coefficient convolution and the
    band limit grows to band(f) + band(g).  With dealias on the product is
    computed on a power-of-two grid of size >= 3*max(band) and truncated to
    the alias-free 2/3 band.
    """
    if not dealias:
        out = np.convolve(f.coeffs, g.coeffs)
        return CircleFunction(out, f.band_limit + g.band_limit)
    full = f.band_limit + g.band_limit
    n = _next_pow2(3 * full + 1)
    keep = min(n // 3, full)
    vf = _grid_values(f, n)
    vg = _grid_values(g, n)
    return CircleFunction(_coeffs_from_grid(vf * vg, keep), keep)


def random_rough(s: float, seed: int, band_limit: int, amplitude: float = 1.0) -> CircleFunction:
    """Deterministic mean-zero rough test data targeting H^s, s in (-1/2, 0).

    Moduli follow |qhat(2*pi*k)| = amplitude * |k|^(-(s + 1/2) - 0.01) with
    seeded uniform phases, Hermitian-symmetrized.
    """
    if not (-0.5 < s < 0.0):
        raise ValueError("regularity exponent must lie in (-1/2, 0)")
    if band_limit < 1:
        raise ValueError("band_limit must be >= 1")
    rng = np.random.default_rng(seed)
    k = np.arange(1, band_limit + 1)
    moduli = amplitude * k.astype(float) ** (-(s + 0.5) - 0.01)
    phases = rng.uniform(0.0, TWO_PI, size=band_limit)
    pos = moduli * np.exp(1j * phases)
    c = np.zeros(2 * band_limit + 1, dtype=np.complex128)
    c[band_limit + 1:] = pos
    c[:band_limit] = np.conj(pos[::-1])
    return CircleFunction(c, band_limit)


def random_smooth(seed: int, band_limit: int, amplitude: float = 1.0,
                  decay: float = 4.0) -> CircleFunction:
    """Deterministic mean-zero smooth test data with |qhat(2*pi*k)| = amp*(1+|k|)^(-decay).

    Used where a classical-regularity profile is required; decay >= 4 keeps
    the data comfortably inside H^3.
    """
    if band_limit < 1:
        raise ValueError("band_limit must be >= 1")
    rng = np.random.default_rng(seed)
    k = np.arange(1, band_limit + 1)
    moduli = amplitude * (1.0 + k.astype(float)) ** (-decay)
    phases = rng.uniform(0.0, TWO_PI, size=band_limit)
    pos = moduli * np.exp(1j * phases)
    c = np.zeros(2 * band_limit + 1, dtype=np.complex128)
    c[band_limit + 1:] = pos
    c[:band_limit] = np.conj(pos[::-1])
    return CircleFunction(c, band_limit)


# ---------------------------------------------------------------------------
# Coefficient file format: JSON object listing only k >= 0, negative modes
# implied by Hermitian symmetry.  Round trips are bit-exact.
# ---------------------------------------------------------------------------

def to_modes_dict(f: CircleFunction) -> dict:
    modes = []
    for k in range(0, f.band_limit + 1):
        v = f.coeffs[k + f.band_limit]
        modes.append({"k": k, "re": float(v.real), "im": float(v.imag)})
    return {"band_limit": f.band_limit, "modes": modes}


def from_modes_dict(obj: dict) -> CircleFunction:
    m = int(obj["band_limit"])
    c = np.zeros(2 * m + 1, dtype=np.complex128)
    for entry in obj["modes"]:
        k = int(entry["k"])
        if k < 0 or k > m:
            raise ValueError(f"mode index {k} outside [0, {m}]")
        v = complex(float(entry["re"]), float(entry["im"]))
        c[k + m] = v
        if k > 0:
            c[m - k] = np.conj(v)
    return CircleFunction(c, m)


def save_coefficients(f: CircleFunction, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_modes_dict(f), fh)


def load_coefficients(path) -> CircleFunction:
    with open(path) as fh:
        return from_modes_dict(json.load(fh))
