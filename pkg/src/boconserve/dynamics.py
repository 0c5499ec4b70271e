"""Pseudospectral time integration of the Benjamin-Ono equation on the circle.

The equation is dq/dt = -H q'' + 2 q q'.  With the transform convention
(Hf)^(xi) = -i*sgn(xi)*fhat(xi) one has (q'')^(xi) = -xi^2*qhat(xi), hence
(Hq'')^(xi) = i*xi*|xi|*qhat(xi), and 2qq' = (q^2)' transforms to
i*xi*(q^2)^(xi).  The evolution integrated here is therefore

    d/dt qhat(xi) = -i*xi*|xi|*qhat(xi) + i*xi*(q^2)^(xi).

The linear symbol is purely imaginary, so the exponential factor used by the
integrators is exactly unitary; the quadratic term is evaluated on a padded
grid (2/3-style dealiasing), which makes the truncated flow conserve both the
mean and the L^2 norm up to time-integration error only.

State is kept as the half spectrum qhat(2*pi*k), k = 0..M; reality is
structural.  Both integrators treat the linear part exactly: etdrk4 is the
standard fourth-order exponential time differencing scheme with
contour-integral coefficients, rk4_integrating_factor is classical RK4 in the
rotating frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import TWO_PI, CircleFunction

#: Abort when the L2 norm exceeds this multiple of its initial value.
BLOWUP_FACTOR = 1e3

#: Abort when the top-octave energy fraction exceeds this (resolution policy).
TAIL_FRACTION_LIMIT = 1e-8


class SolverBlowupError(RuntimeError):
    """Solution norm blew up or became non-finite."""


class TailResolutionError(SolverBlowupError):
    """Spectral tail monitor tripped: the band limit is too small for this run."""


@dataclass(frozen=True)
class SolverConfig:
    band_limit: int
    dt: float
    final_time: float
    integrator: str = "etdrk4"
    dealias: bool = True
    snapshot_every: int = 100

    def __post_init__(self):
        if self.band_limit < 4:
            raise ValueError("band_limit must be >= 4")
        if not (self.dt > 0.0):
            raise ValueError("dt must be positive")
        if self.final_time < 0.0:
            raise ValueError("final_time must be >= 0")
        if self.integrator not in ("etdrk4", "rk4_integrating_factor"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: list
    config: SolverConfig
    provenance: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if len(t) != len(self.states):
            raise ValueError("times and states must have equal length")
        if len(t) == 0 or t[0] != 0.0:
            raise ValueError("trajectory must start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "times", t)


def _five_smooth(n: int) -> int:
    """Smallest 5-smooth integer >= n (fast FFT length)."""
    best = None
    p2 = 1
    while p2 < 4 * n:
        p3 = p2
        while p3 < 4 * n:
            p5 = p3
            while p5 < 4 * n:
                if p5 >= n and (best is None or p5 < best):
                    best = p5
                p5 *= 5
            p3 *= 3
        p2 *= 2
    return best


def linear_propagator(f: CircleFunction, t: float) -> CircleFunction:
    """Free evolution: qhat(xi) -> exp(-i*xi*|xi|*t) * qhat(xi).  Unitary on l^2."""
    xi = f.frequencies
    return CircleFunction(np.exp(-1j * xi * np.abs(xi) * t) * f.coeffs, f.band_limit)


def nonlinear_term(f: CircleFunction) -> CircleFunction:
    """2*f*f' computed as the derivative of the dealiased square.

    A complete derivative: the output mean is exactly zero.
    """
    from .fourier import derivative, pointwise_product

    return derivative(pointwise_product(f, f, dealias=True))


def galilei(f: CircleFunction, mu: float, t: float) -> CircleFunction:
    """Boost q(t, x) -> q(t, x + 2*mu*t) + mu.

    Phase shift exp(i*xi*2*mu*t) on every coefficient plus mu on the mean.
    """
    out = np.exp(1j * f.frequencies * (2.0 * mu * t)) * f.coeffs
    out[f.band_limit] += mu
    return CircleFunction(out, f.band_limit)


class _Stepper:
    """Shared spectral machinery for one (config, dt) pair."""

    def __init__(self, config: SolverConfig, dt: float, include_nonlinear: bool):
        m = config.band_limit
        self.m = m
        self.dt = dt
        self.include_nonlinear = include_nonlinear
        pad = 3 * m + 1 if config.dealias else 2 * m + 1
        self.n = _five_smooth(pad)
        k = np.arange(0, m + 1)
        self.xi = TWO_PI * k
        lam = -1j * self.xi * np.abs(self.xi)
        self.exp_full = np.exp(lam * dt)
        self.exp_half = np.exp(lam * dt / 2.0)
        # phi-function coefficients by contour averaging (Kassam-Trefethen)
        n_pts = 64
        theta = np.exp(2j * np.pi * (np.arange(n_pts) + 0.5) / n_pts)
        z = lam[:, None] * dt + theta[None, :]
        ez = np.exp(z)
        self.q_half = dt * np.mean((np.exp(z / 2.0) - 1.0) / z, axis=1)
        self.f1 = dt * np.mean((-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z ** 3, axis=1)
        self.f2 = dt * np.mean((2.0 + z + ez * (z - 2.0)) / z ** 3, axis=1)
        self.f3 = dt * np.mean((-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z ** 3, axis=1)

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        """i*xi*(q^2)^ on the half spectrum; exactly zero at xi = 0."""
        if not self.include_nonlinear:
            return np.zeros_like(c)
        bins = np.zeros(self.n // 2 + 1, dtype=np.complex128)
        bins[: self.m + 1] = c
        v = np.fft.irfft(bins, self.n) * self.n
        w = np.fft.rfft(v * v)[: self.m + 1] / self.n
        return 1j * self.xi * w

    def step_etdrk4(self, c: np.ndarray) -> np.ndarray:
        n0 = self.nonlinear(c)
        a = self.exp_half * c + self.q_half * n0
        n1 = self.nonlinear(a)
        b = self.exp_half * c + self.q_half * n1
        n2 = self.nonlinear(b)
        d = self.exp_half * a + self.q_half * (2.0 * n2 - n0)
        n3 = self.nonlinear(d)
        return self.exp_full * c + self.f1 * n0 + 2.0 * self.f2 * (n1 + n2) + self.f3 * n3

    def step_ifrk4(self, c: np.ndarray) -> np.ndarray:
        dt = self.dt
        k1 = dt * self.nonlinear(c)
        k2 = dt * self.nonlinear(self.exp_half * (c + 0.5 * k1))
        k3 = dt * self.nonlinear(self.exp_half * c + 0.5 * k2)
        k4 = dt * self.nonlinear(self.exp_full * c + self.exp_half * k3)
        return (self.exp_full * c
                + (self.exp_full * k1 + 2.0 * self.exp_half * (k2 + k3) + k4) / 6.0)


def _half_spectrum(q: CircleFunction, m: int) -> np.ndarray:
    if q.band_limit > m:
        raise ValueError("initial data band exceeds solver band limit")
    c = np.zeros(m + 1, dtype=np.complex128)
    c[: q.band_limit + 1] = q.coeffs[q.band_limit:]
    return c


def _to_function(c: np.ndarray, m: int) -> CircleFunction:
    full = np.concatenate([np.conj(c[:0:-1]), c])
    return CircleFunction(full, m)


def _l2(c: np.ndarray) -> float:
    return math.sqrt(float(np.abs(c[0]) ** 2 + 2.0 * np.sum(np.abs(c[1:]) ** 2)))


def _tail_fraction(c: np.ndarray, m: int) -> float:
    total = np.abs(c[0]) ** 2 + 2.0 * np.sum(np.abs(c[1:]) ** 2)
    if total == 0.0:
        return 0.0
    top = 2.0 * np.sum(np.abs(c[m // 2 + 1:]) ** 2)
    return float(top / total)


def evolve(q0: CircleFunction, config: SolverConfig, provenance: str = "",
           include_nonlinear: bool = True) -> Trajectory:
    """Integrate the equation from real initial data q0 up to the final time.

    Snapshots are recorded at step 0, every snapshot_every steps, and at the
    final step.  The mean is conserved bit-exactly (both terms of the
    evolution vanish at xi = 0); reality is structural in the half-spectrum
    representation.  Aborts with SolverBlowupError when the L^2 norm exceeds
    1e3 times its initial value or any coefficient becomes non-finite, and
    with TailResolutionError when the top-octave energy fraction passes 1e-8.
    """
    if not q0.is_real():
        raise ValueError("initial data must be real")
    m = config.band_limit
    c = _half_spectrum(q0, m)
    n_steps = int(round(config.final_time / config.dt)) if config.final_time > 0 else 0
    if config.final_time > 0 and abs(n_steps * config.dt - config.final_time) > 1e-9 * config.final_time:
        raise ValueError("final_time must be an integer multiple of dt")
    stepper = _Stepper(config, config.dt, include_nonlinear)
    step_fn = stepper.step_etdrk4 if config.integrator == "etdrk4" else stepper.step_ifrk4

    init_l2 = _l2(c)
    times = [0.0]
    states = [_to_function(c, m)]

    def check(c_now: np.ndarray, step: int) -> None:
        if not np.all(np.isfinite(c_now)):
            raise SolverBlowupError(f"non-finite coefficient at step {step}")
        if init_l2 > 0 and _l2(c_now) > BLOWUP_FACTOR * init_l2:
            raise SolverBlowupError(f"L2 norm blew up at step {step}")
        if _tail_fraction(c_now, m) > TAIL_FRACTION_LIMIT:
            raise TailResolutionError(
                f"top-octave energy fraction exceeds {TAIL_FRACTION_LIMIT:g} "
                f"at step {step}; raise the band limit"
            )

    for step in range(1, n_steps + 1):
        c = step_fn(c)
        if step % config.snapshot_every == 0 or step == n_steps:
            check(c, step)
            times.append(step * config.dt)
            states.append(_to_function(c, m))
    return Trajectory(np.asarray(times), states, config, provenance)


def save_trajectory(traj: Trajectory, directory) -> None:
    """Directory layout: metadata.json plus one coefficient file per snapshot,
    named by zero-padded step index.  Round trips are bit-exact."""
    import json
    import os

    from .fourier import save_coefficients

    os.makedirs(directory, exist_ok=True)
    steps = [int(round(t / traj.config.dt)) for t in traj.times]
    meta = {
        "config": {
            "band_limit": traj.config.band_limit,
            "dt": traj.config.dt,
            "final_time": traj.config.final_time,
            "integrator": traj.config.integrator,
            "dealias": traj.config.dealias,
            "snapshot_every": traj.config.snapshot_every,
        },
        "provenance": traj.provenance,
        "times": [float(t) for t in traj.times],
        "steps": steps,
    }
    with open(os.path.join(directory, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for step, state in zip(steps, traj.states):
        save_coefficients(state, os.path.join(directory, f"snapshot_{step:08d}.json"))


def load_trajectory(directory) -> Trajectory:
    import json
    import os

    from .fourier import load_coefficients

    with open(os.path.join(directory, "metadata.json")) as fh:
        meta = json.load(fh)
    cfg = SolverConfig(**meta["config"])
    states = [load_coefficients(os.path.join(directory, f"snapshot_{step:08d}.json"))
              for step in meta["steps"]]
    return Trajectory(np.asarray(meta["times"]), states, cfg, meta.get("provenance", ""))


def self_convergence_order(q0: CircleFunction, config: SolverConfig,
                           refinements: int, include_nonlinear: bool = True) -> float:
    """Observed convergence order from runs at dt, dt/2, dt/4, ...

    Returns the median of log2 ratios of successive final-state L^2
    differences; refinements >= 3 runs are required.
    """
    if refinements < 3:
        raise ValueError("refinements must be >= 3")
    finals = []
    for i in range(refinements):
        cfg = SolverConfig(config.band_limit, config.dt / 2 ** i, config.final_time,
                           config.integrator, config.dealias,
                           snapshot_every=10 ** 9)
        traj = evolve(q0, cfg, include_nonlinear=include_nonlinear)
        finals.append(traj.states[-1].coeffs)
    diffs = [float(np.linalg.norm(finals[i + 1] - finals[i]))
             for i in range(len(finals) - 1)]
    orders = [math.log2(diffs[i] / diffs[i + 1]) for i in range(len(diffs) - 1)
              if diffs[i + 1] > 0]
    if not orders:
        return float("inf")
    return float(np.median(orders))


def convergence_differences(q0: CircleFunction, config: SolverConfig,
                            refinements: int, include_nonlinear: bool = True) -> list[float]:
    """Successive final-state differences used by the order estimate."""
    finals = []
    for i in range(refinements):
        cfg = SolverConfig(config.band_limit, config.dt / 2 ** i, config.final_time,
                           config.integrator, config.dealias, snapshot_every=10 ** 9)
        traj = evolve(q0, cfg, include_nonlinear=include_nonlinear)
        finals.append(traj.states[-1].coeffs)
    return [float(np.linalg.norm(finals[i + 1] - finals[i]))
            for i in range(len(finals) - 1)]
