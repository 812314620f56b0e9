"""Brute-force trajectories of the atom driven by a fluctuating-amplitude field.

The field amplitude ``x(t)`` is an Ornstein-Uhlenbeck process with
``<x(t) x(t')> = D kappa exp(-kappa |t - t'|)``.  Each trajectory integrates
the full optical Bloch equations with ``x`` held constant over every step.
Averaging over trajectories should reproduce the effective master equation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import hilbert, lfilter

from .model import BlochState, ModelParams

__all__ = [
    "StepSizeError",
    "TrajectoryError",
    "FitDegenerateError",
    "OUConfig",
    "OUTrajectory",
    "BlochTrajectory",
    "EnsembleResult",
    "DecayFit",
    "trajectory_rng",
    "max_stable_dt",
    "generate_ou",
    "integrate_trajectory",
    "ensemble_average",
    "fit_quadrature_decay",
]


class StepSizeError(ValueError):
    """Time step too coarse for the noise bandwidth or the Rabi period."""


class TrajectoryError(RuntimeError):
    def __init__(self, index: int, cause: BaseException | str):
        self.index = index
        self.cause = cause
        super().__init__(f"trajectory {index}: {cause}")


class FitDegenerateError(ValueError):
    """Not enough signal above the noise floor to fit a decay rate."""


@dataclass(frozen=True)
class OUConfig:
    dt: float
    n_steps: int
    seed: int = 0
    n_traj: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be at least 1, got {self.n_steps}")
        if self.n_traj < 1:
            raise ValueError(f"n_traj must be at least 1, got {self.n_traj}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True, eq=False)
class OUTrajectory:
    """Noise amplitude ``x(t_n)``, one sample per integration step."""

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 1:
            raise ValueError(f"noise path must be one-dimensional, got shape {arr.shape}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("noise path contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True, eq=False)
class BlochTrajectory:
    times: np.ndarray
    states: np.ndarray


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Ensemble mean Bloch trajectory with standard errors.

    ``batch_means`` holds the means of ``n_batches`` contiguous groups of
    trajectories; fits use it for jackknife error bars.
    """

    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    count: int
    params: ModelParams
    dt: float
    batch_means: np.ndarray | None = None
    per_traj_window: dict = field(default_factory=dict)

    def component(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        k = "xyz".index(which)
        return self.mean[:, k], self.stderr[:, k]


@dataclass(frozen=True)
class DecayFit:
    rate: float
    stderr: float
    t_start: float
    t_stop: float
    n_points: int


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trajectory ``index``, fixed by ``(seed, index)`` alone."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def max_stable_dt(p: ModelParams) -> float:
    return 0.1 / max(p.kappa, p.omega, p.gamma)


def _ou_path(rng: np.random.Generator, n_steps: int, dt: float, d_strength: float, kappa: float):
    if d_strength == 0:
        return np.zeros(n_steps)
    if kappa <= 0:
        raise ValueError("kappa = 0 with D > 0 has an infinite correlation time; unsupported")
    var = d_strength * kappa
    decay = math.exp(-kappa * dt)
    kick = math.sqrt(var * -math.expm1(-2 * kappa * dt))
    drive = rng.standard_normal(n_steps)
    drive[0] *= math.sqrt(var)  # stationary start
    drive[1:] *= kick
    return lfilter([1.0], [1.0, -decay], drive)


def generate_ou(cfg: OUConfig, d_strength: float, kappa: float, index: int = 0) -> OUTrajectory:
    """Exact discretization of the stationary Ornstein-Uhlenbeck amplitude.

    ``x[n+1] = x[n] exp(-kappa dt) + sqrt(D kappa (1 - exp(-2 kappa dt))) xi[n]``
    with ``x[0] ~ Normal(0, D kappa)``.
    """
    if d_strength < 0:
        raise ValueError(f"d_strength must be non-negative, got {d_strength}")
    rng = trajectory_rng(cfg.seed, index)
    return OUTrajectory(_ou_path(rng, cfg.n_steps, cfg.dt, d_strength, kappa), cfg.dt)


def _check_dt(p: ModelParams, dt: float):
    limit = max_stable_dt(p)
    if dt > limit * (1 + 1e-12):
        raise StepSizeError(f"dt={dt} exceeds 0.1/max(kappa, omega, gamma) = {limit}")


def _rk4_batch(p: ModelParams, noise: np.ndarray, s0: np.ndarray, dt: float, record_every: int):
    """RK4 over a block of trajectories; ``noise`` has shape (n_traj, n_steps)."""
    n_traj, n_steps = noise.shape
    g = p.gamma
    cphi, sphi = math.cos(p.phi), math.sin(p.phi)
    sx = np.full(n_traj, s0[0])
    sy = np.full(n_traj, s0[1])
    sz = np.full(n_traj, s0[2])
    n_rec = n_steps // record_every + 1
    out = np.empty((n_traj, n_rec, 3))
    out[:, 0] = s0
    h = dt / 2

    def f(x, y, z, hx, hy):
        return (-g * x + hy * z,
                -g * y - hx * z,
                hx * y - hy * x - 2 * g * z - 2 * g)

    rec = 1
    for n in range(n_steps):
        hx = p.omega + noise[:, n] * cphi
        hy = -noise[:, n] * sphi
        k1 = f(sx, sy, sz, hx, hy)
        k2 = f(sx + h * k1[0], sy + h * k1[1], sz + h * k1[2], hx, hy)
        k3 = f(sx + h * k2[0], sy + h * k2[1], sz + h * k2[2], hx, hy)
        k4 = f(sx + dt * k3[0], sy + dt * k3[1], sz + dt * k3[2], hx, hy)
        sx = sx + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        sy = sy + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        sz = sz + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if (n + 1) % record_every == 0:
            out[:, rec, 0] = sx
            out[:, rec, 1] = sy
            out[:, rec, 2] = sz
            rec += 1
    return out


def integrate_trajectory(p: ModelParams, path: OUTrajectory, b0: BlochState,
                         record_every: int = 1) -> BlochTrajectory:
    """Bloch vector under the full time-dependent drive for one noise path.

    The total field is ``(omega + x cos(phi), -x sin(phi), 0)`` in Bloch
    space, with ``x`` constant over each RK4 step, plus vacuum damping.
    """
    _check_dt(p, path.dt)
    s0 = np.asarray(b0.as_array() if isinstance(b0, BlochState) else b0, dtype=float)
    if np.linalg.norm(s0) > 1 + 1e-9:
        raise ValueError("initial Bloch vector outside the unit ball")
    states = _rk4_batch(p, path.samples[None, :], s0, path.dt, record_every)[0]
    times = np.arange(states.shape[0]) * path.dt * record_every
    return BlochTrajectory(times, states)


def _run_block(p, cfg, s0, start, stop, record_every):
    noise = np.stack([
        _ou_path(trajectory_rng(cfg.seed, i), cfg.n_steps, cfg.dt, p.d_strength, p.kappa)
        for i in range(start, stop)
    ])
    states = _rk4_batch(p, noise, s0, cfg.dt, record_every)
    bad = ~np.all(np.isfinite(states), axis=(1, 2))
    if bad.any():
        raise TrajectoryError(start + int(np.argmax(bad)), "non-finite Bloch vector")
    return states


def ensemble_average(p: ModelParams, cfg: OUConfig, b0, record_every: int = 1,
                     n_batches: int = 20, block_size: int = 250, threads: int = 1,
                     window: tuple[float, float] | None = None) -> EnsembleResult:
    """Mean and standard error over ``cfg.n_traj`` independent trajectories.

    Trajectory ``i`` draws its noise from ``trajectory_rng(cfg.seed, i)``, so
    the result does not depend on ``block_size`` or ``threads``.  With
    ``window=(t0, t1)`` the per-trajectory time averages over that window are
    kept in ``per_traj_window`` (independent samples, one per trajectory).
    """
    _check_dt(p, cfg.dt)
    s0 = np.asarray(b0.as_array() if isinstance(b0, BlochState) else b0, dtype=float)
    bounds = [(a, min(a + block_size, cfg.n_traj)) for a in range(0, cfg.n_traj, block_size)]

    def work(ab):
        try:
            return _run_block(p, cfg, s0, ab[0], ab[1], record_every)
        except TrajectoryError:
            raise
        except Exception as exc:
            raise TrajectoryError(ab[0], exc) from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(work, bounds))
    else:
        blocks = [work(ab) for ab in bounds]
    states = np.concatenate(blocks, axis=0)

    n = cfg.n_traj
    times = np.arange(states.shape[1]) * cfg.dt * record_every
    mean = states.mean(axis=0)
    if n > 1:
        stderr = states.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        stderr = np.full_like(mean, np.inf)

    batch_means = None
    if n >= 2 * n_batches:
        edges = np.linspace(0, n, n_batches + 1).astype(int)
        batch_means = np.stack([states[a:b].mean(axis=0) for a, b in zip(edges[:-1], edges[1:])])

    per_traj = {}
    if window is not None:
        sel = (times >= window[0]) & (times <= window[1])
        if not sel.any():
            raise ValueError(f"window {window} contains no recorded times")
        per_traj = {"window": window, "values": states[:, sel].mean(axis=1)}

    return EnsembleResult(times, mean, stderr, n, p, cfg.dt, batch_means, per_traj)


def _log_fit(t, y, w):
    coef = np.polyfit(t, np.log(y), 1, w=w)
    return -coef[0]


def fit_quadrature_decay(e: EnsembleResult, which: str = "x", t_start: float | None = None,
                         t_stop: float | None = None, envelope: bool | None = None,
                         snr: float = 5.0) -> DecayFit:
    """Decay rate of the mean ``sigma_x`` or ``sigma_y`` by log-linear least squares.

    The window starts at ``3/kappa`` by default and ends where the signal
    first drops below ``snr`` standard errors.  ``sigma_y`` is Rabi
    oscillating under a strong drive, so its Hilbert envelope is fitted
    (``envelope`` defaults to True for ``which="y"``).  The error bar is a
    delete-one-batch jackknife when batch means are available, else the
    weighted least-squares error, combined with the RK4 truncation floor.
    """
    if which not in ("x", "y"):
        raise ValueError(f"which must be 'x' or 'y', got {which!r}")
    if envelope is None:
        envelope = which == "y"
    p = e.params
    if t_start is None:
        t_start = 3.0 / p.kappa if p.kappa > 0 else 0.0
    k = "xy".index(which)
    mean = e.mean[:, k]
    se = e.stderr[:, k]
    if not np.all(np.isfinite(se)):
        raise FitDegenerateError("standard errors undefined (single trajectory)")

    def signal(m):
        return np.abs(hilbert(m)) if envelope else m

    sig = signal(mean)
    sel = e.times >= t_start
    if t_stop is not None:
        sel &= e.times <= t_stop
    idx = np.flatnonzero(sel)
    # contiguous run above the noise floor
    good = (sig[idx] > 0) & (sig[idx] > snr * se[idx])
    if not good.size or not good[0]:
        raise FitDegenerateError(f"{which}-quadrature signal below noise at t={t_start}")
    stop = np.argmin(good) if not good.all() else good.size
    idx = idx[:stop]
    if idx.size < 5:
        raise FitDegenerateError(f"only {idx.size} points above the noise floor")

    t = e.times[idx]
    rel = se[idx] / sig[idx]
    weights = 1.0 / rel if np.all(rel > 0) else np.ones_like(t)
    rate = _log_fit(t, sig[idx], weights)

    if e.batch_means is not None:
        nb = e.batch_means.shape[0]
        total = e.batch_means.sum(axis=0)
        jk = np.array([
            _log_fit(t, np.abs(signal((total - e.batch_means[j])[:, k] / (nb - 1)))[idx], weights)
            for j in range(nb)
        ])
        stat = math.sqrt((nb - 1) / nb * np.sum((jk - jk.mean()) ** 2))
    elif np.all(rel > 0):
        cov = np.polyfit(t, np.log(sig[idx]), 1, w=weights, cov="unscaled")[1]
        stat = math.sqrt(cov[0, 0])
    else:
        stat = 0.0
    trunc = abs(rate) * max((abs(rate) * e.dt) ** 4 / 120, 1e-12)
    return DecayFit(float(rate), float(math.hypot(stat, trunc)), float(t[0]), float(t[-1]), int(idx.size))
