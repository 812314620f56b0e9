"""Checks of the effective master equation against stochastic trajectories."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .model import ModelParams, build_stochastic_generator, quadrature_rates
from .spectra import steady_state
from .stochastic import (
    FitDegenerateError,
    OUConfig,
    ensemble_average,
    fit_quadrature_decay,
    generate_ou,
)


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    predicted: float
    tolerance: float
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (f"{status} {self.name}: measured={self.measured:.6g} "
                f"predicted={self.predicted:.6g} tol={self.tolerance:.3g}")
        return text + (f" ({self.note})" if self.note else "")

    def as_dict(self) -> dict:
        return asdict(self)


def _within(name, measured, predicted, se, sigmas, note=""):
    tol = sigmas * se
    ok = bool(np.isfinite(tol) and abs(measured - predicted) <= tol)
    return Check(name, ok, float(measured), float(predicted), float(tol), note)


def batch_estimate(samples: np.ndarray, n_batches: int = 100) -> tuple[float, float]:
    """Mean of a correlated series and its batch-means standard error."""
    samples = np.asarray(samples, dtype=float)
    usable = samples.size - samples.size % n_batches
    batches = samples[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(samples.mean()), float(batches.std(ddof=1) / math.sqrt(n_batches))


def ou_lag_statistics(x: np.ndarray, lags: list[int], n_batches: int = 100):
    """Autocovariance estimates ``<x[n] x[n+L]>`` with batch-means errors."""
    out = []
    for lag in lags:
        prod = x[: x.size - lag] * x[lag:]
        out.append((lag,) + batch_estimate(prod, n_batches))
    return out


def ou_checks(d_strength: float, kappa: float, dt: float, n_steps: int = 10**6, seed: int = 0,
              sigmas: float = 3.0) -> list[Check]:
    """Stationary variance, autocovariance at lags 1/kappa and 3/kappa, and normality."""
    cfg = OUConfig(dt=dt, n_steps=n_steps, seed=seed)
    x = generate_ou(cfg, d_strength, kappa).samples
    var = d_strength * kappa
    checks = []
    if var == 0:
        return [Check("ou_variance", bool(np.all(x == 0)), float(np.max(np.abs(x))), 0.0, 0.0)]
    lag_times = {"ou_variance": 0.0, "ou_autocov_1/kappa": 1 / kappa, "ou_autocov_3/kappa": 3 / kappa}
    for name, tau in lag_times.items():
        lag = int(round(tau / dt))
        _, est, se = ou_lag_statistics(x, [lag])[0]
        checks.append(_within(name, est, var * math.exp(-kappa * lag * dt), se, sigmas,
                              f"lag {lag * dt:.4g}"))
    z = x / math.sqrt(var)
    skew, skew_se = batch_estimate(z**3)
    kurt, kurt_se = batch_estimate(z**4 - 3)
    checks.append(_within("ou_skewness", skew, 0.0, skew_se, sigmas))
    checks.append(_within("ou_excess_kurtosis", kurt, 0.0, kurt_se, sigmas))
    return checks


def validation_checks(p: ModelParams, cfg: OUConfig, record_every: int = 10, threads: int = 1,
                      sigmas: float = 3.0, ou_steps: int = 10**6) -> list[Check]:
    """All validation checks for one parameter set.

    Steady ``sz`` is compared at the final time of a run started in the
    ground state; ``gamma_x`` is fitted on a run started at ``(1, 0, 0)``.
    """
    checks = ou_checks(p.d_strength, p.kappa, cfg.dt, ou_steps, cfg.seed, sigmas)

    predicted_sz = steady_state(build_stochastic_generator(p)).sz
    ens = ensemble_average(p, cfg, (0.0, 0.0, -1.0), record_every=record_every, threads=threads)
    if cfg.n_traj < 2:
        note = f"under-sampled: n_traj={cfg.n_traj}, standard error undefined"
        checks.append(Check("steady_sz", False, float(ens.mean[-1, 2]), predicted_sz, math.inf, note))
        checks.append(Check("gamma_x_fit", False, math.nan, quadrature_rates(p).gamma_x, math.inf, note))
        return checks
    checks.append(_within("steady_sz", ens.mean[-1, 2], predicted_sz, ens.stderr[-1, 2], sigmas,
                          f"t={ens.times[-1]:.4g}, n_traj={cfg.n_traj}"))

    decay = ensemble_average(p, cfg, (1.0, 0.0, 0.0), record_every=record_every, threads=threads)
    try:
        fit = fit_quadrature_decay(decay, "x")
        checks.append(_within("gamma_x_fit", fit.rate, quadrature_rates(p).gamma_x, fit.stderr, sigmas,
                              f"window [{fit.t_start:.3g}, {fit.t_stop:.3g}]"))
    except FitDegenerateError as exc:
        checks.append(Check("gamma_x_fit", False, math.nan, quadrature_rates(p).gamma_x, math.inf, str(exc)))
    return checks
