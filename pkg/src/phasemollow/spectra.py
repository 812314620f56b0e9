"""Steady states, regression-theorem correlations and spectra.

Spectra are evaluated in closed form through the resolvent ``(s I - A)^-1``
of the Bloch drift matrix, one 3x3 complex solve per frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .model import (
    AffineBlochGenerator,
    BlochState,
    ModelParams,
    dressed_rates,
)

__all__ = [
    "DegenerateGeneratorError",
    "PeakResolutionError",
    "PAULI",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "FrequencyGrid",
    "SpectrumSeries",
    "Correlation",
    "Peak",
    "steady_state",
    "regression_correlation",
    "fluorescence_numeric",
    "fluorescence_analytic",
    "absorption_spectrum",
    "peak_metrics",
    "figure_grid",
    "generator_grid",
    "phase_sweep",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()


class DegenerateGeneratorError(ValueError):
    """Drift matrix is singular: no unique steady state."""


class PeakResolutionError(ValueError):
    """A spectral peak has too few samples above half maximum."""


def density_matrix(s) -> np.ndarray:
    sx, sy, sz = s
    return 0.5 * (np.eye(2) + sx * SIGMA_X + sy * SIGMA_Y + sz * SIGMA_Z)


def bloch_coordinates(x: np.ndarray) -> tuple[complex, np.ndarray]:
    """Trace and generalized Bloch vector ``Tr(sigma_k X)`` of a 2x2 operator."""
    return np.trace(x), np.array([np.trace(p @ x) for p in PAULI])


@dataclass(frozen=True)
class FrequencyGrid:
    points: np.ndarray
    symmetric: bool = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise ValueError("frequency grid is empty")
        if pts.size > 1 and np.any(np.diff(pts) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        sym = bool(np.allclose(pts[::-1], -pts, rtol=0, atol=1e-12 * max(1.0, np.abs(pts).max())))
        object.__setattr__(self, "symmetric", sym)

    def __len__(self):
        return self.points.size

    @classmethod
    def linspace(cls, lo: float, hi: float, count: int) -> "FrequencyGrid":
        if count < 2:
            raise ValueError(f"grid count must be at least 2, got {count}")
        if not lo < hi:
            raise ValueError(f"grid minimum {lo} must be below maximum {hi}")
        return cls(np.linspace(lo, hi, count))

    def refined(self, center: float, half_width: float, count: int) -> "FrequencyGrid":
        """Merge in ``count`` uniform points on ``center +- half_width``."""
        lo, hi = self.points[0], self.points[-1]
        extra = np.linspace(center - half_width, center + half_width, count)
        extra = extra[(extra >= lo) & (extra <= hi)]
        merged = np.union1d(self.points, extra)
        # drop near-duplicates left by floating point
        keep = np.concatenate([[True], np.diff(merged) > 1e-9 * max(1.0, hi - lo)])
        return FrequencyGrid(merged[keep])


def figure_grid(omega_prime: float, gamma_par: float, gamma_perp: float | None = None,
                count: int = 4001, span: float = 1.6, refine_points: int = 801) -> FrequencyGrid:
    """Symmetric grid over ``+-span*omega_prime`` with dense points near line centre.

    The centre is refined over ``+-8 gamma_par``; with ``gamma_perp`` given, the
    sidebands at ``+-omega_prime`` get the same treatment over ``+-8 gamma_perp``.
    """
    half = span * max(omega_prime, 8 * gamma_par)
    grid = FrequencyGrid.linspace(-half, half, count)
    grid = grid.refined(0.0, 8 * gamma_par, refine_points)
    if gamma_perp is not None and omega_prime > 0:
        for c in (-omega_prime, omega_prime):
            grid = grid.refined(c, 8 * gamma_perp, refine_points)
    return grid


def generator_grid(g: AffineBlochGenerator, count: int = 4001, span: float = 1.6,
                   refine_points: int = 801) -> FrequencyGrid:
    """:func:`figure_grid` with widths and Rabi frequency read off the drift eigenvalues."""
    ev = g.eigenvalues()
    osc = ev[np.abs(ev.imag) > 1e-9]
    real = ev[np.abs(ev.imag) <= 1e-9]
    gamma_par = float(-real.real.max()) if real.size else float(-ev.real.max())
    if osc.size:
        return figure_grid(float(np.abs(osc.imag).max()), gamma_par, float(-osc.real.max()),
                           count=count, span=span, refine_points=refine_points)
    return figure_grid(0.0, gamma_par, count=count, span=span, refine_points=refine_points)


@dataclass(frozen=True, eq=False)
class SpectrumSeries:
    grid: FrequencyGrid
    values: np.ndarray
    kind: str
    model: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.points.shape:
            raise ValueError("values and grid differ in length")
        if not np.all(np.isfinite(vals)):
            raise ValueError("spectrum contains non-finite values")
        if self.kind not in ("fluorescence", "absorption"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def omega(self) -> np.ndarray:
        return self.grid.points

    def __call__(self, w):
        return np.interp(w, self.omega, self.values)

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.omega))

    def asymmetry(self) -> float:
        """``max |S(w) - S(-w)| / max |S|`` (interpolated onto the mirrored grid)."""
        mirrored = np.interp(-self.omega, self.omega, self.values)
        return float(np.max(np.abs(self.values - mirrored)) / np.max(np.abs(self.values)))


def steady_state(g: AffineBlochGenerator) -> BlochState:
    """Unique stationary Bloch vector, ``A s = -b``."""
    a = g.drift
    if np.linalg.cond(a) > 1e13:
        raise DegenerateGeneratorError("drift matrix is singular; no unique steady state")
    s = np.linalg.solve(a, -g.pump)
    resid = np.max(np.abs(a @ s + g.pump))
    scale = max(1.0, np.max(np.abs(a)))
    if resid > 1e-12 * scale:
        raise DegenerateGeneratorError(f"steady-state residual {resid:.3e} too large")
    return BlochState.from_array(s)


@dataclass(frozen=True, eq=False)
class Correlation:
    """Stationary two-time correlation ``C(tau)`` for ``tau >= 0``.

    ``C(tau) = constant + u @ expm(A tau) @ delta0``; the constant is the
    factorized long-time limit.
    """

    drift: np.ndarray
    u: np.ndarray
    delta0: np.ndarray
    constant: complex

    @property
    def at_zero(self) -> complex:
        return complex(self.constant + self.u @ self.delta0)

    @property
    def limit(self) -> complex:
        return complex(self.constant)

    def __call__(self, tau) -> np.ndarray:
        from scipy.linalg import expm

        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.array([self.u @ (expm(self.drift * t) @ self.delta0) for t in tau])
        return self.constant + out

    def connected_laplace(self, s) -> np.ndarray:
        """``int_0^inf (C(tau) - constant) exp(-s tau) dtau`` for complex ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        mats = s[:, None, None] * np.eye(3) - self.drift
        rhs = np.broadcast_to(self.delta0.astype(complex), (s.size, 3))[..., None]
        sol = np.linalg.solve(mats, rhs)[..., 0]
        return sol @ self.u

    def laplace(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return self.constant / s + self.connected_laplace(s)


def regression_correlation(g: AffineBlochGenerator, s_ss: BlochState, observable_pair,
                           ordering: str = "normal") -> Correlation:
    """Correlation of ``(O1, O2)`` in the steady state by the regression theorem.

    ``ordering="normal"`` gives ``<O1(tau) O2(0)>``; ``"commutator"`` gives
    ``<[O1(tau), O2(0)]>``.  Operators are 2x2 arrays in (excited, ground) order.
    """
    o1, o2 = (np.asarray(o, dtype=complex) for o in observable_pair)
    rho = density_matrix(s_ss.as_array())
    if ordering == "normal":
        x0 = o2 @ rho
    elif ordering == "commutator":
        x0 = o2 @ rho - rho @ o2
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    trace0, v0 = bloch_coordinates(x0)
    u = np.array([np.trace(o1 @ p) for p in PAULI]) / 2
    mean_o1 = np.trace(o1 @ rho)
    return Correlation(
        drift=np.asarray(g.drift),
        u=u,
        delta0=v0 - trace0 * s_ss.as_array(),
        constant=complex(trace0 * mean_o1),
    )


def _as_grid(grid) -> FrequencyGrid:
    if isinstance(grid, FrequencyGrid):
        return grid
    return FrequencyGrid(np.asarray(grid, dtype=float))


def fluorescence_numeric(g: AffineBlochGenerator, grid, model: str = "", params=None) -> SpectrumSeries:
    """Incoherent resonance-fluorescence spectrum.

    ``F(w) = Re int_0^inf [<s+(tau) s-(0)> - |<s->|^2] exp(-i w tau) dtau``
    """
    grid = _as_grid(grid)
    corr = regression_correlation(g, steady_state(g), (SIGMA_PLUS, SIGMA_MINUS))
    vals = corr.connected_laplace(1j * grid.points).real
    return SpectrumSeries(grid, vals, "fluorescence", model, dict(params or {}))


def fluorescence_analytic(p: ModelParams, grid, use_shift: bool = True) -> SpectrumSeries:
    """Secular three-Lorentzian triplet built from the dressed-state rates.

    With ``use_shift=False`` the sidebands sit at the bare Rabi frequency.
    """
    grid = _as_grid(grid)
    r = dressed_rates(p)
    w = grid.points
    wp = r.omega_prime if use_shift else p.omega
    gpar, gperp = r.gamma_par, r.gamma_perp
    vals = (gperp / 8 / (gperp**2 + (w + wp) ** 2)
            + gpar / 4 / (gpar**2 + w**2)
            + gperp / 8 / (gperp**2 + (w - wp) ** 2))
    return SpectrumSeries(grid, vals, "fluorescence", "analytic", _params_dict(p))


def absorption_spectrum(g: AffineBlochGenerator, grid, model: str = "", params=None) -> SpectrumSeries:
    """Weak-probe absorption, positive for absorption and negative for gain.

    ``A(w) = Re int_0^inf <[s-(tau), s+(0)]> exp(i w tau) dtau``
    """
    grid = _as_grid(grid)
    corr = regression_correlation(g, steady_state(g), (SIGMA_MINUS, SIGMA_PLUS), ordering="commutator")
    vals = corr.connected_laplace(-1j * grid.points).real
    return SpectrumSeries(grid, vals, "absorption", model, dict(params or {}))


def phase_sweep(p: ModelParams, phis, grid, kind: str = "fluorescence") -> np.ndarray:
    """Spectra of the stochastic model on a common grid, one row per phase."""
    from .model import build_stochastic_generator

    grid = _as_grid(grid)
    spectrum = {"fluorescence": fluorescence_numeric, "absorption": absorption_spectrum}[kind]
    rows = [spectrum(build_stochastic_generator(p.replace(phi=float(phi))), grid).values for phi in phis]
    return np.array(rows)


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    hwhm: float


def _half_crossing(w, v, i, half, step):
    j = i
    while 0 <= j + step < len(v):
        if v[j + step] < half:
            x0, x1, y0, y1 = w[j], w[j + step], v[j], v[j + step]
            return x0 + (half - y0) * (x1 - x0) / (y1 - y0), abs(j - i)
        j += step
    return None, abs(j - i)


def peak_metrics(s: SpectrumSeries, min_points: int = 7, prominence: float = 1e-4) -> list[Peak]:
    """Position, height and half width at half maximum of each local maximum.

    Peaks are strict local maxima with prominence above ``prominence * max``.
    Half-maximum crossings are linearly interpolated.
    """
    w, v = s.omega, s.values
    top = np.max(v)
    if top <= 0 or np.ptp(v) == 0:
        return []
    idx, _ = find_peaks(v, prominence=prominence * top)
    peaks = []
    for i in idx:
        half = v[i] / 2
        right, n_right = _half_crossing(w, v, i, half, +1)
        left, n_left = _half_crossing(w, v, i, half, -1)
        if left is None and right is None:
            raise PeakResolutionError(f"peak at w={w[i]:.6g} has no half-maximum crossing")
        above = n_left + n_right + 1
        if above < min_points:
            raise PeakResolutionError(
                f"peak at w={w[i]:.6g} under-resolved: {above} points above half maximum, "
                f"need {min_points}"
            )
        widths = [abs(x - w[i]) for x in (left, right) if x is not None]
        peaks.append(Peak(float(w[i]), float(v[i]), float(np.mean(widths))))
    return peaks


def _params_dict(p: ModelParams) -> dict:
    return dict(omega=p.omega, gamma=p.gamma, kappa=p.kappa, d_strength=p.d_strength, phi=p.phi)
