"""Model parameters, Bloch-space generators and closed-form rates.

All three reservoir models (amplitude-fluctuating field, classically squeezed
field, ideal squeezed vacuum) are represented by the same affine Bloch
generator

    d/dt (sx, sy, sz) = A @ (sx, sy, sz) + b

in the frame rotating at the common atom/laser frequency.  Rates and
frequencies are in units of the atomic decay constant ``gamma``.

Conventions
-----------
Basis ordering is (excited, ground).  ``sigma_+ = |e><g|``,
``sigma_x = sigma_- + sigma_+`` and ``sigma_y = i (sigma_- - sigma_+)``,
which gives the usual Pauli matrices.  The coherent drive is
``H = (omega / 2) sigma_x``.

For the squeezed reservoirs the pair-correlation terms are written with the
sign used for the classically squeezed field,

    + 2 gamma (c sigma_+ rho sigma_+ + c* sigma_- rho sigma_-),

so that a real ``m = c > 0`` suppresses the decay of ``sigma_x``:
``sigma_x`` decays at ``gamma (1 + 2N - 2m)`` and ``sigma_y`` at
``gamma (1 + 2N + 2m)``.  The squeezed vacuum with squeezing phase ``Phi``
uses ``c = -|M| exp(i Phi)``, so ``Phi = pi`` is ``m = +|M|`` and
``Phi = 0`` is ``m = -|M|``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

__all__ = [
    "RegimeWarning",
    "ModelParams",
    "SqueezedParams",
    "GeneratorCoefficients",
    "AffineBlochGenerator",
    "QuadratureRates",
    "DressedRates",
    "BlochState",
    "DressedState",
    "compute_coefficients",
    "build_stochastic_generator",
    "build_csf_generator",
    "build_isv_generator",
    "quadrature_rates",
    "dressed_rates",
    "to_dressed",
]

DEFAULT_REGIME_RATIO = 5.0


class RegimeWarning(UserWarning):
    """Parameters outside the strong-drive, broadband-noise regime."""


@dataclass(frozen=True)
class ModelParams:
    """Coherent drive plus amplitude-fluctuating field acting on a two-level atom.

    Parameters
    ----------
    omega : float
        Rabi frequency of the coherent field.
    gamma : float
        Atomic decay constant (the unit of every other rate).
    kappa : float
        Bandwidth of the stochastic field.
    d_strength : float
        Strength ``D`` of the stochastic process.
    phi : float
        Relative phase of the coherent and stochastic fields, in radians.
    """

    omega: float
    gamma: float = 1.0
    kappa: float = 0.0
    d_strength: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("omega", "gamma", "kappa", "d_strength", "phi"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.omega < 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if self.d_strength < 0:
            raise ValueError(f"d_strength must be non-negative, got {self.d_strength}")

    def regime_ok(self, ratio: float = DEFAULT_REGIME_RATIO) -> bool:
        """True when ``omega >= ratio*sqrt(D*kappa)`` and ``kappa >= ratio*gamma``."""
        strong_drive = self.omega >= ratio * math.sqrt(self.d_strength * self.kappa)
        broadband = self.kappa >= ratio * self.gamma
        return strong_drive and broadband

    def check_regime(self, ratio: float = DEFAULT_REGIME_RATIO, stacklevel: int = 2) -> bool:
        ok = self.regime_ok(ratio)
        if not ok:
            warnings.warn(
                f"parameters outside the secular regime (ratio {ratio}): "
                f"omega={self.omega}, sqrt(D*kappa)={math.sqrt(self.d_strength * self.kappa):.4g}, "
                f"kappa={self.kappa}, gamma={self.gamma}",
                RegimeWarning,
                stacklevel=stacklevel + 1,
            )
        return ok

    def replace(self, **changes) -> "ModelParams":
        values = dict(omega=self.omega, gamma=self.gamma, kappa=self.kappa,
                      d_strength=self.d_strength, phi=self.phi)
        values.update(changes)
        return ModelParams(**values)


@dataclass(frozen=True)
class SqueezedParams:
    """Squeezed reservoir: photon number ``N``, correlation ``|M|``, phase ``Phi``.

    ``kind`` is ``"csf"`` when ``|M| <= N`` (classically reachable) and
    ``"isv"`` when ``N < |M| <= sqrt(N (N + 1))``.
    """

    n_photon: float
    m_mag: float
    big_phi: float = 0.0
    kind: str = field(init=False)

    def __post_init__(self):
        if self.n_photon < 0:
            raise ValueError(f"n_photon must be non-negative, got {self.n_photon}")
        if self.m_mag < 0:
            raise ValueError(f"m_mag must be non-negative, got {self.m_mag}")
        bound = math.sqrt(self.n_photon * (self.n_photon + 1))
        if self.m_mag <= self.n_photon:
            kind = "csf"
        elif self.m_mag <= bound * (1 + 1e-12) + 1e-15:
            kind = "isv"
        else:
            raise ValueError(
                f"|M|={self.m_mag} exceeds the quantum bound sqrt(N(N+1))={bound}"
            )
        object.__setattr__(self, "kind", kind)

    @classmethod
    def ideal(cls, n_photon: float, big_phi: float = 0.0) -> "SqueezedParams":
        """Ideal squeezed vacuum, ``|M| = sqrt(N (N + 1))``."""
        return cls(n_photon, math.sqrt(n_photon * (n_photon + 1)), big_phi)


@dataclass(frozen=True)
class GeneratorCoefficients:
    alpha0: complex
    alpha: complex


@dataclass(frozen=True, eq=False)
class AffineBlochGenerator:
    """``d/dt s = drift @ s + pump`` for the Bloch vector ``s = (sx, sy, sz)``."""

    drift: np.ndarray
    pump: np.ndarray

    def __post_init__(self):
        drift = np.array(self.drift, dtype=float)
        pump = np.array(self.pump, dtype=float)
        if drift.shape != (3, 3) or pump.shape != (3,):
            raise ValueError(f"expected (3, 3) drift and (3,) pump, got {drift.shape}, {pump.shape}")
        drift.setflags(write=False)
        pump.setflags(write=False)
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "pump", pump)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return s @ self.drift.T + self.pump

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.drift)

    def augmented(self) -> np.ndarray:
        """4x4 linear generator acting on ``(sx, sy, sz, 1)``."""
        out = np.zeros((4, 4))
        out[:3, :3] = self.drift
        out[:3, 3] = self.pump
        return out

    def propagate(self, s0, t) -> np.ndarray:
        """Exact solution at time ``t`` by matrix exponential.

        A scalar ``t`` returns an array shaped like ``s0``; an array of times
        returns one row per time for a single initial vector.
        """
        s0 = np.asarray(s0, dtype=float)
        if np.ndim(t) == 0:
            prop = expm(self.augmented() * t)
            return s0 @ prop[:3, :3].T + prop[:3, 3]
        return np.stack([self.propagate(s0, tk) for tk in np.asarray(t, dtype=float)])

    def max_abs_diff(self, other: "AffineBlochGenerator") -> float:
        return float(max(np.max(np.abs(self.drift - other.drift)),
                         np.max(np.abs(self.pump - other.pump))))


@dataclass(frozen=True)
class QuadratureRates:
    gamma_x: float
    gamma_y: float
    gamma_z: float


@dataclass(frozen=True)
class DressedRates:
    gamma_par: float
    gamma_perp: float
    omega_prime: float


@dataclass(frozen=True)
class BlochState:
    sx: float
    sy: float
    sz: float

    def __post_init__(self):
        if self.norm() > 1 + 1e-9:
            raise ValueError(f"Bloch vector outside the unit ball: |s| = {self.norm()}")

    @classmethod
    def from_array(cls, s) -> "BlochState":
        sx, sy, sz = (float(v) for v in s)
        return cls(sx, sy, sz)

    def as_array(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz])

    def norm(self) -> float:
        return math.sqrt(self.sx**2 + self.sy**2 + self.sz**2)

    @property
    def excited_population(self) -> float:
        """``<sigma_+ sigma_->``."""
        return 0.5 * (1 + self.sz)

    @property
    def sigma_minus(self) -> complex:
        """``<sigma_->``."""
        return 0.5 * complex(self.sx, self.sy)


@dataclass(frozen=True)
class DressedState:
    inv_dressed: float
    coh_dressed: complex


def _phase_factors(p: ModelParams):
    denom = p.kappa**2 + p.omega**2
    if denom == 0:
        # kappa = omega = 0: the kappa^2/(kappa^2+omega^2) factor has no limit; take 1
        return 1.0, 0.0
    return p.kappa**2 / denom, p.omega * p.kappa / denom


def compute_coefficients(p: ModelParams) -> GeneratorCoefficients:
    """Complex rates ``alpha0`` and ``alpha`` of the effective master equation."""
    lorentz, _ = _phase_factors(p)
    e2 = complex(math.cos(2 * p.phi), math.sin(2 * p.phi))
    denom = p.kappa**2 + p.omega**2
    if denom == 0:
        alpha0 = 0j
    else:
        alpha0 = -1j * p.d_strength * p.omega * p.kappa / (8 * denom) * (1 - e2)
    alpha = p.d_strength / 8 * (1 + e2 + lorentz * (1 - e2))
    return GeneratorCoefficients(alpha0=complex(alpha0), alpha=complex(alpha))


def build_stochastic_generator(p: ModelParams) -> AffineBlochGenerator:
    """Bloch generator of the effective phase-dependent master equation.

    Hand expansion of the reduced master equation over the Pauli basis; the
    unit tests lock it against a direct 2x2 evaluation of the equation.
    """
    g, om, d = p.gamma, p.omega, p.d_strength
    lorentz, cross = _phase_factors(p)
    s2, c2 = math.sin(p.phi) ** 2, math.cos(p.phi) ** 2
    s2phi = math.sin(2 * p.phi)

    gx = g + d * lorentz * s2
    gy = g + d * c2
    drift = np.array([
        [-gx, -0.5 * d * s2phi, 0.0],
        [-0.5 * d * lorentz * s2phi, -gy, -om],
        [-0.5 * d * cross * s2phi, om + d * cross * s2, -(gx + gy)],
    ])
    return AffineBlochGenerator(drift, np.array([0.0, 0.0, -2 * g]))


def _squeezed_generator(gamma: float, omega: float, n: float, c: complex) -> AffineBlochGenerator:
    # c is the coefficient of +2*gamma*sigma_+ rho sigma_+ (see module docstring)
    re, im = c.real, c.imag
    drift = np.array([
        [-gamma * (1 + 2 * n - 2 * re), -2 * gamma * im, 0.0],
        [-2 * gamma * im, -gamma * (1 + 2 * n + 2 * re), -omega],
        [0.0, omega, -2 * gamma * (1 + 2 * n)],
    ])
    return AffineBlochGenerator(drift, np.array([0.0, 0.0, -2 * gamma]))


def build_csf_generator(gamma: float, omega: float, n: float, m: float) -> AffineBlochGenerator:
    """Atom driven at Rabi frequency ``omega`` in a classically squeezed field.

    ``m`` is signed: ``m = +N`` corresponds to squeezing phase ``pi`` and
    ``m = -N`` to phase 0.  ``sigma_x`` decays at ``gamma(1 + 2n - 2m)``,
    ``sigma_y`` at ``gamma(1 + 2n + 2m)``.
    """
    if n < 0:
        raise ValueError(f"photon number must be non-negative, got {n}")
    if abs(m) > n * (1 + 1e-12) + 1e-15:
        warnings.warn(f"|m|={abs(m)} exceeds n={n}: not a classical correlation", stacklevel=2)
    return _squeezed_generator(gamma, omega, n, complex(m))


def build_isv_generator(gamma: float, omega: float, s: SqueezedParams) -> AffineBlochGenerator:
    """Atom driven at Rabi frequency ``omega`` in a (possibly ideal) squeezed vacuum."""
    bound = math.sqrt(s.n_photon * (s.n_photon + 1))
    if s.m_mag > bound + 1e-12:
        raise ValueError(f"|M|={s.m_mag} exceeds sqrt(N(N+1))={bound}")
    c = -s.m_mag * complex(math.cos(s.big_phi), math.sin(s.big_phi))
    return _squeezed_generator(gamma, omega, s.n_photon, c)


def quadrature_rates(p: ModelParams) -> QuadratureRates:
    lorentz, _ = _phase_factors(p)
    gx = p.gamma + p.d_strength * lorentz * math.sin(p.phi) ** 2
    gy = p.gamma + p.d_strength * math.cos(p.phi) ** 2
    return QuadratureRates(gx, gy, gx + gy)


def dressed_rates(p: ModelParams, ratio: float = DEFAULT_REGIME_RATIO) -> DressedRates:
    """Dressed-state inversion/coherence decay rates and shifted Rabi frequency.

    Warns with :class:`RegimeWarning` outside the secular regime.
    """
    p.check_regime(ratio)
    q = quadrature_rates(p)
    denom = p.kappa**2 + p.omega**2
    shift = p.d_strength * p.kappa / (2 * denom) * math.sin(p.phi) ** 2 if denom else 0.0
    return DressedRates(
        gamma_par=q.gamma_x,
        gamma_perp=0.5 * (q.gamma_y + q.gamma_z),
        omega_prime=p.omega * (1 + shift),
    )


def to_dressed(b: BlochState) -> DressedState:
    """Dressed-state inversion and coherence of a Bloch vector.

    Dressed states are ``|+-> = (|g> +- |e>)/sqrt(2)``, the eigenstates of
    ``sigma_x``.  Returns ``rho_++ - rho_-- = sx`` and
    ``rho_+- = <+|rho|-> = -(sz + i sy)/2``.
    """
    return DressedState(inv_dressed=b.sx, coh_dressed=-0.5 * complex(b.sz, b.sy))
