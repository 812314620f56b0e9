"""Independent reference computations used by the tests.

Nothing here imports the closed-form generators: master equations are
applied term by term to 2x2 matrices, and correlations are integrated in
the time domain.
"""

import cmath
import math

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

SP = np.array([[0, 1], [0, 0]], dtype=complex)  # sigma_+ in (excited, ground) order
SM = SP.conj().T
SX = SM + SP
SY = 1j * (SM - SP)
SZ = SP @ SM - SM @ SP
I2 = np.eye(2, dtype=complex)
PAULI = (SX, SY, SZ)


def comm(a, b):
    return a @ b - b @ a


def vacuum_damping(rho, gamma):
    return gamma * (2 * SM @ rho @ SP - SP @ SM @ rho - rho @ SP @ SM)


def effective_rhs(rho, omega, gamma, kappa, d, phi):
    """Right side of the reduced master equation with the stochastic field eliminated."""
    e2 = cmath.exp(2j * phi)
    alpha0 = -1j * d * omega * kappa / (8 * (kappa**2 + omega**2)) * (1 - e2)
    alpha = d / 8 * (1 + e2 + kappa**2 / (kappa**2 + omega**2) * (1 - e2))
    h = omega / 2 * (SP + SM)
    out = -1j * comm(h, rho) + vacuum_damping(rho, gamma)
    out += comm(SZ @ rho @ SZ - rho, alpha0 * SP - np.conj(alpha0) * SM)
    x = cmath.exp(-1j * phi) * SM + cmath.exp(1j * phi) * SP
    y = alpha * cmath.exp(-1j * phi) * SM + np.conj(alpha) * cmath.exp(1j * phi) * SP
    out += comm(x, comm(rho, y))
    return out


def csf_rhs(rho, omega, gamma, n, m):
    """Classically squeezed reservoir as printed: +2 gamma M (s+ rho s+ + s- rho s-)."""
    h = omega / 2 * (SP + SM)
    out = -1j * comm(h, rho)
    out += gamma * (n + 1) * (2 * SM @ rho @ SP - SP @ SM @ rho - rho @ SP @ SM)
    out += gamma * n * (2 * SP @ rho @ SM - SM @ SP @ rho - rho @ SM @ SP)
    out += 2 * gamma * m * SP @ rho @ SP + 2 * gamma * np.conj(m) * SM @ rho @ SM
    return out


def isv_rhs(rho, omega, gamma, n, m_mag, big_phi):
    """Squeezed vacuum, standard form: -2 gamma M s+ rho s+ - 2 gamma M* s- rho s-, M = |M| e^{i Phi}."""
    return csf_rhs(rho, omega, gamma, n, -m_mag * cmath.exp(1j * big_phi))


def bloch_generator(rhs):
    """Read the affine Bloch generator (A, b) off a density-matrix right side."""
    a = np.zeros((3, 3))
    for j, pj in enumerate(PAULI):
        out = rhs(pj / 2)
        # rho = (I + s.sigma)/2 is affine in s, so the s_j column is L(sigma_j / 2)
        for k, pk in enumerate(PAULI):
            a[k, j] = np.trace(pk @ out).real
    b = np.array([np.trace(pk @ rhs(I2 / 2)).real for pk in PAULI])
    return a, b


def coefficients_mp(omega, kappa, d, phi, dps=50):
    """Arbitrary-precision alpha0 and alpha."""
    with mpmath.workdps(dps):
        om, ka, dd, ph = (mpmath.mpf(v) for v in (omega, kappa, d, phi))
        e2 = mpmath.exp(2j * ph)
        alpha0 = -1j * dd * om * ka / (8 * (ka**2 + om**2)) * (1 - e2)
        alpha = dd / 8 * (1 + e2 + ka**2 / (ka**2 + om**2) * (1 - e2))
        return complex(alpha0), complex(alpha)


def to_dressed_oracle(s):
    """Basis change of the density matrix to |+-> = (|g> +- |e>)/sqrt(2)."""
    rho = 0.5 * (I2 + s[0] * SX + s[1] * SY + s[2] * SZ)
    e, g = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    plus, minus = (g + e) / math.sqrt(2), (g - e) / math.sqrt(2)
    rpp = plus.conj() @ rho @ plus
    rmm = minus.conj() @ rho @ minus
    return (rpp - rmm).real, plus.conj() @ rho @ minus


def evolve_density(rhs, rho0, t_end, t_eval):
    """Integrate a 2x2 master equation with a stiff-safe method."""
    def f(_, y):
        return rhs(y.reshape(2, 2)).ravel()

    sol = solve_ivp(f, (0, t_end), rho0.astype(complex).ravel(), method="DOP853",
                    t_eval=t_eval, rtol=1e-11, atol=1e-13)
    return sol.y.T.reshape(-1, 2, 2)


def steady_density(rhs):
    """Null vector of the 4x4 superoperator with unit trace."""
    sup = np.zeros((4, 4), dtype=complex)
    for k in range(4):
        e = np.zeros(4, dtype=complex)
        e[k] = 1
        sup[:, k] = rhs(e.reshape(2, 2)).ravel()
    w, v = np.linalg.eig(sup)
    rho = v[:, np.argmin(np.abs(w))].reshape(2, 2)
    return rho / np.trace(rho)


def time_domain_spectrum(rhs, o1, o2, omegas, t_end, n_t=40001, commutator=False, sign=-1):
    """``Re int_0^T [<O1(t) O2> - <O1><O2>] exp(sign*i*w*t) dt`` by regression + quadrature."""
    rho = steady_density(rhs)
    x0 = o2 @ rho - (rho @ o2 if commutator else 0)
    t = np.linspace(0, t_end, n_t)
    xs = evolve_density(rhs, x0, t_end, t)
    corr = np.einsum("ij,tji->t", o1, xs)
    if not commutator:
        corr = corr - np.trace(o1 @ rho) * np.trace(o2 @ rho)
    from scipy.integrate import simpson

    return np.array([simpson(corr * np.exp(sign * 1j * w * t), x=t).real for w in omegas])
