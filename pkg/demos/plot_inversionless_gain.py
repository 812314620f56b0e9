"""
Probe gain without inversion
============================

A weak probe sees gain (negative absorption) at line centre for
intermediate phases, while the atomic population stays below inversion.
"""

import math
import warnings

import numpy as np

from phasemollow import ModelParams, RegimeWarning, build_stochastic_generator, dressed_rates
from phasemollow.spectra import absorption_spectrum, figure_grid, steady_state

warnings.simplefilter("ignore", RegimeWarning)
base = ModelParams(omega=400.0, kappa=100.0, d_strength=40.0)

for phi in (0.0, math.pi / 6, math.pi / 4, math.pi / 2):
    p = base.replace(phi=phi)
    g = build_stochastic_generator(p)
    r = dressed_rates(p)
    a = absorption_spectrum(g, figure_grid(r.omega_prime, r.gamma_par, r.gamma_perp))
    print(f"phi={phi:.4f}  A(0)={float(a(0.0)):+.3e}  asymmetry={a.asymmetry():.3g}  "
          f"sz={steady_state(g).sz:.4g}")

###############################################################################
# The inversion never becomes positive, whatever the phase.

sz = [steady_state(build_stochastic_generator(base.replace(phi=phi))).sz for phi in np.linspace(0, math.pi, 61)]
print(f"largest steady sz over phi: {max(sz):.3g}")
