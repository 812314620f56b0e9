"""
Phase-dependent Mollow triplet
==============================

A strong coherent drive splits resonance fluorescence into three peaks.
Adding a weak, broadband, amplitude-fluctuating field with a fixed phase
``phi`` relative to the drive reshapes the triplet: at ``phi = 0`` the
central peak is narrow and tall, at ``phi = pi/2`` the sidebands sharpen
instead.
"""

import math

import numpy as np

from phasemollow import ModelParams, build_stochastic_generator, dressed_rates
from phasemollow.spectra import figure_grid, fluorescence_numeric, peak_metrics

# Drive, noise bandwidth and noise strength, all in units of gamma.
base = ModelParams(omega=200.0, kappa=100.0, d_strength=10.0)

###############################################################################
# The secular rates predict the peak widths directly.

for phi in (0.0, math.pi / 2):
    r = dressed_rates(base.replace(phi=phi))
    print(f"phi={phi:.3f}: Gamma_par={r.gamma_par:.4g}  Gamma_perp={r.gamma_perp:.4g}  "
          f"Omega'={r.omega_prime:.5g}")

###############################################################################
# The full spectrum from the effective master equation agrees with them.

for phi in (0.0, math.pi / 2):
    p = base.replace(phi=phi)
    r = dressed_rates(p)
    spectrum = fluorescence_numeric(build_stochastic_generator(p),
                                    figure_grid(r.omega_prime, r.gamma_par, r.gamma_perp))
    for peak in sorted(peak_metrics(spectrum), key=lambda k: k.position):
        print(f"  phi={phi:.3f}  w={peak.position:8.2f}  height={peak.height:.4g}  hwhm={peak.hwhm:.4g}")

###############################################################################
# Sweeping the phase shows the weight moving from centre to sidebands.

phis = np.linspace(0, math.pi / 2, 5)
for phi in phis:
    p = base.replace(phi=phi, d_strength=40.0)
    spectrum = fluorescence_numeric(build_stochastic_generator(p), [0.0])
    print(f"phi/pi={phi / math.pi:.3f}  F(0)={spectrum.values[0]:.4g}")
