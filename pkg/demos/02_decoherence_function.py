"""Gamma(t) for a discrete bath and for its continuum limit.

With a handful of modes Gamma(t) oscillates and keeps coming back; with
an ohmic continuum it grows without bound. The continuum value comes from
oscillation-aware quadrature and is checked against a dense midpoint
discretization of the same spectrum.
"""
import math

import numpy as np

from dephase import SpectralFunction, discretize_spectral, gamma_continuum, gamma_discrete

beta = 10.0
spec = SpectralFunction(amplitude=1.0, exponent=1.0, cutoff=1.0)

# %% Few modes: recurrences
coarse = discretize_spectral(spec, K=5, omega_max=5.0)
ts = np.linspace(0, 4 * math.pi, 9)
print("5-mode bath, Gamma(t):", np.round(gamma_discrete(coarse, beta, ts), 4))

# %% Dense discretization against the continuum integral
dense = discretize_spectral(spec, K=20000, omega_max=40.0)
print(f"{'t':>6} {'continuum':>14} {'20000 modes':>14} {'rel diff':>9}")
for t in (0.1, 1.0, 10.0, 50.0):
    cont, err = gamma_continuum(spec, beta, t)
    disc = gamma_discrete(dense, beta, t)
    print(f"{t:6g} {cont:14.8f} {disc:14.8f} {abs(disc - cont) / cont:9.1e}")

# %% Zero temperature, ohmic: Gamma = 2 ln(1 + t^2) exactly
for t in (0.5, 5.0, 500.0):
    print(f"t={t:g}: quadrature {gamma_continuum(spec, math.inf, t)[0]:.12f}, exact {2 * math.log1p(t * t):.12f}")

# %% Coherence left in a qubit with pointer values 0 and 1
for t in (1.0, 10.0, 100.0):
    g = gamma_continuum(spec, beta, t)[0]
    print(f"t={t:g}: |rho_01(t)|/|rho_01(0)| = {math.exp(-0.25 * g):.3e}")
