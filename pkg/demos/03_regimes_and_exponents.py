"""Quiet, quantum and thermal regimes and the role of the spectral exponent.

For an ohmic bath (n = 1) with 1/w_c << beta, Gamma grows as t^2, then
as ln t, then linearly in t. For n < 2 the late-time growth is t^(2-n);
for n >= 2 Gamma saturates and coherence is never fully lost.
"""
import numpy as np

from dephase import (
    SpectralFunction,
    analyze_regimes,
    continuum_curve,
    decoherence_complete,
    gamma_continuum,
    regime,
)

beta = 1e4

# %% Where the regime boundaries fall
ohmic = SpectralFunction(1.0, 1.0, 1.0)
for t in (1e-2, 10.0, 1e6):
    print(f"t={t:g}: {regime(t, beta, ohmic).kind.value}")

# %% Local log-log slope along the ohmic curve
t = np.geomspace(1e-3, 1e8, 23)
curve = continuum_curve(ohmic, beta, t)
slope = np.gradient(np.log(curve.values), np.log(curve.times))
for ti, s in zip(t[::2], slope[::2]):
    print(f"t={ti:9.2e}  d ln Gamma / d ln t = {s:6.3f}")

# %% Fitted exponents per regime for several spectral exponents
for n in (0.5, 1.0, 1.5, 3.0):
    spec = SpectralFunction(1.0, n, 1.0)
    print(f"\nn = {n}: complete decoherence: {decoherence_complete(spec)}")
    for fit in analyze_regimes(spec, beta):
        lo, hi = fit.window
        print(f"  {fit.regime:8s} [{lo:8.2e}, {hi:8.2e}] {fit.model.value:5s} slope {fit.slope:8.4f}  residual {fit.residual:.1e}")

# %% Saturation for n = 3
spec = SpectralFunction(1.0, 3.0, 1.0)
g10, g100 = (gamma_continuum(spec, beta, k * beta)[0] for k in (10, 100))
print(f"\nn = 3: Gamma(10 beta) = {g10:.10f}, Gamma(100 beta) = {g100:.10f}")
