"""Continuum bath: spectral integral for the decoherence function and its asymptotics.

The bath is described by the lumped spectral function
``J(w) = A * w**n * exp(-w/w_c)``, and

    Gamma(t) = 8 * int_0^inf J(w) w**-2 sin^2(w t/2) coth(beta w/2) dw,

normalized so that it is the many-mode limit of
:func:`dephase.core.gamma_discrete` on :func:`discretize_spectral`.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate, special

from .core import (
    COTH_SERIES_SWITCH,
    BetaLike,
    DiscreteBath,
    as_temperature,
    coth_half,
    gamma_discrete,
)
from .errors import (
    InsufficientSamples,
    NegativeTime,
    NonpositiveGamma,
    NonpositiveOmega,
    QuadratureNonconvergence,
    RegimeUndefined,
    ValidationError,
)


@dataclass(frozen=True)
class SpectralFunction:
    """``J(w) = amplitude * w**exponent * exp(-w / cutoff)``."""

    amplitude: float
    exponent: float
    cutoff: float

    def __post_init__(self):
        for name in ("amplitude", "exponent", "cutoff"):
            value = float(getattr(self, name))
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"spectral {name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    def __call__(self, omega):
        return spectral_weight(omega, self)


def spectral_weight(omega, spec: SpectralFunction):
    """``A * w**n * exp(-w/w_c)`` for ``w > 0`` (scalar or array)."""
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise NonpositiveOmega("spectral_weight needs omega > 0")
    return (spec.amplitude * w**spec.exponent * np.exp(-w / spec.cutoff))[()]


def decoherence_complete(spec: SpectralFunction) -> bool:
    """True when Gamma(t) grows without bound, i.e. ``n < 2``."""
    return spec.exponent < 2


# ---------------------------------------------------------------------------
# quadrature


def _integrand(omega, spec, beta, t):
    w = np.asarray(omega, dtype=float)
    return 8.0 * spec.amplitude * w ** (spec.exponent - 2.0) * np.exp(-w / spec.cutoff) * np.sin(0.5 * w * t) ** 2 * coth_half(beta, w)


def _integrand_over_power(omega, spec, beta, t):
    """Integrand divided by ``w**(n-1)``; finite at ``w = 0``.

    Used with an algebraic end-point weight on the first panel. At ``w = 0``
    the limit ``4 A t^2 / beta`` is returned instead of evaluating coth.
    """
    w = float(omega)
    if w == 0.0:
        return 0.0 if math.isinf(beta) else 4.0 * spec.amplitude * t * t / beta
    return 8.0 * spec.amplitude * math.exp(-w / spec.cutoff) * math.sin(0.5 * w * t) ** 2 / w * float(coth_half(beta, w))


def integrand(omega, spec: SpectralFunction, beta: BetaLike, t: float):
    """The continuum integrand, guarded at ``w -> 0``.

    Exposed for diagnostics; equals ``w**(n-1)`` times a function that is
    finite at the origin.
    """
    beta = as_temperature(beta).beta
    w = np.asarray(omega, dtype=float)
    out = np.empty_like(w)
    flat_w, flat_out = w.ravel(), out.ravel()
    for i, x in enumerate(flat_w):
        if x == 0.0:
            flat_out[i] = _integrand_over_power(0.0, spec, beta, t) if spec.exponent == 1 else (0.0 if spec.exponent > 1 else math.inf)
        else:
            flat_out[i] = _integrand_over_power(x, spec, beta, t) * x ** (spec.exponent - 1.0)
    return out.reshape(w.shape)[()]


def _tail_bound(spec, beta, upper):
    """Upper bound on the integral over ``[upper, inf)`` (uses sin^2 <= 1)."""
    L = upper / spec.cutoff
    coth_max = float(coth_half(beta, upper))
    p = spec.exponent - 1.0
    if p > 0:
        base = spec.cutoff**p * special.gammaincc(p, L) * special.gamma(p)
    else:
        base = upper ** (spec.exponent - 2.0) * spec.cutoff * math.exp(-L)
    return 8.0 * spec.amplitude * coth_max * base


def _panel_edges(lo, hi, ratio=2.0):
    if hi <= lo:
        return []
    n = max(1, math.ceil(math.log(hi / lo) / math.log(ratio)))
    return list(np.geomspace(lo, hi, n + 1))


def _quad(func, a, b, epsabs, epsrel, limit, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1, **kwargs)
    value, err = out[0], out[1]
    ok = len(out) == 3
    return value, err, ok


class _Layout(NamedTuple):
    first: float  # end of the algebraic-weight panel starting at 0
    plain: list  # edges of plain panels up to the oscillation switch
    oscillatory: list  # edges of (1 - cos)/2 split panels


def _layout(spec, beta, t, upper):
    period = 2.0 * math.pi / t
    scales = [spec.cutoff, period]
    if not math.isinf(beta):
        scales.append(1.0 / beta)
    first = min(min(scales) / 4.0, upper / 4.0)
    switch = min(period, upper)
    plain = _panel_edges(first, switch)
    oscillatory = _panel_edges(switch, upper) if switch < upper else []
    return _Layout(first, plain, oscillatory)


def _integrate(spec, beta, t, upper, epsabs, epsrel, limit):
    """Sum of panel integrals on ``[0, upper]``: (value, error, all_ok, n_panels)."""
    layout = _layout(spec, beta, t, upper)
    n = spec.exponent

    def plain_f(w):
        return float(_integrand(w, spec, beta, t))

    def half_envelope(w):
        return 4.0 * spec.amplitude * w ** (n - 2.0) * math.exp(-w / spec.cutoff) * float(coth_half(beta, w))

    value, error, ok = _quad(
        lambda w: _integrand_over_power(w, spec, beta, t), 0.0, layout.first, epsabs, epsrel, limit,
        weight="alg", wvar=(n - 1.0, 0.0),
    )
    parts = [value]
    for a, b in zip(layout.plain[:-1], layout.plain[1:]):
        v, e, o = _quad(plain_f, a, b, epsabs, epsrel, limit)
        parts.append(v)
        error += e
        ok &= o
    # sin^2(wt/2) = (1 - cos wt)/2; the cosine part goes to an oscillatory rule
    for a, b in zip(layout.oscillatory[:-1], layout.oscillatory[1:]):
        v1, e1, o1 = _quad(half_envelope, a, b, epsabs, epsrel, limit)
        v2, e2, o2 = _quad(half_envelope, a, b, epsabs, epsrel, limit, weight="cos", wvar=t)
        parts.append(v1 - v2)
        error += e1 + e2
        ok &= o1 and o2
    # math.fsum keeps the reduction order-independent
    return math.fsum(parts), error, ok, len(parts)


def gamma_continuum(spec: SpectralFunction, beta: BetaLike, t: float, tol: float = 1e-8, limit: int = 200):
    """Continuum decoherence function at one time.

    Parameters
    ----------
    spec : SpectralFunction
    beta : Temperature or float
        ``inf`` selects zero temperature.
    t : float
        Non-negative time.
    tol : float
        Requested relative accuracy.
    limit : int
        Subdivision budget per panel.

    Returns
    -------
    value, error : float
        Estimate and its absolute error bound (quadrature plus truncated tail).

    Raises
    ------
    QuadratureNonconvergence
        If the estimated error exceeds ``tol * value``; the exception carries
        the best estimate.
    """
    beta = as_temperature(beta).beta
    t = float(t)
    if not (t >= 0 and math.isfinite(t)):
        raise NegativeTime(f"gamma_continuum needs finite t >= 0, got {t!r}")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    if t == 0.0:
        return 0.0, 0.0

    # truncate the exponential tail where its bound is negligible
    upper = 40.0 * spec.cutoff
    rough, _, _, _ = _integrate(spec, beta, t, upper, 0.0, 1e-4, limit)
    while _tail_bound(spec, beta, upper) > 0.1 * tol * abs(rough) and upper < 1e4 * spec.cutoff:
        upper *= 1.5
    tail = _tail_bound(spec, beta, upper)

    _, _, _, n_panels = _integrate(spec, beta, t, upper, 0.0, 1e-2, 50)
    epsabs = 0.1 * tol * abs(rough) / n_panels
    value, error, ok, _ = _integrate(spec, beta, t, upper, epsabs, 0.1 * tol, limit)
    error += tail
    if not ok or error > tol * abs(value):
        raise QuadratureNonconvergence(
            f"quadrature reached error {error:.3g} on value {value:.6g} at t={t:g}, requested relative {tol:g}",
            value=value,
            error=error,
        )
    return float(value), float(error)


# ---------------------------------------------------------------------------
# curves, regimes, fits


class Source(str, enum.Enum):
    DISCRETE = "discrete"
    CONTINUUM = "continuum"


@dataclass(frozen=True)
class DecoherenceCurve:
    """Sampled Gamma(t) with per-point error estimate and provenance."""

    times: np.ndarray
    values: np.ndarray
    source: Source
    errors: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        errors = np.zeros_like(values) if self.errors is None else np.array(self.errors, dtype=float)
        if not (times.shape == values.shape == errors.shape) or times.ndim != 1:
            raise ValidationError("times, values and errors must be 1-d arrays of equal length")
        if np.any(times < 0) or np.any(np.diff(times) <= 0):
            raise ValidationError("curve times must be non-negative and strictly increasing")
        for arr in (times, values, errors):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "errors", errors)
        object.__setattr__(self, "source", Source(self.source))

    def scaled(self, factor: float) -> "DecoherenceCurve":
        return DecoherenceCurve(self.times, self.values * factor, self.source, self.errors * abs(factor))


def discrete_curve(bath: DiscreteBath, beta: BetaLike, times: Sequence[float]) -> DecoherenceCurve:
    values = np.atleast_1d(gamma_discrete(bath, beta, np.asarray(times, dtype=float)))
    return DecoherenceCurve(times, values, Source.DISCRETE, np.zeros_like(values))


def continuum_curve(spec: SpectralFunction, beta: BetaLike, times: Sequence[float], tol: float = 1e-8) -> DecoherenceCurve:
    """Gamma(t) on a grid; raises on the first point that fails to converge."""
    pairs = [gamma_continuum(spec, beta, t, tol) for t in times]
    return DecoherenceCurve(times, [p[0] for p in pairs], Source.CONTINUUM, [p[1] for p in pairs])


class RegimeKind(str, enum.Enum):
    QUIET = "quiet"
    QUANTUM = "quantum"
    THERMAL = "thermal"


# cutoff time and thermal time closer than this ratio are flagged
WELL_SEPARATED_RATIO = 100.0


@dataclass(frozen=True)
class Regime:
    """Regime of a time point plus the two time scales that bound it.

    ``separation`` is ``beta * w_c``, the ratio of thermal to cutoff time.
    """

    kind: RegimeKind
    cutoff_time: float
    beta: float
    separation: float

    @property
    def weakly_separated(self) -> bool:
        return self.separation < WELL_SEPARATED_RATIO


def regime(t: float, beta: BetaLike, spec: SpectralFunction) -> Regime:
    """Classify ``t`` as quiet, quantum or thermal.

    Half-open intervals: quiet for ``t < 1/w_c``, quantum for
    ``1/w_c <= t < beta``, thermal for ``t >= beta``.

    Raises
    ------
    RegimeUndefined
        When ``1/w_c >= beta``.
    """
    beta = as_temperature(beta).beta
    tc = 1.0 / spec.cutoff
    if tc >= beta:
        raise RegimeUndefined(f"cutoff time 1/w_c = {tc:g} is not below beta = {beta:g}")
    if t < tc:
        kind = RegimeKind.QUIET
    elif t < beta:
        kind = RegimeKind.QUANTUM
    else:
        kind = RegimeKind.THERMAL
    return Regime(kind, tc, beta, beta / tc)


class FitModel(str, enum.Enum):
    POWER_LAW = "power"
    LOG_LAW = "log"


class FitResult(NamedTuple):
    slope: float
    residual: float


MIN_FIT_SAMPLES = 8


def fit_asymptotic_exponent(curve: DecoherenceCurve, window: tuple, model=FitModel.POWER_LAW) -> FitResult:
    """Least-squares slope of Gamma over a time window.

    ``POWER_LAW`` fits ``log Gamma`` against ``log t``; the slope is the
    exponent and the residual is the RMS deviation in ``log Gamma``.
    ``LOG_LAW`` fits ``Gamma`` against ``ln t``; the residual is the RMS
    deviation divided by the rise of the fitted line across the window.
    """
    model = FitModel(model)
    lo, hi = window
    mask = (curve.times >= lo) & (curve.times <= hi)
    t, g = curve.times[mask], curve.values[mask]
    if t.size < MIN_FIT_SAMPLES:
        raise InsufficientSamples(f"window [{lo:g}, {hi:g}] has {t.size} samples, need {MIN_FIT_SAMPLES}")
    if np.any(~(g > 0)):
        raise NonpositiveGamma(f"Gamma is not positive everywhere in [{lo:g}, {hi:g}]")
    x = np.log(t)
    y = np.log(g) if model is FitModel.POWER_LAW else g
    xc = x - x.mean()
    slope = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    resid = (y - y.mean()) - slope * xc
    rms = float(np.sqrt(np.mean(resid**2)))
    if model is FitModel.POWER_LAW:
        return FitResult(slope, rms)
    rise = abs(slope) * (x.max() - x.min())
    return FitResult(slope, float(rms / rise) if rise > 0 else math.inf)


def thermal_growth_coefficient(spec: SpectralFunction, beta: float) -> float:
    """Leading large-``t`` coefficient ``c`` in ``Gamma ~ c * t**(2-n)`` for ``n < 2``.

    Comes from the ``2/(beta w)`` small-frequency part of ``coth``:
    ``c = 16 A / beta * int_0^inf u**(n-3) sin^2(u/2) du``.
    """
    n = spec.exponent
    if not n < 2:
        raise ValidationError("no thermal power-law growth for n >= 2")
    alpha = 2.0 - n
    if alpha == 1.0:
        moment = math.pi / 4.0
    else:
        moment = -0.5 * special.gamma(-alpha) * math.cos(0.5 * math.pi * alpha)
    return 16.0 * spec.amplitude / beta * moment


def thermal_window(spec: SpectralFunction, beta: BetaLike, dominance: float = 20.0, decades: float = 2.0, tol: float = 1e-8) -> tuple:
    """Fit window deep enough in ``t >> beta`` for the thermal law to dominate.

    For ``n < 2`` the window starts where the asymptotic thermal growth is
    ``dominance`` times ``Gamma(beta)``, and never before ``10 beta``. For
    ``n >= 2`` it starts at ``10 beta``.
    """
    beta = as_temperature(beta).beta
    if math.isinf(beta):
        raise RegimeUndefined("no thermal regime at zero temperature")
    start = 10.0 * beta
    if spec.exponent < 2:
        offset = gamma_continuum(spec, beta, beta, tol)[0]
        c = thermal_growth_coefficient(spec, beta)
        start = max(start, (dominance * offset / c) ** (1.0 / (2.0 - spec.exponent)))
    return float(start), float(start * 10.0**decades)


def default_windows(spec: SpectralFunction, beta: BetaLike) -> dict:
    """Quiet, quantum and thermal fit windows (regimes that do not fit are left out)."""
    beta = as_temperature(beta).beta
    tc = 1.0 / spec.cutoff
    windows = {"quiet": (1e-3 * tc, 1e-2 * tc)}
    quantum_hi = 0.1 * beta if math.isfinite(beta) else 1e4 * tc
    if quantum_hi > 10 * tc:
        windows["quantum"] = (10 * tc, quantum_hi)
    if math.isfinite(beta):
        windows["thermal"] = thermal_window(spec, beta)
    return windows


REGIME_MODELS = {"quiet": FitModel.POWER_LAW, "quantum": FitModel.LOG_LAW, "thermal": FitModel.POWER_LAW}


class RegimeFit(NamedTuple):
    regime: str
    model: FitModel
    window: tuple
    slope: float
    residual: float


def analyze_regimes(spec: SpectralFunction, beta: BetaLike, windows: dict | None = None, samples: int = 25, tol: float = 1e-8) -> list:
    """Fit each regime window of the continuum curve with its model.

    Quiet and thermal windows get a power law, the quantum window a log law.
    """
    beta = as_temperature(beta)
    regime(1.0 / spec.cutoff, beta, spec)  # raises RegimeUndefined when the scales overlap
    chosen = default_windows(spec, beta)
    chosen.update(windows or {})
    fits = []
    for name in ("quiet", "quantum", "thermal"):
        if name not in chosen:
            continue
        lo, hi = chosen[name]
        curve = continuum_curve(spec, beta, np.geomspace(lo, hi, samples), tol)
        slope, residual = fit_asymptotic_exponent(curve, (lo, hi), REGIME_MODELS[name])
        fits.append(RegimeFit(name, REGIME_MODELS[name], (lo, hi), slope, residual))
    return fits


# ---------------------------------------------------------------------------
# discretization


def discretize_spectral(spec: SpectralFunction, K: int, omega_max: float) -> DiscreteBath:
    """Midpoint discretization of ``[0, omega_max]`` into ``K`` equal cells.

    Mode ``k`` sits at ``(k + 1/2) dw`` with real coupling
    ``g_k = sqrt(J(w_k) dw)``.
    """
    K = int(K)
    if K < 1:
        raise ValidationError("K must be >= 1")
    if not omega_max > 0:
        raise ValidationError("omega_max must be positive")
    dw = omega_max / K
    omega = (np.arange(K) + 0.5) * dw
    g = np.sqrt(spectral_weight(omega, spec) * dw)
    return DiscreteBath(omega, np.asarray(g, dtype=complex))


__all__ = [
    "COTH_SERIES_SWITCH",
    "DecoherenceCurve",
    "FitModel",
    "FitResult",
    "Regime",
    "RegimeKind",
    "Source",
    "SpectralFunction",
    "RegimeFit",
    "analyze_regimes",
    "continuum_curve",
    "default_windows",
    "thermal_growth_coefficient",
    "thermal_window",
    "decoherence_complete",
    "discrete_curve",
    "discretize_spectral",
    "fit_asymptotic_exponent",
    "gamma_continuum",
    "integrand",
    "regime",
    "spectral_weight",
]
