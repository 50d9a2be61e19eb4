"""Closed-form adiabatic decoherence for a system coupled to a discrete boson bath.

The system is stored in the common eigenbasis of its Hamiltonian and of the
pointer observable that couples to the bath, so only eigenvalue lists and the
initial density matrix are kept. Each bath mode contributes an independent
multiplicative factor to every off-diagonal element of the reduced density
matrix; the diagonal never changes.

Units: hbar = 1, energies and frequencies in inverse time, ``beta`` in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeTime,
    NonpositiveOmega,
    NotHermitian,
    NotPositiveSemidefinite,
    TraceNotOne,
    ValidationError,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

# exp() of anything below this underflows in double precision
UNDERFLOW_EXPONENT = -745.0

# below this value of beta*omega, coth(beta*omega/2) uses its Laurent series
COTH_SERIES_SWITCH = 1e-4


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix.

    The array is copied on construction and made read-only.
    """

    entries: np.ndarray

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
            raise DimensionMismatch(f"density matrix must be square and non-empty, got shape {rho.shape}")
        herm_err = np.max(np.abs(rho - rho.conj().T))
        if herm_err > HERMITIAN_TOL:
            raise NotHermitian(f"density matrix not Hermitian: max |rho - rho^H| = {herm_err:.3g}")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            raise TraceNotOne(f"density matrix trace is {tr.real:.15g}{tr.imag:+.3g}j, expected 1")
        lowest = np.linalg.eigvalsh(rho).min()
        if lowest < -PSD_TOL:
            raise NotPositiveSemidefinite(f"density matrix has eigenvalue {lowest:.3g} < 0")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class SystemSpec:
    """A system given by its energies, pointer eigenvalues and initial state."""

    energies: np.ndarray
    pointer_values: np.ndarray
    rho0: DensityMatrix

    @property
    def dim(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class BathMode:
    omega: float
    g: complex = 0.0

    def __post_init__(self):
        omega = float(self.omega)
        if not omega > 0 or not math.isfinite(omega):
            raise NonpositiveOmega(f"mode frequency must be positive and finite, got {self.omega!r}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "g", complex(self.g))


@dataclass(frozen=True)
class DiscreteBath:
    """A finite set of independent bath modes, stored as parallel arrays.

    Build one from a list of :class:`BathMode` with :meth:`from_modes`, or
    directly from arrays of frequencies and couplings.
    """

    omega: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float).ravel()
        g = np.array(self.g, dtype=complex).ravel()
        if omega.shape != g.shape:
            raise DimensionMismatch(f"{omega.size} frequencies but {g.size} couplings")
        if omega.size and not (np.all(omega > 0) and np.all(np.isfinite(omega))):
            raise NonpositiveOmega("every mode frequency must be positive and finite")
        omega.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "g", g)

    @classmethod
    def from_modes(cls, modes: Iterable[BathMode]) -> "DiscreteBath":
        modes = list(modes)
        return cls(np.array([m.omega for m in modes], dtype=float), np.array([m.g for m in modes], dtype=complex))

    @property
    def modes(self) -> tuple:
        return tuple(BathMode(w, g) for w, g in zip(self.omega, self.g))

    def __len__(self):
        return self.omega.size

    def with_phases(self, phases) -> "DiscreteBath":
        """Return a copy with every coupling multiplied by ``exp(1j * phases)``."""
        return DiscreteBath(self.omega, self.g * np.exp(1j * np.asarray(phases, dtype=float)))


@dataclass(frozen=True)
class Temperature:
    """Inverse temperature ``beta = 1/(kT)``; ``math.inf`` means zero temperature."""

    beta: float

    def __post_init__(self):
        beta = float(self.beta)
        if not beta > 0:
            raise ValidationError(f"beta must be positive (or inf), got {self.beta!r}")
        object.__setattr__(self, "beta", beta)

    @property
    def is_zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    def coth_half(self, omega):
        """``coth(beta * omega / 2)``, elementwise over ``omega > 0``."""
        return coth_half(self.beta, omega)


BetaLike = Union[Temperature, float]


def as_temperature(beta: BetaLike) -> Temperature:
    if isinstance(beta, Temperature):
        return beta
    if isinstance(beta, str) and beta.strip().lower() == "inf":
        return Temperature(math.inf)
    return Temperature(beta)


def coth_half(beta: float, omega):
    """Evaluate ``coth(beta*omega/2)`` with a series guard near zero.

    For ``beta*omega < 1e-4`` the Laurent expansion ``1/x + x/3`` replaces
    the direct form. ``beta = inf`` gives exactly 1.
    """
    omega = np.asarray(omega, dtype=float)
    if math.isinf(beta):
        return np.ones_like(omega)[()]
    x = 0.5 * beta * omega
    small = beta * omega < COTH_SERIES_SWITCH
    with np.errstate(divide="ignore", invalid="ignore"):
        series = 1.0 / x + x / 3.0
        direct = 1.0 / np.tanh(x)
    return np.where(small, series, direct)[()]


def _check_time(t, allow_negative=False):
    t = float(t)
    if not math.isfinite(t):
        raise ValidationError(f"time must be finite, got {t!r}")
    if t < 0 and not allow_negative:
        raise NegativeTime(f"bath-coupled evolution is defined for t >= 0, got t = {t!r}")
    return t


def validate_system(energies: Sequence[float], pointer_values: Sequence[float], rho0) -> SystemSpec:
    """Check and bundle the system description.

    Parameters
    ----------
    energies : sequence of float
        Eigenvalues ``E_i`` of the system Hamiltonian.
    pointer_values : sequence of float
        Eigenvalues ``lambda_i`` of the pointer observable, same basis order.
    rho0 : array_like or DensityMatrix
        Initial system state in that basis.

    Raises
    ------
    DimensionMismatch, NotHermitian, TraceNotOne, NotPositiveSemidefinite
    """
    energies = np.array(energies, dtype=float).ravel()
    pointer_values = np.array(pointer_values, dtype=float).ravel()
    if not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(rho0)
    d = rho0.dim
    if energies.size != d or pointer_values.size != d:
        raise DimensionMismatch(
            f"dimension mismatch: {energies.size} energies, {pointer_values.size} pointer values, rho0 is {d}x{d}"
        )
    if not (np.all(np.isfinite(energies)) and np.all(np.isfinite(pointer_values))):
        raise ValidationError("energies and pointer values must be finite")
    energies.setflags(write=False)
    pointer_values.setflags(write=False)
    return SystemSpec(energies, pointer_values, rho0)


def _free_phase(energies, t):
    # element (m, n) carries exp(i (E_n - E_m) t)
    return np.exp(1j * (energies[None, :] - energies[:, None]) * t)


def free_evolution(system: SystemSpec, t: float) -> DensityMatrix:
    """Evolve the uncoupled system: ``rho_mn(t) = rho_mn(0) exp(i(E_n - E_m)t)``.

    Negative times are allowed here.
    """
    t = _check_time(t, allow_negative=True)
    return DensityMatrix(system.rho0.entries * _free_phase(system.energies, t))


def _p_values(lambda_m, lambda_n, omega, beta, t, renormalize):
    omega = np.asarray(omega, dtype=float)
    dl = lambda_m - lambda_n
    dl2 = lambda_m**2 - lambda_n**2
    wt = omega * t
    real = 2.0 * dl**2 * np.sin(0.5 * wt) ** 2 * coth_half(beta, omega)
    imag = dl2 * (np.sin(wt) if renormalize else np.sin(wt) - wt)
    return real + 1j * imag


def p_factor(lambda_m: float, lambda_n: float, mode: BathMode, beta: BetaLike, t: float, renormalize: bool = False) -> complex:
    """Exponent polynomial of a single mode's decoherence factor.

    Real part ``2 (lm - ln)^2 sin^2(wt/2) coth(beta w/2)``; imaginary part
    ``(lm^2 - ln^2)(sin wt - wt)``, or ``(lm^2 - ln^2) sin wt`` when the
    counter-term ``Lambda^2 sum |g|^2/w`` is included (``renormalize=True``).
    """
    if not isinstance(mode, BathMode):
        mode = BathMode(*mode)
    beta = as_temperature(beta).beta
    t = _check_time(t)
    return complex(_p_values(float(lambda_m), float(lambda_n), mode.omega, beta, t, renormalize))


def _log_s(lambda_m, lambda_n, omega, g, beta, t, renormalize):
    return -(np.abs(g) ** 2 / np.asarray(omega) ** 2) * _p_values(lambda_m, lambda_n, omega, beta, t, renormalize)


def _exp_guarded(exponent):
    exponent = np.asarray(exponent, dtype=complex)
    out = np.exp(exponent)
    return np.where(exponent.real < UNDERFLOW_EXPONENT, 0.0, out)[()]


def s_factor(lambda_m: float, lambda_n: float, mode: BathMode, beta: BetaLike, t: float, renormalize: bool = False) -> complex:
    """Single-mode decoherence factor ``exp(-|g|^2/w^2 * P)``.

    Returns exactly 0 when the real part of the exponent is below -745.
    """
    if not isinstance(mode, BathMode):
        mode = BathMode(*mode)
    p = p_factor(lambda_m, lambda_n, mode, beta, t, renormalize)
    return complex(_exp_guarded(-(abs(mode.g) ** 2 / mode.omega**2) * p))


def decoherence_exponent(system: SystemSpec, bath: DiscreteBath, beta: BetaLike, t: float, renormalize: bool = False) -> np.ndarray:
    """Matrix of ``sum_k log S_mn,k`` (complex, d x d)."""
    beta = as_temperature(beta).beta
    t = _check_time(t)
    lam = system.pointer_values
    if len(bath) == 0:
        return np.zeros((system.dim, system.dim), dtype=complex)
    # (d, d, K) broadcast; summation over modes uses numpy's pairwise sum
    terms = _log_s(lam[:, None, None], lam[None, :, None], bath.omega[None, None, :], bath.g[None, None, :], beta, t, renormalize)
    return terms.sum(axis=-1)


def reduced_density_matrix(
    system: SystemSpec, bath: DiscreteBath, beta: BetaLike, t: float, renormalize: bool = False
) -> DensityMatrix:
    """Exact reduced density matrix at time ``t >= 0``.

    ``rho_mn(t) = rho_mn(0) exp(i(E_n - E_m)t) prod_k S_mn,k``. The result is
    checked against the density-matrix invariants on construction.
    """
    t = _check_time(t)
    factors = _exp_guarded(decoherence_exponent(system, bath, beta, t, renormalize))
    return DensityMatrix(system.rho0.entries * _free_phase(system.energies, t) * factors)


def gamma_discrete(bath: DiscreteBath, beta: BetaLike, t) -> float:
    """Decoherence function ``8 sum_k |g_k|^2/w_k^2 sin^2(w_k t/2) coth(beta w_k/2)``.

    ``t`` may be a scalar or an array of non-negative times; the return has
    the same shape.
    """
    beta = as_temperature(beta).beta
    times = np.asarray(t, dtype=float)
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise NegativeTime("gamma_discrete needs finite t >= 0")
    if len(bath) == 0:
        return np.zeros_like(times)[()]
    weight = 8.0 * np.abs(bath.g) ** 2 / bath.omega**2 * coth_half(beta, bath.omega)
    sin2 = np.sin(0.5 * np.multiply.outer(times, bath.omega)) ** 2
    return np.sum(sin2 * weight, axis=-1)[()]
