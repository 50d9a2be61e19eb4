"""Brute-force reference dynamics on a truncated Fock space.

Builds the full system-plus-bath Hamiltonian with every mode cut to its
lowest ``N_k`` number states, thermalizes the modes, evolves the product
state exactly through a Hermitian eigendecomposition and traces the bath
out. Nothing here uses the closed-form factors of :mod:`dephase.core`.

Kronecker order is fixed: the system factor first, then the modes in the
order they appear in the bath. The whole closed system is evolved
unitarily, so the bath is not re-thermalized during the evolution; in this
model none is needed for agreement with the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Sequence

import numpy as np

from .core import (
    BathMode,
    BetaLike,
    DensityMatrix,
    DiscreteBath,
    SystemSpec,
    _check_time,
    as_temperature,
)
from .errors import DimensionBudgetExceeded, EigendecompositionFailure, NotHermitian, ValidationError

DEFAULT_BUDGET = 4096


@dataclass(frozen=True)
class TruncationSpec:
    """Fock levels kept per mode.

    ``achieved_delta`` is filled in by :func:`converge_truncation` with the
    max-norm change seen at the accepted level.
    """

    levels_per_mode: tuple
    convergence_tol: float = 1e-8
    budget: int = DEFAULT_BUDGET
    achieved_delta: float | None = None

    def __post_init__(self):
        levels = tuple(int(n) for n in self.levels_per_mode)
        if any(n < 2 for n in levels):
            raise ValidationError(f"each mode needs at least 2 Fock levels, got {levels}")
        if not self.convergence_tol > 0:
            raise ValidationError("convergence_tol must be positive")
        object.__setattr__(self, "levels_per_mode", levels)

    @classmethod
    def uniform(cls, n_levels: int, n_modes: int, **kwargs) -> "TruncationSpec":
        return cls((n_levels,) * n_modes, **kwargs)

    def bath_dim(self) -> int:
        return math.prod(self.levels_per_mode)

    def total_dim(self, system_dim: int) -> int:
        return system_dim * self.bath_dim()

    def check_budget(self, system_dim: int):
        D = self.total_dim(system_dim)
        if D > self.budget:
            raise DimensionBudgetExceeded(
                f"total dimension {system_dim} x {' x '.join(map(str, self.levels_per_mode)) or '1'} = {D} "
                f"exceeds budget {self.budget}"
            )


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A dense Hermitian matrix with a label; diagonalized lazily once.

    ``block_size`` declares the matrix block-diagonal with square blocks of
    that size (checked on construction). Each block is then diagonalized on
    its own, which is still an exact eigendecomposition of the whole matrix.
    """

    matrix: np.ndarray
    label: str = ""
    block_size: int | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator must be square, got shape {m.shape}")
        err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if err > 1e-12:
            raise NotHermitian(f"operator {self.label!r} not Hermitian: max deviation {err:.3g}")
        if self.block_size is not None:
            b = int(self.block_size)
            if b < 1 or m.shape[0] % b:
                raise ValidationError(f"block size {b} does not divide dimension {m.shape[0]}")
            n = m.shape[0] // b
            off = m.reshape(n, b, n, b).copy()
            off[np.arange(n), :, np.arange(n), :] = 0
            if np.any(off):
                raise ValidationError(f"operator {self.label!r} is not block diagonal with block size {b}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _blocks(self):
        b = self.block_size or self.dim
        return [slice(i, i + b) for i in range(0, self.dim, b)]

    @cached_property
    def eigh(self):
        """List of ``(eigenvalues, eigenvectors)``, one pair per diagonal block."""
        try:
            return [np.linalg.eigh(self.matrix[sl, sl]) for sl in self._blocks()]
        except np.linalg.LinAlgError as exc:
            raise EigendecompositionFailure(f"eigh failed for {self.label!r}: {exc}") from exc

    def propagator(self, t: float) -> np.ndarray:
        """``exp(-i H t)`` from the cached eigendecomposition."""
        U = np.zeros((self.dim, self.dim), dtype=complex)
        for sl, (w, v) in zip(self._blocks(), self.eigh):
            U[sl, sl] = (v * np.exp(-1j * w * t)) @ v.conj().T
        return U


def lowering_operator(n_levels: int) -> np.ndarray:
    """Truncated ``a`` with ``a|j> = sqrt(j)|j-1>``."""
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), k=1).astype(complex)


def number_operator(n_levels: int) -> np.ndarray:
    return np.diag(np.arange(n_levels, dtype=float)).astype(complex)


def _embed(op: np.ndarray, index: int, dims: Sequence[int]) -> np.ndarray:
    # op acting on factor `index` of a Kronecker product with factor sizes `dims`
    factors = [op if i == index else np.eye(n) for i, n in enumerate(dims)]
    return reduce(np.kron, factors)


def thermal_mode_state(mode: BathMode, beta: BetaLike, n_levels: int) -> DensityMatrix:
    """Thermal state of one mode restricted to ``n_levels`` Fock states.

    Populations go as ``exp(-beta*omega*j)`` and are renormalized over the
    kept levels, so the result is a valid density matrix for every ``N``.
    """
    if n_levels < 2:
        raise ValidationError("n_levels must be >= 2")
    if not isinstance(mode, BathMode):
        mode = BathMode(*mode)
    beta = as_temperature(beta).beta
    if math.isinf(beta):
        pops = np.zeros(n_levels)
        pops[0] = 1.0
    else:
        pops = np.exp(-beta * mode.omega * np.arange(n_levels))
        pops /= pops.sum()
    return DensityMatrix(np.diag(pops).astype(complex))


def build_total_hamiltonian(
    system: SystemSpec, bath: DiscreteBath, trunc: TruncationSpec, renormalize: bool = False
) -> HermitianOperator:
    """Materialize the full Hamiltonian on the truncated space.

    ``H = diag(E) x 1 + 1 x sum_k w_k a_k^+ a_k + diag(lam) x sum_k (g_k^* a_k + g_k a_k^+)``,
    plus ``diag(lam^2) x sum_k |g_k|^2 / w_k`` when ``renormalize`` is set.
    """
    if len(trunc.levels_per_mode) != len(bath):
        raise ValidationError(f"truncation has {len(trunc.levels_per_mode)} modes, bath has {len(bath)}")
    trunc.check_budget(system.dim)
    dims = trunc.levels_per_mode
    bath_dim = trunc.bath_dim()
    eye_b = np.eye(bath_dim)

    H = np.kron(np.diag(system.energies).astype(complex), eye_b)
    if len(bath):
        h_bath = np.zeros((bath_dim, bath_dim), dtype=complex)
        coupling = np.zeros((bath_dim, bath_dim), dtype=complex)
        for k, (w, g) in enumerate(zip(bath.omega, bath.g)):
            a = lowering_operator(dims[k])
            h_bath += w * _embed(number_operator(dims[k]), k, dims)
            coupling += _embed(np.conj(g) * a + g * a.conj().T, k, dims)
        H += np.kron(np.eye(system.dim), h_bath)
        H += np.kron(np.diag(system.pointer_values).astype(complex), coupling)
        if renormalize:
            shift = float(np.sum(np.abs(bath.g) ** 2 / bath.omega))
            H += np.kron(np.diag(system.pointer_values**2 * shift).astype(complex), eye_b)
    label = "H_S + H_B + H_I" + (" + H_R" if renormalize else "")
    # E and lambda are diagonal, so H has one bath-sized block per system level
    return HermitianOperator(H, label, block_size=bath_dim)


def initial_total_state(system: SystemSpec, bath: DiscreteBath, beta: BetaLike, trunc: TruncationSpec) -> np.ndarray:
    """``rho0 x theta_1 x ... x theta_K`` as a dense matrix."""
    factors = [system.rho0.entries]
    for mode, n in zip(bath.modes, trunc.levels_per_mode):
        factors.append(thermal_mode_state(mode, beta, n).entries)
    return reduce(np.kron, factors)


def _trivial_system() -> SystemSpec:
    return SystemSpec(np.zeros(1), np.zeros(1), DensityMatrix(np.ones((1, 1))))


def partial_trace_bath(rho_total: np.ndarray, system_dim: int, bath_dim: int) -> np.ndarray:
    """Trace out everything after the first Kronecker factor."""
    return np.einsum("ajbj->ab", rho_total.reshape(system_dim, bath_dim, system_dim, bath_dim))


def evolve_and_trace(
    H: HermitianOperator,
    system: SystemSpec,
    bath: DiscreteBath,
    beta: BetaLike,
    trunc: TruncationSpec,
    t: float,
) -> DensityMatrix:
    """Evolve ``rho0 x prod_k theta_k`` under ``H`` for time ``t`` and trace the bath.

    The eigendecomposition of ``H`` is cached on the operator, so repeated
    calls at different times cost only matrix products. When ``H`` carries
    one block per system level, block ``(m, n)`` of the total state evolves
    as ``U_m (rho0_mn theta) U_n^+`` and only its bath trace is kept.
    """
    t = _check_time(t)
    trunc.check_budget(system.dim)
    d, bath_dim = system.dim, trunc.bath_dim()
    if H.dim != d * bath_dim:
        raise ValidationError(f"operator dimension {H.dim} does not match truncation {d * bath_dim}")
    if H.block_size == bath_dim:
        theta = initial_total_state(_trivial_system(), bath, beta, trunc)
        props = [(v * np.exp(-1j * w * t)) @ v.conj().T for w, v in H.eigh]
        left = [u @ theta for u in props]
        reduced = np.empty((d, d), dtype=complex)
        for m in range(d):
            for n in range(d):
                # Tr(A B^+) = sum(A * conj(B))
                reduced[m, n] = system.rho0.entries[m, n] * np.sum(left[m] * props[n].conj())
    else:
        rho = initial_total_state(system, bath, beta, trunc)
        U = H.propagator(t)
        reduced = partial_trace_bath(U @ rho @ U.conj().T, d, bath_dim)
    # remove round-off anti-Hermitian part before validation
    return DensityMatrix(0.5 * (reduced + reduced.conj().T))


def oracle_series(
    system: SystemSpec,
    bath: DiscreteBath,
    beta: BetaLike,
    trunc: TruncationSpec,
    times: Sequence[float],
    renormalize: bool = False,
) -> list:
    """Reduced matrices at several times from a single eigendecomposition."""
    H = build_total_hamiltonian(system, bath, trunc, renormalize)
    return [evolve_and_trace(H, system, bath, beta, trunc, t) for t in times]


def initial_levels(system: SystemSpec, bath: DiscreteBath) -> int:
    """Starting Fock cut for the convergence schedule.

    The displaced-oscillator picture shifts each mode by ``lam*g/w``, so the
    needed cut grows with ``max |lam_m g_k / w_k|^2``. A fully decoupled bath
    starts (and stays) at 2.
    """
    if len(bath) == 0 or not np.any(bath.g):
        return 2
    shift = np.max(np.abs(system.pointer_values))[None] * np.abs(bath.g) / bath.omega
    return max(4, math.ceil(4 * float(np.max(shift)) ** 2))


def converge_truncation(
    system: SystemSpec,
    bath: DiscreteBath,
    beta: BetaLike,
    t_max: float,
    tol: float,
    renormalize: bool = False,
    budget: int = DEFAULT_BUDGET,
) -> TruncationSpec:
    """Grow a uniform Fock cut ``N -> ceil(3N/2)`` until the result settles.

    The reduced matrix at ``t_max`` is compared between successive cuts in
    max-norm; the first cut whose change is below ``tol`` is returned with
    that change stored in ``achieved_delta``.

    Raises
    ------
    DimensionBudgetExceeded
        With ``best_delta`` set to the smallest change observed.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    t_max = _check_time(t_max)
    K = len(bath)
    n = initial_levels(system, bath)
    if K == 0 or not np.any(bath.g):
        # nothing couples to the bath: every cut gives the same reduced state
        return TruncationSpec.uniform(2, K, convergence_tol=tol, budget=budget, achieved_delta=0.0)

    def run(levels):
        spec = TruncationSpec.uniform(levels, K, convergence_tol=tol, budget=budget)
        spec.check_budget(system.dim)
        H = build_total_hamiltonian(system, bath, spec, renormalize)
        return evolve_and_trace(H, system, bath, beta, spec, t_max).entries

    best = None
    try:
        previous = run(n)
    except DimensionBudgetExceeded as exc:
        raise DimensionBudgetExceeded(str(exc), best_delta=None) from None
    while True:
        n_next = math.ceil(3 * n / 2)
        try:
            current = run(n_next)
        except DimensionBudgetExceeded as exc:
            reached = "no comparison possible" if best is None else f"best delta reached {best:.3g}"
            raise DimensionBudgetExceeded(f"{exc}; {reached}", best_delta=best) from None
        delta = float(np.max(np.abs(current - previous)))
        best = delta if best is None else min(best, delta)
        if delta < tol:
            return TruncationSpec.uniform(n_next, K, convergence_tol=tol, budget=budget, achieved_delta=delta)
        n, previous = n_next, current
