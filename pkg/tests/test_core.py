import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dephase import (
    BathMode,
    DensityMatrix,
    DiscreteBath,
    Temperature,
    free_evolution,
    gamma_discrete,
    p_factor,
    reduced_density_matrix,
    s_factor,
    validate_system,
)
from dephase.core import COTH_SERIES_SWITCH, coth_half, decoherence_exponent
from dephase.errors import (
    DimensionMismatch,
    NegativeTime,
    NonpositiveOmega,
    NotHermitian,
    NotPositiveSemidefinite,
    TraceNotOne,
    ValidationError,
)

from conftest import PLUS, random_instance


class TestValidation:
    def test_plus_state_is_valid(self):
        s = validate_system([0, 1], [0, 1], [[0.5, 0.5], [0.5, 0.5]])
        assert s.dim == 2
        assert np.allclose(s.rho0.entries, PLUS)

    def test_basis_state_is_valid(self):
        s = validate_system([3.0, -1.0], [0.2, 7.0], [[1, 0], [0, 0]])
        assert s.rho0.entries[0, 0] == 1

    @pytest.mark.parametrize(
        "rho, exc",
        [
            ([[0.45, 0.45], [0.45, 0.45]], TraceNotOne),
            ([[0.5, 0.5], [0.4, 0.5]], NotHermitian),
            ([[1.5, 0], [0, -0.5]], NotPositiveSemidefinite),
            ([[0.5, 0.6], [0.6, 0.5]], NotPositiveSemidefinite),
        ],
    )
    def test_bad_density_matrix(self, rho, exc):
        with pytest.raises(exc):
            validate_system([0, 1], [0, 1], rho)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            validate_system([0, 1, 2], [0, 1], PLUS)

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            validate_system([0, 1], [0, 1], [[0.45, 0], [0, 0.45]])

    def test_density_matrix_is_read_only(self):
        rho = DensityMatrix(PLUS)
        with pytest.raises(ValueError):
            rho.entries[0, 0] = 1

    def test_zero_frequency_rejected(self):
        with pytest.raises(NonpositiveOmega):
            BathMode(0.0, 1.0)
        with pytest.raises(NonpositiveOmega):
            DiscreteBath([1.0, 0.0], [1, 1])

    def test_temperature(self):
        assert Temperature(math.inf).is_zero_temperature
        with pytest.raises(ValidationError):
            Temperature(0.0)
        with pytest.raises(ValidationError):
            Temperature(-1.0)

    def test_bath_round_trip_through_modes(self, two_mode_bath):
        again = DiscreteBath.from_modes(two_mode_bath.modes)
        assert np.array_equal(again.omega, two_mode_bath.omega)
        assert np.array_equal(again.g, two_mode_bath.g)


class TestCoth:
    def test_zero_temperature_is_one(self):
        assert np.all(coth_half(math.inf, np.array([1e-8, 1.0, 50.0])) == 1.0)

    def test_against_mpmath(self):
        for beta, w in [(2.0, 1.0), (0.1, 0.3), (1e-3, 0.01), (40.0, 2.0)]:
            assert coth_half(beta, w) == pytest.approx(float(mpmath.coth(mpmath.mpf(beta) * w / 2)), rel=1e-13)

    def test_continuous_across_series_switch(self):
        beta = 1.0
        below = coth_half(beta, COTH_SERIES_SWITCH * (1 - 1e-12))
        above = coth_half(beta, COTH_SERIES_SWITCH * (1 + 1e-12))
        assert abs(below - above) / above < 1e-10
        x = COTH_SERIES_SWITCH / 2
        series, direct = 1 / x + x / 3, 1 / math.tanh(x)
        exact = float(mpmath.coth(mpmath.mpf(x)))
        assert series == pytest.approx(exact, rel=1e-14)
        assert abs(series - direct) / exact < 1e-10


class TestFreeEvolution:
    def test_half_period_flips_coherence(self, qubit_plus):
        rho = free_evolution(qubit_plus, math.pi).entries
        assert np.allclose(rho, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)

    def test_time_zero_is_identity(self, qubit_plus):
        assert np.array_equal(free_evolution(qubit_plus, 0.0).entries, qubit_plus.rho0.entries)

    def test_degenerate_energies(self):
        s = validate_system([0, 0], [0, 1], PLUS)
        for t in (-3.0, 0.7, 12.0):
            assert np.allclose(free_evolution(s, t).entries, PLUS, atol=1e-15)

    def test_negative_time_allowed(self, qubit_plus):
        back = free_evolution(qubit_plus, -1.3).entries
        fwd = free_evolution(qubit_plus, 1.3).entries
        assert np.allclose(back, fwd.conj(), atol=1e-15)


class TestFactors:
    mode = BathMode(1.0, 1.0)

    def test_equal_pointer_values_vanish(self):
        assert p_factor(0.7, 0.7, self.mode, 2.0, 3.1) == 0
        assert s_factor(0.7, 0.7, self.mode, 2.0, 3.1) == 1

    def test_time_zero_vanishes(self):
        assert p_factor(1.0, -2.0, self.mode, 2.0, 0.0) == 0

    def test_reference_value(self):
        # 2 coth(1) and (1 - 0)(sin(pi) - pi), evaluated independently in mpmath
        p = p_factor(1.0, 0.0, self.mode, 2.0, math.pi)
        assert p.real == pytest.approx(float(2 * mpmath.coth(1)), rel=1e-14)
        assert p.real == pytest.approx(2.6260705710, abs=1e-9)
        assert p.imag == pytest.approx(-math.pi, rel=1e-14)
        s = s_factor(1.0, 0.0, self.mode, 2.0, math.pi)
        assert s == pytest.approx(complex(mpmath.exp(-(2 * mpmath.coth(1) - 1j * mpmath.pi))), rel=1e-14)

    def test_renormalized_imaginary_part(self):
        p = p_factor(1.0, 0.0, self.mode, 2.0, 1.0, renormalize=True)
        assert p.imag == pytest.approx(math.sin(1.0), rel=1e-15)

    def test_zero_coupling(self):
        assert s_factor(1.0, -3.0, BathMode(2.0, 0.0), 0.5, 4.0) == 1

    def test_zero_temperature(self):
        p = p_factor(2.0, 0.0, self.mode, math.inf, math.pi)
        assert p.real == pytest.approx(8.0, rel=1e-15)

    def test_negative_time_rejected(self):
        with pytest.raises(NegativeTime):
            p_factor(1.0, 0.0, self.mode, 1.0, -0.1)

    def test_underflow_gives_exact_zero(self):
        # exponent real part = -|g|^2/w^2 * 2 * 100 * coth(...) ~ -2e4
        s = s_factor(10.0, 0.0, BathMode(1.0, 10.0), 1.0, math.pi)
        assert s == 0
        bath = DiscreteBath([1.0], [10.0])
        system = validate_system([0, 1], [0, 10], PLUS)
        assert reduced_density_matrix(system, bath, 1.0, math.pi).entries[0, 1] == 0

    @given(
        st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 5), st.floats(-2, 2),
        st.floats(0.05, 20), st.floats(0, 20), st.booleans(),
    )
    def test_hermitian_pair_and_contraction(self, lm, ln, w, g, beta, t, ren):
        mode = BathMode(w, g)
        a = s_factor(lm, ln, mode, beta, t, ren)
        b = s_factor(ln, lm, mode, beta, t, ren)
        assert a == pytest.approx(b.conjugate(), rel=1e-12, abs=1e-300)
        assert abs(a) <= 1 + 1e-15

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 5), st.floats(-2, 2), st.floats(0.05, 20), st.floats(0, 20))
    def test_renormalization_keeps_magnitude(self, lm, ln, w, g, beta, t):
        mode = BathMode(w, g)
        assert abs(s_factor(lm, ln, mode, beta, t, True)) == pytest.approx(abs(s_factor(lm, ln, mode, beta, t, False)), rel=1e-14, abs=1e-300)


class TestReducedDensityMatrix:
    def test_empty_bath_is_free_evolution(self, qubit_plus):
        for t in (0.0, 0.4, 7.0):
            assert np.allclose(
                reduced_density_matrix(qubit_plus, DiscreteBath(), 1.0, t).entries,
                free_evolution(qubit_plus, t).entries,
                atol=0,
            )

    def test_equal_pointer_values_stay_coherent(self, two_mode_bath):
        s = validate_system([0.0, 1.3], [1.0, 1.0], PLUS)
        for t in np.linspace(0, 10, 11):
            assert np.allclose(
                reduced_density_matrix(s, two_mode_bath, 0.5, t).entries, free_evolution(s, t).entries, atol=1e-15
            )

    def test_diagonal_untouched(self, qubit_plus, two_mode_bath):
        rho = reduced_density_matrix(qubit_plus, two_mode_bath, 2.0, 3.0).entries
        assert np.array_equal(np.diag(rho), np.diag(qubit_plus.rho0.entries))

    def test_coupling_phases_are_irrelevant(self, two_mode_bath):
        rng = np.random.default_rng(5)
        s = validate_system([0, 0.3, 2], [0, 1, -0.5], np.eye(3) / 3 + 0.1 * (np.ones((3, 3)) - np.eye(3)))
        rotated = two_mode_bath.with_phases(rng.uniform(0, 2 * np.pi, len(two_mode_bath)))
        for t in (0.5, 2.0):
            assert np.allclose(
                reduced_density_matrix(s, two_mode_bath, 1.0, t).entries,
                reduced_density_matrix(s, rotated, 1.0, t).entries,
                atol=1e-14,
            )

    def test_negative_time_rejected(self, qubit_plus, two_mode_bath):
        with pytest.raises(NegativeTime):
            reduced_density_matrix(qubit_plus, two_mode_bath, 1.0, -1.0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0, 15))
    def test_invariants_on_random_instances(self, seed, t):
        system, bath, beta = random_instance(np.random.default_rng(seed))
        rho0 = system.rho0.entries
        rho = reduced_density_matrix(system, bath, beta, t).entries
        assert np.max(np.abs(np.diag(rho) - np.diag(rho0))) < 1e-12
        assert np.all(np.abs(rho) <= np.abs(rho0) + 1e-14)
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-10

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 15))
    def test_magnitude_law_matches_gamma(self, seed, t):
        # |rho_mn(t)| / |rho_mn(0)| = exp(-(lm - ln)^2 Gamma(t) / 4)
        system, bath, beta = random_instance(np.random.default_rng(seed))
        lam = system.pointer_values
        log_ratio = decoherence_exponent(system, bath, beta, t).real
        expected = -0.25 * (lam[:, None] - lam[None, :]) ** 2 * gamma_discrete(bath, beta, t)
        assert np.allclose(log_ratio, expected, rtol=1e-10, atol=1e-300)


class TestGammaDiscrete:
    def test_zero_time(self, two_mode_bath):
        assert gamma_discrete(two_mode_bath, 2.0, 0.0) == 0

    def test_single_mode_zero_temperature(self):
        assert gamma_discrete(DiscreteBath([1.0], [1.0]), math.inf, math.pi) == pytest.approx(8.0, rel=1e-15)

    def test_vectorized_over_time(self, two_mode_bath):
        times = np.array([0.0, 0.5, 3.0])
        out = gamma_discrete(two_mode_bath, 2.0, times)
        assert out.shape == (3,)
        assert out[2] == gamma_discrete(two_mode_bath, 2.0, 3.0)

    def test_periodic_for_single_mode(self):
        bath = DiscreteBath([1.7], [0.3])
        period = 2 * math.pi / 1.7
        ts = np.linspace(0, period, 13)
        assert np.allclose(gamma_discrete(bath, 3.0, ts), gamma_discrete(bath, 3.0, ts + period), rtol=1e-12)

    def test_magnitude_identity(self, qubit_plus, two_mode_bath):
        for t in (0.3, 1.0, 4.2):
            rho = reduced_density_matrix(qubit_plus, two_mode_bath, 2.0, t).entries
            expected = 0.5 * math.exp(-0.25 * gamma_discrete(two_mode_bath, 2.0, t))
            assert abs(rho[0, 1]) == pytest.approx(expected, rel=1e-12)

    def test_negative_time_rejected(self, two_mode_bath):
        with pytest.raises(NegativeTime):
            gamma_discrete(two_mode_bath, 1.0, -1e-3)
