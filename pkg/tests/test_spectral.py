"""Autocorrelation spectroscopy against the exactly solvable oscillator.

With one mode, z = z' = [-1/2, 1] and H the number operator,
K_t = e^{-1} exp(e^{-it}) = sum_n w_n e^{-int} with w_n = e^{-1}/n!,
so every op here has a hand-computable target.
"""

import math

import numpy as np
import pytest

from cohk.core import DomainError
from cohk.catalog import make_space
from cohk.dynamics import HamiltonianSpec, propagate_ode
from cohk.fock import OscGenerator, klauder_kernel
from cohk.spectral import (
    eigencomponent_overlap,
    kt_roundtrip_residual,
    oscillator_series,
    rational_element,
    resolvent_element,
    resolvent_equation_residual,
    resolvent_symmetry_residual,
    schwinger_dyson_residual,
    spectral_density,
    spectrum_scan,
    time_average_overlap,
)

SEED = 0xC0FFEE
Z0 = np.array([-0.5, 1.0], dtype=complex)


def _number_op(n=1):
    return OscGenerator(0.0, np.zeros(n), np.zeros(n), np.eye(n))


def _zero_op(n=1):
    return OscGenerator(0.0, np.zeros(n), np.zeros(n), np.zeros((n, n)))


def _w(n):
    return math.exp(-1.0) / math.factorial(n)


@pytest.fixture(scope="module")
def harmonic_series():
    return oscillator_series(_number_op(), Z0, Z0, 200.0 * math.pi, 0.05)


def test_series_matches_closed_form(harmonic_series):
    t = harmonic_series.times
    exact = np.exp(-1.0) * np.exp(np.exp(-1j * t))
    assert np.abs(harmonic_series.values - exact).max() < 1e-11
    assert harmonic_series.t0 == 0.0
    assert harmonic_series.hbar == 1.0


def test_series_rejects_bad_grids():
    with pytest.raises(DomainError):
        oscillator_series(_number_op(), Z0, Z0, 10.0, -0.1)
    with pytest.raises(DomainError):
        oscillator_series(_number_op(), Z0, Z0, 1e9, 1e-3)


def test_time_average_picks_the_ground_weight(harmonic_series):
    got = time_average_overlap(harmonic_series, 0.0, 200.0 * math.pi)
    assert got == pytest.approx(_w(0), abs=1e-4)


def test_time_average_picks_excited_weights(harmonic_series):
    for n in (1, 2, 3):
        got = time_average_overlap(harmonic_series, float(n), 200.0 * math.pi)
        assert got == pytest.approx(_w(n), abs=1e-4)


def test_time_average_off_spectrum_decays_like_one_over_t(harmonic_series):
    # |average| <= sum_n w_n / (T |E - n|) <= 2/T at E = 1/2
    for T in (100.0, 200.0, 400.0):
        got = abs(time_average_overlap(harmonic_series, 0.5, T))
        assert got <= 2.0 / T


def test_time_average_needs_coverage(harmonic_series):
    with pytest.raises(DomainError):
        time_average_overlap(harmonic_series, 0.0, 1e6)


def test_time_average_off_diagonal_needs_swapped_series():
    zp = np.array([0.2, 0.5 - 0.3j], dtype=complex)
    fwd = oscillator_series(_number_op(), Z0, zp, 50.0, 0.05)
    with pytest.raises(DomainError):
        time_average_overlap(fwd, 0.0, 40.0)
    swapped = oscillator_series(_number_op(), zp, Z0, 50.0, 0.05)
    got = time_average_overlap(fwd, 1.0, 40.0, swapped=swapped)
    # first coefficient of exp(conj(z0) + zp0 + e^{-it} vdot(zhat, zphat))
    pref = np.exp(np.conj(Z0[0]) + zp[0])
    a = np.vdot(Z0[1:], zp[1:])
    assert got == pytest.approx(pref * a, abs=5e-2 * abs(pref))


def test_scan_finds_lines_and_weights(harmonic_series):
    E_grid = np.arange(-0.5, 4.5, 0.004)
    lines = spectrum_scan(harmonic_series, E_grid)
    assert len(lines) == 5
    for n, line in enumerate(lines):
        assert line.energy == pytest.approx(float(n), abs=0.004)
        assert line.weight == pytest.approx(_w(n), abs=1e-3)


def test_scan_rejects_coarse_grids(harmonic_series):
    with pytest.raises(DomainError):
        spectrum_scan(harmonic_series, np.arange(-0.5, 4.5, 0.05))


def test_scan_constant_series_is_a_single_zero_line():
    ser = oscillator_series(_zero_op(), Z0, Z0, 200.0, 0.05)
    lines = spectrum_scan(ser, np.arange(-1.0, 1.0, 0.01))
    assert len(lines) == 1
    assert lines[0].energy == pytest.approx(0.0, abs=0.01)
    assert lines[0].weight == pytest.approx(abs(klauder_kernel(Z0, Z0)), rel=1e-6)


def test_scan_two_mode_line_positions():
    om = np.array([1.0, math.sqrt(2.0)])
    gen = OscGenerator(0.0, np.zeros(2), np.zeros(2), np.diag(om))
    z = np.array([-0.5, 0.8, 0.6], dtype=complex)
    ser = oscillator_series(gen, z, z, 40.0 * math.pi, 0.02)
    grid = np.arange(-0.3, 3.2, 0.005)
    lines = spectrum_scan(ser, grid)
    expected = sorted(
        n1 * om[0] + n2 * om[1]
        for n1 in range(4) for n2 in range(3)
        if n1 * om[0] + n2 * om[1] < 3.0
    )
    got = [line.energy for line in lines]
    for e in expected:
        assert min(abs(g - e) for g in got) < 0.005


def test_resolvent_zero_generator_is_kernel_over_e():
    ham = HamiltonianSpec(gen=_zero_op())
    E = 0.5 + 0.1j
    g = resolvent_element(None, ham, Z0, Z0, E)
    assert g.value == pytest.approx(klauder_kernel(Z0, Z0) / E, rel=1e-4)


def test_resolvent_matches_eigen_sum():
    ham = HamiltonianSpec(gen=_number_op())
    E = 0.5 + 0.1j
    g = resolvent_element(None, ham, Z0, Z0, E)
    exact = sum(_w(n) / (E - n) for n in range(60))
    assert abs(g.value - exact) < 1e-4


def test_resolvent_needs_upper_half_plane():
    ham = HamiltonianSpec(gen=_number_op())
    with pytest.raises(DomainError):
        resolvent_element(None, ham, Z0, Z0, 0.5 - 0.1j)
    with pytest.raises(DomainError):
        resolvent_element(None, ham, Z0, Z0, 0.5)


def test_resolvent_symmetry_off_diagonal():
    ham = HamiltonianSpec(gen=_number_op())
    zp = np.array([0.2 + 0.1j, 0.4 - 0.3j], dtype=complex)
    res = resolvent_symmetry_residual(None, ham, Z0, zp, 0.5 + 0.1j)
    assert res <= 1e-10 * abs(klauder_kernel(Z0, zp))


def test_rational_single_complex_root_is_minus_resolvent():
    ham = HamiltonianSpec(gen=_number_op())
    E0 = 0.5 + 0.1j
    got = rational_element(None, ham, Z0, Z0, [E0], [1.0])
    g = resolvent_element(None, ham, Z0, Z0, E0).value
    assert got == pytest.approx(-g, rel=1e-12)


def test_rational_real_root_zero_generator():
    # 1/(H + 1) with H = 0 is just 1; the eta extrapolation must recover it
    ham = HamiltonianSpec(gen=_zero_op())
    got = rational_element(None, ham, Z0, Z0, [-1.0], [1.0], eta=0.05)
    assert got == pytest.approx(klauder_kernel(Z0, Z0), rel=5e-3)


def test_rational_rejects_bad_inputs():
    ham = HamiltonianSpec(gen=_number_op())
    with pytest.raises(DomainError):
        rational_element(None, ham, Z0, Z0, [1.0 + 1e-9, 1.0], [1.0])
    with pytest.raises(DomainError):
        rational_element(None, ham, Z0, Z0, [-1.0], [1.0, 2.0])
    from cohk.spectral import SpectralLine
    spectrum = [SpectralLine(1.0, _w(1))]
    with pytest.raises(DomainError):
        rational_element(None, ham, Z0, Z0, [1.05], [1.0], eta=0.05,
                         spectrum=spectrum)


def test_spectral_density_peak_height():
    ham = HamiltonianSpec(gen=_number_op())
    eta = 0.05
    grid = np.array([1.0])
    dens = spectral_density(None, ham, Z0, Z0, grid, eta)
    lorentz_peak = _w(1) / (math.pi * eta)
    tails = sum(_w(n) * eta / math.pi / (1.0 - n) ** 2
                for n in range(8) if n != 1)
    assert dens[0] == pytest.approx(lorentz_peak + tails, rel=1e-2)


def test_density_is_nonnegative_and_sums_to_diagonal():
    ham = HamiltonianSpec(gen=_number_op())
    grid = np.arange(-3.0, 10.0, 0.01)
    dens = spectral_density(None, ham, Z0, Z0, grid, 0.05)
    assert dens.min() >= -1e-6
    total = np.trapezoid(dens, x=grid)
    assert total == pytest.approx(abs(klauder_kernel(Z0, Z0)), abs=1e-2)


def test_kt_roundtrip_residuals():
    ham = HamiltonianSpec(gen=_number_op())
    grid = np.arange(-3.0, 10.0, 0.01)
    assert kt_roundtrip_residual(None, ham, Z0, Z0, 0.0, 0.05, grid) <= 2e-2
    assert kt_roundtrip_residual(None, ham, Z0, Z0, 0.7, 0.05, grid) <= 5e-2


def test_kt_roundtrip_zero_generator():
    # Tail mass outside [-a, a] is (eta/pi)(2/a), so a = 35 leaves ~9e-4;
    # the E step must stay below eta/2 or the Lorentzian is undersampled.
    ham = HamiltonianSpec(gen=_zero_op())
    grid = np.arange(-35.0, 35.0 + 1e-9, 0.025)
    assert kt_roundtrip_residual(None, ham, Z0, Z0, 0.0, 0.05, grid) <= 1e-3
    assert kt_roundtrip_residual(None, ham, Z0, Z0, 0.01, 0.05, grid) <= 1e-3


def test_kt_roundtrip_rejects_narrow_grids():
    ham = HamiltonianSpec(gen=_number_op())
    with pytest.raises(DomainError):
        kt_roundtrip_residual(None, ham, Z0, Z0, 0.0, 0.05,
                              np.arange(-0.5, 4.0, 0.01))


def test_schwinger_dyson_residual_seeded():
    ham = HamiltonianSpec(gen=_number_op())
    rng = np.random.default_rng(SEED)
    for _ in range(10):
        z = 0.7 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        zp = 0.7 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        t = float(rng.uniform(0.0, 8.0))
        assert schwinger_dyson_residual(None, ham, z, zp, t) <= 1e-6


def test_resolvent_equation_residual():
    ham = HamiltonianSpec(gen=_number_op())
    res = resolvent_equation_residual(None, ham, Z0, Z0, 0.5 + 0.1j)
    assert res <= 1e-4


def test_eigencomponent_overlap_from_trajectory():
    space = make_space("klauder")
    ham = HamiltonianSpec(gen=_number_op())
    traj = propagate_ode(space, ham, Z0, 300.0, 0.05)
    got = eigencomponent_overlap(space, Z0, traj, 1.0, 300.0)
    assert got == pytest.approx(_w(1), abs=5e-3)
    flat = eigencomponent_overlap(space, Z0, traj, 0.0, 300.0)
    assert flat == pytest.approx(_w(0), abs=5e-3)
