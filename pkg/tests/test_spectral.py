import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptgf.exact import exact_greens_time, reference_greens_omega
from adaptgf.lattice import UP, jw_creation
from adaptgf.spectral import (
    PadeFitError,
    damped_dft,
    default_omega_grid,
    find_peaks,
    pade_eval,
    pade_fit,
    spectral_from_greens,
    write_spectrum_csv,
)

DT = 0.01


def damped_exponentials(amps, freqs, zeta, n):
    t = DT * np.arange(n)
    return sum(a * np.exp((-1j * w - zeta) * t) for a, w in zip(amps, freqs))


def test_single_exponential_exact_with_first_order():
    g = damped_exponentials([1.0], [1.5], 0.3, 50)
    fit = pade_fit(g, DT, order=1)
    assert fit.b_coeffs[0] == 1
    w = default_omega_grid(-6, 6, 0.01)
    A = spectral_from_greens(-1j * pade_eval(fit, w))
    peak = w[np.argmax(A)]
    # z = exp(i w dt) makes the sum peak at w0 = 1.5
    assert abs(peak - 1.5) <= 0.01


def test_two_exponentials_pole_positions():
    freqs, zeta = [-2.0, 3.0], 0.2
    g = damped_exponentials([0.4, 0.6], freqs, zeta, 40)
    fit = pade_fit(g, DT, order=2)
    expected = np.exp((1j * np.array(freqs) + zeta) * DT)
    got = fit.poles()
    for e in expected:
        assert np.min(np.abs(got - e)) < 1e-8


def test_zero_series():
    fit = pade_fit(np.zeros(21), DT)
    assert np.all(fit.a_coeffs == 0)
    assert np.all(pade_eval(fit, np.linspace(-1, 1, 5)) == 0)


def test_length_and_damping_errors():
    with pytest.raises(PadeFitError):
        pade_fit(np.ones(4), DT, order=2)
    with pytest.raises(ValueError):
        damped_dft(np.ones(4), 0.0, [0.0], DT)


def test_default_order_uses_every_sample():
    fit = pade_fit(damped_exponentials([1.0, 0.5], [1.0, -1.0], 0.1, 101), DT)
    assert fit.order == 50 and fit.source_len == 101


def test_constant_series_gives_lorentzian():
    zeta, T = 0.5, 60.0
    w = np.linspace(-3, 3, 61)
    g = damped_dft(np.ones(int(T / 0.002) + 1), zeta, w, 0.002)
    assert np.abs(g - 1 / (zeta - 1j * w)).max() < 1e-5


def test_grid_density_leaves_peaks_fixed():
    fit = pade_fit(damped_exponentials([1.0, 0.5], [1.0, -2.5], 0.0, 300), DT, zeta=0.5)
    coarse = default_omega_grid(-6, 6, 0.02)
    fine = default_omega_grid(-6, 6, 0.01)
    pc = find_peaks(coarse, spectral_from_greens(-1j * pade_eval(fit, coarse)))
    pf = find_peaks(fine, spectral_from_greens(-1j * pade_eval(fit, fine)))
    assert len(pc) == len(pf) == 2
    for (a, _), (b, _) in zip(pc, pf):
        assert abs(a - b) <= 0.02


def test_pade_matches_long_dft():
    g = damped_exponentials([0.7, 0.3], [0.8, -1.7], 0.05, 10001)
    w = np.linspace(-4, 4, 81)
    ref = damped_dft(g, 0.5, w, DT)
    pade = pade_eval(pade_fit(g[:1001], DT, zeta=0.5), w)
    assert np.abs(pade - ref).max() < 1e-3


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
@settings(max_examples=20, deadline=None)
def test_linearity(alpha):
    g = damped_exponentials([0.7, 0.3], [0.8, -1.7], 0.05, 201)
    w = np.linspace(-4, 4, 41)
    base = pade_eval(pade_fit(g, DT, zeta=0.5), w)
    scaled = pade_eval(pade_fit(alpha * g, DT, zeta=0.5), w)
    assert np.allclose(scaled, alpha * base, rtol=1e-8, atol=1e-10)


def test_oracle_time_data_reproduces_resolvent_peaks(hubbard2):
    _, layout, _, solver, gs = hubbard2
    c0 = jw_creation(0, UP, layout)
    times = DT * np.arange(1001)
    gr = exact_greens_time(solver, gs.state, gs.energy, c0, c0, times).retarded
    w = default_omega_grid()
    A_pade = spectral_from_greens(pade_eval(pade_fit(gr, DT, zeta=0.5), w))
    A_ref = spectral_from_greens(reference_greens_omega(solver, gs.state, gs.energy, c0, c0, w, 0.5))
    assert A_ref.min() >= -1e-6
    ref_peaks, got = find_peaks(w, A_ref), find_peaks(w, A_pade)
    assert len(ref_peaks) == len(got)
    for (wr, hr), (wp, hp) in zip(ref_peaks, got):
        assert abs(wr - wp) <= 0.01 + 1e-9
        assert abs(hp - hr) <= 0.05 * hr


def test_spectrum_csv(tmp_path):
    from adaptgf.io import read_csv

    w = np.array([-1.0, 0.0, 1.0])
    write_spectrum_csv(tmp_path / "a.csv", w, np.array([0, -1j, 0]), {"zeta": 0.5})
    back = read_csv(tmp_path / "a.csv")
    assert list(back) == ["omega", "re", "im", "spectral"]
    assert back["spectral"][1] == pytest.approx(1 / np.pi)
