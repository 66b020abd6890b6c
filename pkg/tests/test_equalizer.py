import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hpofdm.analysis import gain_moments, noise_moments_v
from hpofdm.channel import VEHICULAR_A, estimate, realize
from hpofdm.equalizer import EqualizerProfile, equalize, gain, transfer
from hpofdm.numerics import Rng, gaussian_complex


def rayleigh(n, seed):
    return gaussian_complex(Rng(seed), 1.0, n)


def test_above_threshold_inverts():
    assert gain(1.0, 0.5) == 1
    assert transfer(1.0, 0.5) == 1


def test_clipped_branch():
    c = 0.8
    h = 0.4 * np.exp(0.3j)
    assert abs(abs(gain(h, c)) - 1 / c) < 1e-15
    t = transfer(h, c)
    assert abs(t - 0.5) < 1e-15


def test_boundary_continuity():
    c = 0.7
    h = 1j * c
    assert abs(gain(h, c) - np.conj(h) / c**2) < 1e-15
    assert abs(transfer(h, c) - 1) < 1e-15


def test_zero_channel_gives_zero_gain():
    assert gain(0.0, 0.5) == 0
    assert gain(0.0, 0.0) == 0


def test_negative_threshold_rejected():
    with pytest.raises(ValueError):
        gain(1.0, -0.1)
    with pytest.raises(ValueError):
        EqualizerProfile(c=-1)


@given(
    st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
    st.floats(1e-3, 10),
)
def test_gain_bounded_and_phase_corrected(h, c):
    g = gain(h, c)
    assert abs(g) <= 1 / c * (1 + 1e-12)
    t = g * h
    if h != 0:
        assert abs(t.imag) <= 1e-12 * max(1.0, abs(t))
        assert t.real > 0


def _grid_channel(seed, S=64, T=8):
    return realize(VEHICULAR_A, 389.0, S, T, 1 / 91e-6, 102e-6, Rng(seed))


def test_pure_zf_noiseless_identity():
    ch = _grid_channel(1)
    x = rayleigh((64, 8), 2)
    y = equalize(ch.H * x, ch, EqualizerProfile(0.0))
    assert np.max(np.abs(y - x)) < 1e-9
    assert EqualizerProfile(0.0).is_pure_zf


def test_no_cell_clipped_identity():
    rng = np.random.default_rng(3)
    h = (1 + rng.random(100)) * np.exp(2j * np.pi * rng.random(100))
    x = rayleigh(100, 4)
    np.testing.assert_allclose(gain(h, 1.0) * h * x, x, atol=1e-12)


def test_distortion_exactly_on_weak_cells():
    ch = _grid_channel(5, 512, 20)
    t = transfer(ch.H, 1.0)
    distorted = np.abs(t - 1) > 1e-12
    np.testing.assert_array_equal(distorted, np.abs(ch.H) < 1.0)


def test_estimate_used_for_gain():
    ch = estimate(_grid_channel(6), 0.01, Rng(7))
    x = np.ones(ch.shape)
    y_est = equalize(ch.H * x, ch, EqualizerProfile(0.0, use_estimate=True))
    np.testing.assert_allclose(y_est, gain(ch.H_est, 0.0) * ch.H, atol=1e-15)
    with pytest.raises(ValueError):
        equalize(x, _grid_channel(6), EqualizerProfile(0.0, use_estimate=True))


@pytest.mark.parametrize("c", [0.3, 0.75, 1.0])
def test_equalized_noise_power_matches_quadrature(c):
    h = rayleigh(10**6, 8)
    n = gaussian_complex(Rng(9), 0.1, 10**6)
    v = gain(h, c) * n
    pred, _ = noise_moments_v(0.1, gain_moments(c))
    assert abs(np.mean(np.abs(v) ** 2) / pred - 1) < 0.01


def test_tradeoff_monotone_in_c():
    h = rayleigh(10**6, 10)
    cs = np.linspace(0.05, 2.0, 20)
    g2 = [np.mean(np.abs(gain(h, c)) ** 2) for c in cs]
    dist = [abs(np.mean(transfer(h, c)) - 1) ** 2 for c in cs]
    assert np.all(np.diff(g2) <= 0)
    assert np.all(np.diff(dist) >= 0)
