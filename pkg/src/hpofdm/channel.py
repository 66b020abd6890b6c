"""Time-variant frequency-selective Rayleigh fading on the OFDM grid.

Each tap of a tapped delay line fades as a sum of ``n_osc`` complex
sinusoids with random arrival angles and phases, which has the Jakes
autocorrelation J0(2 pi fd tau) in ensemble. The channel acts on the
grid cell by cell (no inter-carrier interference); gains are held
constant over one OFDM symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .numerics import _as_generator, fft, gaussian_complex, ifft


@dataclass(frozen=True, eq=False)
class TapProfile:
    delays_ns: np.ndarray
    powers_db: np.ndarray
    name: str = ""
    fading: bool = True  # False: taps are fixed at their mean power (no Rayleigh)

    def __post_init__(self):
        d = np.asarray(self.delays_ns, dtype=float)
        p = np.asarray(self.powers_db, dtype=float)
        if d.ndim != 1 or d.shape != p.shape or d.size == 0:
            raise ValueError("delays and powers must be equal-length non-empty sequences")
        if np.any(np.diff(d) <= 0):
            raise ValueError("tap delays must be strictly increasing")
        if d[0] < 0:
            raise ValueError("tap delays must be non-negative")
        object.__setattr__(self, "delays_ns", d)
        object.__setattr__(self, "powers_db", p)

    @property
    def delays(self) -> np.ndarray:
        """Delays in seconds."""
        return self.delays_ns * 1e-9

    @property
    def weights(self) -> np.ndarray:
        """Linear tap powers normalized to unit total."""
        w = 10.0 ** (self.powers_db / 10.0)
        return w / w.sum()

    @property
    def num_taps(self) -> int:
        return self.delays_ns.size

    def frequency_correlation(self, delta_hz) -> np.ndarray:
        """Ensemble correlation E[H(f) H*(f + delta)] of the unit-power channel."""
        delta_hz = np.asarray(delta_hz, dtype=float)
        return np.exp(2j * np.pi * np.multiply.outer(delta_hz, self.delays)) @ self.weights


VEHICULAR_A = TapProfile(
    [0.0, 310.0, 710.0, 1090.0, 1730.0, 2510.0],
    [0.0, -1.0, -9.0, -10.0, -15.0, -20.0],
    name="vehicular-a",
)

PROFILES = {
    "vehicular-a": VEHICULAR_A,
    "flat": TapProfile([0.0], [0.0], name="flat"),
    "awgn": TapProfile([0.0], [0.0], name="awgn", fading=False),
}


def load_profile(path) -> TapProfile:
    """Read a profile file: one ``<delay_ns> <power_db>`` pair per line, ``#`` comments."""
    delays, powers = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected '<delay_ns> <power_db>'")
        try:
            delays.append(float(parts[0]))
            powers.append(float(parts[1]))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number in {line!r}") from None
    return TapProfile(delays, powers, name=Path(path).stem)


def get_profile(name: str) -> TapProfile:
    if name in PROFILES:
        return PROFILES[name]
    if Path(name).is_file():
        return load_profile(name)
    raise ValueError(f"unknown channel profile {name!r} (built-in: {', '.join(PROFILES)})")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    tap_gains: np.ndarray  # (T, L)
    H: np.ndarray  # (S, T)
    fd: float
    H_est: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.H.shape


def tap_processes(weights, fd: float, times, gen: np.random.Generator, n_osc: int = 64) -> np.ndarray:
    """Sum-of-sinusoids tap gains, shape (len(times), L), with E|a_l|^2 = weights[l]."""
    weights = np.asarray(weights, dtype=float)
    L = weights.size
    alpha = gen.uniform(0.0, 2.0 * np.pi, size=(L, n_osc))
    phi = gen.uniform(0.0, 2.0 * np.pi, size=(L, n_osc))
    dopp = fd * np.cos(alpha)  # (L, M)
    arg = 2.0 * np.pi * np.multiply.outer(np.asarray(times, dtype=float), dopp) + phi  # (T, L, M)
    a = np.exp(1j * arg).sum(axis=-1)
    return a * np.sqrt(weights / n_osc)


def realize(
    profile: TapProfile,
    fd: float,
    S: int,
    T: int,
    delta_f: float,
    T_sym: float,
    rng,
    n_osc: int = 64,
) -> ChannelRealization:
    """Draw one channel trajectory over T OFDM symbols and its S x T response.

    H[k, t] = sum_l a_l(t) exp(-j 2 pi k delta_f tau_l), using the exact tap delays.
    """
    if fd < 0:
        raise ValueError(f"Doppler frequency must be non-negative, got {fd}")
    if not delta_f > 0 or not T_sym > 0:
        raise ValueError("delta_f and T_sym must be positive")
    gen = _as_generator(rng)
    times = np.arange(T) * T_sym
    if profile.fading:
        gains = tap_processes(profile.weights, fd, times, gen, n_osc)
    else:
        gains = np.broadcast_to(np.sqrt(profile.weights).astype(complex), (T, profile.num_taps)).copy()
    steer = np.exp(-2j * np.pi * np.multiply.outer(np.arange(S) * delta_f, profile.delays))  # (S, L)
    H = steer @ gains.T
    return ChannelRealization(gains, H, float(fd))


def noise_variance(snr_db: float, P_s: float = 1.0) -> float:
    """sigma_n^2 = P_s / 10^(snr/10); zero for infinite SNR."""
    if np.isposinf(snr_db):
        return 0.0
    return P_s / 10.0 ** (snr_db / 10.0)


def awgn(shape, snr_db: float, rng, P_s: float = 1.0) -> np.ndarray:
    s2 = noise_variance(snr_db, P_s)
    if s2 == 0.0:
        return np.zeros(shape, dtype=complex)
    return gaussian_complex(rng, s2, shape)


def apply(grid, ch: ChannelRealization, snr_db: float, rng, P_s: float = 1.0, return_noise: bool = False):
    """r = H x + n, cell by cell."""
    grid = np.asarray(grid, dtype=complex)
    if grid.shape != ch.H.shape:
        raise ValueError(f"grid shape {grid.shape} does not match channel {ch.H.shape}")
    n = awgn(grid.shape, snr_db, rng, P_s)
    r = ch.H * grid + n
    return (r, n) if return_noise else r


def estimate(ch: ChannelRealization, err_power: float, rng) -> ChannelRealization:
    """Return ``ch`` with H_est = H + eps, eps complex Gaussian of power ``err_power``."""
    if err_power < 0:
        raise ValueError(f"estimation error power must be non-negative, got {err_power}")
    if err_power == 0:
        return replace(ch, H_est=ch.H.copy())
    eps = gaussian_complex(rng, err_power, ch.H.shape)
    return replace(ch, H_est=ch.H + eps)


# -- time-domain validation mode (static channel only) ---------------------


def quantized_delays(profile: TapProfile, sample_rate: float) -> np.ndarray:
    """Tap delays rounded to the nearest sample, as integer sample counts."""
    return np.rint(profile.delays * sample_rate).astype(int)


def quantized_response(profile: TapProfile, tap_gains, S: int, sample_rate: float) -> np.ndarray:
    """Per-subcarrier response of the sample-quantized delay line, shape (S,)."""
    d = quantized_delays(profile, sample_rate)
    k = np.arange(S)
    return np.exp(-2j * np.pi * np.outer(k, d) / S) @ np.asarray(tap_gains)


def time_domain_apply(grid, profile: TapProfile, tap_gains, sample_rate: float, cp_len: int) -> np.ndarray:
    """Run an (S, T) grid through IFFT, cyclic prefix, a static tapped delay line and FFT.

    Delays are rounded to the sampling grid. The CP must cover the longest delay.
    """
    grid = np.asarray(grid, dtype=complex)
    S, T = grid.shape
    d = quantized_delays(profile, sample_rate)
    if d.max() > cp_len:
        raise ValueError(f"cyclic prefix of {cp_len} samples shorter than channel ({d.max()})")
    x = ifft(grid, axis=0)
    x = np.concatenate([x[-cp_len:], x], axis=0) if cp_len else x
    stream = x.T.ravel()
    impulse = np.zeros(d.max() + 1, dtype=complex)
    np.add.at(impulse, d, np.asarray(tap_gains, dtype=complex))
    y = np.convolve(stream, impulse)[: stream.size]
    y = y.reshape(T, S + cp_len).T[cp_len:]
    return fft(y, axis=0)
