"""End-to-end link: bits -> QPSK -> precoder -> interleaver -> channel ->
clipped ZF -> deinterleaver -> deprecoder -> QPSK decisions.

The IFFT / cyclic prefix / FFT stage is not simulated sample by sample.
With a unitary FFT, a CP longer than the channel and no ICI, it reduces
to the per-cell multiplication done in :mod:`hpofdm.channel`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .channel import estimate, get_profile, noise_variance, realize
from .equalizer import gain
from .interleaver import GridMap, build_map, deinterleave, interleave, minimal_frame_length
from .numerics import MomentAccumulator, Rng, _check_pow2, fwht, gaussian_complex

MODES = ("precoded", "uncoded", "ofdm-cdm")

# Sub-stream ids inside one trial
_BITS, _FADING, _NOISE, _CSI = 0, 1, 2, 3

_SQRT_HALF = 1.0 / math.sqrt(2.0)


def qpsk_map(bits) -> np.ndarray:
    """Gray QPSK: bit pair (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).

    So 00 -> (1+j)/sqrt2, 10 -> (-1+j)/sqrt2, 11 -> (-1-j)/sqrt2, 01 -> (1-j)/sqrt2.
    """
    b = np.asarray(bits)
    if b.shape[-1] % 2:
        raise ValueError(f"QPSK needs an even number of bits, got {b.shape[-1]}")
    b = b.reshape(*b.shape[:-1], -1, 2).astype(np.int8)
    return _SQRT_HALF * ((1 - 2 * b[..., 0]) + 1j * (1 - 2 * b[..., 1]))


def qpsk_demap(symbols) -> np.ndarray:
    """Hard decisions, inverse of :func:`qpsk_map`. A zero component decides bit 0."""
    s = np.asarray(symbols, dtype=complex)
    out = np.empty(s.shape + (2,), dtype=np.uint8)
    out[..., 0] = s.real < 0
    out[..., 1] = s.imag < 0
    return out.reshape(*s.shape[:-1], -1) if s.ndim else out


@dataclass(frozen=True)
class LinkConfig:
    """Link parameters. Defaults reproduce the Vehicular A scenario at 3.5 GHz, 120 km/h."""

    S: int = 512
    T: int | None = None  # symbols per frame; None -> minimal tiling repeated to cover min_symbols
    N: int = 256
    Df: int = 40
    Dt: int = 11
    snr_db: float = 10.0
    c: float | None = None  # None -> analysis optimum for snr_db
    csi_err: float = 0.0
    fd: float = 389.0
    profile: str = "vehicular-a"
    mode: str = "precoded"
    master_seed: int = 0
    delta_f: float = 1.0 / 91e-6
    T_sym: float = 102e-6
    bandwidth: float = 5e6
    P_s: float = 1.0
    frames: int | None = None  # frames per trial; None -> enough for min_symbols
    min_symbols: int = 220
    n_osc: int = 64
    track_noise: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        _check_pow2(self.S, "S")
        _check_pow2(self.N, "N")
        if self.mode == "precoded" and self.N > self.S * (self.T or 10**12):
            raise ValueError("N cannot exceed the number of cells in a frame")
        if self.csi_err < 0:
            raise ValueError("csi_err must be non-negative")
        if self.c is not None and self.c < 0:
            raise ValueError("c must be non-negative")
        if self.fd < 0:
            raise ValueError("fd must be non-negative")

    def resolved(self) -> "LinkConfig":
        """Apply mode rules (uncoded: N=1; ofdm-cdm: N=S, consecutive) and fill defaults."""
        cfg = self
        if cfg.mode == "uncoded":
            cfg = replace(cfg, N=1, Df=1, Dt=1)
        elif cfg.mode == "ofdm-cdm":
            cfg = replace(cfg, N=cfg.S, Df=1, Dt=1)
        T = cfg.T
        if T is None:
            t0 = minimal_frame_length(cfg.S, cfg.N, cfg.Df, cfg.Dt)
            T = t0 * max(1, -(-cfg.min_symbols // t0))
        frames = cfg.frames or max(1, -(-cfg.min_symbols // T))
        c = cfg.c
        if c is None:
            s2 = noise_variance(cfg.snr_db, cfg.P_s)
            c = _optimum_c(cfg.P_s, s2) if s2 > 0 else 0.0
        return replace(cfg, T=T, frames=frames, c=float(c))

    def grid_map(self) -> GridMap:
        cfg = self.resolved()
        return build_map(cfg.S, cfg.T, cfg.N, cfg.Df, cfg.Dt)


@dataclass
class TrialStats:
    """Mergeable per-trial counters.

    ``v`` and ``w`` hold the noise at the equalizer and deprecoder outputs;
    ``err`` holds the symbol error d_hat - d.
    """

    bits: int = 0
    errors: int = 0
    v: MomentAccumulator = field(default_factory=MomentAccumulator)
    w: MomentAccumulator = field(default_factory=MomentAccumulator)
    err: MomentAccumulator = field(default_factory=MomentAccumulator)
    trials: int = 0

    def merge(self, other: "TrialStats") -> "TrialStats":
        return TrialStats(
            self.bits + other.bits,
            self.errors + other.errors,
            self.v + other.v,
            self.w + other.w,
            self.err + other.err,
            self.trials + other.trials,
        )

    __add__ = merge

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else float("nan")


@functools.lru_cache(maxsize=256)
def _optimum_c(P_s: float, sigma_n2: float) -> float:
    return analysis.optimum_c(P_s, sigma_n2)


_map_cache: dict[tuple, GridMap] = {}


def _cached_map(cfg: LinkConfig) -> GridMap:
    key = (cfg.S, cfg.T, cfg.N, cfg.Df, cfg.Dt)
    gm = _map_cache.get(key)
    if gm is None:
        gm = _map_cache[key] = build_map(*key)
    return gm


def run_trial(cfg: LinkConfig, trial_index: int) -> TrialStats:
    """Simulate one trial (``cfg.frames`` frames, fresh fading per frame).

    Random streams depend only on (master_seed, trial_index) and the
    purpose of the draw, so two configs that differ only in c, N or mode
    see the same fading and the same noise samples.
    """
    cfg = cfg.resolved()
    gmap = _cached_map(cfg)
    prof = get_profile(cfg.profile)
    rng = Rng(cfg.master_seed, trial_index)
    g_bits = rng.generator(_BITS)
    g_fade = rng.generator(_FADING)
    g_noise = rng.generator(_NOISE)
    g_csi = rng.generator(_CSI)
    s2 = noise_variance(cfg.snr_db, cfg.P_s)
    amp = math.sqrt(cfg.P_s)

    stats = TrialStats(trials=1)
    cells = cfg.S * cfg.T
    for _ in range(cfg.frames):
        bits = g_bits.integers(0, 2, size=2 * cells, dtype=np.uint8)
        d = amp * qpsk_map(bits).reshape(gmap.num_blocks, gmap.N)
        grid = interleave(fwht(d), gmap)

        ch = realize(prof, cfg.fd, cfg.S, cfg.T, cfg.delta_f, cfg.T_sym, g_fade, cfg.n_osc)
        H = ch.H
        n = gaussian_complex(g_noise, s2, H.shape) if s2 > 0 else np.zeros(H.shape, complex)
        if cfg.csi_err > 0:
            H_used = estimate(ch, cfg.csi_err, g_csi).H_est
        else:
            H_used = H
        G = gain(H_used, cfg.c)

        y = G * (H * grid + n)
        d_hat = fwht(deinterleave(y, gmap, as_block=False))
        rx = qpsk_demap(d_hat.ravel())
        stats.bits += bits.size
        stats.errors += int(np.count_nonzero(rx != bits))
        if cfg.track_noise:
            v = G * n
            w = fwht(deinterleave(v, gmap, as_block=False))
            stats.v.add(v)
            stats.w.add(w)
            stats.err.add(d_hat - d)
    return stats


def run_trials(cfg: LinkConfig, trials, executor=None) -> TrialStats:
    """Run and merge several trials; ``executor.map`` is used when given."""
    trials = list(trials)
    cfg = cfg.resolved()
    mapper = executor.map if executor is not None else map
    total = TrialStats()
    for st in mapper(lambda i: run_trial(cfg, i), trials):
        total = total + st
    return total
