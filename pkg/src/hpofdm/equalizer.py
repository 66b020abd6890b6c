"""Clipped zero-forcing equalizer.

Cells with |h| >= c are fully inverted. Weaker cells only get their phase
corrected and a fixed gain magnitude of 1/c, so the overall transfer
t = g h is |h|/c there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization


@dataclass(frozen=True)
class EqualizerProfile:
    c: float = 0.0
    use_estimate: bool = False

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError(f"clipping threshold must be >= 0, got {self.c}")

    @property
    def is_pure_zf(self) -> bool:
        # E|g|^2 is infinite for Rayleigh h at c = 0
        return self.c == 0


def gain(h, c: float):
    """Per-cell equalizer gain. Vectorized over ``h``; h == 0 maps to 0."""
    if c < 0:
        raise ValueError(f"clipping threshold must be >= 0, got {c}")
    h = np.asarray(h, dtype=complex)
    mag = np.abs(h)
    # phase and magnitude separately: conj(h) / (|h| max(|h|, c)) overflows for subnormal h
    phasor = np.exp(-1j * np.angle(h))
    scale = np.maximum(mag, c)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(mag > 0, phasor / np.where(scale > 0, scale, 1.0), 0.0)
    return g if g.ndim else complex(g)


def transfer(h, c: float, h_used=None):
    """Overall cell transfer t = g(h_used) * h."""
    h = np.asarray(h, dtype=complex)
    return gain(h if h_used is None else h_used, c) * h


def equalize(grid, ch: ChannelRealization, prof: EqualizerProfile) -> np.ndarray:
    grid = np.asarray(grid, dtype=complex)
    if grid.shape != ch.H.shape:
        raise ValueError(f"grid shape {grid.shape} does not match channel {ch.H.shape}")
    if prof.use_estimate:
        if ch.H_est is None:
            raise ValueError("equalizer profile asks for the estimate but the realization has none")
        h = ch.H_est
    else:
        h = ch.H
    return gain(h, prof.c) * grid
