"""Time-frequency interleaving of precoded blocks onto the OFDM grid.

Grid rows are split into ``Dt`` lanes by residue of the symbol index
modulo ``Dt``. A lane is read as one long sequence of cells, subcarrier
fastest::

    u  ->  (u mod S,  lane + Dt * floor(u / S))

Blocks are packed into each lane in groups of ``Df``. Block ``f0`` of a
group starting at ``u0`` takes the cells ``u0 + f0 + j*Df`` for
``j = 0..N-1``. Two symbols of the same block therefore sit at least
``Df`` subcarriers apart in one OFDM symbol, or at least ``Dt`` symbols
apart in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import SizingError
from .precoder import SymbolBlock


class MapConstructionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GridMap:
    S: int
    T: int
    N: int
    Df: int
    Dt: int
    freq: np.ndarray  # (num_blocks, N) subcarrier of symbol j of block b
    time: np.ndarray  # (num_blocks, N) OFDM symbol index

    @property
    def num_blocks(self) -> int:
        return self.freq.shape[0]

    def block_offsets(self) -> list[tuple[int, int]]:
        """(f0, t0) of every block, i.e. the cell of its first symbol."""
        return list(zip(self.freq[:, 0].tolist(), self.time[:, 0].tolist()))

    def min_separation_ok(self) -> bool:
        """Exhaustive pairwise check of the within-block separation rule."""
        if self.N == 1:
            return True
        for f, t in zip(self.freq, self.time):
            df = np.abs(f[:, None] - f[None, :])
            dt = np.abs(t[:, None] - t[None, :])
            ok = (df >= self.Df) | (dt >= self.Dt)
            np.fill_diagonal(ok, True)
            if not ok.all():
                return False
        return True


def minimal_frame_length(S: int, N: int, Df: int, Dt: int) -> int:
    """Smallest T for which the lane packing tiles an S x T grid."""
    if N == 1:
        return 1
    # S*(T/Dt) must be a multiple of N*Df
    per_lane = (N * Df) // math.gcd(S, N * Df)
    return Dt * per_lane


def build_map(S: int, T: int, N: int, Df: int = 1, Dt: int = 1) -> GridMap:
    """Construct the interleaver map for an S x T grid and block size N."""
    for name, v in (("S", S), ("T", T), ("N", N), ("Df", Df), ("Dt", Dt)):
        if int(v) != v or v < 1:
            raise MapConstructionError(f"{name} must be a positive integer, got {v}")
    if (S * T) % N:
        raise SizingError(f"S*T = {S * T} is not a multiple of N = {N}")
    if Df > S:
        raise MapConstructionError(f"Df = {Df} exceeds S = {S}")
    if Dt > T:
        raise MapConstructionError(f"Dt = {Dt} exceeds T = {T}")
    if N == 1:
        Df_eff, Dt_eff = 1, 1
    else:
        Df_eff, Dt_eff = Df, Dt
    if T % Dt_eff:
        raise MapConstructionError(f"T = {T} is not a multiple of Dt = {Dt}")
    lane_len = S * (T // Dt_eff)
    group = N * Df_eff
    if lane_len % group:
        raise MapConstructionError(
            f"a lane of {lane_len} cells cannot hold whole groups of {Df_eff} blocks x {N} symbols; "
            f"use T a multiple of {minimal_frame_length(S, N, Df, Dt)}"
        )
    groups_per_lane = lane_len // group
    # block order: lane, then group within lane, then f0
    lane = np.repeat(np.arange(Dt_eff), groups_per_lane * Df_eff)
    g = np.tile(np.repeat(np.arange(groups_per_lane), Df_eff), Dt_eff)
    f0 = np.tile(np.arange(Df_eff), Dt_eff * groups_per_lane)
    u = (g * group + f0)[:, None] + Df_eff * np.arange(N)[None, :]
    freq = u % S
    time = lane[:, None] + Dt_eff * (u // S)

    flat = (freq * T + time).ravel()
    if flat.max() >= S * T:
        raise MapConstructionError(f"assignment exceeds T = {T}")
    hits = np.bincount(flat, minlength=S * T)
    if np.any(hits != 1):
        c = int(np.flatnonzero(hits > 1)[0]) if np.any(hits > 1) else int(np.flatnonzero(hits == 0)[0])
        raise MapConstructionError(
            f"map is not a bijection: first bad cell (subcarrier {c // T}, symbol {c % T}) "
            f"hit {hits[c]} times"
        )
    freq.setflags(write=False)
    time.setflags(write=False)
    return GridMap(S, T, N, Df, Dt, freq, time)


def consecutive_map(S: int, T: int) -> GridMap:
    """OFDM-CDM layout: block b fills subcarriers 0..S-1 of symbol b."""
    return build_map(S, T, S, 1, 1)


def _stack(blocks) -> np.ndarray:
    if isinstance(blocks, SymbolBlock):
        return blocks.symbols
    if isinstance(blocks, np.ndarray):
        return blocks
    return np.stack([b.symbols if isinstance(b, SymbolBlock) else np.asarray(b) for b in blocks])


def interleave(blocks, gmap: GridMap) -> np.ndarray:
    """Place precoded blocks on the S x T grid. Returns a complex array (S, T).

    ``blocks`` may be a stacked :class:`SymbolBlock`, a sequence of them, or a
    plain array of shape (num_blocks, N) (taken as precoded).
    """
    if isinstance(blocks, SymbolBlock) and blocks.kind != "precoded":
        raise ValueError("interleave expects precoded blocks")
    if not isinstance(blocks, (SymbolBlock, np.ndarray)):
        blocks = list(blocks)
        if any(isinstance(b, SymbolBlock) and b.kind != "precoded" for b in blocks):
            raise ValueError("interleave expects precoded blocks")
    x = _stack(blocks)
    x = x.reshape(-1, x.shape[-1])
    if x.shape != gmap.freq.shape:
        raise SizingError(
            f"{x.shape[0]} blocks of {x.shape[1]} symbols do not fill a map of "
            f"{gmap.num_blocks} blocks of {gmap.N}"
        )
    grid = np.empty((gmap.S, gmap.T), dtype=complex)
    grid[gmap.freq, gmap.time] = x
    return grid


def deinterleave(grid: np.ndarray, gmap: GridMap, as_block: bool = True):
    """Inverse of :func:`interleave`.

    Returns a stacked precoded :class:`SymbolBlock` of shape (num_blocks, N),
    or the bare array when ``as_block`` is false.
    """
    grid = np.asarray(grid)
    if grid.shape != (gmap.S, gmap.T):
        raise SizingError(f"grid shape {grid.shape} does not match map ({gmap.S}, {gmap.T})")
    x = grid[gmap.freq, gmap.time]
    return SymbolBlock(x, "precoded") if as_block else x
