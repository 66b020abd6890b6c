"""Blockwise Hadamard precoding and deprecoding."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .numerics import SizingError, fwht, is_power_of_two

Kind = Literal["modulated", "precoded"]


class BlockKindError(ValueError):
    """A block was passed to an operation expecting the other kind."""


@dataclass(frozen=True)
class SymbolBlock:
    """One precoder block, or a stack of blocks along leading axes.

    ``symbols`` has shape ``(..., n)``; the last axis is the block.
    """

    symbols: np.ndarray
    kind: Kind = "modulated"

    def __post_init__(self):
        sym = np.asarray(self.symbols, dtype=complex)
        if sym.ndim == 0:
            raise SizingError("a block needs at least one axis")
        if not is_power_of_two(sym.shape[-1]):
            raise SizingError(f"block size must be a power of two, got {sym.shape[-1]}")
        if self.kind not in ("modulated", "precoded"):
            raise BlockKindError(f"unknown block kind {self.kind!r}")
        object.__setattr__(self, "symbols", sym)

    @property
    def n(self) -> int:
        return self.symbols.shape[-1]

    @property
    def num_blocks(self) -> int:
        return int(np.prod(self.symbols.shape[:-1], dtype=int))

    def power(self) -> float:
        return float(np.sum(np.abs(self.symbols) ** 2))


def precode(block: SymbolBlock) -> SymbolBlock:
    """Spread each modulated symbol over the whole block: s = P d."""
    if block.kind != "modulated":
        raise BlockKindError(f"precode expects a modulated block, got {block.kind}")
    return SymbolBlock(fwht(block.symbols), "precoded")


def deprecode(block: SymbolBlock) -> SymbolBlock:
    """Invert :func:`precode`. P is symmetric and orthonormal, so P^T = P."""
    if block.kind != "precoded":
        raise BlockKindError(f"deprecode expects a precoded block, got {block.kind}")
    return SymbolBlock(fwht(block.symbols), "modulated")
