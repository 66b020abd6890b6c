"""
Precoding and interleaving a frame
==================================

A block of N QPSK symbols is spread by an orthonormal Hadamard transform,
then its entries are scattered over the time-frequency grid so that any two
of them sit at least Df subcarriers or Dt symbols apart.
"""

import numpy as np

from hpofdm import SymbolBlock, build_map, deprecode, precode, qpsk_map

rng = np.random.default_rng(0)

# Spreading: every output symbol mixes every input symbol with weight 1/sqrt(N)
block = SymbolBlock(qpsk_map(rng.integers(0, 2, 16)))
spread = precode(block)
print("input power  ", round(block.power(), 12))
print("output power ", round(spread.power(), 12))
print("round trip error", np.max(np.abs(deprecode(spread).symbols - block.symbols)))

# A small grid: 8 subcarriers x 16 symbols, blocks of 16, strides of 4 subcarriers and 2 symbols.
# Each cell shows which block occupies it.
gmap = build_map(S=8, T=16, N=16, Df=4, Dt=2)
owner = np.empty((gmap.S, gmap.T), dtype=int)
for b in range(gmap.num_blocks):
    owner[gmap.freq[b], gmap.time[b]] = b
print("\nblock index per cell (rows: subcarriers, columns: symbols)")
print(owner)
print("minimum separation respected:", gmap.min_separation_ok())

# The default link: 512 subcarriers, N = 256, Df = 40, Dt = 11 needs a 220-symbol frame
big = build_map(512, 220, 256, 40, 11)
f, t = big.freq[0], big.time[0]
print(f"\nblock 0 of the default frame spans subcarriers {f.min()}..{f.max()} and symbols {sorted(set(t.tolist()))}")
