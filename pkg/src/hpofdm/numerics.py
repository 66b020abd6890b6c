"""Numerical kernels shared by the rest of the package.

Unitary FFT, fast Walsh-Hadamard transform, seeded complex Gaussian
generation and exact streaming moment accumulators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class SizingError(ValueError):
    """Raised when an array length does not satisfy a transform's size rule."""


class InsufficientDataError(ValueError):
    """Raised when too few samples were accumulated to form an estimate."""


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_pow2(n: int, what: str = "length") -> None:
    if not is_power_of_two(int(n)):
        raise SizingError(f"{what} must be a power of two, got {n}")


def fft(x, inverse: bool = False, axis: int = -1) -> np.ndarray:
    """Unitary (1/sqrt(L) both ways) FFT along ``axis``.

    Only power-of-two lengths are accepted.
    """
    x = np.asarray(x, dtype=complex)
    _check_pow2(x.shape[axis])
    if inverse:
        return np.fft.ifft(x, axis=axis, norm="ortho")
    return np.fft.fft(x, axis=axis, norm="ortho")


def ifft(x, axis: int = -1) -> np.ndarray:
    return fft(x, inverse=True, axis=axis)


def fwht(x) -> np.ndarray:
    """Orthonormal fast Walsh-Hadamard transform over the last axis.

    Equivalent to multiplying each length-N row by the Sylvester Hadamard
    matrix scaled by 1/sqrt(N). The transform is its own inverse.
    Leading axes are treated as a batch of independent blocks.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    _check_pow2(n)
    out = np.array(x, dtype=np.result_type(x.dtype, float), copy=True)
    batch = out.shape[:-1]
    out = out.reshape(-1, n)
    h = 1
    while h < n:
        # pairs (i, i+h) inside each run of length 2h
        v = out.reshape(out.shape[0], n // (2 * h), 2, h)
        a = v[:, :, 0, :].copy()
        b = v[:, :, 1, :]
        v[:, :, 0, :] += b
        v[:, :, 1, :] = a - b
        h *= 2
    out *= 1.0 / np.sqrt(n)
    return out.reshape(*batch, n)


def hadamard_matrix(n: int) -> np.ndarray:
    """Normalized Sylvester Hadamard matrix of order ``n`` (entries +-1/sqrt(n))."""
    _check_pow2(n, "order")
    m = np.ones((1, 1))
    while m.shape[0] < n:
        m = np.block([[m, m], [m, -m]])
    return m / np.sqrt(n)


@dataclass(frozen=True)
class Rng:
    """Reproducible random stream identified by (master_seed, stream_id).

    Backed by the counter-based Philox bit generator. Extra integers passed
    to :meth:`generator` select independent sub-streams, so consumers that
    draw for different purposes never share state.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self, *substream: int) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.master_seed) & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(int(self.stream_id) & 0xFFFFFFFFFFFFFFFF, *substream),
        )
        return np.random.Generator(np.random.Philox(ss))

    def split(self, stream_id: int) -> "Rng":
        return Rng(self.master_seed, stream_id)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, Rng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected Rng or numpy Generator, got {type(rng).__name__}")


def gaussian_complex(rng, variance: float, size=None):
    """Circularly symmetric complex Gaussian draws of total power ``variance``.

    Real and imaginary parts are independent, each with variance/2.
    """
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    gen = _as_generator(rng)
    scale = np.sqrt(variance / 2.0)
    re = gen.standard_normal(size)
    im = gen.standard_normal(size)
    z = scale * (re + 1j * im)
    return complex(z) if size is None else z


def _exact_sum(a: np.ndarray) -> Fraction:
    # Exact sum of finite float64 values, split into 26-bit mantissa halves
    # so that every bincount partial stays below 2**53.
    a = np.asarray(a, dtype=np.float64).ravel()
    if a.size == 0:
        return Fraction(0)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite value in accumulated stream")
    if a.size > 1 << 24:
        return sum((_exact_sum(a[i : i + (1 << 24)]) for i in range(0, a.size, 1 << 24)), Fraction(0))
    mant, expo = np.frexp(a)
    m = np.ldexp(mant, 53).astype(np.int64)
    sign = np.sign(m)
    m = np.abs(m)
    hi = ((m >> 26) * sign).astype(np.float64)
    lo = ((m & ((1 << 26) - 1)) * sign).astype(np.float64)
    uniq, inv = np.unique(expo, return_inverse=True)
    # |partials| < 2**24 * 2**27 = 2**51, exact in float64
    hs = np.bincount(inv, weights=hi, minlength=uniq.size)
    ls = np.bincount(inv, weights=lo, minlength=uniq.size)
    total = Fraction(0)
    for e, h, lsum in zip(uniq.tolist(), hs.tolist(), ls.tolist()):
        num = (int(h) << 26) + int(lsum)
        sh = e - 53
        total += Fraction(num << sh) if sh >= 0 else Fraction(num, 1 << -sh)
    return total


@dataclass
class MomentAccumulator:
    """Streaming sums of x, |x|^2 and |x|^4 for a complex stream.

    Sums are kept exactly (as fractions of powers of two), so merging
    accumulators in any order gives bit-identical results.
    """

    count: int = 0
    _s1_re: Fraction = field(default_factory=Fraction)
    _s1_im: Fraction = field(default_factory=Fraction)
    _s2: Fraction = field(default_factory=Fraction)
    _s4: Fraction = field(default_factory=Fraction)

    def add(self, x) -> "MomentAccumulator":
        x = np.asarray(x, dtype=complex).ravel()
        p = x.real**2 + x.imag**2
        self.count += x.size
        self._s1_re += _exact_sum(x.real)
        self._s1_im += _exact_sum(x.imag)
        self._s2 += _exact_sum(p)
        self._s4 += _exact_sum(p * p)
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        return MomentAccumulator(
            self.count + other.count,
            self._s1_re + other._s1_re,
            self._s1_im + other._s1_im,
            self._s2 + other._s2,
            self._s4 + other._s4,
        )

    __add__ = merge

    @property
    def sum1(self) -> complex:
        return complex(float(self._s1_re), float(self._s1_im))

    @property
    def sum2(self) -> float:
        return float(self._s2)

    @property
    def sum4(self) -> float:
        return float(self._s4)

    @classmethod
    def of(cls, x) -> "MomentAccumulator":
        return cls().add(x)


def moments(acc: MomentAccumulator) -> tuple[complex, float, float]:
    """Return (mean, power, variance of |x|^2) of an accumulated stream."""
    if acc.count < 2:
        raise InsufficientDataError(f"need at least 2 samples, have {acc.count}")
    n = acc.count
    mean = complex(float(acc._s1_re / n), float(acc._s1_im / n))
    power = acc._s2 / n
    var_sq = acc._s4 / n - power * power
    return mean, float(power), float(var_sq)
