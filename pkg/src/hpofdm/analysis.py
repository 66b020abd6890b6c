"""Closed-form and quadrature predictions for the clipped-ZF precoded link.

All quantities are per symbol, for a unit-power Rayleigh channel
(E|h|^2 = 1, so |h| has density 2x exp(-x^2)).

Two conventions are supported for the fourth moment of Gaussian noise:

``"real-gaussian"``
    E|n|^4 = 3 sigma^4 and E|sum|^4 uses the real-variable cross-term 3.
``"complex-circular"``
    E|n|^4 = 2 sigma^4 and the cross-term is 2, which is what circular
    complex noise actually gives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate, special

Convention = Literal["complex-circular", "real-gaussian"]
CONVENTIONS = ("complex-circular", "real-gaussian")

_TAIL = 8.0 / math.sqrt(2.0)  # 8 sigma of the Rayleigh amplitude
_QUAD = dict(epsabs=0.0, epsrel=1e-12, limit=200)


class DivergenceError(ValueError):
    """Gain moments are infinite at c <= 0 for a Rayleigh channel."""


def _kappa(convention: str) -> int:
    if convention == "real-gaussian":
        return 3
    if convention == "complex-circular":
        return 2
    raise ValueError(f"unknown convention {convention!r}; choose from {CONVENTIONS}")


def rayleigh_pdf(x):
    x = np.asarray(x, dtype=float)
    return 2.0 * x * np.exp(-x * x)


@dataclass(frozen=True)
class GainMoments:
    c: float
    E_t: float
    E_t2: float
    E_g2: float
    E_g4: float
    convention: str = "complex-circular"

    @property
    def var_t(self) -> float:
        return self.E_t2 - self.E_t**2


def _quad(fn, a, b) -> float:
    if b <= a:
        return 0.0
    return integrate.quad(fn, a, b, **_QUAD)[0]


def transfer_mean(c: float) -> float:
    """E[t] for t = min(|h|/c, 1). Defined for c >= 0 (equals 1 at c = 0)."""
    if c < 0:
        raise ValueError("c must be non-negative")
    if c == 0:
        return 1.0
    return _quad(lambda x: (x / c) * rayleigh_pdf(x), 0.0, c) + math.exp(-c * c)


def gain_moments(c: float, convention: str = "complex-circular") -> GainMoments:
    """Moments of t and |g| under Rayleigh fading for clipping threshold ``c``.

    Integrals are split at the kink ``c`` and at 8 sigma; beyond that the
    Rayleigh tail is added analytically.
    """
    _kappa(convention)
    if not c > 0:
        raise DivergenceError(f"E|g|^2 and E|g|^4 diverge for c = {c}")
    hi = max(c, _TAIL)
    u = hi * hi

    E_t = _quad(lambda x: (x / c) * rayleigh_pdf(x), 0.0, c) + math.exp(-c * c)
    E_t2 = _quad(lambda x: (x / c) ** 2 * rayleigh_pdf(x), 0.0, c) + math.exp(-c * c)
    low_g2 = _quad(lambda x: rayleigh_pdf(x) / c**2, 0.0, c)
    low_g4 = _quad(lambda x: rayleigh_pdf(x) / c**4, 0.0, c)
    E_g2 = low_g2 + _quad(lambda x: rayleigh_pdf(x) / x**2, c, hi) + special.exp1(u)
    E_g4 = low_g4 + _quad(lambda x: rayleigh_pdf(x) / x**4, c, hi) + special.expn(2, u) / u
    return GainMoments(float(c), E_t, E_t2, float(E_g2), float(E_g4), convention)


def noise_moments_v(sigma_n2: float, gm: GainMoments, convention: str | None = None) -> tuple[float, float]:
    """Power and var(|v|^2) of equalized noise v = g n."""
    k = _kappa(convention or gm.convention)
    s4 = sigma_n2 * sigma_n2
    return sigma_n2 * gm.E_g2, s4 * (k * gm.E_g4 - gm.E_g2**2)


def noise_moments_w(N: int, sigma_v2: float, E_v4: float, convention: str = "complex-circular") -> tuple[float, float]:
    """Power and var(|w|^2) of deprecoded noise w = P v for i.i.d. v.

    The cross-term coefficient is 2 for circular complex samples and 3
    under the ``"real-gaussian"`` convention.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    k = _kappa(convention)
    s4 = sigma_v2 * sigma_v2
    return sigma_v2, E_v4 / N + k * (N - 1) / N * s4 - s4


def gaussian_limit(sigma_v2: float, convention: str = "complex-circular") -> float:
    """Large-N limit of var(|w|^2): 2 sigma^4 (real-gaussian) or sigma^4 (complex)."""
    return (_kappa(convention) - 1) * sigma_v2 * sigma_v2


def fourth_moment_of_sum(N: int, m4: float, var: float) -> float:
    """E[(X_1 + ... + X_N)^4] for i.i.d. real zero-mean X with E X^2 = var, E X^4 = m4."""
    return N * m4 + 3 * N * (N - 1) * var * var


@dataclass(frozen=True)
class MsePrediction:
    sigma_dist2: float
    sigma_intf2: float
    noise: float
    total: float
    bias_total: float

    @property
    def distortion(self) -> float:
        return self.sigma_dist2 + self.sigma_intf2


def mse_predict(gm: GainMoments, P_s: float, sigma_n2: float, N: int) -> MsePrediction:
    """Per-symbol error power at the deprecoder output.

    ``sigma_dist2`` is the own-symbol distortion, ``sigma_intf2`` the
    interference from the other symbols of the block and ``noise`` the
    equalized noise power. Their sum is ``total``; the distortion part
    equals P_s E[(t - 1)^2] for every N. ``bias_total`` is the shorter
    P_s (E[t] - 1)^2 + sigma_n^2 E|g|^2, which drops var(t).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    Et, Et2 = gm.E_t, gm.E_t2
    dist = P_s * (Et2 / N + (N - 1) / N * Et**2 - 2 * Et + 1)
    E_q2 = 2 * Et2 - 2 * Et**2
    intf = P_s * (N - 1) / (2 * N) * E_q2
    noise = sigma_n2 * gm.E_g2
    return MsePrediction(
        sigma_dist2=dist,
        sigma_intf2=intf,
        noise=noise,
        total=dist + intf + noise,
        bias_total=P_s * (Et - 1) ** 2 + noise,
    )


def decision_sinr(gm: GainMoments, P_s: float, sigma_n2: float) -> float:
    """Large-N signal to interference-plus-noise ratio of the deprecoded symbol.

    The useful amplitude is E[t]; interference and noise add as Gaussian.
    Hard QPSK decisions ignore the bias, so this, not the MSE, tracks BER.
    """
    return P_s * gm.E_t**2 / (P_s * gm.var_t + sigma_n2 * gm.E_g2)


Objective = Literal["mse", "bias", "sinr"]


def _objective(kind: str, P_s: float, sigma_n2: float):
    if kind == "mse":
        return lambda c: mse_predict(gain_moments(c), P_s, sigma_n2, 1).total
    if kind == "bias":
        return lambda c: mse_predict(gain_moments(c), P_s, sigma_n2, 1).bias_total
    if kind == "sinr":
        return lambda c: -decision_sinr(gain_moments(c), P_s, sigma_n2)
    raise ValueError(f"unknown objective {kind!r}")


class BracketError(RuntimeError):
    pass


def golden_section(fn, a: float, b: float, tol: float = 1e-4) -> float:
    """Minimize a unimodal ``fn`` on [a, b] to an interval of width ``tol``."""
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return (a + b) / 2


def optimum_c(
    P_s: float,
    sigma_n2: float,
    objective: str = "mse",
    grid=None,
    tol: float = 1e-4,
) -> float:
    """Clipping threshold minimizing the predicted error.

    A coarse scan brackets the minimum, then golden-section search refines
    it. ``objective`` is ``"mse"`` (full per-symbol MSE), ``"bias"``
    (the MSE without var(t)) or ``"sinr"`` (maximize :func:`decision_sinr`).
    """
    if not sigma_n2 > 0:
        raise ValueError("sigma_n2 must be positive; the optimum tends to 0 without noise")
    fn = _objective(objective, P_s, sigma_n2)
    if grid is None:
        grid = np.geomspace(1e-3, 4.0, 60)
    grid = np.asarray(grid, dtype=float)
    vals = np.array([fn(c) for c in grid])
    i = int(np.argmin(vals))
    if i == 0 or i == grid.size - 1:
        raise BracketError(
            f"minimum at the edge of the scanned grid [{grid[0]:.3g}, {grid[-1]:.3g}] "
            f"(c = {grid[i]:.3g}); values: {np.array2string(vals, precision=4)}"
        )
    # unimodality guard: no other local minimum on the scan
    interior = (vals[1:-1] < vals[:-2]) & (vals[1:-1] < vals[2:])
    if interior.sum() > 1:
        raise BracketError(f"objective is not unimodal on the scan grid; local minima at {grid[1:-1][interior]}")
    return golden_section(fn, grid[i - 1], grid[i + 1], tol)
