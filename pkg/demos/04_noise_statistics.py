"""
What deprecoding does to the noise
==================================

After clipped zero forcing the noise power varies from cell to cell. The
deprecoder keeps the average power and averages the fluctuation over the
block, so var(|w|^2) falls with N toward its Gaussian value.
"""

from hpofdm import LinkConfig, run_trials
from hpofdm.analysis import noise_moments_w
from hpofdm.numerics import moments

print(f"{'N':>4} {'sigma_v^2':>10} {'sigma_w^2':>10} {'var|w|^2':>10} {'formula':>10}")
for N in (1, 2, 16, 256):
    extra = dict(Df=1, Dt=1) if N == 1 else {}
    st = run_trials(LinkConfig(N=N, snr_db=10, track_noise=True, **extra), range(6))
    _, pv, varv = moments(st.v)
    _, pw, varw = moments(st.w)
    pred = noise_moments_w(N, pv, varv + pv * pv, "complex-circular")[1]
    print(f"{N:4d} {pv:10.5f} {pw:10.5f} {varw:10.3e} {pred:10.3e}")

# Small blocks sit within a couple of OFDM symbols, so their cells share fading
# and the measured variance stays above the independent-sample formula.
