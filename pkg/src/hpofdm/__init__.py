"""Hadamard-precoded OFDM over time-variant Rayleigh fading: link simulator and analysis."""

from .numerics import Rng, fft, ifft, fwht, hadamard_matrix, gaussian_complex, MomentAccumulator, moments
from .precoder import SymbolBlock, precode, deprecode
from .interleaver import GridMap, build_map, consecutive_map, interleave, deinterleave, minimal_frame_length
from .channel import TapProfile, VEHICULAR_A, ChannelRealization, realize, apply, estimate, load_profile
from .equalizer import EqualizerProfile, gain, equalize
from .modem import LinkConfig, TrialStats, qpsk_map, qpsk_demap, run_trial, run_trials
from .analysis import GainMoments, MsePrediction, gain_moments, mse_predict, optimum_c

__version__ = "0.1.0"
