import numpy as np
import pytest

from hpofdm.interleaver import (
    MapConstructionError,
    build_map,
    consecutive_map,
    deinterleave,
    interleave,
    minimal_frame_length,
)
from hpofdm.channel import VEHICULAR_A, realize
from hpofdm.numerics import Rng, SizingError
from hpofdm.precoder import SymbolBlock


def _frame(gmap, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((gmap.num_blocks, gmap.N)) + 1j * rng.standard_normal((gmap.num_blocks, gmap.N))


def test_figure_example():
    # 16-symbol blocks on 8 subcarriers, strides of 4 subcarriers and 2 symbols
    m = build_map(8, 32, 16, 4, 2)
    assert set(m.freq[0].tolist()) == {0, 4}
    assert sorted(set(m.time[0].tolist())) == list(range(0, 16, 2))
    assert m.min_separation_ok()
    assert m.block_offsets()[0] == (0, 0)


def test_figure_example_minimal_frame():
    assert minimal_frame_length(8, 16, 4, 2) == 16
    m = build_map(8, 16, 16, 4, 2)
    assert m.num_blocks == 8


@pytest.mark.parametrize("N", [2, 16, 64, 256])
def test_section_v_strides(N):
    T = minimal_frame_length(512, N, 40, 11)
    m = build_map(512, T, N, 40, 11)
    assert m.min_separation_ok()
    for f, t in zip(m.freq, m.time):
        df = np.abs(f[:, None] - f[None, :])
        dt = np.abs(t[:, None] - t[None, :])
        off = ~np.eye(N, dtype=bool)
        assert np.all(((df >= 40) | (dt >= 11))[off])


def test_minimal_frames_section_v():
    assert minimal_frame_length(512, 256, 40, 11) == 220
    assert minimal_frame_length(512, 16, 40, 11) == 55
    assert minimal_frame_length(512, 1, 40, 11) == 1


def test_n1_any_map():
    m = build_map(16, 3, 1, 5, 2)
    assert m.min_separation_ok()
    x = _frame(m)
    np.testing.assert_array_equal(deinterleave(interleave(x, m), m, as_block=False), x)


@pytest.mark.parametrize("args", [(8, 32, 16, 4, 2), (512, 55, 16, 40, 11), (64, 4, 256, 1, 1), (32, 15, 4, 5, 3)])
def test_bijection_round_trip(args):
    m = build_map(*args)
    x = _frame(m, 1)
    grid = interleave(SymbolBlock(x, "precoded"), m)
    assert grid.shape == (m.S, m.T)
    cells = np.zeros((m.S, m.T), int)
    np.add.at(cells, (m.freq, m.time), 1)
    assert np.all(cells == 1)
    back = deinterleave(grid, m)
    assert back.kind == "precoded"
    np.testing.assert_array_equal(back.symbols, x)


def test_single_block_fills_grid():
    m = build_map(16, 4, 64, 1, 1)
    assert m.num_blocks == 1
    grid = interleave(_frame(m), m)
    assert np.all(np.isfinite(grid))


def test_ofdm_cdm_consecutive():
    m = consecutive_map(512, 3)
    for b in range(3):
        np.testing.assert_array_equal(m.freq[b], np.arange(512))
        assert np.all(m.time[b] == b)


def test_sequence_of_blocks_input():
    m = build_map(8, 16, 16, 4, 2)
    x = _frame(m, 2)
    blocks = [SymbolBlock(r, "precoded") for r in x]
    np.testing.assert_array_equal(interleave(blocks, m), interleave(x, m))


def test_count_mismatch():
    m = build_map(8, 16, 16, 4, 2)
    with pytest.raises(SizingError):
        interleave(np.zeros((7, 16)), m)


def test_dimension_mismatch():
    m = build_map(8, 16, 16, 4, 2)
    with pytest.raises(SizingError):
        deinterleave(np.zeros((8, 8)), m)


def test_rejects_modulated_blocks():
    m = build_map(8, 16, 16, 4, 2)
    with pytest.raises(ValueError):
        interleave(SymbolBlock(_frame(m), "modulated"), m)


def test_partial_frame_rejected():
    with pytest.raises(SizingError):
        build_map(8, 3, 16, 4, 2)
    with pytest.raises(MapConstructionError, match="multiple of 220"):
        build_map(512, 110, 256, 40, 11)


def test_stride_bounds():
    with pytest.raises(MapConstructionError):
        build_map(8, 16, 16, 9, 2)
    with pytest.raises(MapConstructionError):
        build_map(8, 16, 16, 4, 17)


class TestSameBlockCorrelation:
    """Channel correlation between cells of one block under the default strides."""

    DF = 1 / 91e-6

    @pytest.fixture(scope="class")
    @staticmethod
    def pairs():
        m = build_map(512, 55, 16, 40, 11)
        f, t = m.freq[0], m.time[0]
        i, j = np.triu_indices(16, 1)
        H = np.stack([realize(VEHICULAR_A, 389.0, 512, 55, 1 / 91e-6, 102e-6, Rng(21, k)).H for k in range(400)])
        Hi, Hj = H[:, f[i], t[i]], H[:, f[j], t[j]]
        corr = np.abs(np.mean(Hi * np.conj(Hj), axis=0))
        same_symbol = t[i] == t[j]
        return corr, same_symbol

    def test_time_separated_cells_decorrelated(self, pairs):
        corr, same_symbol = pairs
        assert np.all(corr[~same_symbol] < 0.3)

    def test_frequency_separated_cells_match_profile(self, pairs):
        corr, same_symbol = pairs
        m = build_map(512, 55, 16, 40, 11)
        f = m.freq[0]
        i, j = np.triu_indices(16, 1)
        oracle = np.abs(VEHICULAR_A.frequency_correlation(np.abs(f[i] - f[j]) * self.DF))
        assert np.max(np.abs(corr[same_symbol] - oracle[same_symbol])) < 0.1

    def test_frequency_separated_cells_decorrelated(self, pairs):
        # 40 subcarriers (440 kHz) reach the 1/(2 pi tau_rms) coherence bandwidth but the
        # profile still correlates at 0.75 there; this is expected to fail
        corr, same_symbol = pairs
        assert np.max(corr[same_symbol]) < 0.3, f"max same-symbol correlation {np.max(corr[same_symbol]):.2f}"
