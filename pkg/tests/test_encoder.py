"""Walsh codes, schedules and the three stream encoders."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caossim.encoder import (
    CdmaConfig,
    TdmaSchedule,
    WalshAssignment,
    complementary_stream,
    encode_cdma,
    encode_fdma_tdma,
    encode_fm_tdma,
    encode_slot,
    schedule_fdma_tdma,
    walsh_matrix,
)
from caossim.freq_plan import design_plan
from caossim.scene_optics import CaosGrid, Scene
from caossim.waveform import SamplingWindow


class TestWalshMatrix:
    def test_base_doubling(self):
        assert np.array_equal(walsh_matrix(2), [[1, 1], [1, -1]])

    def test_orthogonality_small(self):
        for L in (1, 2, 4, 8, 64, 256):
            h = walsh_matrix(L).astype(np.int64)
            assert np.array_equal(h @ h.T, L * np.eye(L, dtype=np.int64))

    def test_enough_rows_for_3600_pixels(self):
        h = walsh_matrix(4096)
        assert h.shape == (4096, 4096)
        WalshAssignment.sequential(3600, 4096)  # does not raise

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            walsh_matrix(48)

    def test_row_zero_reserved(self):
        with pytest.raises(ValueError, match="reserved"):
            WalshAssignment(8, {0: 0})


class TestEncodeCdma:
    def test_single_pixel_follows_its_row(self):
        scene = Scene(np.array([[1.0]]))
        assign = WalshAssignment(8, {0: 3})
        cfg = CdmaConfig(bit_rate=1000.0, samples_per_bit=2)
        stream = encode_cdma(scene, assign, cfg)
        row = walsh_matrix(8)[3]
        expected = np.repeat((row + 1) / 2.0, 2)
        assert np.array_equal(stream.samples, expected)
        assert stream.fs == 2000.0

    def test_zero_scene_is_silent(self):
        scene = Scene(np.zeros((2, 2)))
        stream = encode_cdma(scene, WalshAssignment.sequential(4, 8), CdmaConfig(1000.0, 4))
        assert not stream.samples.any()

    def test_missing_code_row_rejected(self):
        scene = Scene(np.ones((2, 2)))
        with pytest.raises(ValueError, match="without a code row"):
            encode_cdma(scene, WalshAssignment(8, {0: 1, 1: 2}), CdmaConfig(1000.0, 1))

    def test_levels_are_on_off_sums(self):
        rng = np.random.default_rng(7)
        scene = Scene(rng.random((2, 2)))
        assign = WalshAssignment.sequential(4, 8)
        stream = encode_cdma(scene, assign, CdmaConfig(1000.0, 1))
        h = walsh_matrix(8)
        flat = scene.irradiance.ravel()
        expected = sum(flat[i] * (h[i + 1] + 1) / 2.0 for i in range(4))
        assert np.allclose(stream.samples, expected, rtol=0, atol=1e-15)


class TestSchedule:
    def test_515_slots(self):
        plan = design_plan(T=0.25, p=14, m=6, P=7)
        assert schedule_fdma_tdma(3600, plan).num_slots == 515

    def test_160_slots(self):
        plan = design_plan(T=1.0, p=16, m=7, P=8)
        assert schedule_fdma_tdma(1276, plan).num_slots == 160

    def test_partial_slot_fills_lowest_first(self):
        plan = design_plan(T=1.0, p=16, m=7, P=8)
        sched = schedule_fdma_tdma(5, plan)
        assert sched.num_slots == 1
        assert sched.slots[0] == tuple(
            (i, f) for i, f in enumerate((64.0, 128.0, 256.0, 512.0, 1024.0))
        )

    def test_raster_order_lowest_frequency_first(self):
        plan = design_plan(T=1.0, p=12, m=3, P=2)
        sched = schedule_fdma_tdma(5, plan)
        assert sched.slots[0] == ((0, 4.0), (1, 8.0))
        assert sched.slots[1] == ((2, 4.0), (3, 8.0))
        assert sched.slots[2] == ((4, 4.0),)

    @given(st.integers(1, 4000), st.integers(1, 12))
    @settings(max_examples=300, deadline=None)
    def test_partition_and_ceiling(self, npix, P):
        plan = design_plan(T=1.0, p=16, m=2, P=P)
        sched = schedule_fdma_tdma(npix, plan)
        assert sched.num_slots == math.ceil(npix / P)
        pixels = [p for slot in sched.slots for p, _ in slot]
        assert sorted(pixels) == list(range(npix))

    def test_duplicate_pixel_rejected(self):
        with pytest.raises(ValueError, match="more than one slot"):
            TdmaSchedule(slots=(((0, 64.0),), ((0, 128.0),)), slot_duration=1.0)


class TestEncodeFdmaTdma:
    def test_equal_pixels_make_equal_spectral_peaks(self):
        plan = design_plan(T=1.0, p=16, m=7, P=8)
        window = plan.window()
        scene = Scene(np.ones((1, 8)))
        streams = encode_fdma_tdma(scene, schedule_fdma_tdma(8, plan), plan, window)
        assert len(streams) == 1
        X = np.abs(np.fft.fft(streams[0].samples))
        peaks = X[list(plan.bins)]
        # raw peaks agree to the few-percent spread of the discrete a1(N)
        assert peaks.max() / peaks.min() < 1.05
        # and tower over every non-harmonic bin
        assert peaks.min() > 1e3 * np.median(X[1:window.Q // 2])

    def test_single_pixel_slot_is_scaled_square(self):
        plan = design_plan(T=1.0, p=10, m=4, P=1)
        window = plan.window()
        scene = Scene(np.array([[2.5]]))
        streams = encode_fdma_tdma(scene, schedule_fdma_tdma(1, plan), plan, window)
        assert set(np.unique(streams[0].samples)) == {0.0, 2.5}

    def test_slot_stream_periodic_in_slowest_carrier(self):
        plan = design_plan(T=1.0, p=12, m=4, P=3)
        window = plan.window()
        scene = Scene(np.random.default_rng(1).random((1, 3)))
        stream = encode_fdma_tdma(scene, schedule_fdma_tdma(3, plan), plan, window)[0]
        n_slowest = int(plan.fs / min(plan.channels))
        x = stream.samples
        assert np.array_equal(x, np.tile(x[:n_slowest], window.Q // n_slowest))

    def test_window_plan_mismatch_rejected(self):
        plan = design_plan(T=1.0, p=12, m=4, P=2)
        other = SamplingWindow.design(T=0.5, p=12)
        scene = Scene(np.ones((1, 2)))
        with pytest.raises(ValueError, match="does not match"):
            encode_fdma_tdma(scene, schedule_fdma_tdma(2, plan), plan, other)

    def test_off_plan_frequency_rejected(self):
        plan = design_plan(T=1.0, p=12, m=4, P=2)
        sched = TdmaSchedule(slots=(((0, 24.0),),), slot_duration=1.0)
        with pytest.raises(ValueError, match="outside the plan"):
            encode_fdma_tdma(Scene(np.ones((1, 1))), sched, plan, plan.window())


class TestEncodeFmTdma:
    def test_one_slot_per_pixel(self):
        grid = CaosGrid(3, 4)
        scene = Scene(np.arange(12, dtype=float).reshape(3, 4) / 12.0)
        window = SamplingWindow.design(T=0.25, p=12)
        streams = encode_fm_tdma(scene, grid, 2048.0, window)
        assert len(streams) == 12
        assert not streams[0].samples.any()  # pixel 0 has zero irradiance
        assert streams[3].samples.max() == pytest.approx(3 / 12)

    def test_matches_single_channel_fdma(self):
        grid = CaosGrid(2, 3)
        scene = Scene(np.random.default_rng(3).random((2, 3)))
        plan = design_plan(T=0.25, p=12, m=10, P=1)
        window = plan.window()
        fm = encode_fm_tdma(scene, grid, plan.channels[0], window)
        fdma = encode_fdma_tdma(scene, schedule_fdma_tdma(6, plan), plan, window)
        for a, b in zip(fm, fdma):
            assert np.array_equal(a.samples, b.samples)

    def test_zero_pixel_gives_silent_slot(self):
        grid = CaosGrid(1, 2)
        scene = Scene(np.array([[0.0, 1.0]]))
        window = SamplingWindow.design(T=1.0, p=8)
        streams = encode_fm_tdma(scene, grid, 32.0, window)
        assert not streams[0].samples.any() and streams[1].samples.any()


class TestComplementaryStream:
    def test_single_unit_pixel(self):
        window = SamplingWindow.design(T=1.0, p=8)
        scene = Scene(np.array([[1.0]]))
        stream = encode_slot(scene, [(0, 16.0)], window)
        comp = complementary_stream(stream, scene, [(0, 16.0)])
        assert np.array_equal(comp.samples, 1.0 - stream.samples)

    def test_conservation_with_off_slot_light(self):
        window = SamplingWindow.design(T=1.0, p=8)
        scene = Scene(np.array([[0.3, 0.5, 0.2]]))
        slot = [(1, 16.0)]
        stream = encode_slot(scene, slot, window)
        comp = complementary_stream(stream, scene, slot)
        total = stream.samples + comp.samples
        assert np.allclose(total, 1.0, rtol=0, atol=1e-15)

    def test_empty_slot_is_constant(self):
        window = SamplingWindow.design(T=1.0, p=8)
        scene = Scene(np.array([[0.3, 0.7]]))
        stream = encode_slot(scene, [], window)
        comp = complementary_stream(stream, scene, [])
        assert set(np.unique(comp.samples)) == {1.0}
