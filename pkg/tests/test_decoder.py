"""Spectral and correlation decoding: oracles and round trips."""

import numpy as np
import pytest

from caossim.channel import NoiseConfig, add_noise
from caossim.decoder import (
    assemble_image,
    decode_cdma,
    decode_slot,
    decode_slot_free,
    fft_radix2,
    recover_channel_irradiance,
)
from caossim.encoder import (
    CdmaConfig,
    WalshAssignment,
    encode_cdma,
    encode_fm_tdma,
    encode_slot,
    schedule_fdma_tdma,
)
from caossim.freq_plan import design_plan, plan_from_frequencies
from caossim.scene_optics import CaosGrid, Scene
from caossim.waveform import SampledSignal


def _direct_dft(x):
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


class TestFftRadix2:
    def test_unit_impulse_is_flat(self):
        x = np.zeros(64)
        x[0] = 1.0
        spec = fft_radix2(SampledSignal(x, 64.0))
        assert np.allclose(spec.coeffs, 1.0, rtol=0, atol=1e-12)

    def test_cosine_peaks(self):
        q = 256
        n = np.arange(q)
        x = np.cos(2 * np.pi * 5 * n / q)
        spec = fft_radix2(SampledSignal(x, float(q)))
        mags = np.abs(spec.coeffs)
        assert mags[5] == pytest.approx(q / 2, rel=1e-12)
        assert mags[q - 5] == pytest.approx(q / 2, rel=1e-12)
        others = np.delete(mags, [5, q - 5])
        assert others.max() < 1e-9 * q

    def test_parseval(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal(4096)
        spec = fft_radix2(SampledSignal(x, 4096.0))
        lhs = np.sum(np.abs(x) ** 2)
        rhs = np.sum(np.abs(spec.coeffs) ** 2) / 4096
        assert lhs == pytest.approx(rhs, rel=1e-12)

    @pytest.mark.parametrize("q", [2, 4, 8, 64, 512, 2048])
    def test_matches_direct_dft(self, q):
        rng = np.random.default_rng(q)
        x = rng.standard_normal(q)
        spec = fft_radix2(SampledSignal(x, float(q)))
        ref = _direct_dft(x)
        scale = np.abs(ref).max()
        assert np.abs(spec.coeffs - ref).max() <= 1e-9 * scale

    def test_long_input_against_numpy(self):
        rng = np.random.default_rng(99)
        x = rng.standard_normal(65536)
        spec = fft_radix2(SampledSignal(x, 65536.0))
        ref = np.fft.fft(x)
        assert np.abs(spec.coeffs - ref).max() <= 1e-9 * np.abs(ref).max()

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError, match="power of two"):
            fft_radix2(SampledSignal(np.zeros(100), 100.0))


class TestRecoverChannelIrradiance:
    def test_unit_square_decodes_to_one(self):
        plan = design_plan(T=1.0, p=16, m=7, P=8)
        window = plan.window()
        for f in plan.channels:
            stream = encode_slot(Scene(np.array([[1.0]])), [(0, f)], window)
            est = recover_channel_irradiance(fft_radix2(stream), f, plan)
            assert abs(est - 1.0) <= 1e-9

    def test_zero_stream(self):
        plan = design_plan(T=1.0, p=12, m=7, P=1)
        spec = fft_radix2(SampledSignal(np.zeros(4096), plan.fs))
        assert recover_channel_irradiance(spec, plan.channels[0], plan) == 0.0

    def test_off_plan_frequency_rejected(self):
        plan = design_plan(T=1.0, p=12, m=7, P=1)
        spec = fft_radix2(SampledSignal(np.zeros(4096), plan.fs))
        with pytest.raises(ValueError, match="not a plan channel"):
            recover_channel_irradiance(spec, 32.0, plan)


class TestDecodeSlot:
    def test_eight_equal_pixels(self):
        plan = design_plan(T=1.0, p=16, m=7, P=8)
        window = plan.window()
        scene = Scene(np.ones((1, 8)))
        sched = schedule_fdma_tdma(8, plan)
        stream = encode_slot(scene, sched.slots[0], window)
        est = decode_slot(stream, sched.slots[0], plan)
        assert len(est) == 8
        for v in est.values():
            assert abs(v - 1.0) <= 1e-9

    def test_partial_slot(self):
        plan = design_plan(T=1.0, p=16, m=7, P=8)
        window = plan.window()
        scene = Scene(np.full((1, 5), 0.5))
        sched = schedule_fdma_tdma(5, plan)
        stream = encode_slot(scene, sched.slots[0], window)
        est = decode_slot(stream, sched.slots[0], plan)
        assert sorted(est) == [0, 1, 2, 3, 4]
        assert all(abs(v - 0.5) <= 1e-9 for v in est.values())

    def test_invalid_plan_crosstalks_on_40db_scene(self):
        # bright pixel off the bin grid leaks into the valid channel's bin
        plan = plan_from_frequencies([1170.3, 2048.0], T=0.25, p=14)
        window = plan.window()
        scene = Scene(np.array([[1.0, 0.01]]))
        slot = ((0, 1170.3), (1, 2048.0))
        stream = encode_slot(scene, slot, window, strict=False)
        est = decode_slot_free(stream, slot)
        errs = [abs(est[0] - 1.0) / 1.0, abs(est[1] - 0.01) / 0.01]
        assert max(errs) >= 0.01


class TestDecodeCdma:
    def test_round_trip_random_scene(self):
        rng = np.random.default_rng(5)
        grid = CaosGrid(8, 8)
        scene = Scene(rng.random((8, 8)))
        assign = WalshAssignment.sequential(64, 128)
        cfg = CdmaConfig(bit_rate=1000.0, samples_per_bit=3)
        img = decode_cdma(encode_cdma(scene, assign, cfg), assign, cfg, grid)
        rel = np.abs(img.estimates - scene.irradiance) / scene.irradiance
        assert rel.max() <= 1e-9

    def test_all_zero_scene(self):
        grid = CaosGrid(2, 2)
        assign = WalshAssignment.sequential(4, 8)
        cfg = CdmaConfig(1000.0, 2)
        img = decode_cdma(encode_cdma(Scene(np.zeros((2, 2))), assign, cfg), assign, cfg, grid)
        assert not img.estimates.any()

    def test_single_pixel_exact(self):
        grid = CaosGrid(1, 1)
        assign = WalshAssignment(8, {0: 5})
        cfg = CdmaConfig(1000.0, 4)
        img = decode_cdma(encode_cdma(Scene(np.array([[3.5]])), assign, cfg), assign, cfg, grid)
        assert img.estimates[0, 0] == pytest.approx(3.5, abs=1e-12)

    def test_length_mismatch_rejected(self):
        grid = CaosGrid(1, 1)
        assign = WalshAssignment(8, {0: 1})
        cfg = CdmaConfig(1000.0, 4)
        with pytest.raises(ValueError, match="length"):
            decode_cdma(SampledSignal(np.zeros(31), 4000.0), assign, cfg, grid)

    def test_noisy_estimates_not_clamped(self):
        grid = CaosGrid(4, 4)
        assign = WalshAssignment.sequential(16, 32)
        cfg = CdmaConfig(1000.0, 2)
        stream = encode_cdma(Scene(np.zeros((4, 4))), assign, cfg)
        noisy = add_noise(stream, NoiseConfig(awgn_sigma=0.5, seed=3), 0)
        img = decode_cdma(noisy, assign, cfg, grid)
        assert (img.estimates < 0).any()  # zero scene plus noise swings negative

    def test_provenance(self):
        grid = CaosGrid(1, 2)
        assign = WalshAssignment.sequential(2, 8)
        cfg = CdmaConfig(1000.0, 1)
        img = decode_cdma(encode_cdma(Scene(np.ones((1, 2))), assign, cfg), assign, cfg, grid)
        assert img.mode == "cdma"
        assert img.channel_map.tolist() == [[1.0, 2.0]]


class TestAssembleImage:
    def test_identity_raster_placement(self):
        plan = design_plan(T=1.0, p=8, m=5, P=1)
        sched = schedule_fdma_tdma(4, plan)
        grid = CaosGrid(2, 2)
        img = assemble_image([{i: float(i)} for i in range(4)], sched, grid, mode="fm-tdma")
        assert img.estimates.tolist() == [[0.0, 1.0], [2.0, 3.0]]
        assert img.slot_map.tolist() == [[0, 1], [2, 3]]
        assert img.channel_map.tolist() == [[16.0, 16.0], [16.0, 16.0]]

    def test_coverage_gap_rejected(self):
        plan = design_plan(T=1.0, p=8, m=5, P=1)
        sched = schedule_fdma_tdma(3, plan)
        with pytest.raises(ValueError, match="coverage gap|missing"):
            assemble_image([{0: 1.0}, {1: 1.0}, {}], sched, CaosGrid(2, 2), "fm-tdma")

    def test_order_independence(self):
        plan = design_plan(T=1.0, p=12, m=5, P=3)
        window = plan.window()
        grid = CaosGrid(2, 3)
        scene = Scene(np.random.default_rng(8).random((2, 3)))
        sched = schedule_fdma_tdma(6, plan)
        ests = [decode_slot(encode_slot(scene, s, window), s, plan) for s in sched.slots]
        a = assemble_image(ests, sched, grid)
        b = assemble_image(list(ests), sched, grid)  # same inputs, fresh list
        assert np.array_equal(a.estimates, b.estimates)


class TestModeEquivalenceAndLinearity:
    def test_fm_equals_single_channel_fdma(self):
        grid = CaosGrid(2, 3)
        scene = Scene(np.random.default_rng(21).random((2, 3)))
        plan = design_plan(T=0.25, p=12, m=10, P=1)
        window = plan.window()
        sched = schedule_fdma_tdma(6, plan)
        fm_streams = encode_fm_tdma(scene, grid, plan.channels[0], window)
        fm_ests = [decode_slot(s, slot, plan) for s, slot in zip(fm_streams, sched.slots)]
        fdma_ests = [
            decode_slot(encode_slot(scene, slot, window), slot, plan)
            for slot in sched.slots
        ]
        a = assemble_image(fm_ests, sched, grid, "fm-tdma")
        b = assemble_image(fdma_ests, sched, grid, "fdma-tdma")
        assert np.array_equal(a.estimates, b.estimates)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 3.0])
    def test_fdma_linearity(self, alpha):
        plan = design_plan(T=1.0, p=12, m=5, P=4)
        window = plan.window()
        base = np.random.default_rng(13).random((1, 4))
        sched = schedule_fdma_tdma(4, plan)

        def decode(scene):
            stream = encode_slot(scene, sched.slots[0], window)
            return np.array(
                [decode_slot(stream, sched.slots[0], plan)[i] for i in range(4)]
            )

        scaled = decode(Scene(alpha * base))
        ref = alpha * decode(Scene(base))
        assert np.abs(scaled - ref).max() <= 1e-9 * max(1.0, alpha)

    def test_cdma_linearity(self):
        grid = CaosGrid(2, 2)
        assign = WalshAssignment.sequential(4, 8)
        cfg = CdmaConfig(1000.0, 2)
        base = np.random.default_rng(17).random((2, 2))

        def decode(arr):
            return decode_cdma(encode_cdma(Scene(arr), assign, cfg), assign, cfg, grid).estimates

        assert np.abs(decode(2.5 * base) - 2.5 * decode(base)).max() <= 1e-9


class TestCrosstalkIsolation:
    def test_single_pixel_perturbation_is_invisible_to_others(self):
        plan = design_plan(T=1.0, p=16, m=7, P=8)
        window = plan.window()
        sched = schedule_fdma_tdma(8, plan)
        base = np.full((1, 8), 0.5)

        def estimates(arr):
            stream = encode_slot(Scene(arr), sched.slots[0], window)
            est = decode_slot(stream, sched.slots[0], plan)
            return np.array([est[i] for i in range(8)])

        ref = estimates(base)
        for i in range(8):
            bumped = base.copy()
            bumped[0, i] *= 1.7
            got = estimates(bumped)
            others = np.delete(np.arange(8), i)
            rel = np.abs(got[others] - ref[others]) / ref[others]
            assert rel.max() <= 1e-9, f"perturbing channel {i} leaked"
