"""Recover pixel irradiances from photodetector sample streams.

FM/FDMA slots are decoded in the frequency domain: one radix-2 FFT per
slot, then the carrier-bin magnitude divided by Q times the exact
fundamental coefficient of a 50%-duty square wave with that carrier's
samples-per-period count.  CDMA streams are decoded by bipolar Walsh
correlation of the per-bit means; the zero-mean code rows annihilate the
DC term introduced by on/off optical modulation.

Only magnitudes are used at carrier bins.  CDMA estimates may come out
slightly negative under noise and are reported as-is so that SNR
statistics stay unbiased; clamping is left to display code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .encoder import CdmaConfig, TdmaSchedule, WalshAssignment, walsh_matrix
from .freq_plan import FrequencyPlan
from .scene_optics import CaosGrid
from .waveform import SampledSignal, fundamental_coefficient

__all__ = [
    "Spectrum",
    "DecodedImage",
    "fft_radix2",
    "recover_channel_irradiance",
    "recover_at_frequency",
    "decode_slot",
    "decode_slot_free",
    "decode_cdma",
    "assemble_image",
]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """DFT coefficients X[k] = sum_n x[n] exp(-j 2 pi n k / Q)."""

    coeffs: np.ndarray = field(repr=False)
    fs: float
    delta_f: float


@dataclass(eq=False)
class DecodedImage:
    """Recovered irradiances plus per-pixel provenance.

    slot_map holds the slot index each pixel was captured in; channel_map
    holds the carrier frequency (FM/FDMA) or the Walsh row (CDMA).
    """

    estimates: np.ndarray
    mode: str
    slot_map: np.ndarray
    channel_map: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.estimates.shape


@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=64)
def _twiddles(half: int) -> np.ndarray:
    tw = np.exp(-1j * np.pi * np.arange(half) / half)
    tw.setflags(write=False)
    return tw


def _fft_core(x: np.ndarray) -> np.ndarray:
    """Iterative decimation-in-time radix-2 transform of a power-of-two vector."""
    n = x.shape[0]
    y = np.asarray(x, dtype=np.complex128)[_bit_reversal(n)]
    half = 1
    while half < n:
        v = y.reshape(-1, 2, half)
        odd = v[:, 1, :] * _twiddles(half)
        v[:, 1, :] = v[:, 0, :] - odd
        v[:, 0, :] += odd
        half *= 2
    return y


def fft_radix2(samples: SampledSignal) -> Spectrum:
    """Radix-2 FFT of one slot.

    The stream length must be a power of two; padding is rejected because
    it would break the whole-cycle property the channel design relies on.
    """
    n = len(samples)
    if n < 2 or n & (n - 1):
        raise ValueError(f"stream length {n} is not a power of two")
    return Spectrum(
        coeffs=_fft_core(samples.samples),
        fs=samples.fs,
        delta_f=samples.fs / n,
    )


def recover_channel_irradiance(
    spectrum: Spectrum, f_j: float, plan: FrequencyPlan
) -> float:
    """Irradiance estimate |X[b_j]| / (Q * a1(N_j)) for a plan carrier.

    a1(N) = 1/(N sin(pi/N)) is the exact fundamental coefficient of a unit
    50%-duty square wave with N samples per period, so a clean unit carrier
    decodes to exactly 1.
    """
    if f_j not in plan.channels:
        raise ValueError(f"{f_j} Hz is not a plan channel")
    n_float = spectrum.fs / f_j
    n = round(n_float)
    if abs(n_float - n) > 1e-9 * n_float or n % 2:
        raise ValueError(f"fs/f = {n_float} must be an even integer")
    q = spectrum.coeffs.shape[0]
    b = round(f_j / spectrum.delta_f)
    return float(abs(spectrum.coeffs[b]) / (q * fundamental_coefficient(n)))


def recover_at_frequency(spectrum: Spectrum, f: float) -> float:
    """Nearest-bin estimate for an arbitrary carrier (demonstration path).

    Uses the generalized fundamental coefficient with a real-valued
    samples-per-period count; carriers off the bin grid decode with the
    leakage errors the channel-selection rule exists to prevent.
    """
    q = spectrum.coeffs.shape[0]
    b = int(round(f / spectrum.delta_f))
    if not 0 <= b <= q // 2:
        raise ValueError("frequency outside the spectrum")
    return float(abs(spectrum.coeffs[b]) / (q * fundamental_coefficient(spectrum.fs / f)))


def decode_slot(
    stream: SampledSignal,
    slot: Sequence[tuple[int, float]],
    plan: FrequencyPlan,
) -> dict[int, float]:
    """FFT the stream once and read every (pixel, carrier) of the slot."""
    spectrum = fft_radix2(stream)
    return {
        pix: recover_channel_irradiance(spectrum, f, plan) for pix, f in slot
    }


def decode_slot_free(
    stream: SampledSignal, slot: Sequence[tuple[int, float]]
) -> dict[int, float]:
    """decode_slot without the plan-membership and whole-cycle requirements."""
    spectrum = fft_radix2(stream)
    return {pix: recover_at_frequency(spectrum, f) for pix, f in slot}


def decode_cdma(
    stream: SampledSignal,
    assignment: WalshAssignment,
    cfg: CdmaConfig,
    grid: CaosGrid,
) -> DecodedImage:
    """Bipolar Walsh correlation of the per-bit sample means.

    Pixel estimate = (2/L) sum_b mean_b * c_k[b]; exact for a noiseless
    round trip.
    """
    L = assignment.code_length
    expected = L * cfg.samples_per_bit
    if len(stream) != expected:
        raise ValueError(f"stream length {len(stream)} != L*samples_per_bit = {expected}")
    means = stream.samples.reshape(L, cfg.samples_per_bit).mean(axis=1)
    h = walsh_matrix(L).astype(np.float64)
    npix = grid.num_pixels
    rows = np.array([assignment.pixel_to_row[i] for i in range(npix)])
    estimates = (2.0 / L) * (h[rows] @ means)
    return DecodedImage(
        estimates=estimates.reshape(grid.rows, grid.cols),
        mode="cdma",
        slot_map=np.zeros((grid.rows, grid.cols), dtype=np.intp),
        channel_map=rows.astype(np.float64).reshape(grid.rows, grid.cols),
    )


def assemble_image(
    slot_estimates: Sequence[Mapping[int, float]],
    schedule: TdmaSchedule,
    grid: CaosGrid,
    mode: str = "fdma-tdma",
) -> DecodedImage:
    """Place per-slot estimates at their raster positions with provenance.

    Every grid pixel must be covered exactly once across the slots.
    """
    npix = grid.num_pixels
    est = np.full(npix, np.nan)
    slot_map = np.full(npix, -1, dtype=np.intp)
    chan_map = np.full(npix, np.nan)
    for s, (slot, estimates) in enumerate(zip(schedule.slots, slot_estimates)):
        for pix, freq in slot:
            if pix >= npix:
                raise ValueError(f"pixel id {pix} outside the grid")
            if slot_map[pix] != -1:
                raise ValueError(f"pixel {pix} estimated twice")
            if pix not in estimates:
                raise ValueError(f"slot {s} estimate missing for pixel {pix}")
            est[pix] = estimates[pix]
            slot_map[pix] = s
            chan_map[pix] = freq
    if np.any(slot_map == -1):
        gaps = np.flatnonzero(slot_map == -1)
        raise ValueError(f"coverage gap at pixels {gaps[:5].tolist()}")
    shape = (grid.rows, grid.cols)
    return DecodedImage(
        estimates=est.reshape(shape),
        mode=mode,
        slot_map=slot_map.reshape(shape),
        channel_map=chan_map.reshape(shape),
    )
