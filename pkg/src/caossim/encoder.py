"""Turn a scene into photodetector sample streams.

Three encoding modes, all driven by the binary on/off state of the pixel
mirrors:

* CDMA: every pixel modulated at once by its own Walsh (Hadamard-row)
  code, one code bit per mirror frame.  The +-1 code maps to on/off
  light, so the emitted level per bit is sum_i I_i * (c_i + 1) / 2.
* FM-TDMA: one pixel per slot, square-modulated at a single carrier.
* FDMA-TDMA: P pixels per slot on distinct plan carriers, summed on the
  detector.

Pixels outside the active slot are parked toward the complementary
detector and contribute nothing to the primary stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .freq_plan import FrequencyPlan
from .scene_optics import CaosGrid, Scene
from .waveform import (
    SampledSignal,
    SamplingWindow,
    SquareWaveSpec,
    sample_square_free,
    synth_square,
)

__all__ = [
    "WalshAssignment",
    "CdmaConfig",
    "TdmaSchedule",
    "SampledSignal",
    "walsh_matrix",
    "encode_cdma",
    "schedule_fdma_tdma",
    "encode_slot",
    "encode_fdma_tdma",
    "encode_fm_tdma",
    "complementary_stream",
]


def walsh_matrix(L: int) -> np.ndarray:
    """L x L Sylvester–Hadamard matrix of +-1 (int8), L a power of two.

    H_1 = [1]; H_2n = [[H_n, H_n], [H_n, -H_n]].  Rows are mutually
    orthogonal: H @ H.T = L * I.
    """
    if L < 1 or L & (L - 1):
        raise ValueError(f"code length must be a power of two, got {L}")
    h = np.array([[1]], dtype=np.int8)
    while h.shape[0] < L:
        h = np.block([[h, h], [h, -h]])
    return h


@dataclass(frozen=True)
class WalshAssignment:
    """Pixel id -> Hadamard row index.  Row 0 (all ones) is pure DC and
    indistinguishable from unmodulated background, so it is never handed
    out."""

    code_length: int
    pixel_to_row: Mapping[int, int]

    def __post_init__(self) -> None:
        L = self.code_length
        if L < 2 or L & (L - 1):
            raise ValueError("code_length must be a power of two >= 2")
        rows = list(self.pixel_to_row.values())
        if len(set(rows)) != len(rows):
            raise ValueError("code rows must be unique")
        if any(not 1 <= r < L for r in rows):
            raise ValueError("code rows must lie in 1..L-1 (row 0 is reserved)")
        if len(rows) > L - 1:
            raise ValueError("more pixels than available code rows")

    @classmethod
    def sequential(cls, n_pixels: int, code_length: int) -> "WalshAssignment":
        """Pixel i -> row i+1, raster order."""
        return cls(code_length, {i: i + 1 for i in range(n_pixels)})


@dataclass(frozen=True)
class CdmaConfig:
    bit_rate: float
    samples_per_bit: int

    def __post_init__(self) -> None:
        if self.bit_rate <= 0 or self.samples_per_bit < 1:
            raise ValueError("bit_rate must be positive and samples_per_bit >= 1")

    @property
    def fs(self) -> float:
        return self.bit_rate * self.samples_per_bit


def encode_cdma(
    scene: Scene, assignment: WalshAssignment, cfg: CdmaConfig
) -> SampledSignal:
    """Sum of code-gated pixel irradiances, held samples_per_bit per bit."""
    flat = scene.irradiance.ravel()
    missing = [i for i in range(flat.size) if i not in assignment.pixel_to_row]
    if missing:
        raise ValueError(f"pixels without a code row: {missing[:5]}...")
    h = walsh_matrix(assignment.code_length)
    rows = np.array([assignment.pixel_to_row[i] for i in range(flat.size)])
    onoff = (h[rows].astype(np.float64) + 1.0) / 2.0
    levels = flat @ onoff
    return SampledSignal(np.repeat(levels, cfg.samples_per_bit), cfg.fs)


@dataclass(frozen=True)
class TdmaSchedule:
    """Slot-by-slot (pixel id, carrier Hz) assignments."""

    slots: tuple[tuple[tuple[int, float], ...], ...]
    slot_duration: float

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for slot in self.slots:
            freqs = [f for _, f in slot]
            if len(set(freqs)) != len(freqs):
                raise ValueError("duplicate carrier inside a slot")
            for pix, _ in slot:
                if pix in seen:
                    raise ValueError(f"pixel {pix} appears in more than one slot")
                seen.add(pix)

    @property
    def num_slots(self) -> int:
        return len(self.slots)


def schedule_fdma_tdma(npix: int, plan: FrequencyPlan) -> TdmaSchedule:
    """Group pixels in raster order, P per slot, lowest carrier first.

    The final partial slot fills the lowest carriers first; the slot count
    is ceil(npix / P).
    """
    if npix < 1:
        raise ValueError("npix must be >= 1")
    channels = sorted(plan.channels)
    P = len(channels)
    slots = []
    for start in range(0, npix, P):
        group = range(start, min(start + P, npix))
        slots.append(tuple((pix, channels[j]) for j, pix in enumerate(group)))
    assert len(slots) == math.ceil(npix / P)
    return TdmaSchedule(slots=tuple(slots), slot_duration=plan.T)


def encode_slot(
    scene: Scene,
    slot: Sequence[tuple[int, float]],
    window: SamplingWindow,
    strict: bool = True,
) -> SampledSignal:
    """Superposition of the slot's irradiance-weighted square carriers.

    strict=False samples misconfigured carriers with partial cycles instead
    of rejecting them (crosstalk demonstrations).
    """
    flat = scene.irradiance.ravel()
    out = np.zeros(window.Q)
    synth = synth_square if strict else sample_square_free
    for pix, freq in slot:
        amp = flat[pix]
        if amp == 0.0:
            continue
        out += synth(SquareWaveSpec(frequency=freq, amplitude=amp), window).samples
    return SampledSignal(out, window.fs)


def _check_window_matches_plan(window: SamplingWindow, plan: FrequencyPlan) -> None:
    if (window.fs, window.T, window.Q) != (plan.fs, plan.T, plan.Q):
        raise ValueError("window (fs, T, Q) does not match the plan")


def encode_fdma_tdma(
    scene: Scene,
    schedule: TdmaSchedule,
    plan: FrequencyPlan,
    window: SamplingWindow,
) -> list[SampledSignal]:
    """One stream per slot; pixels outside the slot contribute zero."""
    _check_window_matches_plan(window, plan)
    channels = set(plan.channels)
    for slot in schedule.slots:
        if any(f not in channels for _, f in slot):
            raise ValueError("schedule uses a frequency outside the plan")
    return [encode_slot(scene, slot, window) for slot in schedule.slots]


def encode_fm_tdma(
    scene: Scene, grid: CaosGrid, carrier: float, window: SamplingWindow
) -> list[SampledSignal]:
    """One slot per pixel in raster order, all on the same carrier."""
    if scene.shape != (grid.rows, grid.cols):
        raise ValueError("scene shape does not match the grid")
    return [
        encode_slot(scene, [(pix, carrier)], window)
        for pix in range(grid.num_pixels)
    ]


def complementary_stream(
    slot_stream: SampledSignal, scene: Scene, slot: Sequence[tuple[int, float]]
) -> SampledSignal:
    """Light steered to the second detector: total irradiance minus stream.

    Mirrors in the off state dump their pixel's light onto the complementary
    arm, so the two streams sum to the scene total at every sample.
    """
    total = float(scene.irradiance.sum())
    return SampledSignal(total - slot_stream.samples, slot_stream.fs)
