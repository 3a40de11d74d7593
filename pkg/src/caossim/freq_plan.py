"""Design and audit of FDMA channel-frequency ladders.

A slot carries P carriers at once, so every carrier must sit exactly on a
spectrum bin and no carrier may coincide with an odd harmonic of another
(alias folds included).  Both constraints are met by the power-of-two
ladder f_j = 2**(j-1) * f_1 with f_1 = 2**(m-1) * delta_f: odd harmonics
of a ladder member fold only onto odd multiples of that member, never
onto a distinct power-of-two channel.

``design_plan`` builds such a ladder; ``validate_plan`` audits an
arbitrary frequency set and reports every violation it finds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .waveform import SamplingWindow, fold_to_bin

__all__ = [
    "MainsGuardWarning",
    "FrequencyPlan",
    "HarmonicCollision",
    "ValidationReport",
    "design_plan",
    "plan_from_frequencies",
    "validate_plan",
    "available_slots",
    "bin_of",
]

MAINS_GUARD_HZ = 50.0
DEFAULT_MAX_HARMONIC = 63


class MainsGuardWarning(UserWarning):
    """Carrier at or below the AC mains fundamental; allowed but risky."""


@dataclass(frozen=True)
class FrequencyPlan:
    """A validated carrier set plus its sampling bookkeeping.

    p is the ADC exponent (fs = 2**p * delta_f, Q = 2**p); m is the base
    exponent of the lowest carrier (f_1 = 2**(m-1) * delta_f).  m is None
    for plans wrapped around an explicit, possibly non-ladder frequency
    list.
    """

    delta_f: float
    T: float
    fs: float
    Q: int
    p: int
    m: int | None
    channels: tuple[float, ...]
    bins: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.channels) < 1:
            raise ValueError("plan needs at least one channel")
        if len(set(self.channels)) != len(self.channels):
            raise ValueError("channels must be distinct")

    @property
    def num_channels(self) -> int:
        return len(self.channels)

    def window(self) -> SamplingWindow:
        return SamplingWindow(fs=self.fs, T=self.T, Q=self.Q, delta_f=self.delta_f)


class HarmonicCollision(NamedTuple):
    """Channel sitting on the (possibly alias-folded) h-th harmonic of another."""

    frequency: float
    source: float
    harmonic: int


@dataclass(frozen=True)
class ValidationReport:
    """Per-frequency audit findings; passes iff every hard-flag list is empty.

    below_mains_guard is a warning list: it mirrors a practical layout rule,
    not a mathematical one, and does not affect the verdict.
    """

    frequencies: tuple[float, ...]
    not_multiple_of_delta_f: tuple[float, ...]
    not_power_of_two_ladder: tuple[float, ...]
    odd_harmonic_collision: tuple[HarmonicCollision, ...]
    below_mains_guard: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return not (
            self.not_multiple_of_delta_f
            or self.not_power_of_two_ladder
            or self.odd_harmonic_collision
        )

    def flagged_indices(self) -> tuple[int, ...]:
        """Positions (0-based) of input frequencies carrying a hard flag."""
        bad = set(self.not_multiple_of_delta_f) | set(self.not_power_of_two_ladder)
        bad |= {c.frequency for c in self.odd_harmonic_collision}
        return tuple(i for i, f in enumerate(self.frequencies) if f in bad)

    def summary(self) -> str:
        lines = [f"verdict: {'pass' if self.passed else 'FAIL'}"]
        for name, entries in (
            ("not a multiple of delta_f", self.not_multiple_of_delta_f),
            ("breaks power-of-two ladder", self.not_power_of_two_ladder),
        ):
            for f in entries:
                lines.append(f"  {f} Hz: {name}")
        for c in self.odd_harmonic_collision:
            lines.append(
                f"  {c.frequency} Hz: collides with harmonic {c.harmonic} of {c.source} Hz"
            )
        for f in self.below_mains_guard:
            lines.append(f"  {f} Hz: warning, at or below {MAINS_GUARD_HZ:g} Hz mains")
        return "\n".join(lines)


def design_plan(T: float, p: int, m: int, P: int) -> FrequencyPlan:
    """Build the P-channel power-of-two ladder for a window of 2**p samples.

    delta_f = 1/T, fs = 2**p * delta_f, f_1 = 2**(m-1) * delta_f and
    f_j = 2**(j-1) * f_1.  The fastest carrier must keep at least four
    samples per period (f_P <= fs/4).
    """
    if P < 1:
        raise ValueError("P must be >= 1")
    if m < 1:
        raise ValueError("m must be >= 1")
    window = SamplingWindow.design(T, p)
    f1 = 2.0 ** (m - 1) * window.delta_f
    channels = tuple(f1 * 2.0 ** (j - 1) for j in range(1, P + 1))
    if channels[-1] > window.fs / 4:
        raise ValueError(
            f"fastest carrier {channels[-1]} Hz exceeds fs/4 = {window.fs / 4} Hz "
            "(fewer than 4 samples per period)"
        )
    if f1 <= MAINS_GUARD_HZ:
        warnings.warn(
            f"lowest carrier {f1} Hz is at or below the {MAINS_GUARD_HZ:g} Hz mains "
            "fundamental",
            MainsGuardWarning,
            stacklevel=2,
        )
    bins = tuple(bin_of(f, window.delta_f) for f in channels)
    return FrequencyPlan(
        delta_f=window.delta_f,
        T=T,
        fs=window.fs,
        Q=window.Q,
        p=p,
        m=m,
        channels=channels,
        bins=bins,
    )


def plan_from_frequencies(
    frequencies: Sequence[float], T: float, p: int
) -> FrequencyPlan:
    """Wrap an explicit (not necessarily valid) frequency list in a plan.

    Bins are nearest-bin placements so that misconfigured carriers can
    still be scheduled and decoded for crosstalk demonstrations.
    """
    window = SamplingWindow.design(T, p)
    channels = tuple(float(f) for f in frequencies)
    bins = tuple(int(round(f / window.delta_f)) for f in channels)
    return FrequencyPlan(
        delta_f=window.delta_f,
        T=T,
        fs=window.fs,
        Q=window.Q,
        p=p,
        m=None,
        channels=channels,
        bins=bins,
    )


def _is_multiple(f: float, delta_f: float) -> bool:
    ratio = f / delta_f
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, ratio)


def _is_power_of_two_ratio(f: float, base: float) -> bool:
    ratio = f / base
    k = round(math.log2(ratio)) if ratio > 0 else -1
    return k >= 0 and math.isclose(ratio, 2.0**k, rel_tol=1e-9)


def validate_plan(
    frequencies: Sequence[float],
    delta_f: float,
    fs: float,
    max_harmonic: int = DEFAULT_MAX_HARMONIC,
) -> ValidationReport:
    """Audit a carrier set against the whole-cycle and no-collision rules.

    Flags, per frequency: (a) not an integer multiple of delta_f, (b) not a
    power-of-two multiple of the smallest bin-exact member, (c) coinciding,
    after alias folding about fs, with an odd harmonic h >= 3 of another
    bin-exact member.  A collision is charged to the channel whose bin is
    hit.  Findings are sorted by frequency, so the report is independent of
    input order.  A report is always produced.
    """
    if not frequencies:
        raise ValueError("frequency list must be nonempty")
    freqs = tuple(float(f) for f in frequencies)
    if any(f <= 0 for f in freqs):
        raise ValueError("frequencies must be positive")

    not_multiple = tuple(sorted(f for f in freqs if not _is_multiple(f, delta_f)))
    exact = [f for f in freqs if _is_multiple(f, delta_f)]

    ladder_breaks: list[float] = []
    collisions: list[HarmonicCollision] = []
    if exact:
        base = min(exact)
        ladder_breaks = sorted(
            f for f in exact if not _is_power_of_two_ratio(f, base)
        )
        bins = {f: fold_to_bin(f, fs, delta_f) for f in exact}
        for victim in exact:
            for source in exact:
                if source == victim:
                    continue
                for h in range(3, max_harmonic + 1, 2):
                    if fold_to_bin(h * source, fs, delta_f) == bins[victim]:
                        collisions.append(HarmonicCollision(victim, source, h))
                        break
        collisions.sort()

    mains = tuple(sorted(f for f in freqs if f <= MAINS_GUARD_HZ))
    return ValidationReport(
        frequencies=freqs,
        not_multiple_of_delta_f=not_multiple,
        not_power_of_two_ladder=tuple(ladder_breaks),
        odd_harmonic_collision=tuple(collisions),
        below_mains_guard=mains,
    )


def available_slots(
    f_a: float, used: Sequence[float], horizon: int = 8
) -> list[float]:
    """Even multiples of f_a still usable as additional carriers.

    A multiple k*f_a (k even, k <= horizon) is available when it is not
    already used and is not an odd harmonic (order >= 3) of any used
    frequency.
    """
    if not used:
        raise ValueError("used list must be nonempty")
    used_mult = []
    for u in used:
        m = u / f_a
        if abs(m - round(m)) > 1e-9:
            raise ValueError(f"used frequency {u} is not a multiple of f_a = {f_a}")
        used_mult.append(round(m))

    out: list[float] = []
    for k in range(2, horizon + 1, 2):
        if k in used_mult:
            continue
        blocked = any(
            k % m == 0 and (k // m) % 2 == 1 and k // m >= 3 for m in used_mult
        )
        if not blocked:
            out.append(k * f_a)
    return out


def bin_of(f: float, delta_f: float) -> int:
    """Spectrum bin index f/delta_f (DC is bin 0); the ratio must be exact."""
    if f < 0:
        raise ValueError("frequency must be nonnegative")
    ratio = f / delta_f
    b = round(ratio)
    if abs(ratio - b) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"{f} Hz is not an integer multiple of {delta_f} Hz")
    return b
