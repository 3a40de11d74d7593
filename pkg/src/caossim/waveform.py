"""Sampled square-wave synthesis and its exact Fourier-coefficient analysis.

A binary micromirror toggled at a carrier frequency turns a pixel's
irradiance into an on/off square wave on the photodetector.  Channel
selection for the frequency-division mode rests on two discrete-time facts
about such waves:

* a 50%-duty square wave with an even number of samples per period has
  exactly zero energy at every even harmonic (half-wave symmetry), and
* its odd-harmonic coefficients follow a closed form, so the clean spots
  in the spectrum can be enumerated ahead of time, alias folds included.

Both the brute-force coefficient sum and the closed form live here and
cross-check each other to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SamplingWindow",
    "SquareWaveSpec",
    "SampledSignal",
    "synth_square",
    "sample_square_free",
    "fourier_coeff_direct",
    "fourier_coeff_closed",
    "fundamental_coefficient",
    "fold_to_bin",
    "folded_harmonic_bins",
]


@dataclass(frozen=True)
class SamplingWindow:
    """One acquisition slot: duration T, sample rate fs, Q = fs*T samples.

    Q must be a power of two (radix-2 spectral processing) and the spectral
    resolution is delta_f = 1/T = fs/Q.
    """

    fs: float
    T: float
    Q: int
    delta_f: float

    def __post_init__(self) -> None:
        if self.Q < 2 or self.Q & (self.Q - 1):
            raise ValueError(f"Q must be a power of two, got {self.Q}")
        if not math.isclose(self.fs * self.T, self.Q, rel_tol=1e-12):
            raise ValueError(f"Q must equal fs*T exactly: {self.fs}*{self.T} != {self.Q}")
        if not math.isclose(self.delta_f, 1.0 / self.T, rel_tol=1e-12):
            raise ValueError("delta_f must equal 1/T")

    @classmethod
    def design(cls, T: float, p: int) -> "SamplingWindow":
        """Window with Q = 2**p samples over T seconds (fs = 2**p / T)."""
        if p < 1:
            raise ValueError("p must be >= 1")
        q = 1 << p
        return cls(fs=q / T, T=T, Q=q, delta_f=1.0 / T)


@dataclass(frozen=True)
class SquareWaveSpec:
    """Carrier description for one modulated pixel.

    phase_samples shifts the rising edge; all carriers of a slot share
    phase 0 (the mirrors switch on a common frame clock), so the default
    is a wave that starts high at sample 0.
    """

    frequency: float
    amplitude: float = 1.0
    phase_samples: int = 0
    duty: float = 0.5

    def __post_init__(self) -> None:
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if not 0.0 < self.duty < 1.0:
            raise ValueError("duty must lie strictly between 0 and 1")


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Real-valued uniformly sampled photodetector waveform."""

    samples: np.ndarray = field(repr=False)
    fs: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    def __len__(self) -> int:
        return self.samples.shape[0]


def samples_per_period(frequency: float, window: SamplingWindow) -> int:
    """Integer number of samples in one carrier period, or raise.

    Rejects the two conditions that break whole-cycle acquisition:
    a non-integer samples-per-period count (partial cycles are the
    crosstalk source the design forbids) and a carrier that is not an
    integer number of cycles inside the window.
    """
    n_float = window.fs / frequency
    n = round(n_float)
    if abs(n_float - n) > 1e-9 * n_float:
        raise ValueError(
            f"fs/f = {n_float} is not an integer; partial periods are rejected"
        )
    if n < 4:
        raise ValueError(f"need at least 4 samples per period, got {n}")
    if frequency > window.fs / 2:
        raise ValueError("frequency above Nyquist")
    cycles = frequency / window.delta_f
    if abs(cycles - round(cycles)) > 1e-9 * max(1.0, cycles):
        raise ValueError(
            f"frequency {frequency} Hz is not an integer multiple of "
            f"delta_f = {window.delta_f} Hz"
        )
    return n


def synth_square(spec: SquareWaveSpec, window: SamplingWindow) -> SampledSignal:
    """Synthesize one window of an exactly periodic sampled square wave.

    The wave completes whole cycles inside the window; sample n is high
    (equal to the amplitude) when the phase-shifted position within the
    period is below N*duty, giving exactly N*duty high samples per period
    when that product is integral.
    """
    n_per = samples_per_period(spec.frequency, window)
    n = np.arange(window.Q)
    pos = (n - spec.phase_samples) % n_per
    high = pos < n_per * spec.duty
    return SampledSignal(np.where(high, spec.amplitude, 0.0), window.fs)


def sample_square_free(spec: SquareWaveSpec, window: SamplingWindow) -> SampledSignal:
    """Sample a square wave of arbitrary frequency, partial cycles allowed.

    This is the misconfigured-carrier path: a wave whose period does not
    divide the window leaks energy across the whole spectrum, which is
    exactly the artifact the channel-selection rule exists to prevent.
    Valid carriers produce the same samples as synth_square.
    """
    if spec.frequency > window.fs / 2:
        raise ValueError("frequency above Nyquist")
    n = np.arange(window.Q)
    phase = np.mod((n - spec.phase_samples) * (spec.frequency / window.fs), 1.0)
    return SampledSignal(np.where(phase < spec.duty, spec.amplitude, 0.0), window.fs)


def fourier_coeff_direct(N: int, N1: int, k: int) -> complex:
    """Fourier series coefficient of a symmetric (2*N1+1)-high pulse train.

    Brute-force evaluation of (1/N) * sum_{n=-N1..N1} exp(-jk(2pi/N)n).
    Serves as the oracle for the closed form.
    """
    _check_pulse_args(N, N1)
    n = np.arange(-N1, N1 + 1)
    return complex(np.sum(np.exp(-1j * k * (2.0 * np.pi / N) * n)) / N)


def fourier_coeff_closed(N: int, N1: int, k: int) -> complex:
    """Closed form of fourier_coeff_direct.

    sin(2 pi k (N1 + 1/2) / N) / (N sin(pi k / N)) for k not a multiple
    of N; the removable singularity at k = 0 (mod N) evaluates to the DC
    value (2*N1+1)/N.  At exact 50% duty (2*N1+1 = N/2) this is zero for
    even k and +-1/(N sin(pi k/N)) for odd k.
    """
    _check_pulse_args(N, N1)
    if k % N == 0:
        return complex((2 * N1 + 1) / N)
    num = math.sin(2.0 * math.pi * k * (N1 + 0.5) / N)
    den = N * math.sin(math.pi * k / N)
    return complex(num / den)


def _check_pulse_args(N: int, N1: int) -> None:
    if N < 2 or N % 2:
        raise ValueError("N must be a positive even integer")
    if N1 < 0 or 2 * N1 + 1 > N:
        raise ValueError("need 0 <= 2*N1+1 <= N")


def fundamental_coefficient(n_per_period: float) -> float:
    """|a_1| of a unit 50%-duty square wave with n samples per period.

    1/(N sin(pi/N)); tends to 1/pi as N grows.  This exact discrete value
    (not the continuous 2/pi) is the decoder's normalization: it already
    contains the self-alias folds of harmonics N-1, N+1, ... back onto
    the fundamental, so channels with few samples per period decode
    exactly.  Accepts non-integer N for the misconfigured-carrier path.
    """
    if n_per_period < 2:
        raise ValueError("need at least 2 samples per period")
    return 1.0 / (n_per_period * math.sin(math.pi / n_per_period))


def fold_to_bin(frequency: float, fs: float, delta_f: float) -> int:
    """Spectrum bin where a tone lands after aliasing, in [0, Q/2]."""
    r = math.fmod(frequency, fs)
    if r > fs / 2:
        r = fs - r
    b = r / delta_f
    bi = round(b)
    if abs(b - bi) > 1e-6:
        raise ValueError(f"{frequency} Hz does not fold onto an exact bin")
    return bi


def folded_harmonic_bins(
    f: float, window: SamplingWindow, max_harmonic: int
) -> set[int]:
    """Bins hit by the odd harmonics h*f (h odd, h <= max_harmonic), folded.

    The fundamental (h=1) is included.  Harmonics beyond h = N-1 alias
    onto bins already in the set, so max_harmonic = N-1 is exhaustive.
    """
    cycles = f / window.delta_f
    if abs(cycles - round(cycles)) > 1e-9 * max(1.0, cycles):
        raise ValueError("f must be an integer multiple of delta_f")
    return {
        fold_to_bin(h * f, window.fs, window.delta_f)
        for h in range(1, max_harmonic + 1, 2)
    }
