"""Seeded synthetic scenes: one point source, a circular microphone array.

Channel model, per microphone ``i``::

    channel_i(t) = gain_mismatch_i * level / d_i**alpha * s(t) + noise_i(t)

``s`` is a unit-RMS waveform, ``d_i`` the source-to-microphone distance and
``noise_i`` independent Gaussian noise whose variance gives ``snr_db``
against the strongest noiseless channel. Propagation delay is not modelled.

Randomness comes from NumPy's PCG64 bit generator seeded with the trial
seed, so a (scene, seed) pair always reproduces the same streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import DEFAULT_ARRAY, MicArray, normalize_angle

RNG_ALGORITHM = "numpy.random.PCG64"
WAVEFORMS = ("white_noise", "sine", "clip")
MAX_SEED = 2**64 - 1


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class SimScene:
    """A point source at ``source_angle_deg`` / ``source_distance_m``.

    ``source_level`` is the RMS amplitude the source produces at 1 m, in
    full-scale units. ``gain_mismatch`` of ``None`` means unit gain on every
    channel; ``snr_db`` of ``None`` means noiseless.
    """

    source_angle_deg: float = 0.0
    source_distance_m: float = 0.35
    array: MicArray = DEFAULT_ARRAY
    attenuation_exponent: float = 1.0
    waveform: str = "white_noise"
    sine_freq_hz: float = 1000.0
    clip_path: Optional[str] = None
    duration_s: float = 2.0
    sample_rate_hz: int = 8000
    snr_db: Optional[float] = None
    gain_mismatch: Optional[tuple[float, ...]] = None
    source_level: float = 0.02

    def __post_init__(self) -> None:
        if not math.isfinite(self.source_angle_deg):
            raise SceneError("source_angle_deg must be finite")
        object.__setattr__(self, "source_angle_deg", normalize_angle(self.source_angle_deg))
        if not self.source_distance_m > 0:
            raise SceneError(f"source_distance_m must be > 0, got {self.source_distance_m!r}")
        if not self.attenuation_exponent >= 0:
            raise SceneError(f"attenuation_exponent must be >= 0, got {self.attenuation_exponent!r}")
        if self.waveform not in WAVEFORMS:
            raise SceneError(f"waveform must be one of {WAVEFORMS}, got {self.waveform!r}")
        if self.waveform == "sine" and not self.sine_freq_hz > 0:
            raise SceneError(f"sine_freq_hz must be > 0, got {self.sine_freq_hz!r}")
        if self.waveform == "clip" and not self.clip_path:
            raise SceneError("waveform 'clip' requires clip_path")
        if not self.duration_s > 0:
            raise SceneError(f"duration_s must be > 0, got {self.duration_s!r}")
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz <= 0:
            raise SceneError(f"sample_rate_hz must be a positive integer, got {self.sample_rate_hz!r}")
        if self.snr_db is not None and not math.isfinite(self.snr_db):
            raise SceneError("snr_db must be finite or None")
        if not self.source_level > 0:
            raise SceneError(f"source_level must be > 0, got {self.source_level!r}")
        if self.gain_mismatch is not None:
            gains = tuple(float(g) for g in self.gain_mismatch)
            if len(gains) != self.array.size:
                raise SceneError(f"gain_mismatch needs {self.array.size} entries, got {len(gains)}")
            if any(not (math.isfinite(g) and g > 0) for g in gains):
                raise SceneError(f"gain_mismatch factors must be > 0, got {gains}")
            object.__setattr__(self, "gain_mismatch", gains)
        if np.any(source_distances(self) == 0.0):
            raise SceneError("source coincides with a microphone position")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))

    def gains(self) -> np.ndarray:
        if self.gain_mismatch is None:
            return np.ones(self.array.size)
        return np.asarray(self.gain_mismatch, dtype=np.float64)


@dataclass(frozen=True)
class SimTrial:
    streams: np.ndarray
    true_angle_deg: float
    seed: int
    sample_rate_hz: int


def mic_positions(array: MicArray) -> np.ndarray:
    """Microphone ``(x, y)`` positions in meters, shape ``(n_mics, 2)``."""
    theta = np.radians(array.angles_deg)
    return array.radius_m * np.column_stack([np.cos(theta), np.sin(theta)])


def source_position(scene: SimScene) -> np.ndarray:
    theta = math.radians(scene.source_angle_deg)
    return scene.source_distance_m * np.array([math.cos(theta), math.sin(theta)])


def source_distances(scene: SimScene) -> np.ndarray:
    return np.hypot(*(mic_positions(scene.array) - source_position(scene)).T)


def attenuation(distance_m: float, alpha: float) -> float:
    """Amplitude gain ``1 / distance**alpha``."""
    if not distance_m > 0:
        raise ValueError(f"distance must be > 0, got {distance_m!r}")
    return 1.0 / distance_m**alpha


def channel_gains(scene: SimScene) -> np.ndarray:
    """Noiseless amplitude gain from the unit-RMS source to each channel."""
    atten = np.array([attenuation(d, scene.attenuation_exponent) for d in source_distances(scene)])
    return scene.gains() * scene.source_level * atten


def _clip_waveform(scene: SimScene, n: int) -> np.ndarray:
    from .wavio import read_wav

    clip = read_wav(scene.clip_path)
    if clip.sample_rate_hz != scene.sample_rate_hz:
        raise SceneError(
            f"clip {scene.clip_path} is {clip.sample_rate_hz} Hz, scene expects {scene.sample_rate_hz} Hz"
        )
    mono = clip.samples[0]
    if mono.size == 0 or not np.any(mono):
        raise SceneError(f"clip {scene.clip_path} is empty or silent")
    return np.resize(mono, n)


def source_waveform(scene: SimScene, rng: np.random.Generator) -> np.ndarray:
    """Unit-RMS source signal of ``scene.n_samples`` samples."""
    n = scene.n_samples
    if scene.waveform == "white_noise":
        return rng.standard_normal(n)
    if scene.waveform == "sine":
        t = np.arange(n) / scene.sample_rate_hz
        return math.sqrt(2.0) * np.sin(2 * math.pi * scene.sine_freq_hz * t)
    s = _clip_waveform(scene, n)
    return s / np.sqrt(np.mean(s * s))


def make_rng(seed: int) -> np.random.Generator:
    if int(seed) != seed or not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def synthesize_trial(scene: SimScene, seed: int) -> SimTrial:
    """Generate per-microphone streams for one trial of ``scene``."""
    rng = make_rng(seed)
    s = source_waveform(scene, rng)
    clean = channel_gains(scene)[:, None] * s[None, :]
    if scene.snr_db is None:
        streams = clean
    else:
        strongest = float(np.max(np.mean(clean * clean, axis=1)))
        noise_std = math.sqrt(strongest / 10.0 ** (scene.snr_db / 10.0))
        streams = clean + noise_std * rng.standard_normal(clean.shape)
    return SimTrial(streams, scene.source_angle_deg, int(seed), int(scene.sample_rate_hz))
