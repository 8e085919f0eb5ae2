"""Per-channel sample handling: DC removal, window power, threshold trigger."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

POWER_MODES = ("mean_abs", "rms", "mean_square")


@dataclass(frozen=True)
class SampleWindow:
    """``N`` consecutive samples from one channel, starting at ``start_index``."""

    samples: np.ndarray
    channel_id: int = 0
    start_index: int = 0

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("a sample window must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("sample window contains non-finite values")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class TriggerConfig:
    """Trigger threshold (full-scale units), window length and power mode."""

    threshold: float = 0.1
    window_len: int = 256
    power_mode: str = "mean_abs"

    def __post_init__(self) -> None:
        if not (np.isfinite(self.threshold) and self.threshold > 0):
            raise ValueError(f"threshold must be > 0, got {self.threshold!r}")
        if int(self.window_len) != self.window_len or self.window_len < 1:
            raise ValueError(f"window_len must be an integer >= 1, got {self.window_len!r}")
        object.__setattr__(self, "window_len", int(self.window_len))
        if self.power_mode not in POWER_MODES:
            raise ValueError(f"power_mode must be one of {POWER_MODES}, got {self.power_mode!r}")


def as_streams(streams: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    """Coerce per-channel sequences to a ``(channels, samples)`` float array."""
    arr = np.asarray(streams, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("streams must be a (channels, samples) array of equal-length channels")
    return arr


def remove_dc(w: SampleWindow) -> SampleWindow:
    centered = w.samples - w.samples.mean()
    return SampleWindow(centered, w.channel_id, w.start_index)


def average_power(w: SampleWindow, mode: str = "mean_abs") -> float:
    """Average signal power of a (DC-removed) window.

    ``mean_abs`` is the mean absolute amplitude, ``rms`` the root mean
    square and ``mean_square`` the mean of squared samples.
    """
    x = w.samples
    if x.size == 0:
        raise ValueError("empty window")
    if mode == "mean_abs":
        return float(np.mean(np.abs(x)))
    if mode == "rms":
        return float(np.sqrt(np.mean(x * x)))
    if mode == "mean_square":
        return float(np.mean(x * x))
    raise ValueError(f"unknown power mode {mode!r}; expected one of {POWER_MODES}")


def running_baseline(x: np.ndarray) -> np.ndarray:
    """Causal DC estimate: mean of all strictly earlier samples.

    The first sample is its own baseline.
    """
    base = np.empty_like(x)
    base[..., 0] = x[..., 0]
    if x.shape[-1] > 1:
        counts = np.arange(1, x.shape[-1])
        base[..., 1:] = np.cumsum(x[..., :-1], axis=-1) / counts
    return base


def detect_event(streams, cfg: TriggerConfig) -> Optional[int]:
    """Index of the first sample where any channel exceeds the threshold.

    Each channel is compared after subtracting its running DC baseline, so
    a biased ADC-style stream does not trigger on its offset. Returns
    ``None`` if no sample qualifies, or if the first qualifying sample
    leaves fewer than ``cfg.window_len`` samples to the end of the stream.
    """
    x = as_streams(streams)
    if x.shape[1] == 0:
        return None
    over = np.abs(x - running_baseline(x)) > cfg.threshold
    hits = np.flatnonzero(over.any(axis=0))
    if hits.size == 0:
        return None
    trigger = int(hits[0])
    if trigger + cfg.window_len > x.shape[1]:
        return None
    return trigger


def collect_windows(streams, trigger_index: int, n: int) -> list[SampleWindow]:
    """Slice ``[trigger_index, trigger_index + n)`` from every channel."""
    x = as_streams(streams)
    if n < 1 or trigger_index < 0 or trigger_index + n > x.shape[1]:
        raise IndexError(
            f"window [{trigger_index}, {trigger_index + n}) does not fit "
            f"in streams of length {x.shape[1]}"
        )
    return [
        SampleWindow(x[ch, trigger_index:trigger_index + n], ch, trigger_index)
        for ch in range(x.shape[0])
    ]
