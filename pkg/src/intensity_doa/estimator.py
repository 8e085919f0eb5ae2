"""Bearing estimation from per-channel signal power.

Each microphone's average power becomes a vector along that microphone's
bearing; the vectors are summed and the resultant's ``atan2`` angle is the
estimated source bearing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .dsp import TriggerConfig, average_power, collect_windows, detect_event, remove_dc
from .geometry import (
    DEFAULT_ARRAY,
    IndeterminateDirectionError,
    MicArray,
    PolarVector,
    polar_to_rect,
    rect_to_polar,
    sum_vectors,
)

# relative to the largest channel power
CANCELLATION_EPS = 1e-12


@dataclass(frozen=True)
class ServoRange:
    s_min: int = 0
    s_max: int = 180

    def __post_init__(self) -> None:
        if self.s_max <= self.s_min:
            raise ValueError(f"servo range must satisfy s_min < s_max, got {self.s_min}..{self.s_max}")


@dataclass(frozen=True)
class DirectionEstimate:
    """Estimated bearing with the resultant vector it came from.

    ``x`` and ``y`` are the summed rectangular components; ``angle_deg``
    and ``magnitude`` are their polar form.
    """

    angle_deg: float
    magnitude: float
    per_channel_power: tuple[float, ...]
    servo_pos: int
    x: float
    y: float

    @property
    def signed_angle_rad(self) -> float:
        """Raw ``atan2`` result in ``[-pi, pi]``."""
        return math.atan2(self.y, self.x)

    def as_dict(self) -> dict:
        return {
            "angle_deg": self.angle_deg,
            "magnitude": self.magnitude,
            "servo_pos": self.servo_pos,
            "x": self.x,
            "y": self.y,
            "per_channel_power": list(self.per_channel_power),
        }


def servo_command(angle_deg: float, servo: ServoRange = ServoRange()) -> int:
    """Map a bearing in ``[0, 360)`` linearly onto the servo's integer range."""
    if not (0.0 <= angle_deg < 360.0):
        raise ValueError(f"angle must be in [0, 360), got {angle_deg!r}")
    span = servo.s_max - servo.s_min
    return int(math.floor(angle_deg / 360.0 * span + 0.5)) + servo.s_min


def estimate_direction(
    powers: Sequence[float],
    array: MicArray = DEFAULT_ARRAY,
    servo: ServoRange = ServoRange(),
) -> DirectionEstimate:
    """Sum per-microphone power vectors and return the resultant's bearing.

    Raises
    ------
    ValueError
        If ``powers`` does not match the array size or contains negatives.
    IndeterminateDirectionError
        If the resultant cancels to below ``1e-12`` times the largest power
        (including the all-zero case).
    """
    powers = tuple(float(p) for p in powers)
    if len(powers) != array.size:
        raise ValueError(f"expected {array.size} channel powers, got {len(powers)}")
    if any(not math.isfinite(p) or p < 0 for p in powers):
        raise ValueError(f"channel powers must be finite and >= 0, got {powers}")

    polar = [PolarVector(theta, p) for theta, p in zip(array.angles_deg, powers)]
    total = sum_vectors(polar_to_rect(v) for v in polar)

    peak = max(powers)
    if peak == 0.0 or abs(total) < CANCELLATION_EPS * peak:
        raise IndeterminateDirectionError(
            f"channel powers {powers} cancel; the direction is indeterminate"
        )
    result = rect_to_polar(total)
    return DirectionEstimate(
        angle_deg=result.angle_deg,
        magnitude=result.magnitude,
        per_channel_power=powers,
        servo_pos=servo_command(result.angle_deg, servo),
        x=total.x,
        y=total.y,
    )


def channel_powers(streams, trigger_index: int, cfg: TriggerConfig) -> list[float]:
    windows = collect_windows(streams, trigger_index, cfg.window_len)
    return [average_power(remove_dc(w), cfg.power_mode) for w in windows]


def process_event(
    streams,
    array: MicArray = DEFAULT_ARRAY,
    cfg: TriggerConfig = TriggerConfig(),
    servo: ServoRange = ServoRange(),
) -> Optional[DirectionEstimate]:
    """Run trigger, windowing, power averaging and estimation on raw streams.

    ``streams`` holds one row per microphone, in array order. Returns
    ``None`` when nothing crosses the trigger threshold.
    """
    trigger = detect_event(streams, cfg)
    if trigger is None:
        return None
    return estimate_direction(channel_powers(streams, trigger, cfg), array, servo)
