"""Planar bearing and vector primitives.

All angles are degrees, measured counterclockwise from the array's x-axis.
Trigonometry converts to radians internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "IndeterminateDirectionError",
    "MicArray",
    "PolarVector",
    "RectVector",
    "polar_to_rect",
    "sum_vectors",
    "rect_to_polar",
    "normalize_angle",
    "angular_error",
]


class IndeterminateDirectionError(ValueError):
    """Raised when a resultant vector has no meaningful direction."""


def normalize_angle(a_deg: float) -> float:
    """Wrap an angle in degrees into ``[0, 360)``."""
    if not math.isfinite(a_deg):
        raise ValueError(f"angle must be finite, got {a_deg!r}")
    wrapped = a_deg % 360.0
    # tiny negative inputs round up to exactly 360.0
    if wrapped >= 360.0:
        wrapped = 0.0
    return wrapped + 0.0  # drop negative zero


def angular_error(a_deg: float, b_deg: float) -> float:
    """Signed minimal difference ``a - b`` wrapped into ``(-180, 180]``."""
    d = normalize_angle(a_deg - b_deg)
    if d > 180.0:
        d -= 360.0
    return d


@dataclass(frozen=True)
class MicArray:
    """Microphone bearings (degrees) on a circle of ``radius_m`` meters."""

    angles_deg: tuple[float, ...] = (0.0, 120.0, 240.0)
    radius_m: float = 0.15

    def __post_init__(self) -> None:
        angles = tuple(float(a) for a in self.angles_deg)
        object.__setattr__(self, "angles_deg", angles)
        if len(angles) < 2:
            raise ValueError("a microphone array needs at least 2 microphones")
        for a in angles:
            if not (math.isfinite(a) and 0.0 <= a < 360.0):
                raise ValueError(f"microphone angle {a!r} outside [0, 360)")
        if len(set(angles)) != len(angles):
            raise ValueError(f"microphone angles must be distinct: {angles}")
        if not (math.isfinite(self.radius_m) and self.radius_m > 0):
            raise ValueError(f"radius_m must be > 0, got {self.radius_m!r}")

    @property
    def size(self) -> int:
        return len(self.angles_deg)

    def rotated(self, delta_deg: float) -> "MicArray":
        """Same array with every bearing rotated by ``delta_deg``."""
        return MicArray(
            tuple(normalize_angle(a + delta_deg) for a in self.angles_deg),
            self.radius_m,
        )


@dataclass(frozen=True)
class PolarVector:
    """A ``(angle, magnitude)`` pair; the angle is normalized on construction."""

    angle_deg: float
    magnitude: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle_deg", normalize_angle(float(self.angle_deg)))
        if not (math.isfinite(self.magnitude) and self.magnitude >= 0):
            raise ValueError(f"magnitude must be finite and >= 0, got {self.magnitude!r}")


@dataclass(frozen=True)
class RectVector:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"vector components must be finite, got ({self.x!r}, {self.y!r})")

    def __abs__(self) -> float:
        return math.hypot(self.x, self.y)


def polar_to_rect(v: PolarVector) -> RectVector:
    theta = math.radians(v.angle_deg)
    return RectVector(v.magnitude * math.cos(theta), v.magnitude * math.sin(theta))


def sum_vectors(vs: Iterable[RectVector]) -> RectVector:
    """Component-wise sum of the given vectors.

    Uses ``math.fsum`` so the result does not depend on the order of ``vs``.

    Raises
    ------
    ValueError
        If ``vs`` is empty (no contributing channels).
    """
    vs = list(vs)
    if not vs:
        raise ValueError("cannot sum an empty set of vectors: no contributing channels")
    return RectVector(math.fsum(v.x for v in vs), math.fsum(v.y for v in vs))


def rect_to_polar(v: RectVector) -> PolarVector:
    """Convert to polar form; the ``atan2`` angle is reported in ``[0, 360)``.

    Raises
    ------
    IndeterminateDirectionError
        For the zero vector.
    """
    if v.x == 0.0 and v.y == 0.0:
        raise IndeterminateDirectionError("zero vector has no direction")
    signed = math.atan2(v.y, v.x)
    return PolarVector(math.degrees(signed), math.hypot(v.x, v.y))


DEFAULT_ARRAY = MicArray()
