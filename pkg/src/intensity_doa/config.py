"""TOML run configuration with explicit units in field names.

A minimal file may contain only ``seed``; every other field has a default
matching the three-microphone reference geometry::

    seed = 7
    channel_map = { 0 = 0, 1 = 1, 2 = 2 }   # WAV channel -> microphone

    [array]
    angles_deg = [0, 120, 240]
    radius_m = 0.15

    [trigger]
    threshold_fs = 0.1
    window_len = 256
    power_mode = "mean_abs"

    [scene]
    source_angle_deg = 120
    source_distance_m = 0.35
    snr_db = 10
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .dsp import TriggerConfig
from .estimator import ServoRange
from .geometry import MicArray
from .simulator import RNG_ALGORITHM, SimScene


class ConfigError(ValueError):
    pass


_ARRAY_KEYS = {"angles_deg", "radius_m"}
_TRIGGER_KEYS = {"threshold_fs", "window_len", "power_mode"}
_SCENE_KEYS = {
    "source_angle_deg", "source_distance_m", "attenuation_exponent", "waveform",
    "sine_freq_hz", "clip_path", "duration_s", "sample_rate_hz", "snr_db",
    "gain_mismatch", "source_level",
}
_SERVO_KEYS = {"s_min", "s_max"}
_EVAL_KEYS = {"trim_per_side", "trim_fraction", "trials", "workers"}
_OUTPUT_KEYS = {"dir"}
_TOP_KEYS = {"seed", "array", "trigger", "scene", "servo", "evaluation", "output", "channel_map"}


@dataclass(frozen=True)
class EvaluationConfig:
    trim_per_side: int = 2
    trim_fraction: Optional[float] = None
    trials: int = 30
    workers: int = 1

    def trim_for(self, n: int) -> int:
        from .evaluation import trim_count_from_fraction

        if self.trim_fraction is not None:
            return trim_count_from_fraction(n, self.trim_fraction)
        return self.trim_per_side


@dataclass(frozen=True)
class Config:
    seed: int = 0
    array: MicArray = MicArray()
    trigger: TriggerConfig = TriggerConfig()
    scene: SimScene = SimScene()
    servo: ServoRange = ServoRange()
    evaluation: EvaluationConfig = EvaluationConfig()
    channel_map: dict[int, int] = field(default_factory=lambda: {0: 0, 1: 1, 2: 2})
    output_dir: str = "out"

    def mic_channel_order(self) -> list[int]:
        """WAV channel index feeding each microphone, in array order."""
        inverse = {mic: ch for ch, mic in self.channel_map.items()}
        return [inverse[m] for m in range(self.array.size)]

    def to_dict(self) -> dict:
        """Effective configuration, defaults included, for replay."""
        s = self.scene
        return {
            "seed": self.seed,
            "array": {"angles_deg": list(self.array.angles_deg), "radius_m": self.array.radius_m},
            "trigger": {
                "threshold_fs": self.trigger.threshold,
                "window_len": self.trigger.window_len,
                "power_mode": self.trigger.power_mode,
            },
            "scene": {
                "source_angle_deg": s.source_angle_deg,
                "source_distance_m": s.source_distance_m,
                "attenuation_exponent": s.attenuation_exponent,
                "waveform": s.waveform,
                "sine_freq_hz": s.sine_freq_hz,
                "clip_path": s.clip_path,
                "duration_s": s.duration_s,
                "sample_rate_hz": s.sample_rate_hz,
                "snr_db": s.snr_db,
                "gain_mismatch": [float(g) for g in s.gains()],
                "source_level": s.source_level,
            },
            "servo": {"s_min": self.servo.s_min, "s_max": self.servo.s_max},
            "evaluation": {
                "trim_per_side": self.evaluation.trim_per_side,
                "trim_fraction": self.evaluation.trim_fraction,
                "trials": self.evaluation.trials,
                "workers": self.evaluation.workers,
            },
            "channel_map": {str(k): v for k, v in sorted(self.channel_map.items())},
            "output": {"dir": self.output_dir},
            "rng": {"algorithm": RNG_ALGORITHM, "numpy": np.__version__},
        }


def _section(doc: dict, name: str, allowed: set[str]) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) in [{name}]: {', '.join(sorted(unknown))}")
    return sec


def _build(label: str, fn, **kwargs):
    try:
        return fn(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label}: {exc}") from exc


def _channel_map(raw: Any, n_mics: int) -> dict[int, int]:
    if raw is None:
        return {i: i for i in range(n_mics)}
    if not isinstance(raw, dict):
        raise ConfigError("channel_map must be a table of WAV channel -> microphone index")
    cmap = {}
    for k, v in raw.items():
        try:
            ch = int(k)
        except ValueError:
            raise ConfigError(f"channel_map: WAV channel key {k!r} is not an integer") from None
        if ch < 0 or not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"channel_map: invalid entry {k!r} = {v!r}")
        cmap[ch] = v
    mics = sorted(cmap.values())
    if mics != list(range(n_mics)):
        raise ConfigError(
            f"channel_map must map onto microphones 0..{n_mics - 1} exactly once, got {mics}"
        )
    return cmap


def config_from_dict(doc: dict, base_dir: Path = Path(".")) -> Config:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level field(s): {', '.join(sorted(unknown))}")

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")

    a = _section(doc, "array", _ARRAY_KEYS)
    array = _build("array", MicArray, **a)

    t = _section(doc, "trigger", _TRIGGER_KEYS)
    t = dict(t)
    if "threshold_fs" in t:
        t["threshold"] = t.pop("threshold_fs")
    trigger = _build("trigger", TriggerConfig, **t)

    sc = dict(_section(doc, "scene", _SCENE_KEYS))
    if sc.get("clip_path") is not None:
        clip = Path(sc["clip_path"])
        if not clip.is_absolute():
            clip = base_dir / clip
        if not clip.is_file():
            raise ConfigError(f"scene.clip_path: file not found: {clip}")
        sc["clip_path"] = str(clip)
    if "gain_mismatch" in sc:
        sc["gain_mismatch"] = tuple(sc["gain_mismatch"])
    scene = _build("scene", SimScene, array=array, **sc)

    servo = _build("servo", ServoRange, **_section(doc, "servo", _SERVO_KEYS))
    evaluation = _build("evaluation", EvaluationConfig, **_section(doc, "evaluation", _EVAL_KEYS))
    if evaluation.trials < 1 or evaluation.workers < 1 or evaluation.trim_per_side < 0:
        raise ConfigError("evaluation: trials and workers must be >= 1, trim_per_side >= 0")
    if evaluation.trim_fraction is not None and not 0 <= evaluation.trim_fraction < 0.5:
        raise ConfigError("evaluation.trim_fraction must be in [0, 0.5)")

    out = _section(doc, "output", _OUTPUT_KEYS)
    return Config(
        seed=seed,
        array=array,
        trigger=trigger,
        scene=scene,
        servo=servo,
        evaluation=evaluation,
        channel_map=_channel_map(doc.get("channel_map"), array.size),
        output_dir=str(out.get("dir", "out")),
    )


def load_config(path: str | Path) -> Config:
    """Parse and validate a TOML config file, filling defaults.

    Raises
    ------
    ConfigError
        On TOML syntax errors (the message carries line and column) or on
        any invariant violation (the message names the offending field).
    """
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(doc, base_dir=path.parent)
