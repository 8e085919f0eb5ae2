"""Monte Carlo trial batches and trimmed accuracy / precision statistics.

Statistics are always computed on wrapped signed errors against the target
bearing, never on raw angles, so batches straddling 0/360 behave.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .dsp import TriggerConfig
from .estimator import DirectionEstimate, ServoRange, process_event
from .geometry import IndeterminateDirectionError, angular_error
from .simulator import MAX_SEED, SimScene, synthesize_trial

SCATTER_HEADER = ("trial", "seed", "angle_deg", "magnitude", "x", "y")
SWEEP_HEADER = (
    "target_deg", "n_total", "n_failed", "mean_error_deg",
    "accuracy_deg", "precision_deg", "mean_angle_deg",
)

FAIL_NO_EVENT = "no_event"
FAIL_INDETERMINATE = "indeterminate"


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    estimate: Optional[DirectionEstimate]
    failure: Optional[str] = None


@dataclass(frozen=True)
class TrialBatch:
    target_angle_deg: float
    scene: SimScene
    trigger: TriggerConfig
    records: tuple[TrialRecord, ...]

    def __post_init__(self) -> None:
        if not self.records:
            raise ValueError("a trial batch needs at least one trial")

    @property
    def seeds(self) -> list[int]:
        return [r.seed for r in self.records]

    @property
    def estimates(self) -> list[DirectionEstimate]:
        return [r.estimate for r in self.records if r.estimate is not None]

    @property
    def n_failed(self) -> int:
        return sum(r.estimate is None for r in self.records)

    def errors(self) -> list[float]:
        """Signed wrapped errors of the successful trials."""
        return [angular_error(e.angle_deg, self.target_angle_deg) for e in self.estimates]


@dataclass(frozen=True)
class TrialStats:
    n_total: int
    n_trimmed: int
    n_failed: int
    accuracy_deg: float
    precision_deg: float
    precision_pct: float
    target_angle_deg: float

    def as_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_trimmed": self.n_trimmed,
            "n_failed": self.n_failed,
            "accuracy_deg": self.accuracy_deg,
            "precision_deg": self.precision_deg,
            "precision_pct": self.precision_pct,
            "target_angle_deg": self.target_angle_deg,
        }


def _run_one(scene: SimScene, trigger: TriggerConfig, servo: ServoRange, trial: int, seed: int) -> TrialRecord:
    sim = synthesize_trial(scene, seed)
    try:
        est = process_event(sim.streams, scene.array, trigger, servo)
    except IndeterminateDirectionError:
        return TrialRecord(trial, seed, None, FAIL_INDETERMINATE)
    if est is None:
        return TrialRecord(trial, seed, None, FAIL_NO_EVENT)
    return TrialRecord(trial, seed, est)


def run_trials(
    scene: SimScene,
    n: int,
    base_seed: int,
    trigger: TriggerConfig = TriggerConfig(),
    servo: ServoRange = ServoRange(),
    workers: int = 1,
) -> TrialBatch:
    """Run ``n`` independent trials with seeds ``base_seed .. base_seed+n-1``.

    Trials that never trigger or whose direction is indeterminate are kept
    as failure records. With ``workers > 1`` trials run in separate
    processes; records are ordered by seed either way.
    """
    if n < 1:
        raise ValueError(f"need at least one trial, got n={n}")
    if base_seed < 0 or base_seed + n - 1 > MAX_SEED:
        raise ValueError(f"seeds {base_seed}..{base_seed + n - 1} do not fit in 64 bits")
    seeds = [base_seed + i for i in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, scene, trigger, servo, i, s) for i, s in enumerate(seeds)]
            records = [f.result() for f in futures]
    else:
        records = [_run_one(scene, trigger, servo, i, s) for i, s in enumerate(seeds)]
    records.sort(key=lambda r: r.seed)
    return TrialBatch(scene.source_angle_deg, scene, trigger, tuple(records))


def trim_count_from_fraction(n: int, fraction: float) -> int:
    """Per-side trim count for a per-side ``fraction`` of ``n`` values, rounded half up.

    ``trim_count_from_fraction(30, 0.06) == 2`` (1.8 rounds to 2).
    """
    if not 0 <= fraction < 0.5:
        raise ValueError(f"trim fraction must be in [0, 0.5), got {fraction!r}")
    return int(math.floor(n * fraction + 0.5))


def trim_sorted(values: Iterable[float], trim_count_per_side: int, target_deg: Optional[float] = None) -> list[float]:
    """Sort and drop ``trim_count_per_side`` values from each end.

    With ``target_deg`` the values are angles, ordered by their wrapped
    error to the target rather than by raw value.
    """
    values = list(values)
    if trim_count_per_side < 0:
        raise ValueError("trim count must be >= 0")
    if 2 * trim_count_per_side >= len(values):
        raise InsufficientDataError(
            f"cannot trim {trim_count_per_side} per side from {len(values)} values"
        )
    if target_deg is None:
        ordered = sorted(values)
    else:
        ordered = sorted(values, key=lambda a: angular_error(a, target_deg))
    k = trim_count_per_side
    return ordered[k:len(ordered) - k]


def precision_pct(precision_deg: float) -> float:
    """Precision as a percentage of a full turn: ``(1 - p/360) * 100``."""
    return (1.0 - precision_deg / 360.0) * 100.0


def mean_absolute_error(errors: Sequence[float]) -> float:
    if len(errors) == 0:
        raise InsufficientDataError("no errors to average")
    return math.fsum(abs(e) for e in errors) / len(errors)


def sample_std(errors: Sequence[float]) -> float:
    if len(errors) < 2:
        raise InsufficientDataError("sample standard deviation needs at least 2 values")
    return float(np.std(np.asarray(errors, dtype=np.float64), ddof=1))


def stats_from_errors(errors: Sequence[float], trim: int, n_failed: int = 0, target_angle_deg: float = 0.0) -> TrialStats:
    """Trimmed accuracy (mean |error|) and precision (sample std of signed error)."""
    kept = trim_sorted(errors, trim)
    if len(kept) < 3:
        raise InsufficientDataError(f"need at least 3 values after trimming, have {len(kept)}")
    # sorted order makes the result independent of trial order
    acc = mean_absolute_error(kept)
    prec = sample_std(kept)
    return TrialStats(
        n_total=len(errors) + n_failed,
        n_trimmed=len(kept),
        n_failed=n_failed,
        accuracy_deg=acc,
        precision_deg=prec,
        precision_pct=precision_pct(prec),
        target_angle_deg=target_angle_deg,
    )


def compute_stats(batch: TrialBatch, trim: int = 2) -> TrialStats:
    """Trimmed statistics of a batch; failed trials are counted, not scored."""
    return stats_from_errors(batch.errors(), trim, batch.n_failed, batch.target_angle_deg)


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else repr(float(v))


def export_scatter(batch: TrialBatch, path: str | Path, stats: Optional[TrialStats] = None, config: Optional[dict] = None) -> Path:
    """Write one CSV row per trial and a JSON stats summary next to it.

    Failed trials keep their row with empty estimate fields. The summary
    goes to ``path`` with a ``.json`` suffix. Returns the summary path.
    """
    path = Path(path)
    if not batch.estimates:
        raise InsufficientDataError("batch has no successful trials to export")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCATTER_HEADER)
        for r in batch.records:
            e = r.estimate
            if e is None:
                w.writerow([r.trial, r.seed, "", "", "", ""])
            else:
                w.writerow([r.trial, r.seed, _fmt(e.angle_deg), _fmt(e.magnitude), _fmt(e.x), _fmt(e.y)])

    summary = (stats.as_dict() if stats is not None else {
        "n_total": len(batch.records), "n_failed": batch.n_failed,
        "target_angle_deg": batch.target_angle_deg,
    })
    summary["config"] = config if config is not None else {}
    json_path = path.with_suffix(".json")
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return json_path


@dataclass(frozen=True)
class SweepRow:
    target_deg: float
    n_total: int
    n_failed: int
    mean_error_deg: Optional[float]
    accuracy_deg: Optional[float]
    precision_deg: Optional[float]
    mean_angle_deg: Optional[float]


def sweep_row(batch: TrialBatch, trim: int = 0) -> SweepRow:
    """Bias (mean signed error), accuracy and precision for one bearing.

    Unlike :func:`compute_stats` this tolerates tiny batches: fields that
    cannot be computed are ``None``.
    """
    errors = batch.errors()
    n = len(batch.records)
    if not errors:
        return SweepRow(batch.target_angle_deg, n, batch.n_failed, None, None, None, None)
    kept = trim_sorted(errors, trim) if 2 * trim < len(errors) else sorted(errors)
    mean_err = math.fsum(kept) / len(kept)
    return SweepRow(
        target_deg=batch.target_angle_deg,
        n_total=n,
        n_failed=batch.n_failed,
        mean_error_deg=mean_err,
        accuracy_deg=mean_absolute_error(kept),
        precision_deg=sample_std(kept) if len(kept) >= 2 else None,
        mean_angle_deg=(batch.target_angle_deg + mean_err) % 360.0,
    )


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow([
                _fmt(r.target_deg), r.n_total, r.n_failed, _fmt(r.mean_error_deg),
                _fmt(r.accuracy_deg), _fmt(r.precision_deg), _fmt(r.mean_angle_deg),
            ])
