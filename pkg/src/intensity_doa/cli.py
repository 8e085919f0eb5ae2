"""Command-line interface.

Exit codes: 0 success, 1 usage or config error, 2 I/O error,
3 no event / indeterminate direction / nothing to score.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import Config, ConfigError, load_config
from .estimator import process_event
from .evaluation import (
    InsufficientDataError,
    compute_stats,
    export_scatter,
    run_trials,
    sweep_row,
    write_sweep_csv,
)
from .geometry import IndeterminateDirectionError
from .simulator import synthesize_trial
from .wavio import AudioStreams, ClippingWarning, WavError, read_wav, write_wav

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NO_EVENT = 3

log = logging.getLogger("intensity_doa")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _load(path: Optional[str]) -> Config:
    return load_config(path) if path else Config()


def _with_overrides(cfg: Config, seed=None, angle=None, trials=None) -> Config:
    if seed is not None:
        if seed < 0:
            raise UsageError("--seed must be >= 0")
        cfg = dataclasses.replace(cfg, seed=seed)
    if angle is not None:
        cfg = dataclasses.replace(cfg, scene=dataclasses.replace(cfg.scene, source_angle_deg=angle))
    if trials is not None:
        if trials < 1:
            raise UsageError("--trials must be >= 1")
        cfg = dataclasses.replace(cfg, evaluation=dataclasses.replace(cfg.evaluation, trials=trials))
    return cfg


def parse_angles(spec: str) -> list[float]:
    """``"0:360:1"`` (stop exclusive) or a comma list such as ``"20,120"``."""
    try:
        if ":" in spec:
            parts = [float(p) for p in spec.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            count = int(np.ceil((stop - start) / step - 1e-9))
            return [start + i * step for i in range(max(count, 0))]
        return [float(p) for p in spec.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse angle list {spec!r}; use START:STOP:STEP or A,B,C") from None


def cmd_estimate(args) -> int:
    cfg = _load(args.config)
    order = cfg.mic_channel_order()
    audio = read_wav(args.input, min_channels=max(cfg.channel_map) + 1)
    streams = audio.samples[order]
    try:
        est = process_event(streams, cfg.array, cfg.trigger, cfg.servo)
    except IndeterminateDirectionError as exc:
        print(f"indeterminate direction: {exc}", file=sys.stderr)
        return EXIT_NO_EVENT

    if args.json:
        print(_dump({
            "input": str(args.input),
            "estimate": None if est is None else est.as_dict(),
            "config": cfg.to_dict(),
        }))
    elif args.csv:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["angle_deg", "magnitude", "servo_pos"])
        if est is not None:
            w.writerow([repr(est.angle_deg), repr(est.magnitude), est.servo_pos])
    elif est is not None:
        print(f"angle_deg={est.angle_deg:.6f} magnitude={est.magnitude:.6g} servo_pos={est.servo_pos}")
    if est is None:
        if not args.json:
            print("no event")
        return EXIT_NO_EVENT
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _with_overrides(_load(args.config), seed=args.seed, angle=args.angle)
    trial = synthesize_trial(cfg.scene, cfg.seed)
    out = Path(args.out)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClippingWarning)
        clipped = write_wav(AudioStreams(trial.streams, trial.sample_rate_hz), out)
    if clipped:
        log.warning("%d sample(s) clipped while writing %s", clipped, out)
    sidecar = out.with_suffix(".json")
    sidecar.write_text(_dump({
        "wav": out.name,
        "true_angle_deg": trial.true_angle_deg,
        "seed": trial.seed,
        "sample_rate_hz": trial.sample_rate_hz,
        "n_samples": int(trial.streams.shape[1]),
        "clipped_samples": clipped,
        "config": cfg.to_dict(),
    }) + "\n", encoding="utf-8")
    print(f"wrote {out} and {sidecar}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _with_overrides(_load(args.config), seed=args.seed, angle=args.angle, trials=args.trials)
    ev = cfg.evaluation
    workers = args.workers or ev.workers
    batch = run_trials(cfg.scene, ev.trials, cfg.seed, cfg.trigger, cfg.servo, workers=workers)
    if batch.n_failed:
        log.warning("%d of %d trial(s) failed and are excluded from statistics", batch.n_failed, ev.trials)
    stats = compute_stats(batch, ev.trim_for(len(batch.estimates)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export_scatter(batch, out / "scatter.csv", stats, cfg.to_dict())
    print(_dump({**stats.as_dict(), "config": cfg.to_dict()}))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _with_overrides(_load(args.config), seed=args.seed, trials=args.trials)
    angles = parse_angles(args.angles)
    if not angles:
        raise UsageError("empty angle list")
    ev = cfg.evaluation
    workers = args.workers or ev.workers
    rows = []
    for a in angles:
        scene = dataclasses.replace(cfg.scene, source_angle_deg=a)
        batch = run_trials(scene, ev.trials, cfg.seed, cfg.trigger, cfg.servo, workers=workers)
        rows.append(sweep_row(batch, ev.trim_for(len(batch.estimates))))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out / "sweep.csv")
    (out / "sweep.json").write_text(_dump({
        "angles_deg": angles,
        "n_failed": sum(r.n_failed for r in rows),
        "config": cfg.to_dict(),
    }) + "\n", encoding="utf-8")
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} bearings)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="intensity-doa", description="Sound bearing from three-microphone signal power.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="estimate the bearing of the first event in a WAV recording")
    e.add_argument("--input", required=True)
    e.add_argument("--config")
    fmt = e.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", help="synthesize one trial to a multichannel WAV")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--angle", type=float, help="override scene.source_angle_deg")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("evaluate", help="Monte Carlo accuracy/precision at one bearing")
    v.add_argument("--config")
    v.add_argument("--angle", type=float)
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--workers", type=int)
    v.add_argument("--out", required=True)
    v.set_defaults(func=cmd_evaluate)

    w = sub.add_parser("sweep", help="per-bearing error curve over many source bearings")
    w.add_argument("--config")
    w.add_argument("--angles", required=True, help="START:STOP:STEP or comma list")
    w.add_argument("--trials", type=int)
    w.add_argument("--seed", type=int)
    w.add_argument("--workers", type=int)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, WavError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (IndeterminateDirectionError, InsufficientDataError) as exc:
        print(f"no result: {exc}", file=sys.stderr)
        return EXIT_NO_EVENT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
