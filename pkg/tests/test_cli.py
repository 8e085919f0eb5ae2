import json
import subprocess
import sys

import numpy as np
import pytest

from intensity_doa.cli import main, parse_angles
from intensity_doa.wavio import AudioStreams, write_wav


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text("seed = 3\n[scene]\nsource_angle_deg = 200\nsnr_db = 20\n", encoding="utf-8")
    return p


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_writes_wav_and_sidecar(tmp_path, cfg, capsys):
    wav = tmp_path / "t.wav"
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--out", str(wav), "--seed", "9")
    assert code == 0
    side = json.loads(wav.with_suffix(".json").read_text())
    assert side["true_angle_deg"] == 200.0 and side["seed"] == 9
    assert side["config"]["seed"] == 9
    assert side["config"]["rng"]["algorithm"] == "numpy.random.PCG64"


def test_estimate_formats(tmp_path, cfg, capsys):
    wav = tmp_path / "t.wav"
    run(capsys, "simulate", "--config", str(cfg), "--out", str(wav))
    code, out, _ = run(capsys, "estimate", "--input", str(wav), "--config", str(cfg))
    assert code == 0 and out.startswith("angle_deg=")
    code, out, _ = run(capsys, "estimate", "--input", str(wav), "--config", str(cfg), "--csv")
    lines = out.splitlines()
    assert lines[0] == "angle_deg,magnitude,servo_pos" and len(lines) == 2
    code, out, _ = run(capsys, "estimate", "--input", str(wav), "--config", str(cfg), "--json")
    doc = json.loads(out)
    assert abs(doc["estimate"]["angle_deg"] - 200.0) < 20
    assert doc["config"]["scene"]["snr_db"] == 20
    assert doc["estimate"]["servo_pos"] == round(doc["estimate"]["angle_deg"] / 2)


def test_estimate_channel_map(tmp_path, capsys):
    rng = np.random.default_rng(0)
    s = rng.uniform(-0.4, 0.4, 2000)
    # WAV channel 0 is unused; mics 0,1,2 live on WAV channels 3,1,2
    wav = tmp_path / "m.wav"
    write_wav(AudioStreams(np.stack([0 * s, s, s, 2 * s]), 8000), wav)
    cfg = tmp_path / "map.toml"
    cfg.write_text("channel_map = { 3 = 0, 1 = 1, 2 = 2 }\n", encoding="utf-8")
    code, out, _ = run(capsys, "estimate", "--input", str(wav), "--config", str(cfg), "--json")
    assert code == 0
    assert abs(((json.loads(out)["estimate"]["angle_deg"] + 180) % 360) - 180) < 1e-3


def test_exit_codes(tmp_path, capsys):
    silent = tmp_path / "s.wav"
    write_wav(AudioStreams(np.zeros((3, 1000)), 8000), silent)
    code, out, _ = run(capsys, "estimate", "--input", str(silent))
    assert code == 3 and "no event" in out

    same = tmp_path / "same.wav"
    s = 0.2 * np.random.default_rng(1).standard_normal(1000)
    write_wav(AudioStreams(np.stack([s, s, s]), 8000), same)
    assert run(capsys, "estimate", "--input", str(same))[0] == 3

    two = tmp_path / "two.wav"
    write_wav(AudioStreams(np.zeros((2, 100)), 8000), two)
    assert run(capsys, "estimate", "--input", str(two))[0] == 2
    assert run(capsys, "estimate", "--input", str(tmp_path / "missing.wav"))[0] == 2

    bad = tmp_path / "bad.toml"
    bad.write_text("[array]\nradius_m = -1\n", encoding="utf-8")
    code, _, err = run(capsys, "estimate", "--input", str(silent), "--config", str(bad))
    assert code == 1 and "radius_m" in err

    with pytest.raises(SystemExit) as exc:
        main(["estimate"])
    assert exc.value.code == 1
    assert run(capsys, "sweep", "--angles", "a:b", "--out", str(tmp_path / "x"))[0] == 1


def test_evaluate_prints_stats_and_exports(tmp_path, cfg, capsys):
    out_dir = tmp_path / "ev"
    code, out, _ = run(capsys, "evaluate", "--config", str(cfg), "--angle", "120", "--trials", "30",
                       "--seed", "4", "--out", str(out_dir))
    assert code == 0
    stats = json.loads(out)
    assert stats["n_total"] == 30 and stats["n_trimmed"] == 26 and stats["n_failed"] == 0
    assert stats["target_angle_deg"] == 120.0
    assert stats["config"]["scene"]["source_angle_deg"] == 120.0 and stats["config"]["seed"] == 4
    assert (out_dir / "scatter.csv").read_text().count("\n") == 31
    summary = json.loads((out_dir / "scatter.json").read_text())
    assert summary["accuracy_deg"] == stats["accuracy_deg"]


def test_evaluate_all_failed_exits_3(tmp_path, capsys):
    quiet = tmp_path / "quiet.toml"
    quiet.write_text("[scene]\nsource_level = 1e-5\n", encoding="utf-8")
    assert run(capsys, "evaluate", "--config", str(quiet), "--trials", "3", "--out", str(tmp_path / "o"))[0] == 3


def test_sweep_outputs(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "--angles", "20,120", "--trials", "5", "--seed", "2", "--out", str(tmp_path / "sw"))
    assert code == 0
    lines = (tmp_path / "sw" / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("target_deg,") and len(lines) == 3
    meta = json.loads((tmp_path / "sw" / "sweep.json").read_text())
    assert meta["angles_deg"] == [20.0, 120.0]


def test_parse_angles():
    assert parse_angles("0:360:90") == [0.0, 90.0, 180.0, 270.0]
    assert parse_angles("0:1:0.25") == [0.0, 0.25, 0.5, 0.75]
    assert parse_angles("20, 120") == [20.0, 120.0]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "intensity_doa", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "estimate" in proc.stdout
