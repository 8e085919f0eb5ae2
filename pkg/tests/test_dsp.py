import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from intensity_doa.dsp import (
    SampleWindow,
    TriggerConfig,
    average_power,
    collect_windows,
    detect_event,
    remove_dc,
    running_baseline,
)

samples = arrays(np.float64, st.integers(1, 64), elements=st.floats(-1e3, 1e3))
# squares stay clear of the subnormal range
normal_samples = arrays(
    np.float64, st.integers(1, 64),
    elements=st.floats(-1e3, 1e3).filter(lambda v: v == 0 or abs(v) > 1e-100),
)


@pytest.mark.parametrize(
    "raw, expected",
    [([512, 512, 512], [0, 0, 0]), ([0, 2], [-1, 1]), ([510, 514, 512, 512], [-2, 2, 0, 0])],
)
def test_remove_dc_examples(raw, expected):
    np.testing.assert_allclose(remove_dc(SampleWindow(raw)).samples, expected, atol=1e-12)


@given(samples)
def test_remove_dc_zero_mean(x):
    assert abs(remove_dc(SampleWindow(x)).samples.mean()) <= 1e-12 * max(1.0, np.abs(x).max())


def test_average_power_examples():
    assert average_power(SampleWindow([1, -1, 1, -1]), "mean_abs") == 1.0
    assert average_power(SampleWindow([3, -4, 0, 0]), "rms") == 2.5
    assert average_power(SampleWindow([3, -4, 0, 0]), "mean_square") == 6.25
    assert average_power(SampleWindow(np.zeros(16))) == 0.0


def test_average_power_default_mode_is_mean_abs():
    w = SampleWindow([3, -4, 0, 1])
    assert average_power(w) == average_power(w, "mean_abs") == 2.0


def test_empty_window_rejected():
    with pytest.raises(ValueError):
        SampleWindow([])
    with pytest.raises(ValueError):
        average_power(SampleWindow([1.0]), "peak")


@given(normal_samples, st.floats(0.01, 100))
def test_power_scale_covariance(x, c):
    w, wc = SampleWindow(x), SampleWindow(c * x)
    for mode, power in [("mean_abs", 1), ("rms", 1), ("mean_square", 2)]:
        assert average_power(wc, mode) == pytest.approx(c**power * average_power(w, mode), rel=1e-9, abs=1e-300)


@given(samples, st.randoms())
def test_power_permutation_invariance(x, rnd):
    y = list(x)
    rnd.shuffle(y)
    for mode in ("mean_abs", "rms", "mean_square"):
        assert average_power(SampleWindow(y), mode) == pytest.approx(average_power(SampleWindow(x), mode), rel=1e-12, abs=1e-12)


@given(samples, st.floats(-1e4, 1e4))
def test_dc_removal_makes_power_bias_invariant(x, bias):
    base = average_power(remove_dc(SampleWindow(x)))
    shifted = average_power(remove_dc(SampleWindow(x + bias)))
    assert shifted == pytest.approx(base, rel=1e-6, abs=1e-6)


def test_trigger_config_validation():
    for bad in [dict(threshold=0), dict(threshold=-1), dict(window_len=0), dict(power_mode="peak")]:
        with pytest.raises(ValueError):
            TriggerConfig(**bad)
    assert TriggerConfig() == TriggerConfig(0.1, 256, "mean_abs")


def test_detect_event_silence():
    assert detect_event(np.zeros((3, 500)), TriggerConfig(threshold=0.1, window_len=16)) is None


def test_detect_event_step():
    x = np.zeros((3, 400))
    x[1, 40:] = 1.0
    assert detect_event(x, TriggerConfig(threshold=0.5, window_len=64)) == 40


def test_detect_event_insufficient_tail():
    length = 300
    x = np.zeros((3, length))
    x[2, length - 2] = 1.0
    cfg = TriggerConfig(threshold=0.5, window_len=64)
    # the spike qualifies, but only 2 samples remain after it
    assert length - 2 + cfg.window_len > length
    assert detect_event(x, cfg) is None
    x[2, 10] = 1.0
    assert detect_event(x, cfg) == 10


def test_detect_event_ignores_constant_bias():
    x = np.full((3, 200), 512.0)
    assert detect_event(x, TriggerConfig(threshold=0.5, window_len=8)) is None
    x[0, 120] = 515.0
    assert detect_event(x, TriggerConfig(threshold=0.5, window_len=8)) == 120


@given(
    st.floats(-2, 2),
    st.integers(1, 50),
    st.floats(0.51, 5) | st.floats(-5, -0.51),
    arrays(np.float64, st.integers(0, 50), elements=st.floats(-5, 5)),
    st.integers(0, 30),
)
def test_detect_event_prepend_shift(level, quiet, onset, tail, k):
    """Prepending samples at the resting level shifts the trigger by exactly that many."""
    cfg = TriggerConfig(threshold=0.5, window_len=1)
    x = np.concatenate([np.full(quiet, level), [level + onset], level + tail])[None, :]
    y = np.concatenate([np.full(k, level), x[0]])[None, :]
    assert detect_event(x, cfg) == quiet
    assert detect_event(y, cfg) == quiet + k


@given(arrays(np.float64, (2, 40), elements=st.floats(-3, 3)))
def test_detect_event_is_first_qualifying_index(x):
    cfg = TriggerConfig(threshold=0.5, window_len=1)
    t = detect_event(x, cfg)
    dev = np.abs(x - running_baseline(x))
    qualifying = np.flatnonzero((dev > cfg.threshold).any(axis=0))
    assert t == (int(qualifying[0]) if qualifying.size else None)


def test_running_baseline_is_causal_mean():
    x = np.array([[2.0, 4.0, 6.0, 0.0]])
    np.testing.assert_allclose(running_baseline(x), [[2.0, 2.0, 3.0, 4.0]])


def test_collect_windows_examples():
    ramp = np.tile(np.arange(20.0), (3, 1))
    full = collect_windows(ramp, 0, 20)
    assert [w.channel_id for w in full] == [0, 1, 2]
    np.testing.assert_array_equal(full[0].samples, ramp[0])
    ws = collect_windows(ramp, 10, 4)
    for w in ws:
        np.testing.assert_array_equal(w.samples, [10, 11, 12, 13])
        assert w.start_index == 10
    with pytest.raises(IndexError):
        collect_windows(ramp, 18, 4)
