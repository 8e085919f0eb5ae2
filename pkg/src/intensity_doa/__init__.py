"""Sound-source bearing estimation from the average signal power of a small
microphone array, with a seeded scene simulator and Monte Carlo evaluation."""
from .dsp import SampleWindow, TriggerConfig, average_power, collect_windows, detect_event, remove_dc
from .estimator import DirectionEstimate, ServoRange, estimate_direction, process_event, servo_command
from .evaluation import TrialBatch, TrialStats, compute_stats, export_scatter, precision_pct, run_trials, trim_sorted
from .geometry import (
    IndeterminateDirectionError,
    MicArray,
    PolarVector,
    RectVector,
    angular_error,
    normalize_angle,
    polar_to_rect,
    rect_to_polar,
    sum_vectors,
)
from .simulator import SimScene, attenuation, mic_positions, synthesize_trial

__version__ = "0.1.0"
