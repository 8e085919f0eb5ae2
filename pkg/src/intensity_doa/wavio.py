"""Multichannel WAV reading (PCM16 / float32) and PCM16 writing."""
from __future__ import annotations

import struct
import warnings
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

PCM16_FULL_SCALE = 32768.0


class WavError(Exception):
    """Base class for WAV input problems."""


class WavHeaderError(WavError):
    """The RIFF/WAVE structure is malformed or truncated."""


class UnsupportedWavFormatError(WavError):
    """Valid WAV, but a codec or sample width this reader does not handle."""


class ChannelShortfallError(WavError):
    """The file has fewer channels than the microphone array needs."""


class ClippingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AudioStreams:
    """Per-channel samples in ``[-1, 1]``, shape ``(channels, samples)``."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("audio samples must be a (channels, samples) array")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample rate must be > 0, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", arr)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]


def _chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size and cid != b"data":
            raise WavHeaderError(f"chunk {cid!r} truncated ({len(body)} of {size} bytes)")
        yield cid, body
        pos += 8 + size + (size & 1)


def read_wav(path: str | Path, min_channels: int = 1) -> AudioStreams:
    """Read a 16-bit PCM or 32-bit float WAV file.

    Integer samples are divided by 32768, so -32768 maps to exactly -1.0.

    Raises
    ------
    WavHeaderError
        Not a RIFF/WAVE file, or missing/truncated ``fmt `` or ``data`` chunk.
    UnsupportedWavFormatError
        Any codec other than PCM16 or IEEE float32.
    ChannelShortfallError
        Fewer than ``min_channels`` channels.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavHeaderError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    for cid, body in _chunks(data):
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            payload = body
            break
    if fmt is None or len(fmt) < 16:
        raise WavHeaderError(f"{path}: missing or short 'fmt ' chunk")
    if payload is None:
        raise WavHeaderError(f"{path}: missing 'data' chunk")

    tag, channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", fmt)
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 40:
            raise WavHeaderError(f"{path}: truncated WAVE_FORMAT_EXTENSIBLE header")
        tag = struct.unpack_from("<H", fmt, 24)[0]
    if channels < 1 or rate < 1:
        raise WavHeaderError(f"{path}: invalid channel count {channels} or rate {rate}")

    if tag == WAVE_FORMAT_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), PCM16_FULL_SCALE
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedWavFormatError(
            f"{path}: format tag {tag:#06x} with {bits}-bit samples is not supported "
            "(need 16-bit PCM or 32-bit float)"
        )
    if block_align != channels * dtype.itemsize:
        raise WavHeaderError(f"{path}: block align {block_align} inconsistent with {channels}x{bits}-bit")
    if channels < min_channels:
        raise ChannelShortfallError(f"{path}: {channels} channel(s), need at least {min_channels}")

    frames = len(payload) // block_align
    raw = np.frombuffer(payload[:frames * block_align], dtype=dtype)
    samples = raw.reshape(frames, channels).T.astype(np.float64) / scale
    return AudioStreams(samples, int(rate))


def write_wav(streams: AudioStreams, path: str | Path) -> int:
    """Write 16-bit PCM; returns the number of samples that were clipped.

    Values outside ``[-1, 1]`` saturate to full scale and raise a
    :class:`ClippingWarning` carrying the count.
    """
    x = streams.samples
    clipped = int(np.count_nonzero(np.abs(x) > 1.0))
    if clipped:
        warnings.warn(f"{clipped} sample(s) clipped to full scale", ClippingWarning, stacklevel=2)
    pcm = np.clip(np.rint(x * PCM16_FULL_SCALE), -32768, 32767).astype("<i2")
    with open(path, "wb") as raw, wave.open(raw, "wb") as fh:
        fh.setnchannels(streams.n_channels)
        fh.setsampwidth(2)
        fh.setframerate(int(streams.sample_rate_hz))
        fh.writeframes(pcm.T.tobytes())
    return clipped
