"""Fundamental-frequency tracks: loading, saving and estimation from audio.

Two routes produce a :class:`PitchTrack`:

* :func:`load_pitch_csv` ingests ``time,f0[,confidence]`` rows such as the
  output of the pYIN Vamp plugin run through Sonic Annotator.
* :func:`estimate_pitch` runs a deterministic YIN estimator over a mono
  :class:`AudioBuffer` obtained with :func:`load_wav`.
"""

from __future__ import annotations

import csv
import io
import math
import os
import struct
from dataclasses import dataclass
from typing import IO, Iterator, Optional, Sequence, Union

import numpy as np

from .errors import (
    EmptyTrackError,
    InputError,
    InsufficientInputError,
    PitchCsvError,
    UnsupportedFormatError,
    WavFormatError,
)

F0_MIN_HZ = 60.0
F0_MAX_HZ = 1500.0

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio with samples scaled to [-1, 1]."""

    sample_rate_hz: int
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InputError("audio samples must be one-dimensional")
        if int(self.sample_rate_hz) < 8000:
            raise InputError(f"sample rate {self.sample_rate_hz} Hz is below 8000 Hz")
        if not np.all(np.isfinite(samples)):
            raise InputError("audio contains non-finite samples")
        if samples.size and np.max(np.abs(samples)) > 1.0:
            raise InputError("audio samples must lie within [-1, 1]")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    @property
    def duration_sec(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class PitchFrame:
    """One analysis frame; ``f0_hz`` is ``None`` when unvoiced."""

    time_sec: float
    f0_hz: Optional[float]
    confidence: float = 1.0

    @property
    def voiced(self) -> bool:
        return self.f0_hz is not None


@dataclass(frozen=True)
class PitchTrack:
    """Time-stamped f0 frames stored column-wise.

    ``f0_hz`` holds NaN for unvoiced frames. Timestamps must be strictly
    increasing. Use :attr:`frames` for a per-frame view.
    """

    times: np.ndarray
    f0_hz: np.ndarray
    confidence: np.ndarray
    hop_sec: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        f0 = np.asarray(self.f0_hz, dtype=np.float64)
        conf = np.asarray(self.confidence, dtype=np.float64)
        if not (times.shape == f0.shape == conf.shape) or times.ndim != 1:
            raise InputError("times, f0_hz and confidence must be 1-D arrays of equal length")
        if not np.all(np.isfinite(times)):
            raise InputError("frame times must be finite")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise InputError("frame times must be strictly increasing")
        if not self.hop_sec > 0:
            raise InputError("hop_sec must be positive")
        # unvoiced frames carry no pitch; keep their marker uniform
        f0 = np.where(np.isfinite(f0) & (f0 > 0), f0, np.nan)
        for arr in (times, f0, conf):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "f0_hz", f0)
        object.__setattr__(self, "confidence", conf)
        object.__setattr__(self, "hop_sec", float(self.hop_sec))

    @classmethod
    def from_frames(cls, frames: Sequence[PitchFrame], hop_sec: float) -> "PitchTrack":
        times = [fr.time_sec for fr in frames]
        f0 = [np.nan if fr.f0_hz is None else fr.f0_hz for fr in frames]
        conf = [fr.confidence for fr in frames]
        return cls(np.array(times, float), np.array(f0, float), np.array(conf, float), hop_sec)

    def __len__(self) -> int:
        return self.times.size

    @property
    def voiced(self) -> np.ndarray:
        """Boolean mask of voiced frames."""
        return np.isfinite(self.f0_hz)

    @property
    def frames(self) -> list[PitchFrame]:
        return list(self.iter_frames())

    def iter_frames(self) -> Iterator[PitchFrame]:
        for t, f, c in zip(self.times, self.f0_hz, self.confidence):
            yield PitchFrame(float(t), None if math.isnan(f) else float(f), float(c))

    @property
    def duration_sec(self) -> float:
        """Span from the first frame to the end of the last one."""
        if not len(self):
            return 0.0
        return float(self.times[-1] - self.times[0] + self.hop_sec)


@dataclass(frozen=True)
class YinConfig:
    """Frame geometry and voicing threshold of the YIN estimator.

    The defaults follow the pYIN setup used for the drift analysis: a
    2048-sample block, a 256-sample step and a 0.1 threshold.
    """

    frame_size: int = 2048
    hop_size: int = 256
    threshold: float = 0.1
    f0_min_hz: float = F0_MIN_HZ
    f0_max_hz: float = F0_MAX_HZ

    def validate(self, sample_rate_hz: int) -> None:
        if not 0 < self.hop_size <= self.frame_size:
            raise InputError("need 0 < hop_size <= frame_size")
        if not 0 < self.threshold < 1:
            raise InputError("threshold must lie in (0, 1)")
        if not 0 < self.f0_min_hz < self.f0_max_hz:
            raise InputError("need 0 < f0_min_hz < f0_max_hz")
        if self.frame_size < 2 * sample_rate_hz / self.f0_min_hz:
            raise InputError(
                f"frame_size {self.frame_size} cannot hold two periods of {self.f0_min_hz} Hz "
                f"at {sample_rate_hz} Hz"
            )
        if self.f0_max_hz >= sample_rate_hz / 2:
            raise InputError("f0_max_hz must be below the Nyquist frequency")


# --------------------------------------------------------------------------
# WAV
# --------------------------------------------------------------------------

def _read_source(source) -> bytes:
    if isinstance(source, (bytes, bytearray, memoryview)):
        return bytes(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read()
    return source.read()


def load_wav(source: Union[str, os.PathLike, IO[bytes], bytes]) -> AudioBuffer:
    """Decode a PCM or IEEE-float WAV file into a mono :class:`AudioBuffer`.

    Integer samples are divided by ``2**(bits-1)`` (8-bit data is unsigned
    and re-centred first). Multi-channel audio is averaged to mono.
    """
    data = _read_source(source)
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError("not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = pos + 8
        if body + size > len(data):
            raise WavFormatError(
                f"chunk {chunk_id!r} declares {size} bytes but only {len(data) - body} remain"
            )
        if chunk_id == b"fmt ":
            if size < 16:
                raise WavFormatError("fmt chunk too short")
            fmt = _parse_fmt(data[body:body + size])
        elif chunk_id == b"data":
            payload = data[body:body + size]
        pos = body + size + (size & 1)

    if fmt is None:
        raise WavFormatError("missing fmt chunk")
    if payload is None:
        raise WavFormatError("missing data chunk")

    code, channels, rate, block_align, bits = fmt
    if channels < 1 or bits == 0:
        raise WavFormatError("invalid channel count or bit depth")
    width = bits // 8
    if bits % 8 or block_align != channels * width:
        raise WavFormatError(f"inconsistent block alignment for {bits}-bit, {channels}-channel data")
    if len(payload) % block_align:
        raise WavFormatError("data chunk is not a whole number of sample frames")

    if code == _WAVE_FORMAT_PCM:
        samples = _decode_pcm(payload, width)
    elif code == _WAVE_FORMAT_IEEE_FLOAT and bits in (32, 64):
        samples = np.frombuffer(payload, dtype="<f4" if bits == 32 else "<f8").astype(np.float64)
        samples = np.clip(samples, -1.0, 1.0)
    else:
        raise UnsupportedFormatError(f"unsupported WAV codec 0x{code:04x} with {bits} bits")

    samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioBuffer(rate, samples)


def _parse_fmt(chunk: bytes):
    code, channels, rate, _byte_rate, block_align, bits = struct.unpack_from("<HHIIHH", chunk, 0)
    if code == _WAVE_FORMAT_EXTENSIBLE:
        if len(chunk) < 40:
            raise WavFormatError("truncated WAVE_FORMAT_EXTENSIBLE header")
        (code,) = struct.unpack_from("<H", chunk, 24)
    return code, channels, rate, block_align, bits


def _decode_pcm(payload: bytes, width: int) -> np.ndarray:
    if width == 1:
        return (np.frombuffer(payload, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    if width == 2:
        return np.frombuffer(payload, dtype="<i2") / 32768.0
    if width == 3:
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        return ints / float(1 << 23)
    if width == 4:
        return np.frombuffer(payload, dtype="<i4") / float(1 << 31)
    raise UnsupportedFormatError(f"unsupported PCM sample width {8 * width} bits")


def write_wav(target: Union[str, os.PathLike, IO[bytes]], audio: AudioBuffer) -> None:
    """Write ``audio`` as 16-bit mono PCM."""
    ints = np.clip(np.round(audio.samples * 32768.0), -32768, 32767).astype("<i2")
    body = ints.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(body)) + b"WAVE"
    fmt = b"fmt " + struct.pack("<IHHIIHH", 16, _WAVE_FORMAT_PCM, 1, audio.sample_rate_hz,
                                audio.sample_rate_hz * 2, 2, 16)
    blob = header + fmt + b"data" + struct.pack("<I", len(body)) + body
    if isinstance(target, (str, os.PathLike)):
        with open(target, "wb") as fh:
            fh.write(blob)
    else:
        target.write(blob)


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_pitch_csv(
    source: Union[str, os.PathLike, IO[str]],
    hop_hint_sec: Optional[float] = None,
    f0_min_hz: float = F0_MIN_HZ,
    f0_max_hz: float = F0_MAX_HZ,
) -> PitchTrack:
    """Read ``time_sec,f0_hz[,confidence]`` rows into a :class:`PitchTrack`.

    Sonic Annotator leaves unvoiced stretches out of the file, so any gap
    wider than 1.5 hops is refilled with unvoiced frames at the nominal hop.
    The hop is ``hop_hint_sec`` when given, otherwise the median spacing of
    the rows. Non-positive or out-of-band f0 values become unvoiced.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_pitch_csv(fh, hop_hint_sec, f0_min_hz, f0_max_hz)

    times, f0s, confs = [], [], []
    for lineno, row in enumerate(csv.reader(source), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(not c for c in cells):
            continue
        if lineno == 1 and (cells[0].startswith("#") or not any(_is_number(c) for c in cells)):
            continue
        if cells[0].startswith("#"):
            continue
        if len(cells) < 2:
            raise PitchCsvError("expected at least time_sec,f0_hz", lineno)
        try:
            t = float(cells[0])
            f = float(cells[1])
            c = float(cells[2]) if len(cells) > 2 and cells[2] else 1.0
        except ValueError as exc:
            raise PitchCsvError(f"non-numeric field ({exc})", lineno) from None
        if not math.isfinite(t):
            raise PitchCsvError("time is not finite", lineno)
        if times and t <= times[-1]:
            raise PitchCsvError(f"timestamp {t} does not increase (previous {times[-1]})", lineno)
        times.append(t)
        f0s.append(f if (math.isfinite(f) and f0_min_hz <= f <= f0_max_hz) else math.nan)
        confs.append(min(max(c, 0.0), 1.0))

    if not times:
        raise EmptyTrackError("pitch CSV contains no rows")

    t = np.array(times)
    if hop_hint_sec is not None:
        if not hop_hint_sec > 0:
            raise InputError("hop_hint_sec must be positive")
        hop = float(hop_hint_sec)
    elif t.size > 1:
        hop = float(np.median(np.diff(t)))
    else:
        hop = 256 / 44100.0
    return _materialize_gaps(t, np.array(f0s), np.array(confs), hop)


def _materialize_gaps(t, f0, conf, hop) -> PitchTrack:
    gaps = np.diff(t)
    wide = np.flatnonzero(gaps > 1.5 * hop)
    if not wide.size:
        return PitchTrack(t, f0, conf, hop)
    pieces_t, pieces_f, pieces_c = [], [], []
    start = 0
    for i in wide:
        pieces_t.append(t[start:i + 1])
        pieces_f.append(f0[start:i + 1])
        pieces_c.append(conf[start:i + 1])
        n_fill = int(math.ceil((t[i + 1] - hop / 2 - t[i]) / hop)) - 1
        fill = t[i] + hop * np.arange(1, n_fill + 1)
        fill = fill[fill < t[i + 1] - hop / 2]
        pieces_t.append(fill)
        pieces_f.append(np.full(fill.size, np.nan))
        pieces_c.append(np.zeros(fill.size))
        start = i + 1
    pieces_t.append(t[start:])
    pieces_f.append(f0[start:])
    pieces_c.append(conf[start:])
    return PitchTrack(np.concatenate(pieces_t), np.concatenate(pieces_f),
                      np.concatenate(pieces_c), hop)


def write_pitch_csv(target: Union[str, os.PathLike, IO[str]], track: PitchTrack) -> None:
    """Write the voiced frames of ``track`` in the Sonic Annotator layout.

    Floats use their shortest round-trip representation, so
    :func:`load_pitch_csv` reads back identical values.
    """
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            write_pitch_csv(fh, track)
        return
    writer = csv.writer(target, lineterminator="\n")
    for t, f, c in zip(track.times, track.f0_hz, track.confidence):
        if math.isfinite(f):
            writer.writerow([repr(float(t)), repr(float(f)), repr(float(c))])


def pitch_csv_text(track: PitchTrack) -> str:
    buf = io.StringIO()
    write_pitch_csv(buf, track)
    return buf.getvalue()


# --------------------------------------------------------------------------
# YIN
# --------------------------------------------------------------------------

def frame_count(n_samples: int, frame_size: int, hop_size: int) -> int:
    if n_samples < frame_size:
        return 0
    return (n_samples - frame_size) // hop_size + 1


def _cmnd(frames: np.ndarray, window: int, max_lag: int):
    """Difference function and its cumulative-mean-normalised form.

    ``frames`` has shape (n, window + max_lag). Returns two arrays of shape
    (n, max_lag + 1) indexed by lag.
    """
    n_fft = 1 << int(math.ceil(math.log2(frames.shape[1])))
    spec_full = np.fft.rfft(frames, n_fft, axis=1)
    spec_head = np.fft.rfft(frames[:, :window], n_fft, axis=1)
    corr = np.fft.irfft(np.conj(spec_head) * spec_full, n_fft, axis=1)[:, :max_lag + 1]

    sq = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(frames ** 2, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    energy_head = sq[:, window][:, None]
    energy_lag = sq[:, lags + window] - sq[:, lags]
    diff = np.maximum(energy_head + energy_lag - 2.0 * corr, 0.0)
    diff[:, 0] = 0.0

    running = np.cumsum(diff[:, 1:], axis=1)
    cmnd = np.ones_like(diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = diff[:, 1:] * lags[1:] / running
    cmnd[:, 1:] = np.where(running > 0, ratio, 1.0)
    return diff, cmnd


def estimate_pitch(audio: AudioBuffer, cfg: YinConfig = YinConfig(), chunk: int = 512) -> PitchTrack:
    """Track f0 with YIN: difference function, cumulative-mean normalisation,
    absolute threshold and parabolic refinement of the chosen lag.

    One frame is produced per hop; its timestamp is the centre of the
    analysis block. Confidence is ``1 - cmnd`` at the chosen lag.
    """
    sr = audio.sample_rate_hz
    cfg.validate(sr)
    x = audio.samples
    n_frames = frame_count(x.size, cfg.frame_size, cfg.hop_size)
    if n_frames == 0:
        raise InsufficientInputError(
            f"audio has {x.size} samples, fewer than one {cfg.frame_size}-sample frame"
        )

    window = cfg.frame_size // 2
    max_lag = cfg.frame_size - window
    lag_lo = max(2, int(math.floor(sr / cfg.f0_max_hz)))
    lag_hi = min(max_lag - 1, int(math.ceil(sr / cfg.f0_min_hz)))

    f0 = np.full(n_frames, np.nan)
    conf = np.zeros(n_frames)
    framed = np.lib.stride_tricks.sliding_window_view(x, cfg.frame_size)[::cfg.hop_size]

    for start in range(0, n_frames, chunk):
        block = np.ascontiguousarray(framed[start:start + chunk])
        diff, cmnd = _cmnd(block, window, max_lag)
        band = cmnd[:, lag_lo:lag_hi + 1]
        below = band < cfg.threshold
        has_dip = below.any(axis=1)
        first = np.argmax(below, axis=1) + lag_lo

        # walk downhill from the first sub-threshold lag to the local minimum
        rising = np.zeros_like(cmnd, dtype=bool)
        rising[:, :-1] = cmnd[:, 1:] >= cmnd[:, :-1]
        rising[:, lag_hi:] = True
        after = rising & (np.arange(cmnd.shape[1])[None, :] >= first[:, None])
        lag = np.argmax(after, axis=1)

        rows = np.flatnonzero(has_dip)
        if not rows.size:
            continue
        lag = lag[rows]
        d_prev = diff[rows, lag - 1]
        d_mid = diff[rows, lag]
        d_next = diff[rows, lag + 1]
        denom = d_prev - 2.0 * d_mid + d_next
        with np.errstate(divide="ignore", invalid="ignore"):
            shift = np.where(denom > 0, 0.5 * (d_prev - d_next) / denom, 0.0)
        shift = np.clip(shift, -1.0, 1.0)
        freq = sr / (lag + shift)
        ok = (freq >= cfg.f0_min_hz) & (freq <= cfg.f0_max_hz)
        f0[start + rows[ok]] = freq[ok]
        conf[start + rows[ok]] = np.clip(1.0 - cmnd[rows, lag][ok], 0.0, 1.0)

    times = (np.arange(n_frames) * cfg.hop_size + cfg.frame_size / 2) / sr
    return PitchTrack(times, f0, conf, cfg.hop_size / sr)
