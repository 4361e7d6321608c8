"""Splitting a pitch track into sentences (musical phrases)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import InputError
from .pitch_io import PitchFrame, PitchTrack

MIN_VOICED_FRAMES = 10


@dataclass(frozen=True, eq=False)
class Sentence:
    """A phrase ``index`` spanning ``[start_sec, end_sec]`` with its voiced frames."""

    index: int
    start_sec: float
    end_sec: float
    times: np.ndarray
    f0_hz: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        if not self.start_sec < self.end_sec:
            raise InputError(f"sentence {self.index}: start {self.start_sec} >= end {self.end_sec}")
        if np.any(~np.isfinite(self.f0_hz)):
            raise InputError(f"sentence {self.index} holds unvoiced frames")

    @property
    def n_voiced(self) -> int:
        return int(self.times.size)

    @property
    def mid_sec(self) -> float:
        return 0.5 * (self.start_sec + self.end_sec)

    @property
    def frames(self) -> list[PitchFrame]:
        return [PitchFrame(float(t), float(f), float(c))
                for t, f, c in zip(self.times, self.f0_hz, self.confidence)]


@dataclass(frozen=True)
class SegmentationConfig:
    min_silence_sec: float = 0.5
    min_sentence_sec: float = 1.0
    mode: str = "silence"  # or "fixed"
    fixed_len_sec: float = 20.0

    def __post_init__(self):
        if self.mode not in ("silence", "fixed"):
            raise InputError(f"unknown segmentation mode {self.mode!r}")
        for name in ("min_silence_sec", "min_sentence_sec", "fixed_len_sec"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")


def _voiced_columns(track: PitchTrack):
    mask = track.voiced
    return track.times[mask], track.f0_hz[mask], track.confidence[mask]


def silence_gaps(track: PitchTrack) -> np.ndarray:
    """Unvoiced duration between each pair of consecutive voiced frames.

    Adjacent voiced frames are one hop apart and have a gap of zero.
    """
    times, _, _ = _voiced_columns(track)
    return np.maximum(np.diff(times) - track.hop_sec, 0.0)


def candidate_runs(track: PitchTrack, min_silence_sec: float) -> List[tuple[int, int]]:
    """Half-open index ranges into the voiced frames, split at long silences."""
    gaps = silence_gaps(track)
    n = gaps.size + 1 if track.voiced.any() else 0
    if n == 0:
        return []
    cuts = np.flatnonzero(gaps >= min_silence_sec) + 1
    bounds = np.concatenate([[0], cuts, [n]])
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def segment_by_silence(track: PitchTrack, cfg: SegmentationConfig = SegmentationConfig()) -> List[Sentence]:
    """Sentences are maximal voiced runs whose internal silences are all
    shorter than ``cfg.min_silence_sec``.

    Runs lasting less than ``min_sentence_sec`` (first to last voiced frame)
    or holding fewer than ten voiced frames are dropped, and the survivors
    are numbered from zero.
    """
    if not len(track):
        raise InputError("cannot segment an empty track")
    times, f0, conf = _voiced_columns(track)
    out: List[Sentence] = []
    for a, b in candidate_runs(track, cfg.min_silence_sec):
        if b - a < MIN_VOICED_FRAMES:
            continue
        start, end = float(times[a]), float(times[b - 1])
        if end - start < cfg.min_sentence_sec:
            continue
        out.append(Sentence(len(out), start, end, times[a:b], f0[a:b], conf[a:b]))
    return out


def segment_fixed(track: PitchTrack, cfg: SegmentationConfig = SegmentationConfig(mode="fixed")) -> List[Sentence]:
    """Cut the track into consecutive windows ``[k*L, (k+1)*L)``.

    The final window is clipped to the end of the track. Windows with fewer
    than ten voiced frames are dropped; the rest keep their relative order.
    """
    if not len(track):
        return []
    length = cfg.fixed_len_sec
    times, f0, conf = _voiced_columns(track)
    track_end = float(track.times[-1] + track.hop_sec)
    n_windows = max(1, int(math.ceil(track_end / length - 1e-9)))
    # index of the window each voiced frame falls into
    slot = np.floor(times / length).astype(int)
    out: List[Sentence] = []
    for k in range(n_windows):
        sel = slot == k
        if np.count_nonzero(sel) < MIN_VOICED_FRAMES:
            continue
        start = k * length
        end = min((k + 1) * length, track_end)
        out.append(Sentence(len(out), start, end, times[sel], f0[sel], conf[sel]))
    return out


def segment(track: PitchTrack, cfg: SegmentationConfig = SegmentationConfig()) -> List[Sentence]:
    """Dispatch on ``cfg.mode``."""
    if cfg.mode == "fixed":
        return segment_fixed(track, cfg)
    return segment_by_silence(track, cfg)
