"""Cents conversion, pitch histograms and moving-average smoothing."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, replace
from typing import IO, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EmptyHistogramError, InputError

C0_HZ = 16.3516


@dataclass(frozen=True)
class CentsConfig:
    ref_hz: float = C0_HZ

    def __post_init__(self):
        if not self.ref_hz > 0:
            raise InputError("ref_hz must be positive")


@dataclass(frozen=True)
class HistogramConfig:
    """Binning and smoothing used per sentence.

    ``fit_on`` selects which histogram the tilted-Gaussian fit consumes;
    mountain detection always runs on the smoothed one.
    """

    bin_width_cents: float = 5.0
    smooth_window: int = 7
    fit_on: str = "raw"  # or "smoothed"

    def __post_init__(self):
        if not self.bin_width_cents > 0:
            raise InputError("bin_width_cents must be positive")
        if self.smooth_window < 1 or self.smooth_window % 2 == 0:
            raise InputError("smooth_window must be a positive odd integer")
        if self.fit_on not in ("raw", "smoothed"):
            raise InputError(f"fit_on must be 'raw' or 'smoothed', not {self.fit_on!r}")


def hz_to_cents(f0_hz, cfg: CentsConfig = CentsConfig()):
    """``1200 * log2(f0_hz / cfg.ref_hz)``; accepts scalars or arrays."""
    f = np.asarray(f0_hz, dtype=np.float64)
    if np.any(~(f > 0)):
        raise InputError("frequencies must be positive to convert to cents")
    cents = 1200.0 * np.log2(f / cfg.ref_hz)
    return float(cents) if cents.ndim == 0 else cents


def cents_to_hz(cents, cfg: CentsConfig = CentsConfig()):
    hz = cfg.ref_hz * np.exp2(np.asarray(cents, dtype=np.float64) / 1200.0)
    return float(hz) if hz.ndim == 0 else hz


@dataclass(frozen=True)
class Histogram:
    """Counts over equal bins ``[origin + k*width, origin + (k+1)*width)``.

    Counts are floats so that a smoothed histogram has the same type.
    """

    bin_width_cents: float
    origin_cents: float
    counts: np.ndarray
    total_frames: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.float64)
        if counts.ndim != 1 or counts.size < 1:
            raise InputError("a histogram needs at least one bin")
        if np.any(counts < 0) or not np.all(np.isfinite(counts)):
            raise InputError("histogram counts must be finite and non-negative")
        if not self.bin_width_cents > 0:
            raise InputError("bin_width_cents must be positive")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return self.counts.size

    @property
    def edges(self) -> np.ndarray:
        return self.origin_cents + self.bin_width_cents * np.arange(self.counts.size + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.origin_cents + self.bin_width_cents * (np.arange(self.counts.size) + 0.5)

    def center(self, k: int) -> float:
        return self.origin_cents + self.bin_width_cents * (k + 0.5)

    def to_csv(self, target: Union[str, os.PathLike, IO[str]]) -> None:
        """Write ``bin_center_cents,count`` rows."""
        if isinstance(target, (str, os.PathLike)):
            with open(target, "w", newline="", encoding="utf-8") as fh:
                self.to_csv(fh)
            return
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["bin_center_cents", "count"])
        for c, n in zip(self.centers, self.counts):
            writer.writerow([repr(float(c)), repr(float(n))])


def build_histogram(
    cents_values: Sequence[float],
    bin_width_cents: float = 5.0,
    range: Optional[Tuple[float, float]] = None,
) -> Histogram:
    """Bin cents values; bin 0 starts at a multiple of the bin width.

    Without ``range`` the bins cover the data. With ``range=(lo, hi)``
    they cover ``[lo, hi]`` and values outside are discarded (and not
    counted in ``total_frames``).
    """
    if not bin_width_cents > 0:
        raise InputError("bin_width_cents must be positive")
    values = np.asarray(cents_values, dtype=np.float64).ravel()
    if values.size and not np.all(np.isfinite(values)):
        raise InputError("cents values must be finite")
    if range is None:
        if not values.size:
            raise EmptyHistogramError("no values to histogram")
        lo, hi = float(values.min()), float(values.max())
    else:
        lo, hi = map(float, range)
        if not lo <= hi:
            raise InputError("histogram range must satisfy lo <= hi")
        values = values[(values >= lo) & (values <= hi)]

    origin = math.floor(lo / bin_width_cents) * bin_width_cents
    n_bins = int(math.floor((hi - origin) / bin_width_cents)) + 1
    idx = np.floor((values - origin) / bin_width_cents).astype(np.int64)
    idx = np.clip(idx, 0, n_bins - 1)  # guards float round-off at the top edge
    counts = np.bincount(idx, minlength=n_bins).astype(np.float64)
    return Histogram(bin_width_cents, origin, counts, int(values.size))


def smooth_moving_average(h: Histogram, window_bins: int = 7) -> Histogram:
    """Centred moving average; near the edges the window shrinks to the
    bins that exist."""
    if window_bins < 1 or window_bins % 2 == 0:
        raise InputError(f"window_bins must be a positive odd integer, got {window_bins}")
    if window_bins == 1:
        return h
    n = h.counts.size
    half = window_bins // 2
    padded = np.concatenate([np.zeros(half), h.counts, np.zeros(half)])
    sums = np.lib.stride_tricks.sliding_window_view(padded, window_bins).sum(axis=1)
    i = np.arange(n)
    support = np.minimum(i + half + 1, n) - np.maximum(i - half, 0)
    return replace(h, counts=sums / support)
