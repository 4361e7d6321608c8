"""Clustering of per-sentence peaks and per-cluster drift lines."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateRegressionError, EmptyReportError, InputError
from .peaks import PeakFit
from .segmentation import Sentence


@dataclass(frozen=True)
class PeakPoint:
    sentence_index: int
    cents: float
    source: Optional[PeakFit] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ClusterConfig:
    """DBSCAN settings.

    Distances are Euclidean in scaled units: one unit is ``index_scale``
    sentences along x and ``cents_scale`` cents along y. With
    ``metric="cents"`` the sentence axis is ignored.
    """

    eps: float = 1.5
    min_samples: int = 2
    cents_scale: float = 25.0
    index_scale: float = 1.0
    min_significant_size: int = 3
    metric: str = "2d"  # or "cents"

    def __post_init__(self):
        if not self.eps > 0:
            raise InputError("eps must be positive")
        if self.min_samples < 1:
            raise InputError("min_samples must be at least 1")
        if not (self.cents_scale > 0 and self.index_scale > 0):
            raise InputError("axis scales must be positive")
        if self.metric not in ("2d", "cents"):
            raise InputError(f"unknown metric {self.metric!r}")


@dataclass(frozen=True)
class Cluster:
    id: int
    points: Tuple[PeakPoint, ...]
    significant: bool

    @property
    def size(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class DriftLine:
    slope: float
    intercept: float
    r2: float
    slope_cents_per_minute: Optional[float] = None


@dataclass(frozen=True)
class DriftReport:
    n_sentences: int
    points: Tuple[PeakPoint, ...]
    clusters: Tuple[Tuple[Cluster, Optional[DriftLine]], ...]
    noise: Tuple[PeakPoint, ...]
    config: ClusterConfig

    @property
    def significant(self) -> List[Tuple[Cluster, Optional[DriftLine]]]:
        return [(c, line) for c, line in self.clusters if c.significant]

    @property
    def slopes(self) -> List[float]:
        """Slopes of significant clusters that admit a line."""
        return [line.slope for c, line in self.significant if line is not None]

    @property
    def mean_slope(self) -> Optional[float]:
        s = self.slopes
        return float(np.mean(s)) if s else None

    def summary(self) -> dict:
        return {
            "n_significant_clusters": len(self.significant),
            "slopes": self.slopes,
            "mean_slope": self.mean_slope,
        }


# --------------------------------------------------------------------------
# DBSCAN
# --------------------------------------------------------------------------

def scaled_coordinates(points: Sequence[PeakPoint], cfg: ClusterConfig) -> np.ndarray:
    xy = np.array([[p.sentence_index, p.cents] for p in points], dtype=np.float64).reshape(-1, 2)
    xy[:, 0] /= cfg.index_scale
    xy[:, 1] /= cfg.cents_scale
    if cfg.metric == "cents":
        xy[:, 0] = 0.0
    return xy


def dbscan_labels(coords: np.ndarray, eps: float, min_samples: int) -> np.ndarray:
    """Label each row of ``coords``; -1 is noise.

    Points are scanned in index order. A core point has at least
    ``min_samples`` points (itself included) within distance ``eps``.
    Clusters are numbered in the order their first core point is met, and a
    border point reachable from several clusters joins the first one whose
    expansion reaches it.
    """
    n = coords.shape[0]
    labels = np.full(n, -1, dtype=int)
    if n == 0:
        return labels
    diff = coords[:, None, :] - coords[None, :, :]
    near = np.sqrt((diff ** 2).sum(axis=-1)) <= eps
    neighbours = [np.flatnonzero(row) for row in near]
    core = np.array([nb.size >= min_samples for nb in neighbours])

    next_id = 0
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        labels[i] = next_id
        queue = deque([i])
        while queue:
            j = queue.popleft()
            for k in neighbours[j]:
                if labels[k] == -1:
                    labels[k] = next_id
                    if core[k]:
                        queue.append(k)
        next_id += 1
    return labels


def dbscan(points: Sequence[PeakPoint], cfg: ClusterConfig = ClusterConfig()):
    """Cluster peak points; returns ``(clusters, noise)``."""
    points = list(points)
    for p in points:
        if not math.isfinite(p.cents):
            raise InputError("peak points must be finite")
    labels = dbscan_labels(scaled_coordinates(points, cfg), cfg.eps, cfg.min_samples)
    clusters = []
    for cid in range(labels.max() + 1 if labels.size else 0):
        members = tuple(p for p, lab in zip(points, labels) if lab == cid)
        clusters.append(Cluster(cid, members, len(members) >= cfg.min_significant_size))
    noise = [p for p, lab in zip(points, labels) if lab == -1]
    return clusters, noise


# --------------------------------------------------------------------------
# regression
# --------------------------------------------------------------------------

def ols(x, y) -> Tuple[float, float, float]:
    """Closed-form least-squares line; returns (slope, intercept, r2)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateRegressionError("regression needs at least two distinct x values")
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    sxy = float(((x - xm) * (y - ym)).sum())
    slope = sxy / sxx
    intercept = ym - slope * xm
    ss_res = float(((y - intercept - slope * x) ** 2).sum())
    ss_tot = float(((y - ym) ** 2).sum())
    if ss_tot == 0:
        r2 = 1.0
    else:
        r2 = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return float(slope), float(intercept), r2


def fit_drift_line(cluster: Cluster, minutes_per_sentence: Optional[float] = None) -> DriftLine:
    """Regress cents on sentence index for one cluster.

    With ``minutes_per_sentence`` the slope is also expressed in cents per
    minute.
    """
    x = [p.sentence_index for p in cluster.points]
    y = [p.cents for p in cluster.points]
    slope, intercept, r2 = ols(x, y)
    per_minute = None
    if minutes_per_sentence:
        per_minute = slope / minutes_per_sentence
    return DriftLine(slope, intercept, r2, per_minute)


def minutes_per_sentence(sentences: Sequence[Sentence]) -> Optional[float]:
    """Mean spacing of sentence mid-times per unit of sentence index."""
    if len(sentences) < 2:
        return None
    first, last = sentences[0], sentences[-1]
    if last.index == first.index:
        return None
    return (last.mid_sec - first.mid_sec) / (last.index - first.index) / 60.0


def analyze_drift(
    peaks_by_sentence: Sequence[Tuple[Sentence, Sequence[PeakFit]]],
    cfg: ClusterConfig = ClusterConfig(),
) -> DriftReport:
    """Cluster every sentence's peaks and fit a line per cluster.

    Clusters whose points all sit in one sentence get no line. Clusters
    below ``cfg.min_significant_size`` stay in the report but are left out
    of the summary.
    """
    points = [
        PeakPoint(sentence.index, fit.peak_cents, fit)
        for sentence, fits in peaks_by_sentence
        for fit in sorted(fits, key=lambda f: f.peak_cents)
        if fit.has_peak
    ]
    if not points:
        raise EmptyReportError("no peaks in any sentence")
    clusters, noise = dbscan(points, cfg)
    spacing = minutes_per_sentence([s for s, _ in peaks_by_sentence])
    fitted = []
    for c in clusters:
        try:
            line = fit_drift_line(c, spacing)
        except DegenerateRegressionError:
            line = None
        fitted.append((c, line))
    return DriftReport(len(peaks_by_sentence), tuple(points), tuple(fitted), tuple(noise), cfg)
