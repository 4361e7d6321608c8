"""Histogram mountains and their tilted-Gaussian peak fits.

Each mountain of a sentence's pitch histogram is modelled as

    y = c1 + c2*x + c3*exp(-(x - c4)**2 / c5)

with x in cents, and the maximum of the fitted curve is taken as the
performed pitch of that note.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import InputError
from .histogram import (
    CentsConfig,
    Histogram,
    HistogramConfig,
    build_histogram,
    hz_to_cents,
    smooth_moving_average,
)
from .segmentation import MIN_VOICED_FRAMES, Sentence

log = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_FALLBACK = "fallback"
STATUS_TOO_NARROW = "too_narrow"


@dataclass(frozen=True)
class Mountain:
    """Inclusive bin range ``[lo_bin, hi_bin]`` around one apex."""

    lo_bin: int
    hi_bin: int
    apex_bin: int
    apex_height: float

    def __post_init__(self):
        if not self.lo_bin <= self.apex_bin <= self.hi_bin:
            raise InputError(f"apex {self.apex_bin} outside [{self.lo_bin}, {self.hi_bin}]")

    @property
    def n_bins(self) -> int:
        return self.hi_bin - self.lo_bin + 1


@dataclass(frozen=True)
class PeakConfig:
    min_height_fraction: float = 0.1
    min_height_frames: float = 5.0
    valley_fraction: float = 0.1
    ripple_fraction: float = 0.1
    max_iter: int = 200
    tol: float = 1e-8
    min_bins: int = 6

    def __post_init__(self):
        if not 0 < self.min_height_fraction <= 1:
            raise InputError("min_height_fraction must lie in (0, 1]")
        if not 0 < self.valley_fraction < 1:
            raise InputError("valley_fraction must lie in (0, 1)")
        if not 0 <= self.ripple_fraction < 1:
            raise InputError("ripple_fraction must lie in [0, 1)")
        if self.min_height_frames < 0 or self.max_iter < 1 or not self.tol > 0:
            raise InputError("min_height_frames, max_iter and tol must be positive")
        if self.min_bins < 6:
            raise InputError("a five-parameter fit needs at least 6 bins")


@dataclass(frozen=True)
class PeakFit:
    """Fitted coefficients for one mountain plus the derived peak.

    ``status`` is ``"ok"`` for an accepted fit, ``"fallback"`` when the
    solver result was rejected, and ``"too_narrow"`` when the mountain had
    too few bins to fit. In the last two cases ``peak_cents`` is the apex
    bin centre. Coefficients are NaN when no fit was attempted.
    """

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    peak_cents: float
    rmse: float
    n_bins: int
    converged: bool
    lo_cents: float
    hi_cents: float
    apex_cents: float
    status: str = STATUS_OK
    iterations: int = 0

    @property
    def accepted(self) -> bool:
        """The solver result passed every check."""
        return self.status == STATUS_OK

    @property
    def has_peak(self) -> bool:
        """A peak usable for clustering: accepted, or a solver fallback on a
        mountain wide enough to fit."""
        return self.status != STATUS_TOO_NARROW

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3, self.c4, self.c5])

    def __call__(self, x):
        return tilted_gaussian(x, self.c1, self.c2, self.c3, self.c4, self.c5)


def tilted_gaussian(x, c1, c2, c3, c4, c5):
    x = np.asarray(x, dtype=np.float64)
    return c1 + c2 * x + c3 * np.exp(-((x - c4) ** 2) / c5)


# --------------------------------------------------------------------------
# mountains
# --------------------------------------------------------------------------

def _local_maxima(y: np.ndarray) -> List[int]:
    """Apex bins: strict local maxima, plateaus reduced to their middle bin.

    A plateau touching both ends of the histogram is not a maximum.
    """
    n = y.size
    out = []
    a = 0
    while a < n:
        b = a
        while b + 1 < n and y[b + 1] == y[a]:
            b += 1
        left_lower = a == 0 or y[a - 1] < y[a]
        right_lower = b == n - 1 or y[b + 1] < y[a]
        if y[a] > 0 and left_lower and right_lower and (a > 0 or b < n - 1):
            out.append((a + b) // 2)
        a = b + 1
    return out


def _prominence(y: np.ndarray, k: int) -> float:
    """Height of apex ``k`` above the higher of its two bases, where a base
    is the lowest bin before the next strictly higher bin (or the edge)."""
    bases = []
    for step in (-1, 1):
        low = y[k]
        i = k + step
        while 0 <= i < y.size and y[i] <= y[k]:
            low = min(low, y[i])
            i += step
        bases.append(low)
    return float(y[k] - max(bases))


def _extend(y: np.ndarray, k: int, step: int, stop: float, ripple: float) -> int:
    """Walk from apex ``k`` in direction ``step`` and return the boundary bin.

    The walk ends at the first bin below ``stop`` (kept), or at the lowest
    bin seen so far once the count climbs more than ``ripple`` above it.
    """
    edge = low = k
    i = k + step
    while 0 <= i < y.size:
        if y[i] > y[low] + ripple:
            return low
        if y[i] <= y[low]:
            low = i
        edge = i
        if y[i] < stop:
            return i
        i += step
    return edge


def find_mountains(smoothed: Histogram, cfg: PeakConfig = PeakConfig()) -> List[Mountain]:
    """Locate mountains in a (smoothed) histogram.

    Apexes are local maxima at least ``max(min_height_frames,
    min_height_fraction * global_max)`` high whose prominence is at least
    ``ripple_fraction`` of their height. Each apex owns the bins around it
    until the count climbs again (by more than the ripple allowance) or
    drops below ``valley_fraction`` of the apex; the first bin under that
    level still belongs to the mountain. Overlapping neighbours are cut at
    the lowest bin between their apexes, which goes to the left mountain.
    """
    y = smoothed.counts
    if not y.size or y.max() <= 0:
        return []
    floor = max(cfg.min_height_frames, cfg.min_height_fraction * float(y.max()))
    apexes = [
        k for k in _local_maxima(y)
        if y[k] >= floor and _prominence(y, k) >= cfg.ripple_fraction * y[k]
    ]

    ranges = []
    for k in apexes:
        stop = cfg.valley_fraction * y[k]
        ripple = cfg.ripple_fraction * y[k]
        ranges.append([_extend(y, k, -1, stop, ripple), _extend(y, k, 1, stop, ripple), k])

    for left, right in zip(ranges, ranges[1:]):
        if left[1] >= right[0]:
            valley = left[2] + int(np.argmin(y[left[2]:right[2] + 1]))
            left[1] = valley
            right[0] = valley + 1

    return [Mountain(lo, hi, k, float(y[k])) for lo, hi, k in ranges]


# --------------------------------------------------------------------------
# tilted Gaussian fit
# --------------------------------------------------------------------------

def _half_width(y: np.ndarray, apex: int, spacing: float) -> float:
    """Half width at half maximum, linearly interpolated; averages the
    sides that actually cross half height."""
    half = y[apex] / 2.0
    widths = []
    i = apex
    while i > 0 and y[i - 1] > half:
        i -= 1
    if i > 0:
        frac = (y[i] - half) / (y[i] - y[i - 1])
        widths.append((apex - i + frac) * spacing)
    j = apex
    while j < y.size - 1 and y[j + 1] > half:
        j += 1
    if j < y.size - 1:
        frac = (y[j] - half) / (y[j] - y[j + 1])
        widths.append((j - apex + frac) * spacing)
    if not widths:
        return 0.5 * y.size * spacing
    return float(np.mean(widths))


def _model_and_jacobian(u, p):
    b1, c2, c3, c4, c5 = p
    d = u - c4
    g = np.exp(-(d * d) / c5)
    f = b1 + c2 * u + c3 * g
    jac = np.empty((u.size, 5))
    jac[:, 0] = 1.0
    jac[:, 1] = u
    jac[:, 2] = g
    jac[:, 3] = c3 * g * 2.0 * d / c5
    jac[:, 4] = c3 * g * (d * d) / (c5 * c5)
    return f, jac


def _levenberg_marquardt(u, y, p0, scales, max_iter, tol):
    """Damped Gauss-Newton on the tilted Gaussian in centred coordinates.

    Marquardt's diagonal scaling keeps the iteration invariant to rescaling
    the counts. Steps that would make the width parameter non-positive are
    halved until they do not. Returns (params, cost, converged, iterations).
    """
    p = np.array(p0, dtype=np.float64)
    f, jac = _model_and_jacobian(u, p)
    r = y - f
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        a = jac.T @ jac
        grad = jac.T @ r
        diag = np.diag(a).copy()
        diag = np.maximum(diag, 1e-12 * max(diag.max(), 1e-300))
        accepted = False
        while lam <= 1e16:
            try:
                step = np.linalg.solve(a + lam * np.diag(diag), grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            for _ in range(60):
                if p[4] + step[4] > 0:
                    break
                step *= 0.5
            rel = float(np.max(np.abs(step) / (np.abs(p) + scales)))
            trial = p + step
            f_new, jac_new = _model_and_jacobian(u, trial)
            r_new = y - f_new
            cost_new = float(r_new @ r_new)
            if cost_new <= cost and np.isfinite(cost_new):
                p, f, jac, r, cost = trial, f_new, jac_new, r_new, cost_new
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                break
            if rel < tol and lam <= 1.0:
                # lightly damped step is already negligible: at the minimum
                return p, cost, True, it
            lam *= 10.0
        if not accepted:
            break
        if rel < tol:
            converged = True
            break
    return p, cost, converged, it


def _argmax_on(c, lo_x, hi_x, spacing):
    """Maximum of the fitted curve on [lo_x, hi_x]: a grid at one tenth of
    the bin spacing, then bisection on the derivative around the best grid
    point."""
    c1, c2, c3, c4, c5 = c
    n_grid = int(round((hi_x - lo_x) / spacing * 10)) + 1
    grid = np.linspace(lo_x, hi_x, max(n_grid, 2))
    vals = tilted_gaussian(grid, *c)
    k = int(np.argmax(vals))

    def slope(x):
        return c2 - c3 * math.exp(-((x - c4) ** 2) / c5) * 2.0 * (x - c4) / c5

    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, grid.size - 1)]
    best = grid[k]
    if slope(a) > 0 > slope(b):
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if slope(mid) > 0:
                a = mid
            else:
                b = mid
        cand = 0.5 * (a + b)
        if tilted_gaussian(cand, *c) >= vals[k]:
            best = cand
    return float(best)


def _unfitted(raw: Histogram, m: Mountain, status: str) -> PeakFit:
    nan = math.nan
    apex = raw.center(m.apex_bin)
    return PeakFit(nan, nan, nan, nan, nan, apex, nan, m.n_bins, False,
                   raw.center(m.lo_bin), raw.center(m.hi_bin), apex, status, 0)


def fit_tilted_gaussian(
    raw: Histogram,
    m: Mountain,
    cfg: PeakConfig = PeakConfig(),
    smoothed: Optional[Histogram] = None,
) -> PeakFit:
    """Least-squares fit of the tilted Gaussian to the bins of one mountain.

    ``smoothed`` (defaults to ``raw``) only feeds the width used to start
    the solver. The fit is rejected, falling back to the apex bin centre,
    when the solver does not converge, when ``c3`` or ``c5`` is not
    positive, when ``c4`` lands outside the mountain, or when it does no
    better than a constant.
    """
    if m.n_bins < cfg.min_bins:
        log.debug("mountain at bin %d too narrow (%d bins)", m.apex_bin, m.n_bins)
        return _unfitted(raw, m, STATUS_TOO_NARROW)

    width = raw.bin_width_cents
    sl = slice(m.lo_bin, m.hi_bin + 1)
    x = raw.centers[sl]
    y = raw.counts[sl]
    shape = (smoothed if smoothed is not None else raw).counts[sl]
    apex = m.apex_bin - m.lo_bin
    x_ref = float(x[apex])
    u = x - x_ref

    base = min(y[0], y[-1])
    tilt = (y[-1] - y[0]) / (x[-1] - x[0])
    amp = y[apex] - base
    if amp <= 0:
        amp = max(float(y.max() - base), 1e-12)
    hwhm = _half_width(shape, apex, width)
    c5_0 = max(hwhm * hwhm / math.log(2.0), (2.0 * width) ** 2)
    p0 = [base, tilt, amp, 0.0, c5_0]

    span = x[-1] - x[0]
    ymax = max(float(np.max(np.abs(y))), 1e-300)
    scales = np.array([ymax, ymax / span, ymax, span, span * span]) * 1e-3
    p, cost, converged, iters = _levenberg_marquardt(u, y, p0, scales, cfg.max_iter, cfg.tol)

    b1, c2, c3, c4u, c5 = (float(v) for v in p)
    coeffs = (b1 - c2 * x_ref, c2, c3, c4u + x_ref, c5)
    rmse = math.sqrt(cost / y.size)
    const_rmse = float(np.std(y))
    lo_edge, hi_edge = x[0] - width / 2, x[-1] + width / 2

    ok = (
        converged
        and c3 > 0
        and c5 > 0
        and lo_edge <= coeffs[3] <= hi_edge
        and rmse <= const_rmse * (1 + 1e-9) + 1e-12
    )
    if ok:
        peak = x_ref + _argmax_on((b1, c2, c3, c4u, c5), u[0], u[-1], width)
        status = STATUS_OK
    else:
        peak = float(x_ref)
        status = STATUS_FALLBACK
    return PeakFit(*coeffs, peak_cents=float(peak), rmse=rmse, n_bins=int(y.size),
                   converged=bool(converged), lo_cents=float(x[0]), hi_cents=float(x[-1]),
                   apex_cents=float(x_ref), status=status, iterations=iters)


# --------------------------------------------------------------------------
# per-sentence composition
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SentenceAnalysis:
    """Every intermediate of one sentence's peak extraction."""

    index: int
    raw: Optional[Histogram]
    smoothed: Optional[Histogram]
    mountains: List[Mountain] = field(default_factory=list)
    fits: List[PeakFit] = field(default_factory=list)

    @property
    def peaks(self) -> List[PeakFit]:
        return sorted((f for f in self.fits if f.has_peak), key=lambda f: f.peak_cents)


def analyze_cents(
    cents: np.ndarray,
    hist_cfg: HistogramConfig = HistogramConfig(),
    peak_cfg: PeakConfig = PeakConfig(),
    index: int = 0,
) -> SentenceAnalysis:
    """Histogram, smooth, find mountains and fit them for a bag of cents."""
    cents = np.asarray(cents, dtype=np.float64)
    if not cents.size:
        log.warning("sentence %d: nothing to histogram", index)
        return SentenceAnalysis(index, None, None)
    # margin so that mountains at the extremes keep both tails
    pad = hist_cfg.bin_width_cents * (hist_cfg.smooth_window + 1)
    raw = build_histogram(cents, hist_cfg.bin_width_cents,
                          range=(float(cents.min()) - pad, float(cents.max()) + pad))
    smoothed = smooth_moving_average(raw, hist_cfg.smooth_window)
    target = raw if hist_cfg.fit_on == "raw" else smoothed
    mountains = find_mountains(smoothed, peak_cfg)
    fits = [fit_tilted_gaussian(target, m, peak_cfg, smoothed) for m in mountains]
    return SentenceAnalysis(index, raw, smoothed, mountains, fits)


def analyze_sentence(
    sentence: Sentence,
    cents_cfg: CentsConfig = CentsConfig(),
    hist_cfg: HistogramConfig = HistogramConfig(),
    peak_cfg: PeakConfig = PeakConfig(),
) -> SentenceAnalysis:
    if sentence.n_voiced < MIN_VOICED_FRAMES:
        log.warning("sentence %d: only %d voiced frames", sentence.index, sentence.n_voiced)
        return SentenceAnalysis(sentence.index, None, None)
    cents = hz_to_cents(sentence.f0_hz, cents_cfg)
    return analyze_cents(cents, hist_cfg, peak_cfg, sentence.index)


def sentence_peaks(
    sentence: Sentence,
    cents_cfg: CentsConfig = CentsConfig(),
    hist_cfg: HistogramConfig = HistogramConfig(),
    peak_cfg: PeakConfig = PeakConfig(),
) -> List[PeakFit]:
    """Peaks of one sentence, lowest pitch first.

    Too-narrow mountains are left out; rejected fits contribute their apex
    bin centre.
    """
    return analyze_sentence(sentence, cents_cfg, hist_cfg, peak_cfg).peaks
