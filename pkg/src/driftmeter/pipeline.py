"""End-to-end orchestration and report files."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import numpy as np

from . import plots
from .drift import ClusterConfig, DriftReport, PeakPoint, analyze_drift
from .errors import DriftmeterError, InputError
from .histogram import CentsConfig, HistogramConfig, hz_to_cents
from .peaks import PeakConfig, PeakFit, SentenceAnalysis, analyze_cents, analyze_sentence
from .pitch_io import PitchTrack, YinConfig, estimate_pitch, load_pitch_csv, load_wav
from .segmentation import SegmentationConfig, Sentence, segment

log = logging.getLogger(__name__)

PLOT_KINDS = ("track", "histogram", "fit", "scatter", "clusters")

_ERROR_CODES = {
    "EmptyTrackError": "empty-track",
    "PitchCsvError": "parse-error",
    "WavFormatError": "format-error",
    "UnsupportedFormatError": "unsupported-format",
    "InsufficientInputError": "insufficient-input",
    "EmptyHistogramError": "empty-histogram",
    "DegenerateRegressionError": "degenerate-regression",
    "EmptyReportError": "empty-report",
}


class PipelineError(DriftmeterError):
    """A stage failed; ``exit_code`` is 3 for input problems, 4 otherwise."""

    def __init__(self, stage: str, cause: Exception):
        code = _ERROR_CODES.get(type(cause).__name__, type(cause).__name__)
        super().__init__(f"{stage}: {code}: {cause}")
        self.stage = stage
        self.code = code
        self.cause = cause
        self.exit_code = 3 if isinstance(cause, (InputError, OSError)) else 4


@dataclass(frozen=True)
class PipelineConfig:
    input_path: str
    out_dir: str
    input_kind: Optional[str] = None  # "wav" | "csv"; inferred from suffix when None
    yin: YinConfig = YinConfig()
    segmentation: SegmentationConfig = SegmentationConfig()
    cents: CentsConfig = CentsConfig()
    histogram: HistogramConfig = HistogramConfig()
    peaks: PeakConfig = PeakConfig()
    cluster: ClusterConfig = ClusterConfig()
    skip_leading: int = 0
    plots: Tuple[str, ...] = ()
    workers: int = 1

    def __post_init__(self):
        if self.kind not in ("wav", "csv"):
            raise InputError(f"input kind must be 'wav' or 'csv', not {self.kind!r}")
        if self.skip_leading < 0:
            raise InputError("skip_leading must be non-negative")
        unknown = set(self.plots) - set(PLOT_KINDS)
        if unknown:
            raise InputError(f"unknown plot kind(s): {', '.join(sorted(unknown))}")

    @property
    def kind(self) -> str:
        if self.input_kind:
            return self.input_kind
        return "wav" if str(self.input_path).lower().endswith((".wav", ".wave")) else "csv"

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["input_kind"] = self.kind
        d["plots"] = list(self.plots)
        return d


@dataclass
class RunArtifacts:
    config: PipelineConfig
    track: PitchTrack
    sentences: List[Sentence]
    analyzed: List[Sentence]
    analyses: List[SentenceAnalysis]
    overall: SentenceAnalysis
    report: DriftReport
    manifest: List[str] = field(default_factory=list)

    @property
    def peak_tables(self) -> List[Tuple[int, List[PeakFit]]]:
        return [(a.index, a.fits) for a in self.analyses]


# --------------------------------------------------------------------------
# serialisation
# --------------------------------------------------------------------------

def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _fit_dict(f: PeakFit) -> dict:
    return {
        "c1": _num(f.c1), "c2": _num(f.c2), "c3": _num(f.c3), "c4": _num(f.c4), "c5": _num(f.c5),
        "peak_cents": _num(f.peak_cents), "rmse": _num(f.rmse), "converged": f.converged,
        "status": f.status, "lo_cents": _num(f.lo_cents), "hi_cents": _num(f.hi_cents),
        "n_bins": f.n_bins,
    }


def _point_dict(p: PeakPoint) -> dict:
    return {"sentence_index": int(p.sentence_index), "cents": _num(p.cents)}


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def report_dict(art: RunArtifacts) -> dict:
    rep = art.report
    analyzed = {s.index for s in art.analyzed}
    clusters = []
    for c, line in rep.clusters:
        clusters.append({
            "id": c.id,
            "significant": c.significant,
            "members": [_point_dict(p) for p in c.points],
            "slope": _num(line.slope) if line else None,
            "intercept": _num(line.intercept) if line else None,
            "r2": _num(line.r2) if line else None,
            "slope_cents_per_minute": _num(line.slope_cents_per_minute) if line else None,
            "line_defined": line is not None,
        })
    return _sanitize({
        "config": art.config.as_dict(),
        "sentences": [
            {"index": s.index, "start_sec": s.start_sec, "end_sec": s.end_sec,
             "n_voiced_frames": s.n_voiced, "analyzed": s.index in analyzed}
            for s in art.sentences
        ],
        "peaks": [
            {"sentence_index": a.index, "fits": [_fit_dict(f) for f in a.fits]}
            for a in art.analyses
        ],
        "clusters": clusters,
        "noise": [_point_dict(p) for p in rep.noise],
        "summary": rep.summary(),
    })


def report_json(art: RunArtifacts) -> str:
    return json.dumps(report_dict(art), indent=2, allow_nan=False) + "\n"


PEAK_COLUMNS = ["sentence_index", "lo_cents", "hi_cents", "c1", "c2", "c3", "c4", "c5",
                "peak_cents", "rmse", "converged", "status"]


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def peaks_rows(art: RunArtifacts) -> List[list]:
    rows = []
    for a in art.analyses:
        for f in a.fits:
            rows.append([a.index, f.lo_cents, f.hi_cents, f.c1, f.c2, f.c3, f.c4, f.c5,
                         f.peak_cents, f.rmse, f.converged, f.status])
    return rows


def cluster_rows(report: DriftReport) -> List[list]:
    rows = []
    for c, _ in report.clusters:
        rows += [[c.id, p.sentence_index, p.cents, c.significant] for p in c.points]
    rows += [[-1, p.sentence_index, p.cents, False] for p in report.noise]
    return rows


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

def load_track(cfg: PipelineConfig) -> PitchTrack:
    if cfg.kind == "wav":
        return estimate_pitch(load_wav(cfg.input_path), cfg.yin)
    return load_pitch_csv(cfg.input_path, f0_min_hz=cfg.yin.f0_min_hz, f0_max_hz=cfg.yin.f0_max_hz)


def analyze(cfg: PipelineConfig, track: Optional[PitchTrack] = None) -> RunArtifacts:
    """Run every stage in memory, without touching the output directory."""
    stage = "pitch_io"
    try:
        if track is None:
            track = load_track(cfg)
        stage = "segmentation"
        sentences = segment(track, cfg.segmentation)
        analyzed = sentences[cfg.skip_leading:]

        stage = "peaks"

        def work(s):
            return analyze_sentence(s, cfg.cents, cfg.histogram, cfg.peaks)

        if cfg.workers > 1:
            with ThreadPoolExecutor(cfg.workers) as pool:
                analyses = list(pool.map(work, analyzed))
        else:
            analyses = [work(s) for s in analyzed]
        voiced = [s.f0_hz for s in analyzed]
        all_cents = hz_to_cents(np.concatenate(voiced), cfg.cents) if voiced else np.empty(0)
        overall = analyze_cents(all_cents, cfg.histogram, cfg.peaks, index=-1)

        stage = "drift"
        report = analyze_drift(
            [(s, a.peaks) for s, a in zip(analyzed, analyses)], cfg.cluster)
    except DriftmeterError as exc:
        raise PipelineError(stage, exc) from exc
    except OSError as exc:
        raise PipelineError(stage, exc) from exc
    return RunArtifacts(cfg, track, sentences, analyzed, analyses, overall, report)


def write_outputs(art: RunArtifacts) -> List[str]:
    """Write report.json, peaks.csv, clusters.csv and requested plots.

    On failure every file written by this call is removed again.
    """
    out = Path(art.config.out_dir)
    written: List[str] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(report_json(art), encoding="utf-8")
        written.append(str(path))
        path = out / "peaks.csv"
        _write_csv(path, PEAK_COLUMNS, peaks_rows(art))
        written.append(str(path))
        path = out / "clusters.csv"
        _write_csv(path, ["cluster_id", "sentence_index", "cents", "significant"],
                   cluster_rows(art.report))
        written.append(str(path))
        written += emit_plots(art, art.config.plots, out)
    except Exception as exc:
        for p in written:
            try:
                os.remove(p)
            except OSError:
                pass
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError("output", exc) from exc
    art.manifest = written
    return written


def run_pipeline(cfg: PipelineConfig) -> RunArtifacts:
    art = analyze(cfg)
    write_outputs(art)
    return art


# --------------------------------------------------------------------------
# plots
# --------------------------------------------------------------------------

def build_figure(art: RunArtifacts, kind: str):
    """Figure object for one plot kind, or ``None`` if there is no data."""
    if kind == "track":
        return plots.track_figure(art.track.times, art.track.f0_hz, art.track.hop_sec)
    if kind == "histogram":
        ov = art.overall
        if ov.raw is None:
            return None
        return plots.histogram_figure(ov.raw, ov.smoothed, ov.mountains)
    if kind == "fit":
        ov = art.overall
        for m, f in zip(ov.mountains, ov.fits):
            if f.accepted:
                target = ov.raw if art.config.histogram.fit_on == "raw" else ov.smoothed
                return plots.fit_figure(target, m, f)
        return None
    if kind == "scatter":
        return plots.scatter_figure(art.report.points)
    if kind == "clusters":
        return plots.clusters_figure(art.report)
    raise InputError(f"unknown plot kind {kind!r}; choose from {', '.join(PLOT_KINDS)}")


def emit_plots(art: RunArtifacts, which: Iterable[str], out_dir=None) -> List[str]:
    """Write one SVG per requested kind; returns the paths written."""
    which = list(which)
    for kind in which:
        if kind not in PLOT_KINDS:
            raise InputError(f"unknown plot kind {kind!r}; choose from {', '.join(PLOT_KINDS)}")
    out = Path(out_dir if out_dir is not None else art.config.out_dir)
    written = []
    for kind in PLOT_KINDS:
        if kind not in which:
            continue
        fig = build_figure(art, kind)
        if fig is None:
            log.warning("no data for %s plot", kind)
            continue
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{kind}.svg"
        path.write_text(fig.to_svg(), encoding="utf-8")
        written.append(str(path))
    return written
