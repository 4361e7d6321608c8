"""``driftmeter`` command line.

    driftmeter analyze --input take.csv --out results/ --plots clusters
    driftmeter synth --out corpus.csv --sentences 16 --drift -2

Exit codes: 0 success, 2 usage error, 3 input error, 4 analysis error.
Set DRIFTMETER_NO_COLOR to suppress ANSI colour on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

from .drift import ClusterConfig
from .errors import DriftmeterError, InputError
from .histogram import CentsConfig, HistogramConfig
from .peaks import PeakConfig
from .pipeline import PLOT_KINDS, PipelineConfig, PipelineError, run_pipeline
from .pitch_io import YinConfig, write_pitch_csv, write_wav
from .segmentation import SegmentationConfig
from .synth import PlantedCorpus, planted_track, render_audio

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_ANALYSIS = 0, 2, 3, 4


def _color(text: str, code: str) -> str:
    if os.environ.get("DRIFTMETER_NO_COLOR") or not sys.stderr.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _plot_list(value: str) -> List[str]:
    kinds = [v.strip() for v in value.split(",") if v.strip()]
    bad = [k for k in kinds if k not in PLOT_KINDS]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown plot kind(s) {', '.join(bad)}; choose from {', '.join(PLOT_KINDS)}")
    return kinds


def _sparse(value: str):
    # "CENTS:i,j,k"
    try:
        cents, where = value.split(":")
        return float(cents), tuple(int(v) for v in where.split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected CENTS:i,j,... not {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftmeter", description="Measure intonation drift.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the drift analysis on a WAV or pitch CSV")
    a.add_argument("--input", required=True)
    a.add_argument("--input-kind", choices=("wav", "csv"))
    a.add_argument("--out", required=True, help="output directory")
    a.add_argument("--bin-width", type=float, default=5.0, help="histogram bin width (cents)")
    a.add_argument("--smooth-window", type=int, default=7, help="moving-average window (bins, odd)")
    a.add_argument("--fit-on", choices=("raw", "smoothed"), default="raw")
    a.add_argument("--min-silence", type=float, default=0.5, help="sentence break (s)")
    a.add_argument("--min-sentence", type=float, default=1.0, help="shortest sentence kept (s)")
    a.add_argument("--fixed-segments", type=float, metavar="SEC",
                   help="use fixed-length segments of SEC seconds instead of silences")
    a.add_argument("--min-height-fraction", type=float, default=0.1)
    a.add_argument("--min-height-frames", type=float, default=5.0)
    a.add_argument("--eps", type=float, default=1.5)
    a.add_argument("--min-samples", type=int, default=2)
    a.add_argument("--cents-scale", type=float, default=25.0)
    a.add_argument("--index-scale", type=float, default=1.0)
    a.add_argument("--cents-only", action="store_true", help="cluster on pitch alone")
    a.add_argument("--min-cluster", type=int, default=3, help="smallest significant cluster")
    a.add_argument("--skip-leading", type=int, default=0, help="ignore the first K sentences")
    a.add_argument("--ref-hz", type=float, default=CentsConfig().ref_hz)
    a.add_argument("--plots", type=_plot_list, default=[],
                   help="comma list of " + ",".join(PLOT_KINDS))
    a.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("synth", help="write a planted-drift test corpus")
    s.add_argument("--out", required=True, help="output .csv (pitch) or .wav (audio)")
    s.add_argument("--sentences", type=int, default=16)
    s.add_argument("--notes", default="0,200,500", help="comma list of cents above --base-hz")
    s.add_argument("--drift", type=float, default=-2.0, help="cents per sentence")
    s.add_argument("--jitter", type=float, default=8.0, help="frame jitter sigma (cents)")
    s.add_argument("--base-hz", type=float, default=220.0)
    s.add_argument("--note-sec", type=float, default=1.5)
    s.add_argument("--gap-sec", type=float, default=1.0)
    s.add_argument("--sparse-note", type=_sparse, action="append", default=[],
                   metavar="CENTS:i,j", help="extra note sung only in the listed sentences")
    s.add_argument("--seed", type=int, default=0)
    return parser


def _analyze(args) -> int:
    seg = SegmentationConfig(
        min_silence_sec=args.min_silence,
        min_sentence_sec=args.min_sentence,
        mode="fixed" if args.fixed_segments else "silence",
        fixed_len_sec=args.fixed_segments or SegmentationConfig().fixed_len_sec,
    )
    cfg = PipelineConfig(
        input_path=args.input,
        out_dir=args.out,
        input_kind=args.input_kind,
        yin=YinConfig(),
        segmentation=seg,
        cents=CentsConfig(args.ref_hz),
        histogram=HistogramConfig(args.bin_width, args.smooth_window, args.fit_on),
        peaks=PeakConfig(min_height_fraction=args.min_height_fraction,
                         min_height_frames=args.min_height_frames),
        cluster=ClusterConfig(eps=args.eps, min_samples=args.min_samples,
                              cents_scale=args.cents_scale, index_scale=args.index_scale,
                              min_significant_size=args.min_cluster,
                              metric="cents" if args.cents_only else "2d"),
        skip_leading=args.skip_leading,
        plots=tuple(args.plots),
        workers=args.workers,
    )
    art = run_pipeline(cfg)
    summary = art.report.summary()
    print(f"sentences: {len(art.sentences)} (analyzed {len(art.analyzed)})")
    for cluster, line in art.report.clusters:
        tag = "significant" if cluster.significant else "insignificant"
        slope = "undefined" if line is None else f"{line.slope:+.3f} cents/sentence"
        print(f"cluster {cluster.id}: {cluster.size} points, {tag}, slope {slope}")
    mean = summary["mean_slope"]
    print("mean drift: " + ("n/a" if mean is None else f"{mean:+.3f} cents/sentence"))
    for path in art.manifest:
        print(f"wrote {path}")
    return EXIT_OK


def _synth(args) -> int:
    corpus = PlantedCorpus(
        n_sentences=args.sentences,
        notes=tuple(float(v) for v in args.notes.split(",") if v.strip()),
        drift=args.drift,
        jitter=args.jitter,
        base_hz=args.base_hz,
        note_sec=args.note_sec,
        gap_sec=args.gap_sec,
        sparse_notes=tuple(args.sparse_note),
        seed=args.seed,
    )
    track = planted_track(corpus)
    if args.out.lower().endswith(".wav"):
        write_wav(args.out, render_audio(track))
    else:
        write_pitch_csv(args.out, track)
    print(f"wrote {args.out}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "analyze":
            return _analyze(args)
        return _synth(args)
    except PipelineError as exc:
        print(_color(f"error: {exc}", "31"), file=sys.stderr)
        return exc.exit_code
    except InputError as exc:
        print(_color(f"error: {exc}", "31"), file=sys.stderr)
        return EXIT_USAGE if args.command == "analyze" else EXIT_INPUT
    except DriftmeterError as exc:
        print(_color(f"error: {exc}", "31"), file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
