"""Measure intonation drift in unaccompanied vocal performances.

Pipeline: f0 track -> sentences -> per-sentence pitch histograms ->
tilted-Gaussian peak fits -> DBSCAN clusters of peaks -> drift lines.
"""

from .drift import (
    Cluster,
    ClusterConfig,
    DriftLine,
    DriftReport,
    PeakPoint,
    analyze_drift,
    dbscan,
    fit_drift_line,
)
from .errors import (
    AnalysisError,
    DegenerateRegressionError,
    DriftmeterError,
    EmptyHistogramError,
    EmptyReportError,
    EmptyTrackError,
    InputError,
    InsufficientInputError,
    PitchCsvError,
    UnsupportedFormatError,
    WavFormatError,
)
from .histogram import (
    CentsConfig,
    Histogram,
    HistogramConfig,
    build_histogram,
    cents_to_hz,
    hz_to_cents,
    smooth_moving_average,
)
from .peaks import (
    Mountain,
    PeakConfig,
    PeakFit,
    SentenceAnalysis,
    analyze_sentence,
    find_mountains,
    fit_tilted_gaussian,
    sentence_peaks,
    tilted_gaussian,
)
from .pipeline import PipelineConfig, PipelineError, RunArtifacts, emit_plots, run_pipeline
from .pitch_io import (
    AudioBuffer,
    PitchFrame,
    PitchTrack,
    YinConfig,
    estimate_pitch,
    load_pitch_csv,
    load_wav,
    write_pitch_csv,
    write_wav,
)
from .segmentation import Sentence, SegmentationConfig, segment, segment_by_silence, segment_fixed

__version__ = "0.1.0"
