"""Synthetic corpora with known (planted) notes and drift.

These generators are the ground truth for the end-to-end tests: every
sentence sings the same notes, each shifted by ``drift`` cents per
sentence, with Gaussian frame-to-frame jitter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .histogram import CentsConfig, hz_to_cents
from .pitch_io import AudioBuffer, PitchTrack

DEFAULT_HOP_SEC = 256 / 44100


@dataclass(frozen=True)
class PlantedCorpus:
    """Recipe for a planted-drift performance.

    ``notes`` are cents relative to ``base_hz``. ``sparse_notes`` adds
    notes that are only sung in the listed sentences, as
    ``(cents, (sentence, ...))`` pairs.
    """

    n_sentences: int = 16
    notes: Tuple[float, ...] = (0.0, 200.0, 500.0)
    drift: float = -2.0
    jitter: float = 8.0
    base_hz: float = 220.0
    note_sec: float = 1.5
    gap_sec: float = 1.0
    lead_sec: float = 0.5
    hop_sec: float = DEFAULT_HOP_SEC
    sparse_notes: Tuple[Tuple[float, Tuple[int, ...]], ...] = ()
    seed: int = 0

    def planted_cents(self, sentence: int, note: float) -> float:
        """Noise-free pitch of ``note`` in ``sentence``, relative to base_hz."""
        return note + self.drift * sentence

    def base_cents(self, cents_cfg: CentsConfig = CentsConfig()) -> float:
        return hz_to_cents(self.base_hz, cents_cfg)


def _sentence_notes(corpus: PlantedCorpus, i: int) -> list[float]:
    notes = list(corpus.notes)
    notes += [c for c, where in corpus.sparse_notes if i in where]
    return notes


def planted_track(corpus: PlantedCorpus = PlantedCorpus()) -> PitchTrack:
    """Frame-level pitch track on a uniform hop grid; gaps are unvoiced."""
    rng = np.random.default_rng(corpus.seed)
    hop = corpus.hop_sec
    per_note = int(round(corpus.note_sec / hop))
    lead = int(round(corpus.lead_sec / hop))
    gap = int(round(corpus.gap_sec / hop))

    cents = [np.full(lead, np.nan)]
    for i in range(corpus.n_sentences):
        for note in _sentence_notes(corpus, i):
            centre = corpus.planted_cents(i, note)
            cents.append(centre + rng.normal(0.0, corpus.jitter, per_note))
        cents.append(np.full(gap, np.nan))
    rel = np.concatenate(cents)
    f0 = corpus.base_hz * np.exp2(rel / 1200.0)
    times = hop * np.arange(rel.size)
    conf = np.where(np.isfinite(f0), 1.0, 0.0)
    return PitchTrack(times, f0, conf, hop)


def render_audio(track: PitchTrack, sample_rate_hz: int = 44100, amplitude: float = 0.5) -> AudioBuffer:
    """Phase-continuous sine following ``track``; silent where unvoiced."""
    hop_samples = int(round(track.hop_sec * sample_rate_hz))
    f0 = np.repeat(np.nan_to_num(track.f0_hz, nan=0.0), hop_samples)
    voiced = f0 > 0
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate_hz
    samples = np.where(voiced, amplitude * np.sin(phase), 0.0)
    return AudioBuffer(sample_rate_hz, samples)


def sine_audio(freq_hz: float, duration_sec: float, sample_rate_hz: int = 44100,
               amplitude: float = 0.5) -> AudioBuffer:
    t = np.arange(int(round(duration_sec * sample_rate_hz))) / sample_rate_hz
    return AudioBuffer(sample_rate_hz, amplitude * np.sin(2 * np.pi * freq_hz * t))
