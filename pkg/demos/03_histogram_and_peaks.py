# One sentence's pitch histogram, its mountains and the fitted peaks.
import numpy as np

from driftmeter import analyze_sentence, hz_to_cents, segment
from driftmeter.synth import PlantedCorpus, planted_track

corpus = PlantedCorpus(n_sentences=1, notes=(0.0, 200.0, 500.0), jitter=8.0)
(sentence,) = segment(planted_track(corpus))

cents = hz_to_cents(sentence.f0_hz)
print("pitch range:", cents.min().round(1), "to", cents.max().round(1), "cents")

a = analyze_sentence(sentence)  # 5-cent bins, 7-bin moving average
print(len(a.raw), "bins starting at", a.raw.origin_cents)
for m in a.mountains:
    print(f"mountain bins {m.lo_bin}-{m.hi_bin}, apex {a.raw.center(m.apex_bin)}")

planted = corpus.base_cents() + np.array(corpus.notes)
for fit, want in zip(a.peaks, planted):
    print(f"peak {fit.peak_cents:8.2f}  planted {want:8.2f}  ({fit.status})")
