# Splitting a performance into sentences at long silences.
from driftmeter import SegmentationConfig, segment
from driftmeter.synth import PlantedCorpus, planted_track

# four phrases of three notes, one second of silence between them
track = planted_track(PlantedCorpus(n_sentences=4))
print(len(track), "frames,", int(track.voiced.sum()), "voiced")

for s in segment(track):
    print(f"sentence {s.index}: {s.start_sec:6.2f} - {s.end_sec:6.2f} s, {s.n_voiced} frames")

# a threshold longer than the gaps merges everything into one sentence
print(len(segment(track, SegmentationConfig(min_silence_sec=1.5))), "sentence")

# the alternative: fixed windows of 5 s regardless of silences
fixed = segment(track, SegmentationConfig(mode="fixed", fixed_len_sec=5.0))
print([(s.start_sec, round(s.end_sec, 2)) for s in fixed])
