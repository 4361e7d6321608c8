# End to end: planted drift, clustering, regression and SVG figures.
from driftmeter import PipelineConfig, run_pipeline, write_pitch_csv
from driftmeter.synth import PlantedCorpus, planted_track

# 16 sentences, three notes sinking by 2 cents per sentence,
# plus a note that only shows up twice
corpus = PlantedCorpus(n_sentences=16, drift=-2.0, sparse_notes=((900.0, (7, 8)),))
write_pitch_csv("planted.csv", planted_track(corpus))

cfg = PipelineConfig("planted.csv", "demo_out",
                     plots=("track", "histogram", "fit", "scatter", "clusters"))
art = run_pipeline(cfg)

for cluster, line in art.report.clusters:
    slope = "n/a" if line is None else f"{line.slope:+.2f} cents/sentence"
    print(f"cluster {cluster.id}: {cluster.size:2d} points, "
          f"{'significant' if cluster.significant else 'not significant'}, {slope}")
print("summary:", art.report.summary())
print("\n".join(art.manifest))
