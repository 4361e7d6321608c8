# Fitting a Gaussian on a sloping baseline to a single mountain.
import numpy as np

from driftmeter import Histogram, Mountain, fit_tilted_gaussian, tilted_gaussian

true = (2.0, 0.01, 100.0, 5700.0, 800.0)  # baseline, tilt, height, centre, width
centers = 5600 + 5 * np.arange(41)
counts = tilted_gaussian(centers, *true)
rng = np.random.default_rng(0)
noisy = np.maximum(counts + rng.normal(0, 1.0, counts.size), 0)

h = Histogram(5.0, 5597.5, noisy, int(noisy.sum()))
m = Mountain(0, 40, int(np.argmax(noisy)), float(noisy.max()))
fit = fit_tilted_gaussian(h, m)

print("converged:", fit.converged, "after", fit.iterations, "iterations")
for name, got, want in zip(("c1", "c2", "c3", "c4", "c5"), fit.coefficients, true):
    print(f"{name} {got:12.4f}  (true {want})")

# the tilt pushes the maximum of the curve off c4
print("c4", round(fit.c4, 2), "peak", round(fit.peak_cents, 2), "rmse", round(fit.rmse, 3))
