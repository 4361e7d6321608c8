import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftmeter.drift import (
    Cluster,
    ClusterConfig,
    PeakPoint,
    analyze_drift,
    dbscan,
    dbscan_labels,
    fit_drift_line,
    ols,
)
from driftmeter.errors import DegenerateRegressionError, EmptyReportError
from driftmeter.peaks import analyze_sentence
from driftmeter.segmentation import segment
from driftmeter.synth import PlantedCorpus, planted_track

from oracles import dbscan_closure, partition


def random_instance(rng):
    n = int(rng.integers(1, 51))
    coords = rng.uniform(0, 10, (n, 2))
    return coords, float(rng.uniform(0.3, 3.0)), int(rng.integers(1, 6))


def check_against_oracle(coords, eps, min_samples):
    """True when the instance has no border ties; asserts agreement either way."""
    labels = dbscan_labels(coords, eps, min_samples)
    comps, noise, border = dbscan_closure(coords, eps, min_samples)
    assert frozenset(np.flatnonzero(labels == -1).tolist()) == noise
    # every oracle component maps to exactly one label
    comp_label = []
    for comp in comps:
        labs = {int(labels[i]) for i in comp}
        assert len(labs) == 1 and -1 not in labs
        comp_label.append(labs.pop())
    assert len(set(comp_label)) == len(comps) == len(set(labels[labels >= 0].tolist()))
    for i, options in border.items():
        assert int(labels[i]) in {comp_label[c] for c in options}
    return all(len(o) == 1 for o in border.values())


def assignment(coords, eps, min_samples):
    """Oracle partition for a tie-free instance."""
    comps, _, border = dbscan_closure(coords, eps, min_samples)
    groups = [set(c) for c in comps]
    for i, (c,) in border.items():
        groups[c].add(i)
    return sorted((frozenset(g) for g in groups), key=min)


class TestDbscan:
    def test_identical_points(self):
        clusters, noise = dbscan([PeakPoint(0, 100.0)] * 5)
        assert [c.size for c in clusters] == [5] and noise == []

    def test_line_and_outlier(self):
        coords = np.array([[0, 0], [1, 0], [2, 0], [10, 0]], float)
        assert dbscan_labels(coords, 1.5, 2).tolist() == [0, 0, 0, -1]

    def test_closed_neighbourhood(self):
        # a distance exactly eps counts as a neighbour
        assert dbscan_labels(np.array([[0, 0], [1.5, 0]]), 1.5, 2).tolist() == [0, 0]

    def test_border_goes_to_first_cluster(self):
        # point 2 is a border point reachable from both cores
        coords = np.array([[x, 0] for x in (0, 0.1, 0.2, 1.0, 1.8, 1.9, 2.0)])
        labels = dbscan_labels(coords, 0.85, 4)
        assert labels.tolist() == [0, 0, 0, 0, 1, 1, 1]
        # scanning from the right hands it to the other cluster
        labels = dbscan_labels(coords[::-1], 0.85, 4)[::-1]
        assert labels.tolist() == [1, 1, 1, 0, 0, 0, 0]

    def test_scaling(self):
        pts = [PeakPoint(0, 0.0), PeakPoint(1, 30.0), PeakPoint(2, 60.0)]
        # 30 cents over one sentence is just past eps at the default scale
        assert dbscan(pts)[0] == []
        clusters, noise = dbscan(pts, ClusterConfig(cents_scale=50))
        assert [c.size for c in clusters] == [3] and noise == []

    def test_cents_metric_ignores_index(self):
        pts = [PeakPoint(0, 100.0), PeakPoint(9, 101.0)]
        assert dbscan(pts)[0] == []
        (c,), _ = dbscan(pts, ClusterConfig(metric="cents"))
        assert c.size == 2

    def test_significance_flag(self):
        pts = [PeakPoint(i, 0.0) for i in range(3)] + [PeakPoint(i, 500.0) for i in range(2)]
        clusters, _ = dbscan(pts)
        assert [(c.size, c.significant) for c in clusters] == [(3, True), (2, False)]

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            check_against_oracle(*random_instance(rng))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        coords, eps, ms = random_instance(rng)
        if not check_against_oracle(coords, eps, ms):
            return
        perm = rng.permutation(len(coords))
        labels = dbscan_labels(coords[perm], eps, ms)
        back = np.empty_like(labels)
        back[perm] = labels
        assert partition(back) == partition(dbscan_labels(coords, eps, ms))
        assert partition(back) == assignment(coords, eps, ms)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 3), st.floats(0, 3), st.integers(1, 5))
    def test_noise_monotone_in_eps(self, seed, eps, extra, ms):
        coords = np.random.default_rng(seed).uniform(0, 10, (40, 2))
        small = np.count_nonzero(dbscan_labels(coords, eps, ms) == -1)
        large = np.count_nonzero(dbscan_labels(coords, eps + extra, ms) == -1)
        assert large <= small

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_partition_and_core(self, seed):
        rng = np.random.default_rng(seed)
        coords, eps, ms = random_instance(rng)
        labels = dbscan_labels(coords, eps, ms)
        near = np.sqrt(((coords[:, None] - coords[None]) ** 2).sum(-1)) <= eps
        core = near.sum(1) >= ms
        assert labels.shape == (len(coords),)
        for lab in set(labels.tolist()) - {-1}:
            assert core[labels == lab].any()


class TestOls:
    def test_exact_line(self):
        assert ols([0, 1, 2], [0, 1, 2]) == pytest.approx((1.0, 0.0, 1.0))

    def test_constant(self):
        assert ols([0, 1, 2], [100, 100, 100]) == (0.0, 100.0, 1.0)

    def test_by_hand(self):
        assert ols([0, 1, 2], [0, 2, 1]) == pytest.approx((0.5, 0.5, 0.25))

    def test_degenerate(self):
        with pytest.raises(DegenerateRegressionError):
            ols([3, 3, 3], [1, 2, 3])
        with pytest.raises(DegenerateRegressionError):
            ols([1], [1])

    def test_cluster_line_per_minute(self):
        c = Cluster(0, (PeakPoint(0, 10.0), PeakPoint(1, 8.0), PeakPoint(2, 6.0)), True)
        line = fit_drift_line(c, minutes_per_sentence=0.5)
        assert line.slope == pytest.approx(-2.0)
        assert line.slope_cents_per_minute == pytest.approx(-4.0)

    @settings(max_examples=100)
    @given(st.lists(st.tuples(st.integers(0, 40), st.floats(-3000, 9000)), min_size=2, max_size=40),
           st.floats(-1000, 1000), st.integers(1, 10))
    def test_residuals_and_equivariance(self, pts, k, m):
        x = np.array([p[0] for p in pts], float)
        y = np.array([p[1] for p in pts])
        if np.ptp(x) == 0:
            return
        slope, intercept, r2 = ols(x, y)
        resid = y - intercept - slope * x
        scale = np.abs(y).sum() * np.abs(x).sum() + 1.0
        assert abs((resid * x).sum()) <= 1e-9 * scale
        assert 0.0 <= r2 <= 1.0
        s2, i2, _ = ols(x, y + k)
        assert s2 == pytest.approx(slope, abs=1e-9 * (1 + np.abs(y).max()))
        assert i2 == pytest.approx(intercept + k, abs=1e-7 * (1 + np.abs(y).max()))
        s3, _, _ = ols(m * x, y)
        assert s3 == pytest.approx(slope / m, rel=1e-9, abs=1e-9 * (1 + np.abs(y).max()))


def corpus_peaks(corpus):
    sentences = segment(planted_track(corpus))
    return [(s, analyze_sentence(s).peaks) for s in sentences]


class TestAnalyzeDrift:
    def test_planted_drift(self):
        report = analyze_drift(corpus_peaks(PlantedCorpus(n_sentences=12, jitter=5.0)))
        assert report.n_sentences == 12
        assert len(report.significant) == 3
        for slope in report.slopes:
            assert slope == pytest.approx(-2.0, abs=0.5)

    def test_two_point_cluster_excluded(self):
        corpus = PlantedCorpus(n_sentences=8, notes=(0.0, 500.0), drift=0.0,
                               sparse_notes=((900.0, (3, 4)),))
        report = analyze_drift(corpus_peaks(corpus))
        small = [c for c, _ in report.clusters if c.size == 2]
        assert len(small) == 1 and not small[0].significant
        assert report.summary()["n_significant_clusters"] == 2
        assert len(report.slopes) == 2

    def test_constant_note(self):
        report = analyze_drift(corpus_peaks(PlantedCorpus(n_sentences=6, notes=(300.0,), drift=0.0)))
        ((c, line),) = report.clusters
        assert c.size == 6 and line.slope == pytest.approx(0.0, abs=0.5)
        assert line.slope_cents_per_minute is not None

    def test_single_sentence_cluster_has_no_line(self):
        pts = PlantedCorpus(n_sentences=1, notes=(0.0,), drift=0.0)
        report = analyze_drift(corpus_peaks(pts), ClusterConfig(min_samples=1))
        ((c, line),) = report.clusters
        assert line is None and report.mean_slope is None

    def test_empty(self):
        with pytest.raises(EmptyReportError):
            analyze_drift([])
