"""Independent reference implementations used only by the tests."""

import numpy as np


def dbscan_closure(coords, eps, min_samples):
    """DBSCAN by transitive closure of the core-point graph, O(n^3).

    Returns ``(core_components, noise, border_options)`` where
    ``core_components`` is a list of frozensets of core indices,
    ``noise`` a frozenset, and ``border_options`` maps each border point to
    the set of component numbers it could legally join.
    """
    coords = np.asarray(coords, float)
    n = len(coords)
    dist = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1))
    near = dist <= eps
    core = near.sum(1) >= min_samples
    reach = near & core[:, None] & core[None, :]
    for k in range(n):  # Warshall
        reach = reach | (reach[:, [k]] & reach[[k], :])
    comps, seen = [], set()
    for i in range(n):
        if core[i] and i not in seen:
            members = frozenset(int(j) for j in np.flatnonzero(reach[i]) if core[j]) | {i}
            seen |= members
            comps.append(frozenset(members))
    border = {}
    noise = set()
    for i in range(n):
        if core[i]:
            continue
        options = {c for c, comp in enumerate(comps) if any(near[i, j] for j in comp)}
        if options:
            border[i] = options
        else:
            noise.add(i)
    return comps, frozenset(noise), border


def partition(labels):
    groups = {}
    for i, lab in enumerate(labels):
        if lab >= 0:
            groups.setdefault(int(lab), set()).add(i)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def fine_grid_argmax(f, lo, hi, n=2_000_001):
    x = np.linspace(lo, hi, n)
    return float(x[np.argmax(f(x))])


def naive_tally(values, origin, width, n_bins):
    counts = [0] * n_bins
    for v in values:
        k = 0
        while origin + (k + 1) * width <= v:
            k += 1
        counts[k] += 1
    return counts
