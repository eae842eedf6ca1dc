import math

import numpy as np
import pytest

from v2vzones.clustering import (ZonePartition, affinity, cosine_load_similarity,
                                 eigengap_count, gaussian_distance_similarity,
                                 kmeans, normalized_laplacian, spectral_zones)


def three_block_affinity(rng, k=12, lo=0.85, cross=0.05):
    labels = np.repeat([0, 1, 2], k // 3)
    a = rng.uniform(0.0, cross, (k, k))
    for g in range(3):
        idx = np.flatnonzero(labels == g)
        a[np.ix_(idx, idx)] = rng.uniform(lo, 1.0, (len(idx), len(idx)))
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return a, labels


def same_partition(labels, truth):
    return all(len(set(labels[truth == g])) == 1 for g in set(truth)) and \
        len(set(labels)) == len(set(truth))


# -- similarity matrices -------------------------------------------------

def test_distance_similarity_values():
    pos = np.array([[0.0, 0.0], [0.0, 0.0], [100.0, 0.0], [101.0, 0.0]])
    d = gaussian_distance_similarity(pos, sigma_d=100.0, epsilon_d=100.0)
    assert d[0, 1] == pytest.approx(1.0)          # coincident
    assert d[0, 2] == pytest.approx(math.exp(-0.5))
    assert d[0, 3] == 0.0                         # beyond the neighborhood range
    assert np.array_equal(d, d.T)
    assert np.all((0.0 <= d) & (d <= 1.0))
    assert np.all(np.diag(d) == 1.0)


def test_distance_similarity_rejects_bad_params():
    with pytest.raises(ValueError):
        gaussian_distance_similarity(np.zeros((2, 2)), 0.0, 100.0)


def test_cosine_similarity_values():
    h = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0], [2.0, 0.0]])
    c = cosine_load_similarity(h)
    assert c[0, 1] == 0.0
    assert c[0, 2] == pytest.approx(1 / math.sqrt(2))
    assert c[0, 4] == pytest.approx(1.0)          # identical direction
    assert c[0, 3] == 0.0                         # all-zero vector convention
    assert np.array_equal(c, c.T)


def test_affinity_blend():
    k = 4
    c = np.full((k, k), 0.5)
    d = np.full((k, k), 0.5)
    a = affinity(c, d, theta=0.3)
    off = a[0, 1]
    assert off == pytest.approx(0.5)
    assert np.all(np.diag(a) == 0.0)
    assert np.array_equal(a, a.T)

    ones = np.ones((k, k))
    assert np.all(affinity(ones, ones, 0.3) == 0.0)

    d2 = np.random.default_rng(0).uniform(0, 1, (k, k))
    d2 = (d2 + d2.T) / 2
    a0 = affinity(np.zeros((k, k)), d2, theta=0.0)
    expected = 1.0 - d2
    np.fill_diagonal(expected, 0.0)
    assert np.allclose(a0, expected)

    with pytest.raises(ValueError):
        affinity(c, d, theta=1.5)


# -- spectral machinery ---------------------------------------------------

def test_two_disconnected_components_recovered():
    a = np.zeros((10, 10))
    a[:5, :5] = 0.9
    a[5:, 5:] = 0.7
    np.fill_diagonal(a, 0.0)
    res = spectral_zones(a, 2, 5, np.random.default_rng(0))
    assert res.chosen_b == 2
    assert sorted(sorted(z.tolist()) for z in res.partition.zones) == \
        [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]]


def test_laplacian_psd_and_zero_multiplicity():
    rng = np.random.default_rng(1)
    a, _ = three_block_affinity(rng, cross=0.0)   # truly block diagonal
    lnorm = normalized_laplacian(a)
    evals = np.linalg.eigvalsh(lnorm)
    assert evals[0] > -1e-10                       # positive semidefinite
    assert abs(evals[0]) < 1e-8
    assert np.sum(np.abs(evals) < 1e-8) == 3       # one zero per component


def test_planted_three_groups_recovered_over_seeds():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        a, truth = three_block_affinity(rng)
        res = spectral_zones(a, 2, 6, rng)
        assert res.chosen_b == 3
        assert same_partition(res.partition.labels, truth)


def test_uniform_affinity_degenerates_to_b_min():
    a = np.full((8, 8), 0.4)
    np.fill_diagonal(a, 0.0)
    res = spectral_zones(a, 2, 4, np.random.default_rng(3))
    assert res.chosen_b == 2
    res.partition.validate()


def test_eigengap_scale_free(rng):
    a = rng.uniform(0, 1, (14, 14))
    a = (a + a.T) / 2
    np.fill_diagonal(a, 0.0)
    r1 = spectral_zones(a, 2, 7, np.random.default_rng(8))
    r2 = spectral_zones(13.7 * a, 2, 7, np.random.default_rng(8))
    assert r1.chosen_b == r2.chosen_b
    assert np.array_equal(r1.partition.labels, r2.partition.labels)


def test_eigengap_tie_prefers_smaller_count():
    evals = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.25])  # exactly equal gaps
    assert eigengap_count(evals, 2, 4) == 2


def test_small_k_bypasses_clustering():
    a = np.ones((3, 3)) - np.eye(3)
    res = spectral_zones(a, 2, 1, np.random.default_rng(0))
    assert res.partition.zone_count == 1


def test_isolated_vertex_gets_own_zone():
    a = np.zeros((6, 6))
    a[:5, :5] = 0.8
    np.fill_diagonal(a, 0.0)   # vertex 5 has zero degree
    res = spectral_zones(a, 2, 3, np.random.default_rng(2))
    res.partition.validate()
    assert [5] in [z.tolist() for z in res.partition.zones]


def test_partition_deterministic(rng):
    a = rng.uniform(0, 1, (12, 12))
    a = (a + a.T) / 2
    np.fill_diagonal(a, 0.0)
    r1 = spectral_zones(a, 2, 6, np.random.default_rng(77))
    r2 = spectral_zones(a, 2, 6, np.random.default_rng(77))
    assert np.array_equal(r1.partition.labels, r2.partition.labels)


def test_partition_validity_random_inputs(rng):
    for _ in range(25):
        k = int(rng.integers(4, 20))
        a = rng.uniform(0, 1, (k, k))
        a = (a + a.T) / 2
        np.fill_diagonal(a, 0.0)
        res = spectral_zones(a, 2, k // 2, rng)
        res.partition.validate()
        assert 1 <= res.partition.zone_count <= k


# -- k-means ---------------------------------------------------------------

def test_kmeans_k_equals_n():
    rows = np.eye(5)
    labels = kmeans(rows, 5, np.random.default_rng(0))
    assert len(set(labels.tolist())) == 5


def test_kmeans_antipodal_split():
    rows = np.vstack([np.tile([1.0, 0.0], (6, 1)), np.tile([-1.0, 0.0], (6, 1))])
    labels = kmeans(rows, 2, np.random.default_rng(1))
    assert len(set(labels[:6].tolist())) == 1
    assert len(set(labels[6:].tolist())) == 1
    assert labels[0] != labels[6]


def test_kmeans_deterministic(rng):
    rows = rng.normal(size=(30, 3))
    a = kmeans(rows, 4, np.random.default_rng(5))
    b = kmeans(rows, 4, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_partition_from_labels_compacts_ids():
    part = ZonePartition.from_labels(np.array([7, 7, 2, 9, 2]))
    assert part.labels.tolist() == [0, 0, 1, 2, 1]
    part.validate()
    with pytest.raises(ValueError):
        ZonePartition(np.array([0, 1]), [np.array([0])]).validate()
