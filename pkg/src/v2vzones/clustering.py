"""Zone formation: blended affinity matrix and spectral clustering with eigengap selection."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def gaussian_distance_similarity(positions: np.ndarray, sigma_d: float,
                                 epsilon_d: float) -> np.ndarray:
    """D[k,k'] = exp(-||v_k - v_k'||^2 / (2 sigma_d^2)), zeroed beyond epsilon_d."""
    if sigma_d <= 0 or epsilon_d <= 0:
        raise ValueError("sigma_d and epsilon_d must be positive")
    pos = np.asarray(positions, dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    dist2 = np.sum(diff * diff, axis=-1)
    d = np.exp(-dist2 / (2.0 * sigma_d ** 2))
    d[np.sqrt(dist2) > epsilon_d] = 0.0
    np.fill_diagonal(d, 1.0)
    return d


def cosine_load_similarity(histories: np.ndarray) -> np.ndarray:
    """C[k,k'] = cosine of the two load vectors; zero when either vector is all-zero."""
    h = np.asarray(histories, dtype=float)
    norms = np.linalg.norm(h, axis=1)
    dots = h @ h.T
    denom = norms[:, None] * norms[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(denom > 0, dots / np.where(denom > 0, denom, 1.0), 0.0)
    return np.clip(c, 0.0, 1.0)


def affinity(c: np.ndarray, d: np.ndarray, theta: float) -> np.ndarray:
    """Blend load and distance dissimilarity: A = theta(1-C) + (1-theta)(1-D).

    High affinity means far apart and differently loaded, i.e. safe to group
    for resource reuse. Symmetrized, diagonal zeroed.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    a = theta * (1.0 - np.asarray(c, dtype=float)) + (1.0 - theta) * (1.0 - np.asarray(d, dtype=float))
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return a


@dataclass
class ZonePartition:
    """Disjoint, exhaustive grouping of pair indices into zones."""

    labels: np.ndarray
    zones: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "ZonePartition":
        labels = np.asarray(labels, dtype=int)
        remap: dict[int, int] = {}
        for lab in labels:
            if int(lab) not in remap:
                remap[int(lab)] = len(remap)
        canon = np.array([remap[int(lab)] for lab in labels], dtype=int)
        zones = [np.flatnonzero(canon == z) for z in range(len(remap))]
        return cls(canon, zones)

    @property
    def zone_count(self) -> int:
        return len(self.zones)

    def validate(self) -> None:
        seen = np.concatenate(self.zones) if self.zones else np.array([], dtype=int)
        if sorted(seen.tolist()) != list(range(len(self.labels))):
            raise ValueError("zones must be disjoint and cover every pair")
        if any(len(z) == 0 for z in self.zones):
            raise ValueError("zones must be non-empty")


@dataclass
class SpectralResult:
    partition: ZonePartition
    chosen_b: int
    eigenvalues: np.ndarray
    embedding: np.ndarray | None = None


def normalized_laplacian(a: np.ndarray) -> np.ndarray:
    """Symmetric normalized Laplacian; zero-degree rows get zero scaling."""
    a = np.asarray(a, dtype=float)
    deg = a.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    lap = np.diag(deg) - a
    lnorm = inv_sqrt[:, None] * lap * inv_sqrt[None, :]
    return (lnorm + lnorm.T) / 2.0


def eigengap_count(eigenvalues: np.ndarray, b_min: int, b_max: int) -> int:
    """Largest gap between consecutive ascending eigenvalues; ties pick the smaller count."""
    n = len(eigenvalues)
    b_max = min(b_max, n - 1)
    gaps = eigenvalues[b_min:b_max + 1] - eigenvalues[b_min - 1:b_max]
    return b_min + int(np.argmax(gaps))


def spectral_zones(a: np.ndarray, b_min: int, b_max: int,
                   rng: np.random.Generator) -> SpectralResult:
    """Partition pairs by normalized spectral clustering on the affinity matrix.

    Eigengap over [b_min, b_max] picks the zone count; the rows of the matrix
    of that many smallest eigenvectors (unit-normalized) are clustered with
    k-means. Degree-zero pairs end up in singleton zones; fewer than four
    pairs, or an empty count range, yields a single zone.
    """
    a = np.asarray(a, dtype=float)
    k = a.shape[0]
    if a.shape != (k, k):
        raise ValueError("affinity matrix must be square")
    if k < 4 or b_max < b_min:
        part = ZonePartition.from_labels(np.zeros(k, dtype=int))
        return SpectralResult(part, 1, np.zeros(k))

    lnorm = normalized_laplacian(a)
    evals, evecs = np.linalg.eigh(lnorm)
    b = eigengap_count(evals, b_min, b_max)

    y = evecs[:, :b]
    norms = np.linalg.norm(y, axis=1)
    y = np.where(norms[:, None] > 1e-12, y / np.where(norms[:, None] > 1e-12, norms[:, None], 1.0), 0.0)
    labels = kmeans(y, b, rng)

    # degree-zero pairs carry no affinity information: isolate them
    isolated = np.flatnonzero(a.sum(axis=1) <= 0)
    next_label = labels.max() + 1
    for idx in isolated:
        if np.sum(labels == labels[idx]) > 1:
            labels[idx] = next_label
            next_label += 1

    part = ZonePartition.from_labels(labels)
    return SpectralResult(part, b, evals, y)


def kmeans(rows: np.ndarray, k: int, rng: np.random.Generator,
           tol: float = 1e-9, max_iter: int = 100) -> np.ndarray:
    """Lloyd's k-means with k-means++ seeding from the caller's rng.

    Empty clusters are repaired by stealing the point farthest from its
    current centroid. Stops when centroids move less than tol.
    """
    x = np.asarray(rows, dtype=float)
    n = x.shape[0]
    if k > n:
        raise ValueError("k cannot exceed the number of rows")
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(0, n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[c] = x[rng.integers(0, n)]
        else:
            centers[c] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centers[c]) ** 2, axis=1))

    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        dist = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(dist, axis=1)
        for c in range(k):
            if not np.any(labels == c):
                own = dist[np.arange(n), labels]
                far = int(np.argmax(own))
                labels[far] = c
                dist[far] = 0.0  # keep it from being stolen twice
        new_centers = np.vstack([x[labels == c].mean(axis=0) for c in range(k)])
        move = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if move < tol:
            break
    return labels
