"""Choosing the number of tempo traditions: WCSS (elbow) and silhouettes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import DomainError
from .kmeans import ClusterModel, kmeans_fit


@dataclass(frozen=True)
class ValidityPolicy:
    min_silhouette: float = 0.40
    min_cluster_size: int = 1
    # k=3 may trail k=2 on mean silhouette by at most this much
    slack: float = 0.02


@dataclass(frozen=True)
class ValidityReport:
    movement_id: str
    k_range: tuple[int, int]
    wcss_by_k: dict[int, float]
    mean_silhouette_by_k: dict[int, float]
    supported_k: int
    three_way_supported: bool
    policy: ValidityPolicy = field(default_factory=ValidityPolicy)
    cluster_sizes_by_k: dict[int, tuple[int, ...]] = field(default_factory=dict)

    @property
    def wcss_drops(self) -> dict[int, float]:
        return wcss_drops(self.wcss_by_k)

    @property
    def elbow_k(self) -> int | None:
        return elbow_k(self.wcss_by_k)


def wcss_curve(points, k_range, restarts: int = 100, seed: int = 0, models: dict | None = None) -> dict[int, float]:
    """Winning k-means inertia for every k in the inclusive ``k_range``.

    Pass a dict as ``models`` to collect the fitted ClusterModel per k.
    """
    lo, hi = k_range
    out = {}
    for k in range(lo, hi + 1):
        model = kmeans_fit(points, k, restarts=restarts, seed=seed)
        out[k] = model.inertia
        if models is not None:
            models[k] = model
    return out


def wcss_drops(wcss: dict[int, float]) -> dict[int, float]:
    """Absolute WCSS reduction when going from k-1 to k clusters."""
    ks = sorted(wcss)
    return {k: wcss[p] - wcss[k] for p, k in zip(ks, ks[1:])}


def elbow_k(wcss: dict[int, float]) -> int | None:
    """k whose incoming drop most exceeds the drop that follows it."""
    drops = wcss_drops(wcss)
    ks = sorted(drops)
    if len(ks) < 2:
        return None
    floor = 1e-12 * max(abs(v) for v in wcss.values()) or 1e-300
    ratios = {k: drops[k] / max(drops[k + 1], floor) for k in ks[:-1]}
    return max(ratios, key=lambda k: (ratios[k], -k))


def silhouette(points, assignments):
    """Per-point silhouette scores and their mean.

    Members of singleton clusters score 0.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    labels = np.asarray(assignments)
    n = x.shape[0]
    if labels.shape != (n,):
        raise DomainError("one assignment per point required")
    if n < 3:
        raise DomainError("silhouette needs at least three points")
    present = np.unique(labels)
    if present.size < 2:
        raise DomainError("silhouette needs at least two non-empty clusters")

    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    member = labels[None, :] == present[:, None]  # (clusters, n)
    sizes = member.sum(axis=1)
    sums = dist @ member.T  # (n, clusters): total distance to each cluster
    own = np.searchsorted(present, labels)
    rows = np.arange(n)
    own_size = sizes[own]

    a = np.zeros(n)
    multi = own_size > 1
    a[multi] = sums[rows, own][multi] / (own_size[multi] - 1)
    means = sums / sizes[None, :]
    means[rows, own] = np.inf
    b = means.min(axis=1)

    denom = np.maximum(a, b)
    scores = np.zeros(n)
    ok = multi & (denom > 0)
    scores[ok] = (b[ok] - a[ok]) / denom[ok]
    return scores, float(scores.mean())


def choose_k(
    mean_silhouette_by_k: dict[int, float],
    cluster_sizes_k3,
    policy: ValidityPolicy = ValidityPolicy(),
) -> tuple[int, bool]:
    """Return ``(supported_k, three_way_supported)``.

    Three traditions are kept only if the k=3 silhouette is within
    ``policy.slack`` of the k=2 one, clears ``policy.min_silhouette``, and
    every k=3 cluster has at least ``policy.min_cluster_size`` members.
    """
    if 2 not in mean_silhouette_by_k or 3 not in mean_silhouette_by_k:
        raise DomainError("choose_k needs silhouettes for k=2 and k=3")
    s2 = mean_silhouette_by_k[2]
    s3 = mean_silhouette_by_k[3]
    sizes = list(cluster_sizes_k3)
    three = (
        len(sizes) == 3
        and s3 >= s2 - policy.slack
        and s3 >= policy.min_silhouette
        and min(sizes) >= policy.min_cluster_size
    )
    return (3 if three else 2), three


def assess_validity(
    points,
    movement_id: str = "",
    k_range: tuple[int, int] = (2, 3),
    restarts: int = 100,
    seed: int = 0,
    policy: ValidityPolicy = ValidityPolicy(),
) -> tuple[ValidityReport, dict[int, ClusterModel]]:
    """Fit every k in ``k_range`` and decide between two and three traditions.

    ``k_range`` must include 2 and 3. Returns the report and the fitted
    models keyed by k.
    """
    lo, hi = k_range
    if not (lo <= 2 and hi >= 3):
        raise DomainError("k_range must include 2 and 3")
    n = np.asarray(points).shape[0]
    if hi > n:
        raise DomainError(f"k_range upper bound {hi} exceeds {n} points")
    models: dict[int, ClusterModel] = {}
    wcss = wcss_curve(points, k_range, restarts=restarts, seed=seed, models=models)
    sil = {}
    for k in range(max(lo, 2), hi + 1):
        sil[k] = silhouette(points, models[k].assignments)[1]
    sizes3 = tuple(int(s) for s in models[3].sizes())
    supported, three = choose_k(sil, sizes3, policy)
    report = ValidityReport(
        movement_id=movement_id,
        k_range=(lo, hi),
        wcss_by_k=wcss,
        mean_silhouette_by_k=sil,
        supported_k=supported,
        three_way_supported=three,
        policy=policy,
        cluster_sizes_by_k={k: tuple(int(s) for s in m.sizes()) for k, m in models.items()},
    )
    return report, models
