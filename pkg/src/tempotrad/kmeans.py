"""Seeded k-means with k-means++ initialization and best-of-N restarts."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from . import DomainError

MAX_ITERATIONS = 300


def derive_seed(seed: int, restart_index: int) -> int:
    """Child seed for one restart: first 8 bytes of sha256("seed:index")."""
    digest = hashlib.sha256(f"{int(seed)}:{int(restart_index)}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def restart_rng(seed: int, restart_index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, restart_index))


@dataclass(frozen=True)
class ClusterModel:
    k: int
    centroids_std: np.ndarray
    assignments: np.ndarray
    inertia: float
    seed: int
    restarts: int
    winning_restart: int
    iterations: int
    trace: tuple[float, ...] = ()
    centroids_raw: np.ndarray | None = None
    # set when the descent ended with fewer than k non-empty clusters
    reduced_k: bool = False

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)

    def with_raw(self, centroids_raw) -> "ClusterModel":
        return replace(self, centroids_raw=np.asarray(centroids_raw, dtype=float))


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise DomainError("points must be a non-empty (n, d) array")
    return x


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - c[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kmeans_pp_init(points, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick k starting centroids among ``points`` by D^2 sampling."""
    x = _as_points(points)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    chosen = [int(rng.integers(n))]
    closest = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            cum = np.cumsum(closest)
            idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        chosen.append(idx)
        closest = np.minimum(closest, np.sum((x - x[idx]) ** 2, axis=1))
    return x[chosen].copy()


def inertia(points, assignments, centroids) -> float:
    x = _as_points(points)
    c = _as_points(centroids)
    a = np.asarray(assignments, dtype=int)
    if a.shape != (x.shape[0],):
        raise DomainError("one assignment per point required")
    if a.size and (a.min() < 0 or a.max() >= c.shape[0]):
        raise DomainError("assignment index out of range")
    if c.shape[1] != x.shape[1]:
        raise DomainError("centroid dimension does not match points")
    return float(np.sum((x - c[a]) ** 2))


def lloyd_step(points, centroids):
    """One assignment + update pass.

    Returns ``(assignments, new_centroids, inertia)`` where inertia is
    measured against the centroids that were passed in. Clusters left empty
    are re-seeded onto the points farthest from their assigned centroids.
    """
    x = _as_points(points)
    c = _as_points(centroids)
    if c.shape[1] != x.shape[1]:
        raise DomainError("centroid dimension does not match points")
    k = c.shape[0]
    d2 = _sq_dists(x, c)
    assign = np.argmin(d2, axis=1)
    own = d2[np.arange(x.shape[0]), assign]
    total = float(own.sum())

    members = assign[:, None] == np.arange(k)
    counts = members.sum(axis=0)
    filled = counts > 0
    new = c.copy()
    new[filled] = (members.T @ x)[filled] / counts[filled, None]
    if not filled.all():
        empty = np.flatnonzero(~filled)
        # stable sort keeps the lowest index first among equally distant points
        order = np.argsort(-own, kind="stable")
        for j, i in zip(empty, order):
            new[j] = x[i]
    return assign, new, total


def lloyd_descent(points, initial_centroids, max_iterations: int = MAX_ITERATIONS):
    """Iterate Lloyd steps until the assignment stops changing.

    Returns ``(assignments, centroids, inertia, trace, iterations)``; ``trace``
    holds the inertia reported by each step.
    """
    x = _as_points(points)
    c = _as_points(initial_centroids)
    trace: list[float] = []
    previous = None
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        assign, c, value = lloyd_step(x, c)
        trace.append(value)
        if previous is not None and np.array_equal(assign, previous):
            break
        previous = assign
    # at a fixed point this is a no-op; after a re-seed or the iteration cap
    # it restores the nearest-centroid pairing
    d2 = _sq_dists(x, c)
    assign = np.argmin(d2, axis=1)
    return assign, c, float(d2[np.arange(x.shape[0]), assign].sum()), tuple(trace), iterations


def kmeans_fit(points, k: int, restarts: int = 100, seed: int = 0) -> ClusterModel:
    """Best of ``restarts`` k-means++ seeded Lloyd descents.

    Restart ``r`` draws from ``restart_rng(seed, r)`` so each restart is
    independent of the others; the lowest inertia wins, ties going to the
    lowest restart index.
    """
    x = _as_points(points)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    if restarts < 1:
        raise DomainError("restarts must be >= 1")

    best = None
    for r in range(restarts):
        init = kmeans_pp_init(x, k, restart_rng(seed, r))
        result = lloyd_descent(x, init)
        if best is None or result[2] < best[1][2]:
            best = (r, result)
    r, (assign, centroids, value, trace, iterations) = best
    counts = np.bincount(assign, minlength=k)
    return ClusterModel(
        k=k,
        centroids_std=centroids,
        assignments=assign,
        inertia=value,
        seed=seed,
        restarts=restarts,
        winning_restart=r,
        iterations=iterations,
        trace=trace,
        reduced_k=bool((counts == 0).any()),
    )
