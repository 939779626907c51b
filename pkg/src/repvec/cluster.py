"""Budgeted k selection, k-means quantization, and representative extraction.

Given a token budget T over a corpus of n chunks averaging s tokens each,
the largest affordable cluster count is k = min(n, floor(T / s)). The
embedding space is then quantized with k-means (k-means++ seeding, Lloyd
iterations, best of several restarts), and the member nearest each centroid
becomes that cluster's representative chunk.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import BudgetTooSmall, DegenerateInput
from .index import VectorIndex
from .ingest import Chunk

DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-6
DEFAULT_RESTARTS = 10


@dataclass(frozen=True)
class BudgetParams:
    """Token budget T, mean chunk token size s, and corpus size n."""

    T: float
    s: float
    n: int

    def __post_init__(self) -> None:
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.s <= 0:
            raise ValueError("s must be positive")
        if self.n < 1:
            raise ValueError("n must be at least 1")


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    inertia_history: list[float] = field(default_factory=list)


@dataclass
class RepresentativeSet:
    """Centroid-nearest chunk row indices, ordered by cluster id."""

    closest_indices: list[int]
    chunks: list[Chunk] | None = None


def solve_budget(p: BudgetParams) -> int:
    """Largest k with k <= n and k * s <= T; the real-valued mean s is not rounded."""
    k = min(p.n, math.floor(p.T / p.s))
    if k < 1:
        raise BudgetTooSmall(
            f"budget T={p.T} admits no chunk of average size s={p.s}"
        )
    return k


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first center uniform, the rest by D^2 sampling."""
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    centroids[0] = x[rng.integers(n)]
    closest_sq = np.einsum("ij,ij->i", x - centroids[0], x - centroids[0])
    for i in range(1, k):
        total = closest_sq.sum()
        if total <= 0.0:
            # All remaining mass sits on chosen points; fall back to uniform.
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest_sq / total))
        centroids[i] = x[idx]
        diff = x - centroids[i]
        np.minimum(closest_sq, np.einsum("ij,ij->i", diff, diff), out=closest_sq)
    return centroids


def _assign_repaired(
    x: np.ndarray, centroids: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Assignment step that leaves no cluster empty.

    Empty clusters are re-seated one at a time on the point currently
    farthest from its assigned centroid, re-assigning after each reseat.
    Terminates whenever the data has at least k distinct rows (checked by
    kmeans upfront): a reseat always captures its donor point.
    """
    labels, sq = kernels.assign_points(x, centroids)
    for _ in range(k):
        counts = np.bincount(labels, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            break
        donor = int(np.argmax(sq))
        centroids[empties[0]] = x[donor]
        labels, sq = kernels.assign_points(x, centroids)
    return labels, sq


def _lloyd(
    x: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iter: int,
    tol: float,
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    centroids = _kmeans_pp_init(x, k, rng)
    labels, sq = _assign_repaired(x, centroids, k)
    history = [float(sq.sum())]

    onehot = np.zeros((k, x.shape[0]), dtype=np.float64)
    for _ in range(max_iter):
        onehot[:] = 0.0
        onehot[labels, np.arange(x.shape[0])] = 1.0
        counts = onehot.sum(axis=1)
        new_centroids = (onehot @ x) / counts[:, None]
        movement = float(np.linalg.norm(new_centroids - centroids))
        centroids = new_centroids
        labels, sq = _assign_repaired(x, centroids, k)
        history.append(float(sq.sum()))
        if movement < tol:
            break
    return centroids, labels, history[-1], history


def kmeans(
    vectors: np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    n_restarts: int = DEFAULT_RESTARTS,
) -> ClusterModel:
    """Best-of-n_restarts Lloyd's algorithm from k-means++ seeding.

    Raises DegenerateInput when k exceeds the number of distinct rows (k
    distinct centroids would be impossible).
    """
    x = np.ascontiguousarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("vectors must be a non-empty n x d matrix")
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vectors must be finite")
    distinct = len({row.tobytes() for row in x})
    if k > distinct:
        raise DegenerateInput(f"k={k} exceeds {distinct} distinct points")

    rng = np.random.default_rng(seed)
    best: tuple[np.ndarray, np.ndarray, float, list[float]] | None = None
    for _ in range(n_restarts):
        result = _lloyd(x, k, rng, max_iter, tol)
        if best is None or result[2] < best[2]:
            best = result
    centroids, labels, inertia, history = best
    return ClusterModel(
        k=k,
        centroids=centroids,
        assignments=labels,
        inertia=inertia,
        inertia_history=history,
    )


def distances_to_centroid(
    vectors: np.ndarray, model: ClusterModel, i: int
) -> np.ndarray:
    """Euclidean distances from the members of cluster i to its centroid.

    Aligned with np.flatnonzero(model.assignments == i), i.e. ascending row
    order.
    """
    if not 0 <= i < model.k:
        raise ValueError(f"cluster id {i} out of range for k={model.k}")
    members = np.flatnonzero(model.assignments == i)
    diffs = np.asarray(vectors, dtype=np.float64)[members] - model.centroids[i]
    return np.sqrt(np.einsum("ij,ij->i", diffs, diffs))


def closest_indices(
    vectors: np.ndarray,
    model: ClusterModel,
    chunks: list[Chunk] | None = None,
) -> RepresentativeSet:
    """Per cluster, the member row index nearest the centroid.

    Ties break toward the smallest row index; the result list is ordered by
    cluster id. When the aligned chunk list is supplied, the matching Chunk
    objects are attached.
    """
    indices: list[int] = []
    for i in range(model.k):
        members = np.flatnonzero(model.assignments == i)
        dists = distances_to_centroid(vectors, model, i)
        indices.append(int(members[int(np.argmin(dists))]))
    reps = None if chunks is None else [chunks[m] for m in indices]
    return RepresentativeSet(closest_indices=indices, chunks=reps)


def select_representatives(
    index: VectorIndex, p: BudgetParams, seed: int = 0
) -> tuple[RepresentativeSet, ClusterModel]:
    """solve_budget -> kmeans -> closest_indices over a built index.

    Warns (does not fail) when the representatives' actual summed token
    count overshoots T: the budget formula is stated on the average size.
    """
    k = solve_budget(p)
    model = kmeans(index.vectors, k, seed=seed)
    reps = closest_indices(index.vectors, model, index.chunks)
    actual = sum(c.token_count for c in reps.chunks)
    if actual > p.T:
        warnings.warn(
            f"representatives total {actual} tokens, over budget T={p.T}",
            stacklevel=2,
        )
    return reps, model


def representatives_to_json(reps: RepresentativeSet) -> str:
    """Serialize as [{cluster_id, chunk_id, token_count, text}]."""
    if reps.chunks is None:
        raise ValueError("representative set has no chunks attached")
    payload = [
        {
            "cluster_id": cid,
            "chunk_id": chunk.chunk_id,
            "token_count": chunk.token_count,
            "text": chunk.text,
        }
        for cid, chunk in enumerate(reps.chunks)
    ]
    return json.dumps(payload, ensure_ascii=False, indent=2)


def save_representatives(reps: RepresentativeSet, path: str | Path) -> None:
    Path(path).write_text(representatives_to_json(reps), encoding="utf-8")
