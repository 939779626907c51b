"""Exact t-SNE reduction of the embedding matrix to 2-D.

O(n^2) formulation: Gaussian affinities in the high-dimensional space with
per-point bandwidths found by binary search on the target perplexity,
Student-t affinities in the plane, and momentum gradient descent on the KL
divergence with an early-exaggeration phase. The divergence reported per
iteration is always measured against the true (unexaggerated) affinities,
so it is a genuine KL and stays non-negative.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import PerplexityInfeasible

EXAGGERATION_MOMENTUM = 0.5
FINAL_MOMENTUM = 0.8
INIT_SCALE = 1e-4
PERPLEXITY_TOL = 1e-5


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float | None = None  # None = min(30, (n - 1) / 3)
    learning_rate: float = 200.0
    iterations: int = 1000
    early_exaggeration_factor: float = 12.0
    early_exaggeration_iters: int = 250
    seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.early_exaggeration_factor < 1:
            raise ValueError("early_exaggeration_factor must be >= 1")


@dataclass
class Layout2D:
    points: np.ndarray
    final_kl: float
    kl_history: list[float] = field(default_factory=list)


def _resolve_perplexity(cfg: TsneConfig, n: int) -> float:
    limit = (n - 1) / 3.0
    perp = min(30.0, limit) if cfg.perplexity is None else float(cfg.perplexity)
    if not 1.0 <= perp <= limit:
        raise ValueError(
            f"perplexity {perp} outside [1, (n-1)/3] = [1, {limit:.3f}] for n={n}"
        )
    return perp


def pairwise_affinities(vectors: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized joint affinity matrix P: non-negative, zero diagonal, sum 1.

    Each row's Gaussian bandwidth is searched so the conditional
    distribution's perplexity matches the target within 1e-5. Raises
    PerplexityInfeasible when a row cannot bracket the target (all of its
    pairwise distances identical).
    """
    x = np.ascontiguousarray(vectors, dtype=np.float64)
    n = x.shape[0]
    if n < 4:
        raise ValueError("need at least 4 points")
    if not 1.0 <= perplexity <= (n - 1) / 3.0:
        raise ValueError(f"perplexity {perplexity} outside [1, (n-1)/3] for n={n}")
    sqd = kernels.pairwise_sq_dists(x)
    offdiag = sqd[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    flat_rows = np.flatnonzero(np.ptp(offdiag, axis=1) == 0.0)
    if flat_rows.size:
        raise PerplexityInfeasible(
            f"row {int(flat_rows[0])} has identical distances to all other "
            "points; bandwidth search cannot bracket the target perplexity"
        )
    cond = kernels.binary_search_perplexity(sqd, perplexity, tol=PERPLEXITY_TOL)
    return (cond + cond.T) / (2.0 * n)


def tsne(vectors: np.ndarray, cfg: TsneConfig | None = None) -> Layout2D:
    """Project to 2-D by momentum gradient descent on KL(P || Q).

    Deterministic under a fixed seed. With fewer than 4 points perplexity is
    undefined; the points are emitted on a line with a warning instead.
    """
    cfg = cfg or TsneConfig()
    x = np.ascontiguousarray(vectors, dtype=np.float64)
    n = x.shape[0]
    if n < 4:
        warnings.warn(f"n={n} < 4: emitting a fixed-line layout", stacklevel=2)
        points = np.stack([np.arange(n, dtype=np.float64), np.zeros(n)], axis=1)
        return Layout2D(points=points, final_kl=0.0)

    perp = _resolve_perplexity(cfg, n)
    p = pairwise_affinities(x, perp)
    p_exaggerated = p * cfg.early_exaggeration_factor

    rng = np.random.default_rng(cfg.seed)
    y = rng.standard_normal((n, 2)) * INIT_SCALE
    velocity = np.zeros_like(y)
    history: list[float] = []

    for it in range(cfg.iterations):
        exploring = it < cfg.early_exaggeration_iters
        p_grad = p_exaggerated if exploring else p
        momentum = EXAGGERATION_MOMENTUM if exploring else FINAL_MOMENTUM
        kl, grad = kernels.kl_grad(p_grad, y, p)
        history.append(float(kl))
        velocity = momentum * velocity - cfg.learning_rate * grad
        y = y + velocity
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"t-SNE diverged at iteration {it}")

    final_kl, _ = kernels.kl_grad(p, y, p)
    return Layout2D(points=y, final_kl=float(final_kl), kl_history=history)


def write_layout_csv(
    path: str | Path,
    layout: Layout2D,
    chunk_ids: list[int],
    cluster_ids: list[int] | np.ndarray,
    keywords_by_chunk: dict[int, list[str]] | None = None,
) -> None:
    """Plot-ready CSV: chunk_id, x, y, cluster_id, keywords (semicolon-joined)."""
    keywords_by_chunk = keywords_by_chunk or {}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chunk_id", "x", "y", "cluster_id", "keywords"])
        for row, chunk_id in enumerate(chunk_ids):
            writer.writerow(
                [
                    chunk_id,
                    repr(float(layout.points[row, 0])),
                    repr(float(layout.points[row, 1])),
                    int(cluster_ids[row]),
                    ";".join(keywords_by_chunk.get(chunk_id, [])),
                ]
            )
