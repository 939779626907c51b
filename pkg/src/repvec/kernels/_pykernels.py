"""Pure-numpy kernel backend.

Same surface as the compiled backend; selected automatically when the
extension is not built. All arrays are float64, C-contiguous.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    """All-pairs squared Euclidean distances, zero diagonal, clipped >= 0."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    sq = np.einsum("ij,ij->i", x, x)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def binary_search_perplexity(
    sqd: np.ndarray, perplexity: float, tol: float = 1e-5, max_steps: int = 100
) -> np.ndarray:
    """Per-row Gaussian bandwidths matching the target perplexity.

    Returns the row-conditional probability matrix (rows sum to 1, zero
    diagonal). Bisection on the precision beta, with doubling/halving until
    the target is bracketed; distances are shifted by the row minimum for
    exp stability (the shift cancels in the normalization).
    """
    n = sqd.shape[0]
    p = np.zeros((n, n), dtype=np.float64)
    mask = ~np.eye(n, dtype=bool)
    for i in range(n):
        d = sqd[i][mask[i]]
        d = d - d.min()
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        row = np.exp(-d)
        for _ in range(max_steps):
            row = np.exp(-d * beta)
            total = row.sum()
            if total <= 0.0:
                realized = 1.0
            else:
                # perplexity = exp(H), H = ln(total) + beta * E[d]
                h = np.log(total) + beta * float((d * row).sum()) / total
                realized = np.exp(h)
            diff = realized - perplexity
            if abs(diff) <= tol:
                break
            if diff > 0.0:
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
        total = row.sum()
        if total <= 0.0:
            row = np.ones_like(row)
            total = row.sum()
        p[i][mask[i]] = row / total
    return p


def kl_grad(
    p_grad: np.ndarray, y: np.ndarray, p_kl: np.ndarray
) -> tuple[float, np.ndarray]:
    """KL divergence and its gradient for a Student-t low-dim embedding.

    The gradient is taken against p_grad (which may be early-exaggerated);
    the reported divergence is always against p_kl, so it stays a true KL
    of two normalized distributions.
    """
    eps = np.finfo(np.float64).eps
    sqd = pairwise_sq_dists(y)
    w = 1.0 / (1.0 + sqd)
    np.fill_diagonal(w, 0.0)
    total = w.sum()
    q = w / total

    logs = np.where(p_kl > 0.0, np.log(np.maximum(p_kl, eps) / np.maximum(q, eps)), 0.0)
    kl = float((p_kl * logs).sum())

    pq = (p_grad - q) * w
    # grad_m = 4 * sum_l pq[m, l] * (y_m - y_l)
    grad = 4.0 * (y * pq.sum(axis=1)[:, None] - pq @ y)
    return kl, grad


def assign_points(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest centroid per point: (labels, squared distances).

    Ties break toward the smaller centroid id (argmin semantics).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    c = np.ascontiguousarray(centroids, dtype=np.float64)
    xsq = np.einsum("ij,ij->i", x, x)
    csq = np.einsum("ij,ij->i", c, c)
    d = xsq[:, None] + csq[None, :] - 2.0 * (x @ c.T)
    np.maximum(d, 0.0, out=d)
    labels = np.argmin(d, axis=1)
    return labels.astype(np.int64), d[np.arange(x.shape[0]), labels]
