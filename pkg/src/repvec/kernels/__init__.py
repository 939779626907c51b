"""Hot numerical kernels with a compiled core and a pure-numpy fallback.

The compiled extension (Cython) is preferred when importable; set
REPVEC_KERNELS=python or REPVEC_KERNELS=cython to force a backend. Both
expose the same four functions:

    pairwise_sq_dists(x)                     -> (n, n) squared distances
    binary_search_perplexity(sqd, perp, tol) -> row-conditional P
    kl_grad(p_grad, y, p_kl)                 -> (kl, gradient)
    assign_points(x, centroids)              -> (labels, squared distances)
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels

    _HAVE_COMPILED = True
except ImportError:
    _ckernels = None
    _HAVE_COMPILED = False


def get_backend(name: str):
    """Return a backend module by name ("python" or "cython")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        if not _HAVE_COMPILED:
            raise ImportError("compiled kernel extension is not built")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    return ["python", "cython"] if _HAVE_COMPILED else ["python"]


_requested = os.environ.get("REPVEC_KERNELS", "auto")
if _requested == "auto":
    _active = _ckernels if _HAVE_COMPILED else _pykernels
else:
    _active = get_backend(_requested)


def active_backend() -> str:
    return _active.BACKEND_NAME


pairwise_sq_dists = _active.pairwise_sq_dists
binary_search_perplexity = _active.binary_search_perplexity
kl_grad = _active.kl_grad
assign_points = _active.assign_points
