"""Kernel backend selection: compiled extension if built, numpy otherwise.

``set_workers`` caps the thread count used to split pairwise-sum targets;
the compiled kernels release the GIL, so chunked targets run in parallel.
"""

from __future__ import annotations

import numpy as np

try:
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:  # extension not built; numpy fallback is feature-complete
    from . import _kernels_np as _impl

    BACKEND = "numpy"

psor_sweep = _impl.psor_sweep

_WORKERS = 1


def set_workers(n: int) -> None:
    global _WORKERS
    _WORKERS = max(1, int(n))


def backend_name() -> str:
    return BACKEND


def _chunked(fn, targets, *args):
    m = targets.shape[0]
    if _WORKERS == 1 or m < 4 * _WORKERS:
        return fn(targets, *args)
    from concurrent.futures import ThreadPoolExecutor

    bounds = np.linspace(0, m, _WORKERS + 1).astype(int)
    chunks = [np.ascontiguousarray(targets[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=_WORKERS) as pool:
        parts = list(pool.map(lambda c: fn(c, *args), chunks))
    return np.concatenate(parts, axis=0)


def inv_r_sum(targets, sources, charge, skip):
    m = targets.shape[0]
    if _WORKERS == 1 or m < 4 * _WORKERS:
        return _impl.inv_r_sum(targets, sources, charge, skip)
    from concurrent.futures import ThreadPoolExecutor

    bounds = np.linspace(0, m, _WORKERS + 1).astype(int)
    with ThreadPoolExecutor(max_workers=_WORKERS) as pool:
        parts = list(
            pool.map(
                lambda ab: _impl.inv_r_sum(
                    np.ascontiguousarray(targets[ab[0]:ab[1]]), sources, charge,
                    np.ascontiguousarray(skip[ab[0]:ab[1]]),
                ),
                zip(bounds[:-1], bounds[1:]),
            )
        )
    return np.concatenate(parts)


def aniso_grad_inv_r_sum(targets, sources, charge, vsq):
    return _chunked(_impl.aniso_grad_inv_r_sum, targets, sources, charge, vsq)


def aniso_grad_z2_r3_sum(targets, sources, charge, vsq):
    return _chunked(_impl.aniso_grad_z2_r3_sum, targets, sources, charge, vsq)
