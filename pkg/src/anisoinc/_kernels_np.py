"""Pure-numpy fallback for the compiled kernels (same signatures)."""

from __future__ import annotations

import numpy as np

_MASK_CACHE: dict[tuple[int, int], np.ndarray] = {}

# Pairwise sums are chunked over sources to bound the temporary arrays.
_CHUNK = 2_000_000


def _color_mask(n: int, color: int) -> np.ndarray:
    key = (n, color)
    if key not in _MASK_CACHE:
        idx = np.arange(1, n - 1)
        s = idx[:, None, None] + idx[None, :, None] + idx[None, None, :]
        _MASK_CACHE[key] = (s % 2) == color
    return _MASK_CACHE[key]


def psor_sweep(v: np.ndarray, phi: np.ndarray, omega: float, color: int) -> float:
    n = v.shape[0]
    s = (
        v[:-2, 1:-1, 1:-1] + v[2:, 1:-1, 1:-1]
        + v[1:-1, :-2, 1:-1] + v[1:-1, 2:, 1:-1]
        + v[1:-1, 1:-1, :-2] + v[1:-1, 1:-1, 2:]
    )
    inner = v[1:-1, 1:-1, 1:-1]
    cand = (1.0 - omega) * inner + (omega / 6.0) * s
    new = np.maximum(phi[1:-1, 1:-1, 1:-1], cand)
    mask = _color_mask(n, color)
    delta = new[mask] - inner[mask]
    inner[mask] = new[mask]
    return float(np.max(np.abs(delta))) if delta.size else 0.0


def inv_r_sum(targets, sources, charge, skip):
    m = targets.shape[0]
    out = np.zeros(m)
    nsrc = sources.shape[0]
    step = max(1, _CHUNK // max(nsrc, 1))
    for lo in range(0, m, step):
        hi = min(lo + step, m)
        d = targets[lo:hi, None, :] - sources[None, :, :]
        r = np.sqrt(np.einsum("abk,abk->ab", d, d))
        rows = np.arange(lo, hi)
        has_skip = skip[rows] >= 0
        r[has_skip, skip[rows[has_skip]]] = np.inf
        out[lo:hi] = (charge[None, :] / r).sum(axis=1)
    return out


def aniso_grad_inv_r_sum(targets, sources, charge, vsq):
    m = targets.shape[0]
    out = np.zeros((m, 3))
    nsrc = sources.shape[0]
    step = max(1, _CHUNK // max(nsrc, 1))
    metric = np.array([1.0, 1.0, vsq])
    for lo in range(0, m, step):
        d = targets[lo:lo + step, None, :] - sources[None, :, :]
        r2 = np.einsum("abk,abk,k->ab", d, d, metric)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = charge[None, :] / (r2 * np.sqrt(r2))
        w[r2 == 0.0] = 0.0
        out[lo:lo + step] = -np.einsum("ab,abk,k->ak", w, d, metric)
    return out


def aniso_grad_z2_r3_sum(targets, sources, charge, vsq):
    m = targets.shape[0]
    out = np.zeros((m, 3))
    nsrc = sources.shape[0]
    step = max(1, _CHUNK // max(nsrc, 1))
    for lo in range(0, m, step):
        d = targets[lo:lo + step, None, :] - sources[None, :, :]
        dz = d[:, :, 2]
        r2 = d[:, :, 0] ** 2 + d[:, :, 1] ** 2 + vsq * dz**2
        with np.errstate(divide="ignore", invalid="ignore"):
            r3 = r2 * np.sqrt(r2)
            r5 = r3 * r2
            gx = -3.0 * charge[None, :] * d[:, :, 0] * dz**2 / r5
            gy = -3.0 * charge[None, :] * d[:, :, 1] * dz**2 / r5
            gz = charge[None, :] * (2.0 * dz / r3 - 3.0 * vsq * dz**3 / r5)
        for g in (gx, gy, gz):
            g[r2 == 0.0] = 0.0
        out[lo:lo + step, 0] = gx.sum(axis=1)
        out[lo:lo + step, 1] = gy.sum(axis=1)
        out[lo:lo + step, 2] = gz.sum(axis=1)
    return out
