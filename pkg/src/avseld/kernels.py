"""Hot numeric kernels.

Each kernel has a numba implementation and a numpy reference path with the
same arithmetic. ``AVSELD_NO_JIT=1`` selects the numpy path globally; the
``backend`` argument overrides it per call (used by tests and benchmarks).
"""
import numpy as np

from ._jit import njit, prange, use_jit


def _pick(backend):
    if backend is None:
        return "numba" if use_jit() else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not use_jit():
        raise RuntimeError("numba backend requested but numba is disabled")
    return backend


# --------------------------------------------------------------------------
# WPE, single channel, one STFT bin row at a time
# --------------------------------------------------------------------------

def _wpe_row_numpy(x, taps, delay, iterations, eps, reg, objective, g):
    T = x.shape[0]
    Y = np.zeros((taps, T), dtype=np.complex128)
    for k in range(taps):
        lag = delay + k
        if lag < T:
            Y[k, lag:] = x[: T - lag]
    d = x.copy()
    lam = np.maximum(d.real**2 + d.imag**2, eps)
    objective[0] = np.sum((d.real**2 + d.imag**2) / lam + np.log(lam))
    for it in range(iterations):
        Yw = Y / lam
        R = Yw @ Y.conj().T
        r = Yw @ x.conj()
        tr = np.trace(R).real
        if tr > 0.0:
            R = R + (reg * tr / taps) * np.eye(taps)
            g[:] = np.linalg.solve(R, r)
            d = x - g.conj() @ Y
        lam = np.maximum(d.real**2 + d.imag**2, eps)
        objective[it + 1] = np.sum((d.real**2 + d.imag**2) / lam + np.log(lam))
    return d


@njit(cache=True)
def _wpe_row_numba(x, taps, delay, iterations, eps, reg, objective, g):
    T = x.shape[0]
    Y = np.zeros((taps, T), dtype=np.complex128)
    for k in range(taps):
        lag = delay + k
        for t in range(lag, T):
            Y[k, t] = x[t - lag]
    YH = np.ascontiguousarray(np.conj(Y).T)
    xc = np.conj(x)
    d = x.copy()
    p = d.real**2 + d.imag**2
    lam = np.maximum(p, eps)
    objective[0] = np.sum(p / lam + np.log(lam))
    eye = np.eye(taps).astype(np.complex128)
    for it in range(iterations):
        Yw = np.empty_like(Y)
        for k in range(taps):
            for t in range(T):
                Yw[k, t] = Y[k, t] / lam[t]
        R = np.dot(Yw, YH)
        r = np.dot(Yw, xc)
        tr = 0.0
        for k in range(taps):
            tr += R[k, k].real
        if tr > 0.0:
            R = R + (reg * tr / taps) * eye
            g[:] = np.linalg.solve(R, r)
            d = x - np.dot(np.conj(g), Y)
        p = d.real**2 + d.imag**2
        lam = np.maximum(p, eps)
        objective[it + 1] = np.sum(p / lam + np.log(lam))
    return d


@njit(cache=True, parallel=True)
def _wpe_numba(X, taps, delay, iterations, eps, reg):
    F, T = X.shape
    D = np.empty_like(X)
    G = np.zeros((F, taps), dtype=np.complex128)
    obj = np.zeros((F, iterations + 1))
    for f in prange(F):
        D[f] = _wpe_row_numba(np.ascontiguousarray(X[f]), taps, delay, iterations, eps, reg, obj[f], G[f])
    return D, G, obj


def wpe_bins(X, taps, delay, iterations, eps, reg, backend=None):
    """Dereverberate a single-channel spectrogram ``X`` of shape (F, T).

    Returns the filtered spectrogram, the final prediction filters (F, taps)
    (zero when no iteration ran) and the per-bin objective trace of shape
    (F, iterations + 1); entry 0 is the objective of the unfiltered input.
    """
    X = np.ascontiguousarray(X, dtype=np.complex128)
    if _pick(backend) == "numba":
        return _wpe_numba(X, int(taps), int(delay), int(iterations), float(eps), float(reg))
    F, T = X.shape
    D = np.empty_like(X)
    G = np.zeros((F, taps), dtype=np.complex128)
    obj = np.zeros((F, iterations + 1))
    for f in range(F):
        D[f] = _wpe_row_numpy(X[f], taps, delay, iterations, eps, reg, obj[f], G[f])
    return D, G, obj


def apply_prediction_filter(X, G, delay):
    """``X(t) - sum_k conj(G_k) X(t - delay - k)`` per bin; X is (F, T), G is (F, taps)."""
    F, T = X.shape
    out = X.copy()
    for k in range(G.shape[1]):
        lag = delay + k
        if lag < T:
            out[:, lag:] -= np.conj(G[:, k])[:, None] * X[:, : T - lag]
    return out


# --------------------------------------------------------------------------
# bilinear remap, horizontal wraparound, vertical clamp
# --------------------------------------------------------------------------

def _remap_numpy(src, rows, cols):
    H, W = src.shape[:2]
    r = np.clip(rows, 0.0, H - 1.0)
    r0 = np.floor(r).astype(np.int64)
    r1 = np.minimum(r0 + 1, H - 1)
    fr = (r - r0)[..., None]
    c0f = np.floor(cols)
    fc = (cols - c0f)[..., None]
    c0 = c0f.astype(np.int64) % W
    c1 = (c0 + 1) % W
    top = src[r0, c0] * (1.0 - fc) + src[r0, c1] * fc
    bot = src[r1, c0] * (1.0 - fc) + src[r1, c1] * fc
    return top * (1.0 - fr) + bot * fr


@njit(cache=True, parallel=True)
def _remap_numba(src, rows, cols):
    H, W, C = src.shape
    Ho, Wo = rows.shape
    out = np.empty((Ho, Wo, C))
    for i in prange(Ho):
        for j in range(Wo):
            r = min(max(rows[i, j], 0.0), H - 1.0)
            r0 = int(np.floor(r))
            r1 = min(r0 + 1, H - 1)
            fr = r - r0
            c0f = np.floor(cols[i, j])
            fc = cols[i, j] - c0f
            c0 = int(c0f) % W
            c1 = (c0 + 1) % W
            for ch in range(C):
                top = src[r0, c0, ch] * (1.0 - fc) + src[r0, c1, ch] * fc
                bot = src[r1, c0, ch] * (1.0 - fc) + src[r1, c1, ch] * fc
                out[i, j, ch] = top * (1.0 - fr) + bot * fr
    return out


def remap_bilinear(src, rows, cols, backend=None):
    """Sample ``src`` (H, W, C) at fractional pixel-center coordinates.

    Columns wrap around (the image spans 360 degrees of azimuth), rows clamp.
    """
    src = np.ascontiguousarray(src, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    cols = np.ascontiguousarray(cols, dtype=np.float64)
    if _pick(backend) == "numba":
        return _remap_numba(src, rows, cols)
    return _remap_numpy(src, rows, cols)
