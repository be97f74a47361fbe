"""Pure numpy versions of the pairwise kernels (fallback when the compiled
extension is not built)."""
import numpy as np

_BLOCK = 512


def _sqdist(A, B):
    return np.sum((A[:, None, :] - B[None, :, :]) ** 2, axis=-1)


def min_ratio_pairs(X, Y, start=0, stop=-1, tol=1e-12):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = len(X)
    if stop < 0 or stop > n:
        stop = n
    best = np.inf
    for i0 in range(start, stop, _BLOCK):
        i1 = min(i0 + _BLOCK, stop)
        a = _sqdist(X[i0:i1], X[i0:])
        b = _sqdist(Y[i0:i1], Y[i0:])
        # keep j > i only
        rows = np.arange(i1 - i0)[:, None]
        cols = np.arange(n - i0)[None, :]
        ok = (cols > rows) & (a >= tol * tol)
        if ok.any():
            best = min(best, float(np.min(b[ok] / a[ok])))
    return float(np.sqrt(best))


def min_ratio_cross(X1, Y1, X2, Y2, start=0, stop=-1, tol=1e-12):
    X1, Y1, X2, Y2 = (np.asarray(v, dtype=float) for v in (X1, Y1, X2, Y2))
    n = len(X1)
    if stop < 0 or stop > n:
        stop = n
    best = np.inf
    for i0 in range(start, stop, _BLOCK):
        i1 = min(i0 + _BLOCK, stop)
        a = _sqdist(X1[i0:i1], X2)
        b = _sqdist(Y1[i0:i1], Y2)
        ok = a >= tol * tol
        if ok.any():
            best = min(best, float(np.min(b[ok] / a[ok])))
    return float(np.sqrt(best))


def pair_energy(Y, Z, alpha, grad=True, tol=1e-14):
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    n = len(Y)
    dYY = Y[:, None, :] - Y[None, :, :]
    sYY = np.sum(dYY**2, axis=-1)
    sYY[np.arange(n), np.arange(n)] = np.inf
    dYZ = Y[:, None, :] - Z[None, :, :]
    sYZ = np.sum(dYZ**2, axis=-1)
    if np.min(sYY, initial=np.inf) < tol**2 or np.min(sYZ, initial=np.inf) < tol**2:
        return np.inf, None, None
    pYY = sYY ** (-0.5 * alpha)
    pYZ = sYZ ** (-0.5 * alpha)
    e = float(pYY.sum() + pYZ.sum())
    if not grad:
        return e, None, None
    cYY = -2.0 * alpha * pYY / sYY
    cYZ = -alpha * pYZ / sYZ
    gY = np.einsum("ij,ijk->ik", cYY, dYY) + np.einsum("ij,ijk->ik", cYZ, dYZ)
    gZ = -np.einsum("ij,ijk->jk", cYZ, dYZ)
    return e, gY, gZ
