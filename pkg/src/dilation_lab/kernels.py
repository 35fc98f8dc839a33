"""Hot numeric loops, each in a numba and a pure-numpy flavour.

The backend is picked once at import from ``DILATION_LAB_BACKEND``
(``numba`` or ``numpy``).  When the variable is unset numba is used if it
imports cleanly.  ``set_backend`` switches at runtime, which the tests and
the benchmark script rely on.

``DILATION_LAB_THREADS`` caps the numba thread pool.

Blaschke-Potapov factors are passed in flattened form: ``lams`` (n,),
``units`` (n,) with ``units[j] = |lam|/lam`` (or -1 when lam == 0, so that
the same formula reduces to ``z``), and ``projs`` (n, N, N).
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # skip TBB, which warns loudly when the system copy is older than numba expects
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def _initial_backend() -> str:
    requested = os.environ.get("DILATION_LAB_BACKEND", "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested == "numba" and not HAVE_NUMBA:
        raise ImportError("DILATION_LAB_BACKEND=numba but numba is not importable")
    return "numba" if HAVE_NUMBA else "numpy"


_backend = _initial_backend()

if HAVE_NUMBA and os.environ.get("DILATION_LAB_THREADS"):
    numba.set_num_threads(
        max(1, min(int(os.environ["DILATION_LAB_THREADS"]), numba.config.NUMBA_NUM_THREADS))
    )


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Select the kernel backend; returns the previous one."""
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba is not installed")
    previous, _backend = _backend, name
    return previous


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _scalar_factors(zs, lams, units):
    # (n, M) scalar Blaschke factors u_j (lam_j - z) / (1 - conj(lam_j) z)
    return units[:, None] * (lams[:, None] - zs[None, :]) / (
        1.0 - np.conj(lams)[:, None] * zs[None, :]
    )


def _bp_values_np(zs, lams, units, projs, V):
    M, N = zs.shape[0], V.shape[0]
    acc = np.broadcast_to(np.eye(N, dtype=np.complex128), (M, N, N)).copy()
    if lams.shape[0]:
        s = _scalar_factors(zs, lams, units)
        for j in range(lams.shape[0]):
            acc = acc + (s[j] - 1.0)[:, None, None] * (acc @ projs[j])
    return acc @ V


def _tmw_values_np(zs, lams, units, projs, vecs, owner):
    M, N, d = zs.shape[0], projs.shape[1], vecs.shape[0]
    out = np.empty((M, N, d), dtype=np.complex128)
    acc = np.broadcast_to(np.eye(N, dtype=np.complex128), (M, N, N)).copy()
    s = _scalar_factors(zs, lams, units)
    for j in range(lams.shape[0]):
        cols = np.nonzero(owner == j)[0]
        if cols.size:
            kernel = np.sqrt(1.0 - abs(lams[j]) ** 2) / (1.0 - np.conj(lams[j]) * zs)
            out[:, :, cols] = (acc @ vecs[cols].T) * kernel[:, None, None]
        acc = acc + (s[j] - 1.0)[:, None, None] * (acc @ projs[j])
    return out


def _hermitian_parts(T, angles):
    rot = np.exp(-1j * angles)[:, None, None] * T[None, :, :]
    return 0.5 * (rot + np.conj(np.swapaxes(rot, 1, 2)))


def _support_values_np(T, angles):
    return np.linalg.eigvalsh(_hermitian_parts(T, angles))[:, -1]


def _top_eig_batch_np(H):
    return np.linalg.eigvalsh(H)[:, -1]


def _det_abs_scan_np(zs, lams, units, projs, V, Omega):
    theta = _bp_values_np(zs, lams, units, projs, V)
    return np.abs(np.linalg.det(zs[:, None, None] * theta - Omega[None, :, :]))


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _apply_factor(acc, P, c, tmp):
        # acc <- acc + c * (acc @ P), written out for tiny N
        N = acc.shape[0]
        for a in range(N):
            for b in range(N):
                t = 0j
                for k in range(N):
                    t += acc[a, k] * P[k, b]
                tmp[a, b] = t
        for a in range(N):
            for b in range(N):
                acc[a, b] += c * tmp[a, b]

    @njit(cache=True)
    def _product_at(z, lams, units, projs, acc, tmp):
        N = acc.shape[0]
        for a in range(N):
            for b in range(N):
                acc[a, b] = 1.0 if a == b else 0.0
        for j in range(lams.shape[0]):
            s = units[j] * (lams[j] - z) / (1.0 - np.conj(lams[j]) * z)
            _apply_factor(acc, projs[j], s - 1.0, tmp)

    @njit(cache=True)
    def _abs_det_inplace(A):
        # LU with partial pivoting; destroys A
        N = A.shape[0]
        det = 1.0
        for c in range(N):
            p = c
            for r in range(c + 1, N):
                if abs(A[r, c]) > abs(A[p, c]):
                    p = r
            piv = A[p, c]
            if piv == 0:
                return 0.0
            if p != c:
                for k in range(N):
                    A[c, k], A[p, k] = A[p, k], A[c, k]
            det *= abs(piv)
            for r in range(c + 1, N):
                f = A[r, c] / piv
                for k in range(c + 1, N):
                    A[r, k] -= f * A[c, k]
        return det

    @njit(cache=True, parallel=True)
    def _bp_values_nb(zs, lams, units, projs, V):
        M = zs.shape[0]
        N = V.shape[0]
        out = np.empty((M, N, N), dtype=np.complex128)
        for m in prange(M):
            acc = np.empty((N, N), dtype=np.complex128)
            tmp = np.empty((N, N), dtype=np.complex128)
            _product_at(zs[m], lams, units, projs, acc, tmp)
            for a in range(N):
                for b in range(N):
                    t = 0j
                    for k in range(N):
                        t += acc[a, k] * V[k, b]
                    out[m, a, b] = t
        return out

    @njit(cache=True, parallel=True)
    def _tmw_values_nb(zs, lams, units, projs, vecs, owner):
        M = zs.shape[0]
        N = projs.shape[1]
        d = vecs.shape[0]
        n = lams.shape[0]
        out = np.empty((M, N, d), dtype=np.complex128)
        for m in prange(M):
            z = zs[m]
            acc = np.eye(N, dtype=np.complex128)
            tmp = np.empty((N, N), dtype=np.complex128)
            for j in range(n):
                lam = lams[j]
                kernel = np.sqrt(1.0 - abs(lam) ** 2) / (1.0 - np.conj(lam) * z)
                for k in range(d):
                    if owner[k] == j:
                        for a in range(N):
                            t = 0j
                            for b in range(N):
                                t += acc[a, b] * vecs[k, b]
                            out[m, a, k] = kernel * t
                s = units[j] * (lam - z) / (1.0 - np.conj(lam) * z)
                _apply_factor(acc, projs[j], s - 1.0, tmp)
        return out

    @njit(cache=True, parallel=True)
    def _support_values_nb(T, angles):
        G = angles.shape[0]
        out = np.empty(G, dtype=np.float64)
        Th = np.ascontiguousarray(np.conj(T).T)
        for g in prange(G):
            rot = np.exp(-1j * angles[g])
            H = 0.5 * (rot * T + np.conj(rot) * Th)
            out[g] = np.linalg.eigvalsh(H)[-1]
        return out

    @njit(cache=True, parallel=True)
    def _top_eig_batch_nb(H):
        K = H.shape[0]
        out = np.empty(K, dtype=np.float64)
        for k in prange(K):
            out[k] = np.linalg.eigvalsh(np.ascontiguousarray(H[k]))[-1]
        return out

    @njit(cache=True, parallel=True)
    def _det_abs_scan_nb(zs, lams, units, projs, V, Omega):
        M = zs.shape[0]
        N = V.shape[0]
        out = np.empty(M, dtype=np.float64)
        for m in prange(M):
            z = zs[m]
            acc = np.empty((N, N), dtype=np.complex128)
            tmp = np.empty((N, N), dtype=np.complex128)
            _product_at(z, lams, units, projs, acc, tmp)
            for a in range(N):
                for b in range(N):
                    t = 0j
                    for k in range(N):
                        t += acc[a, k] * V[k, b]
                    tmp[a, b] = z * t - Omega[a, b]
            out[m] = _abs_det_inplace(tmp)
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def _factor_args(lams, units, projs, N):
    lams = np.ascontiguousarray(lams, dtype=np.complex128).reshape(-1)
    units = np.ascontiguousarray(units, dtype=np.complex128).reshape(-1)
    projs = np.ascontiguousarray(projs, dtype=np.complex128).reshape(lams.shape[0], N, N)
    return lams, units, projs


def bp_values(zs, lams, units, projs, V) -> np.ndarray:
    """Values of the product ``b_1 ... b_n V`` at every point of ``zs``; shape (M, N, N)."""
    zs = _c(np.atleast_1d(zs))
    V = _c(V)
    lams, units, projs = _factor_args(lams, units, projs, V.shape[0])
    if _backend == "numba":
        return _bp_values_nb(zs, lams, units, projs, V)
    return _bp_values_np(zs, lams, units, projs, V)


def tmw_values(zs, lams, units, projs, vecs, owner) -> np.ndarray:
    """Orthonormal rational basis functions at ``zs``; shape (M, N, d).

    Element k is ``B_{j-1}(z) sqrt(1-|lam_j|^2) / (1 - conj(lam_j) z) vecs[k]``
    with ``j = owner[k]``.
    """
    zs = _c(np.atleast_1d(zs))
    N = np.shape(projs)[-1]
    lams, units, projs = _factor_args(lams, units, projs, N)
    vecs = _c(vecs).reshape(-1, N)
    owner = np.ascontiguousarray(owner, dtype=np.int64)
    if _backend == "numba":
        return _tmw_values_nb(zs, lams, units, projs, vecs, owner)
    return _tmw_values_np(zs, lams, units, projs, vecs, owner)


def support_values(T, angles) -> np.ndarray:
    """Top eigenvalue of Re(e^{-i phi} T) for each angle."""
    T = _c(T)
    angles = np.ascontiguousarray(angles, dtype=np.float64)
    if _backend == "numba":
        return _support_values_nb(T, angles)
    return _support_values_np(T, angles)


def top_eig_batch(H) -> np.ndarray:
    """Largest eigenvalue of each Hermitian matrix in a (K, n, n) stack."""
    H = _c(H)
    if _backend == "numba":
        return _top_eig_batch_nb(H)
    return _top_eig_batch_np(H)


def det_abs_scan(zs, lams, units, projs, V, Omega) -> np.ndarray:
    """``|det(z Theta(z) - Omega)|`` at every point of ``zs``."""
    zs = _c(np.atleast_1d(zs))
    V = _c(V)
    lams, units, projs = _factor_args(lams, units, projs, V.shape[0])
    Omega = _c(Omega)
    if _backend == "numba":
        return _det_abs_scan_nb(zs, lams, units, projs, V, Omega)
    return _det_abs_scan_np(zs, lams, units, projs, V, Omega)
