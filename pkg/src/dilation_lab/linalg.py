"""Dense complex linear algebra used throughout the package.

Random streams: every sampler takes an explicit integer seed (or a
``numpy.random.Generator``) and draws from ``numpy.random.PCG64``.  Two runs
with the same seed produce bit-identical matrices on the same platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, NoConvergence, NotHermitian, NotPSD, NotUnitary

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


def as_cmatrix(A) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    A = np.array(A, dtype=np.complex128, ndmin=2)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + dagger(A))


def opnorm(A: np.ndarray) -> float:
    """Spectral norm (largest singular value); 0 for empty matrices."""
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def unitarity_defect(U: np.ndarray) -> float:
    """``max(|U*U - I|, |UU* - I|)`` in spectral norm."""
    n = U.shape[0]
    eye = np.eye(n)
    return max(opnorm(dagger(U) @ U - eye), opnorm(U @ dagger(U) - eye))


def is_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    A = np.asarray(A)
    if A.shape[0] != A.shape[1]:
        return False
    scale = 1.0 + (np.max(np.abs(A)) if A.size else 0.0)
    return bool(np.max(np.abs(A - dagger(A)), initial=0.0) <= tol * scale)


def check_unitary(U, tol: float = 1e-8, what: str = "matrix", exc=NotUnitary) -> np.ndarray:
    U = as_cmatrix(U)
    if U.shape[0] != U.shape[1]:
        raise exc(f"{what} is not square: shape {U.shape}")
    err = unitarity_defect(U)
    if err > tol:
        raise exc(f"{what} is not unitary: |U*U - I| = {err:.3e} > {tol:.1e}")
    return U


def hermitian_eigs(A, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix."""
    A = as_cmatrix(A)
    if not is_hermitian(A, tol):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    try:
        w, V = np.linalg.eigh(hermitian_part(A))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"Hermitian eigensolver failed: {exc}") from exc
    return w, V


def unitary_eigs(U, tol: float = 1e-8) -> np.ndarray:
    """Eigenvalues of a unitary matrix (complex Schur / QR iteration, order unspecified)."""
    U = check_unitary(U, tol, "U")
    try:
        z = np.linalg.eigvals(U)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigensolver failed: {exc}") from exc
    off = np.max(np.abs(np.abs(z) - 1.0), initial=0.0)
    if off > 1e-9:
        raise NoConvergence(f"eigenvalues of a unitary left the circle by {off:.2e}")
    return z


def psd_sqrt(A, tol: float = PSD_TOL) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues in [-tol, 0) are clamped to zero."""
    w, V = hermitian_eigs(A, tol=max(HERMITIAN_TOL, tol))
    if w.size and w[0] < -tol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} < -{tol:.0e}")
    root = np.sqrt(np.clip(w, 0.0, None))
    return hermitian_part((V * root) @ dagger(V))


def gram_correct(B, G) -> np.ndarray:
    """Return ``B G^{-1/2}``, re-orthonormalizing columns whose Gram matrix is ``G``."""
    B = as_cmatrix(B)
    w, V = hermitian_eigs(G, tol=1e-9)
    if w[0] < 1e-6:
        raise IllConditioned(f"Gram matrix nearly singular (lambda_min = {w[0]:.3e})")
    inv_root = (V / np.sqrt(w)) @ dagger(V)
    return B @ inv_root


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def haar_unitary(n: int, seed=0) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix, R-diagonal phases fixed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = rng_from(seed)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def haar_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return x / np.linalg.norm(x)


@dataclass(frozen=True)
class UnitaryParams:
    """n^2 real coordinates of a skew-Hermitian generator K.

    Layout: the n diagonal entries are ``i*params[:n]``; the strictly upper
    triangle (row-major) takes ``params[n::2] + i*params[n+1::2]`` and the
    lower triangle is fixed by skew-Hermiticity.
    """

    n: int
    params: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.params, dtype=np.float64).reshape(-1)
        if p.shape[0] != self.n * self.n:
            raise ValueError(f"expected {self.n * self.n} parameters, got {p.shape[0]}")
        if not np.all(np.isfinite(p)):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "params", p)

    @classmethod
    def zeros(cls, n: int) -> "UnitaryParams":
        return cls(n, np.zeros(n * n))

    def generator(self) -> np.ndarray:
        n, p = self.n, self.params
        K = np.zeros((n, n), dtype=np.complex128)
        K[np.diag_indices(n)] = 1j * p[:n]
        iu = np.triu_indices(n, 1)
        K[iu] = p[n::2] + 1j * p[n + 1 :: 2]
        K[(iu[1], iu[0])] = -np.conj(K[iu])
        return K


def unitary_from_params(p: UnitaryParams) -> np.ndarray:
    """exp(K) through the eigendecomposition of the Hermitian matrix -iK."""
    H = -1j * p.generator()
    w, V = np.linalg.eigh(hermitian_part(H))
    return (V * np.exp(1j * w)) @ dagger(V)


def orthonormal_columns(X, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column span of X (rank decided by SVD)."""
    X = as_cmatrix(X)
    if X.size == 0:
        return X.reshape(X.shape[0], 0)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return U[:, :rank]
