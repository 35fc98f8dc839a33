"""Seeded random test objects: pure products and contractions with prescribed defects."""

from __future__ import annotations

import numpy as np

from .inner import BPFactor, BPProduct, purity_check
from .linalg import haar_unitary, rng_from


def random_disc_point(rng, rmax: float = 0.85) -> complex:
    # uniform in the disc of radius rmax
    return rmax * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())


def random_projection(N: int, rank: int, rng) -> np.ndarray:
    Q = haar_unitary(N, rng)[:, :rank]
    return Q @ Q.conj().T


def random_product(seed=0, N: int | None = None, d_max: int = 8, n_max: int = 5,
                   rmax: float = 0.85, purity_margin: float = 1e-2, max_tries: int = 200) -> BPProduct:
    """A random pure finite product with ``N <= 3`` and model dimension ``N <= d <= d_max``.

    Draws are rejected until ``|Theta(0)| <= 1 - purity_margin``.
    """
    rng = rng_from(seed)
    for _ in range(max_tries):
        n_dim = int(N) if N is not None else int(rng.integers(1, 4))
        n_fac = int(rng.integers(1, n_max + 1))
        factors, d = [], 0
        for _ in range(n_fac):
            rank = int(rng.integers(1, n_dim + 1))
            if d + rank > d_max:
                break
            lam = random_disc_point(rng, rmax)
            if rng.random() < 0.15:
                lam = 0.0
            factors.append(BPFactor(lam, random_projection(n_dim, rank, rng)))
            d += rank
        if not factors or d < n_dim:
            continue
        B = BPProduct(factors, haar_unitary(n_dim, rng), N=n_dim)
        if purity_check(B) <= 1.0 - purity_margin:
            return B
    raise RuntimeError("could not draw a pure product; loosen the constraints")


def random_contraction(n: int, defect_rank: int, seed=0, smax: float = 0.95) -> np.ndarray:
    """n x n contraction with both defect ranks equal to ``defect_rank``.

    ``n - defect_rank`` singular values equal 1; the rest are drawn from
    ``[0, smax]``.
    """
    rng = rng_from(seed)
    s = np.ones(n)
    s[:defect_rank] = smax * rng.random(defect_rank)
    return haar_unitary(n, rng) @ np.diag(s) @ haar_unitary(n, rng)


def random_matrix(n: int, seed=0, scale: float = 1.0) -> np.ndarray:
    rng = rng_from(seed)
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
