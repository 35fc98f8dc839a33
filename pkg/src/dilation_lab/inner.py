"""Matrix-valued finite Blaschke-Potapov products.

A factor ``b(P, lam)`` acts as the scalar Blaschke factor on ``ran P`` and
as the identity on its complement.  A product is the ordered left-to-right
product of factors followed by a constant unitary ``V``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidInput, NonIntegerRank, NotProjection, SingularResolvent
from .linalg import as_cmatrix, check_unitary, dagger, hermitian_eigs, opnorm, orthonormal_columns

PROJECTION_TOL = 1e-10
RANK_TOL = 1e-8
PURITY_TOL = 1e-8
NEAR_BOUNDARY = 1.0 - 1e-6


class InnerFunction:
    """Anything evaluable as an N x N matrix function on the closed disc.

    Subclasses implement ``values(zs)`` for a 1-D array of points and return
    an (M, N, N) array.  Calling the object with a scalar returns one matrix.
    """

    N: int

    def values(self, zs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, z):
        if np.ndim(z) == 0:
            return self.values(np.array([z], dtype=np.complex128))[0]
        return self.values(np.asarray(z, dtype=np.complex128).reshape(-1))

    def at_zero(self) -> np.ndarray:
        return self(0.0)


@dataclass(frozen=True)
class BPFactor:
    lam: complex
    P: np.ndarray

    def __post_init__(self):
        lam = complex(self.lam)
        if not np.isfinite(lam) or abs(lam) > 1.0 - 1e-12:
            raise InvalidInput(f"factor zero {lam} must lie in the open unit disc")
        P = as_cmatrix(self.P)
        if P.shape[0] != P.shape[1]:
            raise NotProjection(f"projection must be square, got {P.shape}")
        if opnorm(P - dagger(P)) > PROJECTION_TOL or opnorm(P @ P - P) > PROJECTION_TOL:
            raise NotProjection("P is not an orthogonal projection")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "P", P)

    @classmethod
    def from_span(cls, lam: complex, vectors) -> "BPFactor":
        """Factor whose projection is onto the span of the given column vectors."""
        Q = orthonormal_columns(vectors)
        return cls(lam, Q @ dagger(Q))

    @classmethod
    def full(cls, lam: complex, N: int) -> "BPFactor":
        return cls(lam, np.eye(N, dtype=np.complex128))

    @property
    def N(self) -> int:
        return self.P.shape[0]

    @property
    def rank(self) -> int:
        tr = float(np.trace(self.P).real)
        r = round(tr)
        if abs(tr - r) > RANK_TOL:
            raise NonIntegerRank(f"trace of projection {tr!r} is not an integer")
        return int(r)

    @property
    def unit(self) -> complex:
        # |lam|/lam, with -1 standing in for lam == 0 so that the general
        # formula collapses to the special case z P + (I - P).
        return -1.0 + 0j if self.lam == 0 else abs(self.lam) / self.lam

    @property
    def near_boundary(self) -> bool:
        return abs(self.lam) >= NEAR_BOUNDARY

    def range_basis(self) -> np.ndarray:
        """Orthonormal columns spanning ran P."""
        w, V = hermitian_eigs(self.P, tol=1e-9)
        return V[:, w > 0.5]


def factor_eval(f: BPFactor, z: complex) -> np.ndarray:
    lam = f.lam
    if lam == 0:
        s = z
    else:
        s = f.unit * (lam - z) / (1.0 - np.conj(lam) * z)
    eye = np.eye(f.N, dtype=np.complex128)
    return s * f.P + (eye - f.P)


class BPProduct(InnerFunction):
    """Finite left Blaschke-Potapov product ``b(P_1,lam_1) ... b(P_n,lam_n) V``."""

    def __init__(self, factors=(), V=None, N: int | None = None):
        factors = tuple(factors)
        if N is None:
            if factors:
                N = factors[0].N
            elif V is not None:
                N = np.shape(V)[0]
            else:
                raise InvalidInput("cannot infer dimension of an empty product")
        for f in factors:
            if f.N != N:
                raise InvalidInput(f"factor of dimension {f.N} in a product of dimension {N}")
        V = np.eye(N, dtype=np.complex128) if V is None else check_unitary(V, 1e-10, "constant unitary V")
        if V.shape[0] != N:
            raise InvalidInput("constant unitary has the wrong size")
        self.N = int(N)
        self.factors = factors
        self.V = V
        self._packed = None

    def __repr__(self):
        zeros = ", ".join(f"{f.lam:.3g}(rank {f.rank})" for f in self.factors)
        return f"BPProduct(N={self.N}, factors=[{zeros}])"

    def __len__(self):
        return len(self.factors)

    def packed(self):
        if self._packed is None:
            n, N = len(self.factors), self.N
            lams = np.array([f.lam for f in self.factors], dtype=np.complex128)
            units = np.array([f.unit for f in self.factors], dtype=np.complex128)
            projs = np.array([f.P for f in self.factors], dtype=np.complex128).reshape(n, N, N)
            self._packed = (lams, units, projs)
        return self._packed

    def values(self, zs):
        lams, units, projs = self.packed()
        return kernels.bp_values(zs, lams, units, projs, self.V)

    @property
    def model_dimension(self) -> int:
        return sum(f.rank for f in self.factors)

    @property
    def near_boundary(self) -> bool:
        return any(f.near_boundary for f in self.factors)

    def truncate(self, n: int) -> "BPProduct":
        return BPProduct(self.factors[:n], self.V, N=self.N)

    def times_z(self) -> "BPProduct":
        """The product ``z * Theta(z)``, written with a leading ``b(I, 0)``."""
        return BPProduct((BPFactor.full(0.0, self.N),) + self.factors, self.V, N=self.N)


def product_eval(B: BPProduct, z) -> np.ndarray:
    return B(z)


def purity_check(B: InnerFunction) -> float:
    """Largest singular value of Theta(0)."""
    return opnorm(B.at_zero())


def is_pure(B: InnerFunction, tol: float = PURITY_TOL) -> bool:
    return purity_check(B) <= 1.0 - tol


def model_dimension(B: BPProduct) -> int:
    return B.model_dimension


@dataclass
class FrostmanTransform(InnerFunction):
    """``z -> (Theta(z) - lam I)(I - conj(lam) Theta(z))^{-1}``."""

    theta: InnerFunction
    lam: complex
    cond_limit: float = field(default=1e12, repr=False)

    def __post_init__(self):
        self.lam = complex(self.lam)
        if abs(self.lam) >= 1.0:
            raise InvalidInput("Frostman parameter must lie in the open disc")
        self.N = self.theta.N

    def values(self, zs):
        th = self.theta.values(zs)
        if self.lam == 0:
            return th
        eye = np.eye(self.N, dtype=np.complex128)
        resolvent = eye - np.conj(self.lam) * th
        cond = np.linalg.cond(resolvent)
        if np.any(~np.isfinite(cond)) or np.max(cond) > self.cond_limit:
            raise SingularResolvent("I - conj(lam) Theta(z) is numerically singular")
        # Theta commutes with its own resolvent, so the side of the solve is immaterial.
        return np.linalg.solve(resolvent, th - self.lam * eye)


def frostman_transform(B: InnerFunction, lam: complex) -> FrostmanTransform:
    return FrostmanTransform(B, lam)


@dataclass
class DirectSum(InnerFunction):
    """Block-diagonal ``z -> diag(Theta(z), V)`` with a constant unitary V."""

    theta: InnerFunction
    V: np.ndarray

    def __post_init__(self):
        self.V = np.zeros((0, 0), dtype=np.complex128) if np.size(self.V) == 0 else check_unitary(self.V, 1e-10, "V")
        self.N = self.theta.N + self.V.shape[0]

    def values(self, zs):
        th = self.theta.values(zs)
        m = self.V.shape[0]
        if m == 0:
            return th
        n = th.shape[1]
        out = np.zeros((th.shape[0], n + m, n + m), dtype=np.complex128)
        out[:, :n, :n] = th
        out[:, n:, n:] = self.V
        return out


def direct_sum(B: InnerFunction, V) -> DirectSum:
    return DirectSum(B, V)
