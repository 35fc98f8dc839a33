"""Finite-dimensional model spaces and the compressed shift.

Functions in H^2(C^N) are handled as evaluators on the unit circle; every
inner product is a trapezoidal sum over M equispaced nodes, with M doubled
until two successive orders agree.  For rational integrands with poles at
``1/conj(lam)`` the error decays like ``max|lam|^M``.

Convention: ``<f, g> = (1/M) sum_m g(z_m)^* f(z_m)`` (linear in f).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import IllConditioned, NoConvergence, NotContraction, NotPure, ResidualTooLarge
from .inner import BPProduct, FrostmanTransform, InnerFunction, purity_check
from .linalg import as_cmatrix, dagger, gram_correct, hermitian_eigs, opnorm, psd_sqrt

log = logging.getLogger(__name__)

QUAD_INITIAL = 512
QUAD_TOL = 1e-12
QUAD_CAP = 2**16
QUAD_ACCEPT = 1e-9
RANK_TOL = 1e-8
INVARIANT_TOL = 1e-8


def circle_nodes(M: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(M) / M)


def adaptive_quadrature(compute, M: int = QUAD_INITIAL, tol: float = QUAD_TOL, cap: int = QUAD_CAP):
    """Evaluate ``compute(M)`` for doubling M until successive results agree.

    Returns ``(value, M_used)``.  At the cap, a difference between ``tol``
    and 1e-9 is accepted with a warning; anything larger raises.
    """
    prev = np.asarray(compute(M))
    diff = np.inf
    while True:
        if M >= cap:
            break
        M *= 2
        cur = np.asarray(compute(M))
        diff = float(np.max(np.abs(cur - prev), initial=0.0))
        prev = cur
        if diff < tol:
            return cur, M
    if diff <= QUAD_ACCEPT:
        log.warning("quadrature reached cap M=%d with difference %.2e", M, diff)
        return prev, M
    raise NoConvergence(f"trapezoidal quadrature did not converge by M={cap} (last change {diff:.2e})")


def _as_columns(vals: np.ndarray) -> np.ndarray:
    # (M, N) vector function values -> (M, N, 1)
    return vals[:, :, None] if vals.ndim == 2 else vals


def h2_matrix(F, G, M: int = QUAD_INITIAL, tol: float = QUAD_TOL, cap: int = QUAD_CAP):
    """Matrix of inner products ``[<F_k, G_j>]_{jk}``.

    ``F`` and ``G`` map a 1-D array of circle points to (M, N, k) arrays.
    """

    def compute(m):
        zs = circle_nodes(m)
        return np.einsum("mnj,mnk->jk", np.conj(_as_columns(G(zs))), _as_columns(F(zs))) / m

    return adaptive_quadrature(compute, M, tol, cap)


def h2_inner(f, g, M: int = QUAD_INITIAL, tol: float = QUAD_TOL, cap: int = QUAD_CAP) -> complex:
    """H^2(C^N) inner product of two vector-valued functions on the circle."""
    value, _ = h2_matrix(f, g, M, tol, cap)
    return complex(value[0, 0])


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------


@dataclass
class TMWBasis:
    """Orthonormal rational basis of ``K_B`` built factor by factor.

    Element k is ``B_{j-1}(z) sqrt(1-|lam_j|^2)/(1-conj(lam_j) z) p_k`` where
    ``j = owner[k]`` and ``p_k`` runs over an orthonormal basis of
    ``ran P_j``; ``coeffs`` holds the Gram correction applied on top.
    """

    product: BPProduct
    owner: np.ndarray
    vecs: np.ndarray
    coeffs: np.ndarray
    M: int = QUAD_INITIAL
    gram_residual: float = 0.0

    @property
    def d(self) -> int:
        return self.vecs.shape[0]

    @property
    def N(self) -> int:
        return self.product.N

    def raw_values(self, zs) -> np.ndarray:
        lams, units, projs = self.product.packed()
        return kernels.tmw_values(zs, lams, units, projs, self.vecs, self.owner)

    def values(self, zs) -> np.ndarray:
        return self.raw_values(zs) @ self.coeffs


@dataclass
class AugmentedBasis:
    """Basis of ``K_{z Theta} = K_Theta (+) Theta C^N``: base elements then ``Theta xi_i``."""

    base: TMWBasis
    theta: InnerFunction

    @property
    def d(self) -> int:
        return self.base.d + self.theta.N

    @property
    def N(self) -> int:
        return self.theta.N

    def values(self, zs) -> np.ndarray:
        return np.concatenate([self.base.values(zs), self.theta.values(zs)], axis=2)


@dataclass
class CrofootBasis:
    """Image of a basis of ``K_Theta`` under ``f -> sqrt(1-|a|^2)(I - conj(a) Theta)^{-1} f``.

    This map is unitary from ``K_Theta`` onto the model space of the
    Frostman transform of Theta with parameter ``a``.
    """

    base: TMWBasis
    theta: InnerFunction
    a: complex

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def N(self) -> int:
        return self.theta.N

    def values(self, zs) -> np.ndarray:
        th = self.theta.values(zs)
        eye = np.eye(self.N, dtype=np.complex128)
        scale = np.sqrt(1.0 - abs(self.a) ** 2)
        return scale * np.linalg.solve(eye - np.conj(self.a) * th, self.base.values(zs))


def build_basis(B: BPProduct, M: int = QUAD_INITIAL, tol: float = QUAD_TOL, purity_tol: float = 1e-8) -> TMWBasis:
    sigma = purity_check(B)
    if sigma > 1.0 - purity_tol:
        raise NotPure(f"Theta(0) has norm {sigma:.12f}; the product has a constant unitary summand")
    if B.model_dimension < 1:
        raise NotPure("model space is trivial")
    if B.near_boundary:
        log.warning("product has zeros within 1e-6 of the circle; quadrature may not converge")
    owner, vecs = [], []
    for j, f in enumerate(B.factors):
        Q = f.range_basis()
        for c in range(Q.shape[1]):
            owner.append(j)
            vecs.append(Q[:, c])
    basis = TMWBasis(
        B,
        np.array(owner, dtype=np.int64),
        np.array(vecs, dtype=np.complex128).reshape(len(vecs), B.N),
        np.eye(len(vecs), dtype=np.complex128),
    )
    gram, M_used = h2_matrix(basis.raw_values, basis.raw_values, M, tol)
    d = basis.d
    if opnorm(gram - np.eye(d)) > 0.5:
        raise IllConditioned("raw basis Gram matrix too far from the identity to correct")
    basis.coeffs = gram_correct(np.eye(d), gram)
    basis.gram_residual = opnorm(dagger(basis.coeffs) @ gram @ basis.coeffs - np.eye(d))
    basis.M = M_used
    if basis.gram_residual > 1e-9:
        raise IllConditioned(f"Gram correction left residual {basis.gram_residual:.2e}")
    return basis


def orthogonality_residual(basis, theta: InnerFunction, powers: int = 2, M: int = QUAD_INITIAL) -> float:
    """``max |<e_k, Theta z^m xi_i>|`` over basis elements, m <= powers and unit xi_i."""
    worst = 0.0
    for m in range(powers + 1):
        G = lambda zs, m=m: zs[:, None, None] ** m * theta.values(zs)  # noqa: E731
        ip, _ = h2_matrix(basis.values, G, M)
        worst = max(worst, float(np.max(np.abs(ip))))
    return worst


# ---------------------------------------------------------------------------
# model operators
# ---------------------------------------------------------------------------


@dataclass
class ModelOperator:
    """Matrix data of the compressed shift in a fixed orthonormal basis."""

    S: np.ndarray
    iota: np.ndarray
    iota_star: np.ndarray
    Theta0: np.ndarray
    D0: np.ndarray
    D0star: np.ndarray
    basis: object
    theta: InnerFunction
    M: int = QUAD_INITIAL
    residuals: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.S.shape[0]

    @property
    def N(self) -> int:
        return self.Theta0.shape[0]


def _model_residuals(S, iota, iota_star, Theta0, N) -> dict:
    d = S.shape[0]
    eye_n = np.eye(N)
    res = {
        "isometry": opnorm(dagger(iota) @ iota - eye_n),
        "isometry_star": opnorm(dagger(iota_star) @ iota_star - eye_n),
        "intertwining": opnorm(S @ iota + iota_star @ Theta0),
        "norm_excess": max(0.0, opnorm(S) - 1.0),
    }
    if d:
        w = np.linalg.eigvalsh(np.eye(d) - dagger(S) @ S)
        ws = np.linalg.eigvalsh(np.eye(d) - S @ dagger(S))
        res["defect_rank"] = int(np.sum(w > RANK_TOL))
        res["defect_rank_star"] = int(np.sum(ws > RANK_TOL))
        res["defect_gap"] = float(w[-N]) if N <= d else 0.0
    return res


def _check_model(res: dict, N: int, tol: float):
    bad = [k for k in ("isometry", "isometry_star", "intertwining") if res[k] > tol]
    if res["norm_excess"] > 1e-9:
        bad.append("norm_excess")
    if res.get("defect_rank") != N or res.get("defect_rank_star") != N:
        bad.append("defect_rank")
    if bad:
        detail = ", ".join(f"{k}={res[k]}" for k in bad)
        raise ResidualTooLarge(f"model invariants violated: {detail}")


def assemble(theta: InnerFunction, basis, M: int = QUAD_INITIAL, tol: float = QUAD_TOL, check: bool = True) -> ModelOperator:
    """Matrices of S, iota, iota_* for ``theta`` in an orthonormal ``basis`` of its model space."""
    N = theta.N
    Theta0 = as_cmatrix(theta.at_zero())
    eye = np.eye(N, dtype=np.complex128)
    D0 = psd_sqrt(eye - dagger(Theta0) @ Theta0)
    D0star = psd_sqrt(eye - Theta0 @ dagger(Theta0))
    try:
        D0inv = np.linalg.inv(D0)
        D0star_inv = np.linalg.inv(D0star)
    except np.linalg.LinAlgError as exc:
        raise NotPure("defect operator of Theta(0) is singular") from exc
    d = basis.d

    def compute(m):
        zs = circle_nodes(m)
        E = basis.values(zs)
        Ec = np.conj(E)
        th = theta.values(zs)
        g = (np.conj(zs)[:, None, None] * (th - Theta0)) @ D0inv
        g_star = (eye - th @ dagger(Theta0)) @ D0star_inv
        gram = np.einsum("mnj,mnk->jk", Ec, E)
        S = np.einsum("mnj,m,mnk->jk", Ec, zs, E)
        iota = np.einsum("mnj,mni->ji", Ec, g)
        iota_star = np.einsum("mnj,mni->ji", Ec, g_star)
        return np.concatenate([gram, S, iota, iota_star], axis=1) / m

    packed, M_used = adaptive_quadrature(compute, M, tol)
    gram = packed[:, :d]
    S = packed[:, d : 2 * d]
    iota = packed[:, 2 * d : 2 * d + N]
    iota_star = packed[:, 2 * d + N :]
    res = _model_residuals(S, iota, iota_star, Theta0, N)
    res["gram"] = opnorm(gram - np.eye(d))
    if check:
        if res["gram"] > 1e-9:
            raise ResidualTooLarge(f"basis is not orthonormal (Gram residual {res['gram']:.2e})")
        _check_model(res, N, INVARIANT_TOL)
    return ModelOperator(S, iota, iota_star, Theta0, D0, D0star, basis, theta, M_used, res)


def assemble_model(B: BPProduct, M: int = QUAD_INITIAL, tol: float = QUAD_TOL, check: bool = True) -> ModelOperator:
    basis = build_basis(B, M, tol)
    return assemble(B, basis, max(M, basis.M // 2), tol, check)


@dataclass
class AugmentedModel:
    """Model of ``Xi = z Theta`` in the basis ``(e_1..e_d, Theta xi_1..Theta xi_N)``."""

    model: ModelOperator
    base: ModelOperator
    J: np.ndarray
    J_star: np.ndarray


def assemble_augmented(B: BPProduct, base: ModelOperator | None = None, M: int = QUAD_INITIAL,
                       tol: float = QUAD_TOL, check: bool = True) -> AugmentedModel:
    if base is None:
        base = assemble_model(B, M, tol, check)
    N, d = B.N, base.d
    aug = AugmentedBasis(base.basis, B)
    M0 = max(M, base.M // 2)
    xi_model = assemble(B.times_z(), aug, M0, tol, check)

    def J_source(zs):
        return np.concatenate([base.basis.values(zs), B.values(zs)], axis=2)

    def J_star_source(zs):
        consts = np.broadcast_to(np.eye(N, dtype=np.complex128), (zs.shape[0], N, N))
        return np.concatenate([zs[:, None, None] * base.basis.values(zs), consts], axis=2)

    J, _ = h2_matrix(J_source, aug.values, M0, tol)
    J_star, _ = h2_matrix(J_star_source, aug.values, M0, tol)
    eye = np.eye(d + N)
    for name, X in (("J", J), ("J_star", J_star)):
        err = opnorm(dagger(X) @ X - eye)
        xi_model.residuals[f"{name}_unitarity"] = err
        if check and err > INVARIANT_TOL:
            raise ResidualTooLarge(f"{name} is not unitary (residual {err:.2e})")
    return AugmentedModel(xi_model, base, J, J_star)


def frostman_model(B: BPProduct, a: complex, base: ModelOperator | None = None, M: int = QUAD_INITIAL,
                   tol: float = QUAD_TOL, check: bool = True) -> ModelOperator:
    """Model operator of the Frostman transform of B, in the transported basis."""
    if base is None:
        base = assemble_model(B, M, tol, check)
    F = FrostmanTransform(B, a)
    basis = CrofootBasis(base.basis, B, a)
    return assemble(F, basis, max(M, base.M // 2), tol, check)


# ---------------------------------------------------------------------------
# defects of a plain matrix contraction
# ---------------------------------------------------------------------------


@dataclass
class DefectData:
    D: np.ndarray
    D_star: np.ndarray
    basis: np.ndarray
    basis_star: np.ndarray
    eigs: np.ndarray
    eigs_star: np.ndarray

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def rank_star(self) -> int:
        return self.basis_star.shape[1]


def defect_data(T, rank_tol: float = RANK_TOL) -> DefectData:
    """Defect operators of a contraction and orthonormal bases of the defect spaces.

    Basis columns are eigenvectors of ``I - T*T`` (resp. ``I - TT*``) with
    eigenvalue above ``rank_tol``, ordered by decreasing eigenvalue.
    """
    T = as_cmatrix(T)
    norm = opnorm(T)
    if norm > 1.0 + 1e-9:
        raise NotContraction(f"|T| = {norm:.12f} > 1")
    n = T.shape[0]
    eye = np.eye(n)
    A = eye - dagger(T) @ T
    A_star = eye - T @ dagger(T)
    out = []
    for X in (A, A_star):
        w, V = hermitian_eigs(0.5 * (X + dagger(X)))
        keep = np.nonzero(w > rank_tol)[0][::-1]
        out.append((psd_sqrt(X, tol=3e-9), V[:, keep], w[keep]))
    (D, Q, w), (Ds, Qs, ws) = out
    return DefectData(D, Ds, Q, Qs, w, ws)
