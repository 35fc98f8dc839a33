"""Unitary N-dilations of model operators and of general finite contractions."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .errors import NotADilation, NotUnitaryParam, ResidualTooLarge, UnequalDefects
from .inner import BPProduct
from .linalg import as_cmatrix, check_unitary, dagger, opnorm, unitarity_defect, unitary_eigs
from .modelspace import AugmentedModel, DefectData, ModelOperator, assemble_augmented, defect_data

DILATION_TOL = 1e-9


class DilationOrigin(enum.Enum):
    DIRECT_FORMULA = "direct_formula"
    Z_XI_CONSTRUCTION = "z_xi_construction"
    GENERAL_FORM = "general_form"


@dataclass
class UnitaryDilation:
    U: np.ndarray
    Omega: np.ndarray
    origin: DilationOrigin
    product: BPProduct | None = None

    @property
    def size(self) -> int:
        return self.U.shape[0]


@dataclass
class GeneralDilationParams:
    """Coordinates of the two unitaries in the defect bases chosen by ``defect_data``.

    ``omega`` maps C^N onto the defect space of T* (it feeds the top-right
    block through ``D_{T*}``); ``omega_star`` maps C^N onto the defect space
    of T.  Both are stored as N x N unitaries in those bases.
    """

    omega: np.ndarray
    omega_star: np.ndarray

    def __post_init__(self):
        self.omega = check_unitary(self.omega, 1e-10, "omega", NotUnitaryParam)
        self.omega_star = check_unitary(self.omega_star, 1e-10, "omega_star", NotUnitaryParam)


def _check_dilation(U: np.ndarray, top_left: np.ndarray, what: str):
    d = top_left.shape[0]
    err_u = unitarity_defect(U)
    err_c = float(np.max(np.abs(U[:d, :d] - top_left), initial=0.0))
    if err_u > DILATION_TOL or err_c > DILATION_TOL:
        raise ResidualTooLarge(f"{what}: unitarity {err_u:.2e}, compression {err_c:.2e}")


def u_omega_blocks(model: ModelOperator):
    """The blocks of the dilation at Omega = I; U_Omega is this times diag(I, Omega)."""
    top_right = model.iota_star @ model.D0star
    bottom_left = model.D0 @ dagger(model.iota)
    bottom_right = dagger(model.Theta0)
    return top_right, bottom_left, bottom_right


def build_U_Omega(model: ModelOperator, Omega) -> UnitaryDilation:
    Omega = check_unitary(Omega, 1e-10, "Omega", NotUnitaryParam)
    if Omega.shape[0] != model.N:
        raise NotUnitaryParam(f"Omega must be {model.N}x{model.N}")
    X, Y, Z = u_omega_blocks(model)
    U = np.block([[model.S, X @ Omega], [Y, Z @ Omega]])
    _check_dilation(U, model.S, "U_Omega")
    product = model.theta if isinstance(model.theta, BPProduct) else None
    return UnitaryDilation(U, Omega, DilationOrigin.DIRECT_FORMULA, product)


def _equal_defects(T: np.ndarray) -> DefectData:
    dd = defect_data(T)
    if dd.rank != dd.rank_star:
        raise UnequalDefects(f"defect ranks differ: {dd.rank} vs {dd.rank_star}")
    return dd


def general_dilation(T, params: GeneralDilationParams, dd: DefectData | None = None) -> np.ndarray:
    """``[[T, D_{T*} w], [w_*^* D_T, -w_*^* T^* w]]`` with w, w_* built from ``params``."""
    T = as_cmatrix(T)
    dd = dd or _equal_defects(T)
    N = dd.rank
    if params.omega.shape[0] != N or params.omega_star.shape[0] != N:
        raise NotUnitaryParam(f"parameters must be {N}x{N} to match the defect rank")
    w = dd.basis_star @ params.omega
    w_star = dd.basis @ params.omega_star
    U = np.block([
        [T, dd.D_star @ w],
        [dagger(w_star) @ dd.D, -dagger(w_star) @ dagger(T) @ w],
    ])
    _check_dilation(U, T, "general dilation")
    return U


def params_from_isometries(T, w, w_star, dd: DefectData | None = None) -> GeneralDilationParams:
    """Express isometries onto the defect spaces in the defect-basis coordinates."""
    dd = dd or _equal_defects(as_cmatrix(T))
    return GeneralDilationParams(dagger(dd.basis_star) @ w, dagger(dd.basis) @ w_star)


def factor_dilation(T, U, tol: float = 1e-8) -> GeneralDilationParams:
    """Recover the parameters of a unitary N-dilation of T (up to the defect-basis gauge)."""
    T, U = as_cmatrix(T), as_cmatrix(U)
    d = T.shape[0]
    if U.shape[0] != U.shape[1] or U.shape[0] < d:
        raise NotADilation("U must be square and larger than T")
    N = U.shape[0] - d
    if np.max(np.abs(U[:d, :d] - T), initial=0.0) > tol:
        raise NotADilation("top-left block of U differs from T")
    dd = _equal_defects(T)
    if dd.rank != N:
        raise NotADilation(f"U enlarges by {N} dimensions but the defect rank of T is {dd.rank}")
    mu_star = np.sqrt(dd.eigs_star)
    mu = np.sqrt(dd.eigs)
    omega = (dagger(dd.basis_star) @ U[:d, d:]) / mu_star[:, None]
    omega_star = dagger((U[d:, :d] @ dd.basis) / mu[None, :])
    for name, X in (("omega", omega), ("omega_star", omega_star)):
        if unitarity_defect(X) > tol:
            raise NotADilation(f"recovered {name} is not unitary; U is not of the dilation form")
    params = GeneralDilationParams.__new__(GeneralDilationParams)
    params.omega, params.omega_star = omega, omega_star
    try:
        R = general_dilation(T, params, dd)
    except ResidualTooLarge as exc:
        raise NotADilation(str(exc)) from exc
    err = float(np.max(np.abs(R - U)))
    if err > tol:
        raise NotADilation(f"reconstruction differs from U by {err:.2e}")
    return params


def build_Z_Xi(B: BPProduct, Omega, aug: AugmentedModel | None = None) -> UnitaryDilation:
    """``J^* S_Xi[A_Omega] J`` for ``Xi = z Theta``, computed on the enlarged model space."""
    Omega = check_unitary(Omega, 1e-10, "Omega", NotUnitaryParam)
    aug = aug or assemble_augmented(B)
    d, N = aug.base.d, B.N
    S_xi = aug.model.S
    dd = defect_data(S_xi)
    if dd.rank != N:
        raise ResidualTooLarge(f"defect space of S_Xi has dimension {dd.rank}, expected {N}")
    P_def = dd.basis @ dagger(dd.basis)
    theta_cols = aug.J[:, d:]  # coordinates of Theta xi_i
    const_cols = aug.J_star[:, d:]  # coordinates of the constants xi_i
    span_err = opnorm(P_def @ theta_cols - theta_cols)
    if span_err > 1e-8:
        raise ResidualTooLarge(f"defect space of S_Xi is not Theta C^N (residual {span_err:.2e})")
    A = (const_cols @ Omega) @ np.linalg.pinv(theta_cols)
    n = d + N
    S_A = A @ P_def + S_xi @ (np.eye(n) - P_def)
    Z = dagger(aug.J) @ S_A @ aug.J
    _check_dilation(Z, aug.base.S, "Z_Xi")
    return UnitaryDilation(Z, Omega, DilationOrigin.Z_XI_CONSTRUCTION, B)


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


def det_values(B: BPProduct, Omega, zs) -> np.ndarray:
    """``det(z Theta(z) - Omega)`` at arbitrary points (off the circle allowed)."""
    zs = np.atleast_1d(np.asarray(zs, dtype=np.complex128))
    th = B.values(zs)
    return np.linalg.det(zs[:, None, None] * th - np.asarray(Omega)[None])


def spectrum_predicate(B: BPProduct, Omega, zeta: complex) -> float:
    if abs(abs(zeta) - 1.0) > 1e-9:
        raise ValueError("zeta must be unimodular")
    return float(abs(det_values(B, Omega, [zeta])[0]))


def det_scan(B: BPProduct, Omega, points: int = 4096):
    """Angles and ``|det(zeta Theta(zeta) - Omega)|`` on an equispaced circle grid."""
    t = 2 * np.pi * np.arange(points) / points
    lams, units, projs = B.packed()
    vals = kernels.det_abs_scan(np.exp(1j * t), lams, units, projs, B.V, as_cmatrix(Omega))
    return t, vals


def _winding(B, Omega, center: complex, radius: float, samples: int = 96) -> int:
    s = 2 * np.pi * np.arange(samples + 1) / samples
    g = det_values(B, Omega, center + radius * np.exp(1j * s))
    return int(round(np.sum(np.diff(np.unwrap(np.angle(g)))) / (2 * np.pi)))


@dataclass
class CircleZero:
    angle: float
    multiplicity: int
    residual: float


def locate_zeros(B: BPProduct, Omega, points: int = 4096) -> list[CircleZero]:
    """Zeros of ``det(zeta Theta(zeta) - Omega)`` on the circle, with multiplicities.

    Local minima of the grid scan are refined by bounded scalar
    minimisation; each is then kept only if a small contour around it has
    nonzero winding number, which also gives its multiplicity.
    """
    Omega = as_cmatrix(Omega)
    t, a = det_scan(B, Omega, points)
    step = 2 * np.pi / points
    cand = np.nonzero((a <= np.roll(a, 1)) & (a <= np.roll(a, -1)))[0]
    f = lambda x: float(abs(det_values(B, Omega, [np.exp(1j * x)])[0]))  # noqa: E731
    refined = []
    for k in cand:
        r = minimize_scalar(f, bounds=(t[k] - step, t[k] + step), method="bounded",
                            options={"xatol": 1e-13})
        x = float(np.mod(r.x, 2 * np.pi))
        if all(abs(np.angle(np.exp(1j * (x - y)))) > 1e-7 for y, _ in refined):
            refined.append((x, r.fun))
    refined.sort()
    zeros = []
    angles = np.array([x for x, _ in refined])
    for i, (x, val) in enumerate(refined):
        others = np.delete(angles, i)
        gap = np.min(np.abs(np.angle(np.exp(1j * (others - x))))) if others.size else np.pi
        m = _winding(B, Omega, np.exp(1j * x), min(1e-3, 0.4 * gap))
        if m > 0:
            zeros.append(CircleZero(x, m, val))
    return zeros


def dilation_spectrum(dil: UnitaryDilation, tol: float = 2e-7) -> np.ndarray:
    """Eigenvalues of the dilation, cross-checked against the determinant predicate."""
    z = unitary_eigs(dil.U)
    if dil.product is not None:
        res = np.abs(det_values(dil.product, dil.Omega, z))
        if np.max(res, initial=0.0) > tol:
            raise ResidualTooLarge(f"eigenvalue fails det(zeta Theta(zeta) - Omega) = 0 by {np.max(res):.2e}")
    return z


def match_zeros(eigs: np.ndarray, zeros: list[CircleZero], ang_tol: float = 1e-5) -> bool:
    """True when the zero list, counted with multiplicity, equals the eigenvalue multiset."""
    if sum(zr.multiplicity for zr in zeros) != len(eigs):
        return False
    ang = np.angle(eigs)
    used = np.zeros(len(eigs), dtype=bool)
    for zr in zeros:
        dist = np.abs(np.angle(np.exp(1j * (ang - zr.angle))))
        hits = np.nonzero((dist <= ang_tol) & ~used)[0]
        if hits.size != zr.multiplicity:
            return False
        used[hits] = True
    return bool(used.all())
