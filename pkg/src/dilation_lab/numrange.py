"""Numerical ranges as support functions on a fixed angular grid.

A convex compact set K is stored as ``h(phi_g) = max_{w in K} Re(e^{-i phi_g} w)``
for ``phi_g = 2 pi g / G``.  On such profiles the Hausdorff distance is the
sup-norm difference, the convex hull of a union is the pointwise max, and
the pointwise min over a family is an outer approximation of the support
function of the intersection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import kernels
from .dilation import u_omega_blocks
from .errors import EmptyFamily, GridMismatch
from .linalg import (
    UnitaryParams,
    as_cmatrix,
    dagger,
    haar_unitary,
    rng_from,
    unitary_eigs,
    unitary_from_params,
)
from .modelspace import ModelOperator

DEFAULT_GRID = 720


def grid_angles(G: int) -> np.ndarray:
    return 2 * np.pi * np.arange(G) / G


@dataclass(frozen=True, eq=False)
class SupportProfile:
    angles: np.ndarray
    values: np.ndarray

    @property
    def G(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_values(cls, values) -> "SupportProfile":
        values = np.asarray(values, dtype=np.float64)
        return cls(grid_angles(values.shape[0]), values)

    @classmethod
    def of_points(cls, points, G: int = DEFAULT_GRID) -> "SupportProfile":
        """Support function of the convex hull of finitely many complex points."""
        pts = np.asarray(points, dtype=np.complex128).reshape(-1)
        ang = grid_angles(G)
        return cls(ang, np.max((np.exp(-1j * ang)[:, None] * pts[None, :]).real, axis=1))

    @classmethod
    def disc(cls, radius: float, center: complex = 0.0, G: int = DEFAULT_GRID) -> "SupportProfile":
        ang = grid_angles(G)
        return cls(ang, (np.exp(-1j * ang) * center).real + radius)

    def boundary(self) -> np.ndarray:
        """Boundary points ``h u + h' u_perp`` with h' from central differences."""
        h = self.values
        step = 2 * np.pi / self.G
        dh = (np.roll(h, -1) - np.roll(h, 1)) / (2 * step)
        return (h + 1j * dh) * np.exp(1j * self.angles)

    def _check_grid(self, other: "SupportProfile"):
        if self.G != other.G or not np.allclose(self.angles, other.angles, atol=1e-15, rtol=0):
            raise GridMismatch(f"profiles live on different grids ({self.G} vs {other.G})")


def support_function(T, G: int = DEFAULT_GRID) -> SupportProfile:
    T = as_cmatrix(T)
    ang = grid_angles(G)
    return SupportProfile(ang, kernels.support_values(T, ang))


def nr_unitary(U, G: int = DEFAULT_GRID) -> SupportProfile:
    """Support profile of W(U) for unitary U: the convex hull of its eigenvalues."""
    return SupportProfile.of_points(unitary_eigs(U), G)


def hausdorff(A: SupportProfile, B: SupportProfile) -> float:
    A._check_grid(B)
    return float(np.max(np.abs(A.values - B.values)))


def hull_merge(A: SupportProfile, B: SupportProfile) -> SupportProfile:
    A._check_grid(B)
    return SupportProfile(A.angles, np.maximum(A.values, B.values))


def intersect_family(profiles) -> SupportProfile:
    profiles = list(profiles)
    if not profiles:
        raise EmptyFamily("cannot intersect an empty family")
    first = profiles[0]
    for p in profiles[1:]:
        first._check_grid(p)
    return SupportProfile(first.angles, np.min([p.values for p in profiles], axis=0))


def ellipse_oracle(T, G: int = DEFAULT_GRID) -> SupportProfile:
    """W(T) of a 2x2 matrix from the elliptical range theorem.

    Foci at the eigenvalues, minor axis ``sqrt(tr T*T - |l1|^2 - |l2|^2)``.
    """
    T = as_cmatrix(T)
    if T.shape != (2, 2):
        raise ValueError("ellipse oracle needs a 2x2 matrix")
    tr, det = T[0, 0] + T[1, 1], T[0, 0] * T[1, 1] - T[0, 1] * T[1, 0]
    disc = np.sqrt(tr * tr - 4 * det)
    l1, l2 = (tr + disc) / 2, (tr - disc) / 2
    minor = np.sqrt(max(0.0, float(np.sum(np.abs(T) ** 2) - abs(l1) ** 2 - abs(l2) ** 2)))
    major = np.hypot(minor, abs(l1 - l2))
    beta = np.angle(l1 - l2) if abs(l1 - l2) > 0 else 0.0
    ang = grid_angles(G)
    center = (l1 + l2) / 2
    c, s = np.cos(ang - beta), np.sin(ang - beta)
    vals = (np.exp(-1j * ang) * center).real + 0.5 * np.sqrt((major * c) ** 2 + (minor * s) ** 2)
    return SupportProfile(ang, vals)


def rayleigh_samples(T, count: int, seed=0) -> np.ndarray:
    """Rayleigh quotients ``x* T x`` at Haar-random unit vectors."""
    T = as_cmatrix(T)
    rng = rng_from(seed)
    X = rng.standard_normal((count, T.shape[0])) + 1j * rng.standard_normal((count, T.shape[0]))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return np.einsum("ki,ij,kj->k", np.conj(X), T, X)


def contains_points(profile: SupportProfile, points, tol: float = 1e-9) -> bool:
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    proj = (np.exp(-1j * profile.angles)[:, None] * pts[None, :]).real
    return bool(np.all(proj <= profile.values[:, None] + tol))


# ---------------------------------------------------------------------------
# wrapping gaps
# ---------------------------------------------------------------------------


@dataclass
class WrapReport:
    directions: np.ndarray
    gaps: np.ndarray
    minimizers: list
    samples: int
    evaluations: int
    refinements: int
    stats: dict = field(default_factory=dict)

    @property
    def max_gap(self) -> float:
        return float(np.max(self.gaps))

    @property
    def min_gap(self) -> float:
        return float(np.min(self.gaps))


class _DirectionObjective:
    """``Omega -> lambda_max(Re(e^{-i phi} U_Omega))`` with U_Omega = U_I diag(I, Omega)."""

    def __init__(self, model: ModelOperator, phi: float):
        X, Y, Z = u_omega_blocks(model)
        self.d, self.N = model.d, model.N
        rot = np.exp(-1j * phi)
        self.S = rot * model.S
        self.X, self.Y, self.Z = rot * X, rot * Y, rot * Z
        self.calls = 0

    def matrices(self, Omegas: np.ndarray) -> np.ndarray:
        K, d = Omegas.shape[0], self.d
        U = np.empty((K, d + self.N, d + self.N), dtype=np.complex128)
        U[:, :d, :d] = self.S
        U[:, d:, :d] = self.Y
        U[:, :d, d:] = self.X @ Omegas
        U[:, d:, d:] = self.Z @ Omegas
        return 0.5 * (U + dagger(U))

    def batch(self, Omegas: np.ndarray) -> np.ndarray:
        self.calls += Omegas.shape[0]
        return kernels.top_eig_batch(self.matrices(Omegas))

    def __call__(self, Omega: np.ndarray) -> float:
        self.calls += 1
        return float(np.linalg.eigvalsh(self.matrices(Omega[None])[0])[-1])


def _phase_search(obj: _DirectionObjective, scan: int = 1024):
    alphas = 2 * np.pi * np.arange(scan) / scan
    vals = obj.batch(np.exp(1j * alphas)[:, None, None])
    k = int(np.argmin(vals))
    step = 2 * np.pi / scan
    f = lambda a: obj(np.array([[np.exp(1j * a)]]))  # noqa: E731
    r = minimize_scalar(f, bounds=(alphas[k] - step, alphas[k] + step), method="bounded",
                        options={"xatol": 1e-10})
    if r.fun <= vals[k]:
        return r.fun, np.array([[np.exp(1j * r.x)]]), 1
    return float(vals[k]), np.array([[np.exp(1j * alphas[k])]]), 1


def _simplex(n: int, step: float) -> np.ndarray:
    return np.vstack([np.zeros(n), step * np.eye(n)])


def _nelder_mead_search(obj: _DirectionObjective, samples: int, rng, tol: float, maxiter: int,
                        restarts: int):
    N = obj.N
    Omegas = np.array([haar_unitary(N, rng) for _ in range(samples)])
    vals = obj.batch(Omegas)
    k = int(np.argmin(vals))
    best_val, best = float(vals[k]), Omegas[k]
    rounds = 0
    step = 0.5
    for _ in range(restarts + 1):
        base = best
        f = lambda p: obj(base @ unitary_from_params(UnitaryParams(N, p)))  # noqa: E731
        r = minimize(f, np.zeros(N * N), method="Nelder-Mead",
                     options={"xatol": tol, "fatol": tol, "maxiter": maxiter,
                              "initial_simplex": _simplex(N * N, step)})
        rounds += 1
        improved = best_val - r.fun
        if r.fun < best_val:
            best_val, best = float(r.fun), base @ unitary_from_params(UnitaryParams(N, r.x))
        if improved < tol:
            break
        step = max(step * 0.25, 10 * tol)
    return best_val, best, rounds


def wrap_gap(model: ModelOperator, directions, samples: int = 64, seed: int = 0, tol: float = 1e-6,
             maxiter: int = 500, restarts: int = 4, phase_scan: int = 1024) -> WrapReport:
    """Per-direction ``min_Omega h_{U_Omega}(phi) - h_{S}(phi)``.

    N = 1 uses a deterministic phase scan plus bounded scalar refinement.
    Otherwise ``samples`` Haar unitaries are scored and the best one seeds
    Nelder-Mead in the exponential chart ``Omega_0 exp(K)``, restarted with a
    shrinking simplex while it keeps improving.  Each direction draws from
    its own stream seeded by ``(seed, index)``.
    """
    directions = np.atleast_1d(np.asarray(directions, dtype=np.float64))
    h_S = kernels.support_values(model.S, directions)
    gaps, mins = np.empty(directions.shape[0]), []
    calls = rounds = 0
    for i, phi in enumerate(directions):
        obj = _DirectionObjective(model, phi)
        if model.N == 1:
            val, Om, r = _phase_search(obj, phase_scan)
        else:
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, i])))
            val, Om, r = _nelder_mead_search(obj, samples, rng, tol, maxiter, restarts)
        gaps[i] = val - h_S[i]
        mins.append(Om)
        calls += obj.calls
        rounds += r
    used = phase_scan if model.N == 1 else samples
    return WrapReport(directions, gaps, mins, used, calls, rounds,
                      {"mode": "phase_scan" if model.N == 1 else "haar+nelder_mead", "seed": seed})


def dilation_family_profiles(model: ModelOperator, Omegas, G: int = DEFAULT_GRID) -> np.ndarray:
    """Support values of W(U_Omega) for each Omega in a stack; shape (K, G)."""
    X, Y, Z = u_omega_blocks(model)
    ang = grid_angles(G)
    out = np.empty((len(Omegas), G))
    for k, Om in enumerate(Omegas):
        U = np.block([[model.S, X @ Om], [Y, Z @ Om]])
        out[k] = SupportProfile.of_points(unitary_eigs(U), G).values
    return out


def omega_family(N: int, count: int, seed: int = 0) -> np.ndarray:
    """Standard sampled family: equispaced phases for N = 1, Haar unitaries otherwise."""
    if N == 1:
        return np.exp(2j * np.pi * np.arange(count) / count)[:, None, None]
    rng = rng_from(seed)
    return np.array([haar_unitary(N, rng) for _ in range(count)])


def compressed_support(T, P, G: int = DEFAULT_GRID) -> SupportProfile:
    """Profile of W(P T P restricted to ran P) for an orthogonal projection P."""
    w, V = np.linalg.eigh(0.5 * (as_cmatrix(P) + dagger(as_cmatrix(P))))
    Q = V[:, w > 0.5]
    if Q.shape[1] == 0:
        raise EmptyFamily("projection has trivial range")
    return support_function(dagger(Q) @ as_cmatrix(T) @ Q, G)
