"""Invariant suites run by ``dilation-lab verify``.

Each suite takes a product (and a context holding the shared model, the
Omega family and the sampling knobs) and returns a list of ``Check`` rows.
A failing row never raises; numerical breakdowns do, and map to exit 2.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .dilation import (
    build_U_Omega,
    build_Z_Xi,
    dilation_spectrum,
    factor_dilation,
    general_dilation,
    locate_zeros,
    match_zeros,
)
from .inner import BPProduct, is_pure
from .linalg import opnorm, rng_from, unitarity_defect
from .modelspace import ModelOperator, assemble_augmented, assemble_model
from .numrange import (
    compressed_support,
    dilation_family_profiles,
    grid_angles,
    hausdorff,
    nr_unitary,
    omega_family,
    support_function,
    wrap_gap,
)
from .sampling import random_matrix

SUITES = ("defects", "dilation", "zxi", "spectrum", "wrap", "continuity")
WRAP_DIRECTIONS = 72


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tol: float
    passed: bool
    kind: str = "<="

    @classmethod
    def at_most(cls, suite, name, value, tol):
        return cls(suite, name, float(value), float(tol), bool(value <= tol), "<=")

    @classmethod
    def at_least(cls, suite, name, value, tol):
        return cls(suite, name, float(value), float(tol), bool(value >= tol), ">=")

    @classmethod
    def equals(cls, suite, name, value, expected):
        return cls(suite, name, float(value), float(expected), bool(value == expected), "==")


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def table(self) -> str:
        rows = [("suite", "check", "value", "bound", "result")]
        for c in self.checks:
            rows.append((c.suite, c.name, f"{c.value:.3e}", f"{c.kind} {c.tol:.3e}",
                         "PASS" if c.passed else "FAIL"))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        return "\n".join("  ".join(s.ljust(w) for s, w in zip(r, widths)).rstrip() for r in rows)

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


@dataclass
class Context:
    B: BPProduct
    omegas: list
    grid: int = 720
    samples: int = 64
    seed: int = 0
    _model: ModelOperator | None = None

    @property
    def model(self) -> ModelOperator:
        if self._model is None:
            self._model = assemble_model(self.B, check=False)
        return self._model


def suite_defects(ctx: Context) -> list:
    m, N = ctx.model, ctx.B.N
    r = m.residuals
    return [
        Check.at_most("defects", "iota^* iota = I", r["isometry"], 1e-8),
        Check.at_most("defects", "iota_*^* iota_* = I", r["isometry_star"], 1e-8),
        Check.at_most("defects", "S iota + iota_* Theta(0) = 0", r["intertwining"], 1e-8),
        Check.at_most("defects", "basis Gram residual", r["gram"], 1e-9),
        Check.equals("defects", "rank D_S", r.get("defect_rank", 0), N),
        Check.equals("defects", "rank D_S*", r.get("defect_rank_star", 0), N),
        Check.equals("defects", "dim K_Theta", m.d, ctx.B.model_dimension),
    ]


def suite_dilation(ctx: Context) -> list:
    out = []
    for k, Om in enumerate(ctx.omegas):
        dil = build_U_Omega(ctx.model, Om)
        out.append(Check.at_most("dilation", f"U^*U = I [Omega {k}]", unitarity_defect(dil.U), 1e-9))
        params = factor_dilation(ctx.model.S, dil.U)
        err = np.max(np.abs(general_dilation(ctx.model.S, params) - dil.U))
        out.append(Check.at_most("dilation", f"factor/general round trip [Omega {k}]", err, 1e-8))
    return out


def suite_zxi(ctx: Context) -> list:
    aug = assemble_augmented(ctx.B, base=ctx.model, check=False)
    out = [Check.at_most("zxi", "J unitary", aug.model.residuals["J_unitarity"], 1e-8),
           Check.at_most("zxi", "J_* unitary", aug.model.residuals["J_star_unitarity"], 1e-8)]
    for k, Om in enumerate(ctx.omegas):
        Z = build_Z_Xi(ctx.B, Om, aug).U
        U = build_U_Omega(ctx.model, Om).U
        out.append(Check.at_most("zxi", f"|Z_Xi - U_Omega|_F [Omega {k}]", np.linalg.norm(Z - U), 1e-8))
    return out


def suite_spectrum(ctx: Context) -> list:
    out = []
    n = ctx.model.d + ctx.B.N
    for k, Om in enumerate(ctx.omegas):
        dil = build_U_Omega(ctx.model, Om)
        z = dilation_spectrum(dil, tol=np.inf)
        det_res = np.abs(np.linalg.det(z[:, None, None] * ctx.B.values(z) - Om[None]))
        zeros = locate_zeros(ctx.B, Om)
        out += [
            Check.at_most("spectrum", f"||zeta|-1| [Omega {k}]", np.max(np.abs(np.abs(z) - 1)), 1e-9),
            Check.at_most("spectrum", f"|det(zeta Theta - Omega)| [Omega {k}]", np.max(det_res), 1e-7),
            Check.equals("spectrum", f"zeros with multiplicity [Omega {k}]",
                         sum(zr.multiplicity for zr in zeros), n),
            Check.equals("spectrum", f"zeros match eigenvalues [Omega {k}]", float(match_zeros(z, zeros)), 1.0),
        ]
    return out


def suite_wrap(ctx: Context) -> list:
    dirs = grid_angles(WRAP_DIRECTIONS)
    rep = wrap_gap(ctx.model, dirs, samples=ctx.samples, seed=ctx.seed)
    fam = omega_family(ctx.B.N, 16, ctx.seed)
    h_S = support_function(ctx.model.S, ctx.grid).values
    slack = np.min(dilation_family_profiles(ctx.model, fam, ctx.grid) - h_S[None, :])
    return [
        Check.at_most("wrap", f"max wrap gap ({WRAP_DIRECTIONS} directions)", rep.max_gap, 5e-3),
        Check.at_least("wrap", "min wrap gap (containment)", rep.min_gap, -1e-8),
        Check.at_least("wrap", "h_U - h_S over sampled Omegas", slack, -1e-8),
    ]


def _near_projection(P, rng, scale):
    n = P.shape[0]
    H = random_matrix(n, rng, scale)
    H = H + H.conj().T
    w, V = np.linalg.eigh(H)
    W = (V * np.exp(1j * w)) @ V.conj().T
    return W @ P @ W.conj().T


def suite_continuity(ctx: Context, pairs: int = 20) -> list:
    rng = rng_from(ctx.seed)
    S, G = ctx.model.S, ctx.grid
    worst_i = worst_iii = -np.inf
    for _ in range(pairs):
        E = random_matrix(S.shape[0], rng, 0.3 * rng.random())
        worst_i = max(worst_i, hausdorff(support_function(S, G), support_function(S + E, G)) - opnorm(E))
    Us = [build_U_Omega(ctx.model, Om).U for Om in ctx.omegas]
    for a in range(len(Us)):
        for b in range(a + 1, len(Us)):
            gap = hausdorff(nr_unitary(Us[a], G), nr_unitary(Us[b], G)) - opnorm(Us[a] - Us[b])
            worst_i = max(worst_i, gap)
    n = S.shape[0]
    tried = 0
    while tried < pairs and n > 1:
        r = int(rng.integers(1, n))
        Q0 = np.linalg.qr(random_matrix(n, rng))[0][:, :r]
        P = Q0 @ Q0.conj().T
        Q = _near_projection(P, rng, 0.5 * rng.random())
        delta = opnorm(P - Q)
        if delta > 0.9:
            continue
        tried += 1
        bound = opnorm(S) * delta * (1 + 2 / (1 - delta) ** 2)
        worst_iii = max(worst_iii, hausdorff(compressed_support(S, P, G), compressed_support(S, Q, G)) - bound)
    out = [Check.at_most("continuity", "Lipschitz: d_H - |T-S|", worst_i, 1e-9)]
    if tried:
        out.append(Check.at_most("continuity", "projection bound excess", worst_iii, 1e-8))
    profiles = []
    for k in range(1, len(ctx.B.factors) + 1):
        Bk = ctx.B.truncate(k)
        if Bk.model_dimension >= Bk.N and is_pure(Bk):
            profiles.append(support_function(assemble_model(Bk, check=False).S, G).values)
    if len(profiles) > 1:
        drop = max(float(np.max(a - b)) for a, b in zip(profiles, profiles[1:]))
        out.append(Check.at_most("continuity", "truncation profiles nondecreasing", drop, 1e-9))
        out.append(Check.at_most("continuity", "last truncation equals full profile",
                                 np.max(np.abs(profiles[-1] - support_function(S, G).values)), 1e-9))
    return out


SUITE_FUNCS = {
    "defects": suite_defects,
    "dilation": suite_dilation,
    "zxi": suite_zxi,
    "spectrum": suite_spectrum,
    "wrap": suite_wrap,
    "continuity": suite_continuity,
}


def run_verify(B: BPProduct, suite: str = "all", omegas=None, grid: int = 720, samples: int = 64,
               seed: int = 0) -> VerifyReport:
    if suite != "all" and suite not in SUITE_FUNCS:
        raise ValueError(f"unknown suite {suite!r}")
    if omegas is None:
        omegas = list(omega_family(B.N, 3, seed)) if B.N > 1 else [np.exp(1j * a) * np.eye(1) for a in (0.0, 1.0, 2.5)]
    ctx = Context(B, omegas, grid, samples, seed)
    names = SUITES if suite == "all" else (suite,)
    report = VerifyReport()
    for name in names:
        report.checks.extend(SUITE_FUNCS[name](ctx))
    return report
