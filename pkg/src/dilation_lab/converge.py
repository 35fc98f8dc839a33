"""Convergence experiments: truncated products and Frostman transforms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .inner import BPProduct, InnerFunction, frostman_transform
from .linalg import opnorm
from .modelspace import assemble_model, circle_nodes, frostman_model
from .numrange import grid_angles, hausdorff, support_function, wrap_gap

SUP_POINTS = 512
H2_POINTS = 4096
WRAP_SUMMARY_DIRECTIONS = 8


def sup_circle_distance(F: InnerFunction, G: InnerFunction, points: int = SUP_POINTS) -> float:
    zs = circle_nodes(points)
    return float(np.max(np.linalg.norm(F.values(zs) - G.values(zs), ord=2, axis=(1, 2))))


def h2_column_distance(F: InnerFunction, G: InnerFunction, points: int = H2_POINTS) -> float:
    """``max_i |(F - G) xi_i|_{H^2}`` for the standard basis vectors xi_i."""
    diff = F.values(circle_nodes(points)) - G.values(circle_nodes(points))
    return float(np.sqrt(np.max(np.mean(np.sum(np.abs(diff) ** 2, axis=1), axis=0))))


@dataclass
class ConvergenceTable:
    mode: str
    header: list
    rows: list
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def format(self) -> str:
        lines = ["  ".join(f"{h:>14}" for h in self.header)]
        for row in self.rows:
            lines.append("  ".join(f"{v:>14.6e}" if isinstance(v, float) else f"{v:>14}" for v in row))
        for name, ok in self.checks.items():
            lines.append(f"{name}: {'PASS' if ok else 'FAIL'}")
        return "\n".join(lines)


def _wrap_summary(model, samples, seed, directions):
    rep = wrap_gap(model, grid_angles(directions), samples=samples, seed=seed)
    return rep.max_gap, rep.min_gap


def truncation_table(B: BPProduct, depths=None, grid: int = 720, samples: int = 64, seed: int = 0,
                     wrap_directions: int = WRAP_SUMMARY_DIRECTIONS) -> ConvergenceTable:
    """Compare the truncations ``B_n`` against the deepest requested ``B_nmax``.

    Profiles of ``S_{B_n}`` must be pointwise nondecreasing in n (within 1e-9).
    """
    depths = sorted(set(depths or range(1, len(B.factors) + 1)))
    if not depths or depths[0] < 1 or depths[-1] > len(B.factors):
        raise ValueError(f"depths must lie in 1..{len(B.factors)}")
    full = B.truncate(depths[-1])
    h_full = support_function(assemble_model(full).S, grid)
    rows, profiles = [], []
    for n in depths:
        Bn = B.truncate(n)
        model = assemble_model(Bn)
        prof = support_function(model.S, grid)
        profiles.append(prof.values)
        wmax, wmin = _wrap_summary(model, samples, seed, wrap_directions) if wrap_directions else (np.nan, np.nan)
        rows.append([n, model.d, hausdorff(prof, h_full), sup_circle_distance(Bn, full),
                     h2_column_distance(Bn, full), wmax, wmin])
    drop = max((float(np.max(a - b)) for a, b in zip(profiles, profiles[1:])), default=0.0)
    checks = {"profiles nondecreasing in n": drop <= 1e-9}
    header = ["n", "d", "hausdorff", "sup_circle", "h2_distance", "wrap_max_gap", "wrap_min_gap"]
    return ConvergenceTable("truncation", header, rows, checks)


def frostman_table(B: BPProduct, lambdas, grid: int = 720, samples: int = 64, seed: int = 0,
                   wrap_directions: int = WRAP_SUMMARY_DIRECTIONS) -> ConvergenceTable:
    """Frostman transforms ``F_lam(Theta)`` for a sequence of parameters.

    Checked per row: the uniform bound ``2|lam|/(1-|lam|)`` and the Lipschitz
    bound of the numerical ranges against ``|S_F - S_Theta|`` (both matrices
    in bases related by the unitary Crofoot map).
    """
    base = assemble_model(B)
    h_base = support_function(base.S, grid)
    rows, bound_ok, lip_ok = [], True, True
    for lam in lambdas:
        lam = complex(lam)
        F = frostman_transform(B, lam)
        dist = sup_circle_distance(F, B)
        bound = 2 * abs(lam) / (1 - abs(lam))
        model = frostman_model(B, lam, base=base)
        hd = hausdorff(support_function(model.S, grid), h_base)
        nd = opnorm(model.S - base.S)
        wmax, wmin = _wrap_summary(model, samples, seed, wrap_directions) if wrap_directions else (np.nan, np.nan)
        bound_ok &= dist <= bound + 1e-12
        lip_ok &= hd <= nd + 1e-9
        rows.append([lam.real, lam.imag, abs(lam), dist, bound, hd, nd, wmax, wmin])
    checks = {
        "sup distance <= 2|lam|/(1-|lam|)": bool(bound_ok),
        "hausdorff <= |S_F - S_Theta|": bool(lip_ok),
    }
    header = ["lam_re", "lam_im", "abs_lam", "sup_circle", "bound", "hausdorff", "norm_diff",
              "wrap_max_gap", "wrap_min_gap"]
    return ConvergenceTable("frostman", header, rows, checks)
