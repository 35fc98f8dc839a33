"""``dilation-lab`` command line.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 a
verification check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import write_boundary_csv, write_json, write_svg, write_table_csv
from .config import ProblemConfig, parse_complex, parse_omega
from .converge import frostman_table, truncation_table
from .dilation import build_U_Omega, det_scan, dilation_spectrum, locate_zeros, match_zeros
from .errors import ConfigError, InvalidInput, NumericalError
from .inner import purity_check
from .modelspace import assemble_model
from .numrange import (
    SupportProfile,
    dilation_family_profiles,
    hausdorff,
    intersect_family,
    nr_unitary,
    omega_family,
    support_function,
)
from .verify import SUITES, run_verify

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
SVG_FAMILY_LAYERS = 12


def _meta(cfg: ProblemConfig, seed: int, command: str) -> dict:
    return {"config_hash": cfg.hash, "version": __version__, "seed": seed, "command": command}


def _fmt_matrix(A: np.ndarray) -> str:
    def c(z):
        re, im = round(z.real, 6) + 0.0, round(z.imag, 6) + 0.0
        return f"{re:+.6f}{im:+.6f}i"

    return "\n".join("  [" + ", ".join(c(z) for z in row) + "]" for row in A)


def cmd_model(cfg: ProblemConfig, args) -> int:
    B = cfg.product()
    model = assemble_model(B, cfg.quad_initial, cfg.quad_tol)
    sigma = purity_check(B)
    res = {k: (float(v) if isinstance(v, float) else v) for k, v in model.residuals.items()}
    payload = {"N": B.N, "d": model.d, "sigma_max_theta0": sigma, "near_boundary": B.near_boundary,
               "quadrature_nodes": model.M, "S": model.S, "residuals": res}
    if args.format == "json":
        print(json.dumps({"meta": _meta(cfg, cfg.seed, "model"), **payload}, default=_json_default, indent=2))
    else:
        print(f"N = {B.N}")
        print(f"d = {model.d}")
        print(f"sigma_max(Theta(0)) = {sigma:.12g}")
        if B.near_boundary:
            print("warning: some zero lies within 1e-6 of the unit circle")
        print(f"quadrature nodes = {model.M}")
        print("S =")
        print(_fmt_matrix(model.S))
        print("residuals:")
        for k, v in res.items():
            print(f"  {k} = {v:.3e}" if isinstance(v, float) else f"  {k} = {v}")
    if args.out:
        write_json(args.out, payload, _meta(cfg, cfg.seed, "model"))
    return EXIT_OK


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(obj)]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(type(obj))


def _family_size(args, N: int) -> int:
    if args.samples is not None:
        return args.samples
    return 1024 if N == 1 else 64


def cmd_nrange(cfg: ProblemConfig, args) -> int:
    B = cfg.product()
    grid, seed = args.grid or cfg.grid, args.seed if args.seed is not None else cfg.seed
    model = assemble_model(B, cfg.quad_initial, cfg.quad_tol)
    h_model = support_function(model.S, grid)
    target = args.target or "model"
    fam = omega_family(B.N, _family_size(args, B.N), seed)
    fam_vals = dilation_family_profiles(model, fam, grid)
    inter = intersect_family(SupportProfile.from_values(v) for v in fam_vals)
    if target == "model":
        prof = h_model
    elif target == "intersection":
        prof = inter
    elif target.startswith("dilation"):
        spec = target.partition(":")[2] or None
        prof = nr_unitary(build_U_Omega(model, parse_omega(spec, B.N)).U, grid)
    else:
        raise ConfigError(f"unknown target {target!r}; use model, intersection or dilation:SPEC")
    print(f"target = {target}, grid = {grid}, family size = {len(fam)}")
    print(f"hausdorff(intersection, W(S)) = {hausdorff(inter, h_model):.6e}")
    meta = _meta(cfg, seed, f"nrange {target}")
    out = Path(args.out) if args.out else None
    if out is None:
        rows = zip(prof.angles, prof.values, prof.boundary())
        print("angle,support,boundary_x,boundary_y")
        for a, h, p in rows:
            print(f"{a:.17g},{h:.17g},{p.real:.17g},{p.imag:.17g}")
    elif out.suffix.lower() == ".svg":
        layers = [(f"W(U_Omega[{k}])", SupportProfile.from_values(v).boundary(),
                   'fill="none" stroke="#9ecae1" stroke-width="0.6"')
                  for k, v in enumerate(fam_vals[:SVG_FAMILY_LAYERS])]
        layers.append(("intersection", inter.boundary(), 'fill="#fdd0a2" fill-opacity="0.5" stroke="#e6550d"'))
        layers.append(("W(S_Theta)", h_model.boundary(), 'fill="none" stroke="#31a354" stroke-width="1.5"'))
        if target not in ("model", "intersection"):
            layers.append((target, prof.boundary(), 'fill="none" stroke="#756bb1" stroke-dasharray="3 2"'))
        write_svg(out, layers, meta)
        print(f"wrote {out}")
    else:
        write_boundary_csv(out, prof, meta)
        print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(cfg: ProblemConfig, args) -> int:
    B = cfg.product()
    seed = args.seed if args.seed is not None else cfg.seed
    omegas = [parse_omega(args.omega, B.N)] if args.omega else None
    if B.near_boundary:
        print("warning: some zero lies within 1e-6 of the unit circle")
    report = run_verify(B, args.suite or "all", omegas, args.grid or cfg.grid,
                        args.samples if args.samples is not None else 64, seed)
    print(report.table())
    print("result:", "PASS" if report.passed else "FAIL")
    if args.out:
        write_json(args.out, report.as_dict(), _meta(cfg, seed, f"verify {args.suite or 'all'}"))
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_converge(cfg: ProblemConfig, args) -> int:
    B = cfg.product()
    seed = args.seed if args.seed is not None else cfg.seed
    grid = args.grid or cfg.grid
    samples = args.samples if args.samples is not None else 64
    mode = args.mode or "truncation"
    if mode == "truncation":
        depths = cfg.converge.get("depths")
        if depths is not None and not all(isinstance(n, int) for n in depths):
            raise ConfigError("converge.depths must be integers")
        try:
            table = truncation_table(B, depths, grid, samples, seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    elif mode == "frostman":
        raw = cfg.converge.get("lambdas", [0.5, 0.25, 0.1, 0.05, 0.01, 0.0])
        table = frostman_table(B, [parse_complex(x) for x in raw], grid, samples, seed)
    else:
        raise ConfigError(f"unknown mode {mode!r}")
    print(table.format())
    if args.out:
        write_table_csv(args.out, table.header, table.rows, _meta(cfg, seed, f"converge {mode}"))
    return EXIT_OK if table.passed else EXIT_VERIFY


def _unit_angle(a):
    """Angle in [0, 2pi), with values within 1e-7 of 2pi folded to 0."""
    a = np.mod(a, 2 * np.pi)
    return np.where(a > 2 * np.pi - 1e-7, 0.0, a)


def cmd_spectrum(cfg: ProblemConfig, args) -> int:
    B = cfg.product()
    Omega = parse_omega(args.omega, B.N)
    model = assemble_model(B, cfg.quad_initial, cfg.quad_tol)
    dil = build_U_Omega(model, Omega)
    z = dilation_spectrum(dil)
    ang = _unit_angle(np.angle(z))
    order = np.argsort(ang)
    z, ang = z[order], ang[order]
    res = np.abs(np.linalg.det(z[:, None, None] * B.values(z) - Omega[None]))
    zeros = locate_zeros(B, Omega)
    matched = match_zeros(z, zeros)
    print(f"{'angle/pi':>12} {'re':>12} {'im':>12} {'|det|':>10}")
    for a, zz, r in zip(ang, z, res):
        print(f"{a / np.pi:12.8f} {zz.real + 0.0:12.8f} {zz.imag + 0.0:12.8f} {r:10.2e}")
    print("circle zeros of det(zeta Theta(zeta) - Omega):")
    for zr in sorted(zeros, key=lambda zr: float(_unit_angle(zr.angle))):
        print(f"  angle/pi = {float(_unit_angle(zr.angle)) / np.pi:.8f}  multiplicity = {zr.multiplicity}")
    print("scan matches eigenvalues:", "yes" if matched else "no")
    if args.out:
        out = Path(args.out)
        meta = _meta(cfg, args.seed if args.seed is not None else cfg.seed, "spectrum")
        payload = {
            "eigenvalues": [[float(v.real), float(v.imag)] for v in z],
            "residuals": [float(r) for r in res],
            "zeros": [{"angle": zr.angle, "multiplicity": zr.multiplicity} for zr in zeros],
            "scan_matches": matched,
        }
        write_json(out, payload, meta)
        t, a = det_scan(B, Omega)
        scan_path = out.with_suffix(".scan.csv")
        write_table_csv(scan_path, ["angle", "abs_det"], [[float(x), float(y)] for x, y in zip(t, a)], meta)
        print(f"wrote {out} and {scan_path}")
    return EXIT_OK if matched else EXIT_VERIFY


COMMANDS = {
    "model": cmd_model,
    "nrange": cmd_nrange,
    "verify": cmd_verify,
    "converge": cmd_converge,
    "spectrum": cmd_spectrum,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dilation-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="problem configuration (JSON)")
        sp.add_argument("--out", help="artifact path")
        sp.add_argument("--grid", type=int, help="number of support directions")
        sp.add_argument("--samples", type=int, help="Omega samples for family and wrap searches")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--omega", help="identity, haar:SEED, phase:ALPHA, JSON matrix or file")
        if name == "model":
            sp.add_argument("--format", choices=("text", "json"), default="text")
        if name == "nrange":
            sp.add_argument("--target", help="model, intersection or dilation:SPEC")
        if name == "verify":
            sp.add_argument("--suite", choices=SUITES + ("all",), default="all")
        if name == "converge":
            sp.add_argument("--mode", choices=("truncation", "frostman"), default="truncation")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.grid is not None and args.grid < 3:
        print("error: --grid must be at least 3", file=sys.stderr)
        return EXIT_INPUT
    if args.samples is not None and args.samples < 1:
        print("error: --samples must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            cfg = ProblemConfig.load(args.config)
            return COMMANDS[args.command](cfg, args)
    except InvalidInput as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
