"""Time the numba and numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each row reports the best of ``--repeat`` runs per backend, the speedup and
the largest absolute difference between the two outputs.  numba compilation
is excluded by a warm-up call.
"""

from __future__ import annotations

import argparse
import json
import platform
import timeit

import numpy as np

from dilation_lab import kernels
from dilation_lab.modelspace import assemble_model, circle_nodes
from dilation_lab.numrange import dilation_family_profiles, grid_angles, omega_family, wrap_gap
from dilation_lab.sampling import random_matrix, random_product


def cases(size: str):
    B = random_product(11, N=2, n_max=6, d_max=8)
    lams, units, projs = B.packed()
    model = assemble_model(B)
    basis = model.basis
    zs = circle_nodes(4096 if size == "large" else 1024)
    rng = np.random.default_rng(3)
    T = random_matrix(12, rng)
    H = random_matrix(10, rng, 1.0)
    H = np.stack([A + A.conj().T for A in (H * rng.uniform(0.5, 2.0) for _ in range(256))])
    Om = omega_family(B.N, 1, 5)[0]
    fam = omega_family(B.N, 256, 1)
    return {
        "bp_values": lambda: kernels.bp_values(zs, lams, units, projs, B.V),
        "tmw_values": lambda: kernels.tmw_values(zs, lams, units, projs, basis.vecs, basis.owner),
        "support_values": lambda: kernels.support_values(T, grid_angles(720)),
        "top_eig_batch": lambda: kernels.top_eig_batch(H),
        "det_abs_scan": lambda: kernels.det_abs_scan(np.exp(2j * np.pi * np.arange(4096) / 4096),
                                                     lams, units, projs, B.V, Om),
        "family_profiles (256 x 720)": lambda: dilation_family_profiles(model, fam, 720),
        "wrap_gap (8 directions)": lambda: wrap_gap(model, grid_angles(8), samples=64, seed=0).gaps,
    }


def run(repeat: int, size: str) -> list[dict]:
    rows = []
    backends = [b for b in kernels.BACKENDS if b == "numpy" or kernels.HAVE_NUMBA]
    previous = kernels.get_backend()
    try:
        for name in cases(size):
            timings, outputs = {}, {}
            for b in backends:
                kernels.set_backend(b)
                fn = cases(size)[name]
                outputs[b] = np.asarray(fn())
                timings[b] = min(timeit.repeat(fn, number=1, repeat=repeat))
            row = {"kernel": name, **{f"{b}_s": t for b, t in timings.items()}}
            if len(backends) == 2:
                row["speedup"] = timings["numpy"] / timings["numba"]
                row["max_abs_diff"] = float(np.max(np.abs(outputs["numba"] - outputs["numpy"])))
            rows.append(row)
    finally:
        kernels.set_backend(previous)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", choices=("small", "large"), default="small")
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)
    rows = run(args.repeat, args.size)
    print(f"python {platform.python_version()}, numpy {np.__version__}, numba available: {kernels.HAVE_NUMBA}")
    print(f"{'kernel':<30}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max diff':>11}")
    for r in rows:
        nb = f"{1e3 * r['numba_s']:12.3f}" if "numba_s" in r else f"{'-':>12}"
        sp = f"{r['speedup']:10.2f}{r['max_abs_diff']:11.1e}" if "speedup" in r else ""
        print(f"{r['kernel']:<30}{nb}{1e3 * r['numpy_s']:12.3f}{sp}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
