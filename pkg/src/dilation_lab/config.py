"""Problem configuration files and Omega specifications.

A configuration is a JSON document.  Complex numbers are ``[re, im]`` pairs
(a bare real number is also accepted); matrices are nested row lists of
such pairs::

    {
      "N": 1,
      "factors": [
        {"lambda": [0.0, 0.0], "projection": {"full": true}},
        {"lambda": [0.5, 0.1], "projection": {"span": [[[1, 0]]]}}
      ],
      "constant_unitary": [[[1, 0]]],
      "quadrature": {"initial": 512, "tol": 1e-12},
      "grid": 720,
      "seed": 0,
      "converge": {"depths": [2, 3, 4], "lambdas": [[0.1, 0], [0.01, 0]]}
    }

``projection`` is one of ``{"full": true}``, ``{"matrix": NxN}`` or
``{"span": [column vectors]}``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DilationLabError, NotUnitaryParam
from .inner import BPFactor, BPProduct
from .linalg import check_unitary, haar_unitary
from .modelspace import QUAD_INITIAL, QUAD_TOL
from .numrange import DEFAULT_GRID


def parse_complex(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ConfigError(f"cannot read {x!r} as a complex number; use [re, im]")


def parse_cmatrix(rows, shape=None) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError("matrix must be a non-empty list of rows")
    A = np.array([[parse_complex(x) for x in r] for r in rows], dtype=np.complex128) \
        if len({len(r) for r in rows}) == 1 else None
    if A is None:
        raise ConfigError("matrix rows have different lengths")
    if shape is not None and A.shape != shape:
        raise ConfigError(f"expected a {shape[0]}x{shape[1]} matrix, got {A.shape[0]}x{A.shape[1]}")
    return A


def encode_cmatrix(A) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(A)]


def _parse_factor(entry, N: int, index: int) -> BPFactor:
    if not isinstance(entry, dict) or "lambda" not in entry:
        raise ConfigError(f"factor {index}: expected an object with a 'lambda' key")
    lam = parse_complex(entry["lambda"])
    proj = entry.get("projection", {"full": True})
    try:
        if proj.get("full"):
            return BPFactor.full(lam, N)
        if "matrix" in proj:
            return BPFactor(lam, parse_cmatrix(proj["matrix"], (N, N)))
        if "span" in proj:
            cols = [[parse_complex(x) for x in v] for v in proj["span"]]
            if not cols or any(len(v) != N for v in cols):
                raise ConfigError(f"factor {index}: span vectors must have length {N}")
            return BPFactor.from_span(lam, np.array(cols, dtype=np.complex128).T)
    except ConfigError:
        raise
    except DilationLabError as exc:
        raise ConfigError(f"factor {index}: {exc}") from exc
    raise ConfigError(f"factor {index}: projection needs 'full', 'matrix' or 'span'")


def config_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass
class ProblemConfig:
    N: int
    factors: list
    constant_unitary: np.ndarray
    quad_initial: int = QUAD_INITIAL
    quad_tol: float = QUAD_TOL
    grid: int = DEFAULT_GRID
    seed: int = 0
    converge: dict = field(default_factory=dict)
    hash: str = ""

    def product(self, depth: int | None = None) -> BPProduct:
        factors = self.factors if depth is None else self.factors[:depth]
        return BPProduct(factors, self.constant_unitary, N=self.N)

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemConfig":
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        N = doc.get("N")
        if not isinstance(N, int) or N < 1:
            raise ConfigError("'N' must be a positive integer")
        raw_factors = doc.get("factors")
        if not isinstance(raw_factors, list) or not raw_factors:
            raise ConfigError("'factors' must be a non-empty list")
        factors = [_parse_factor(f, N, i) for i, f in enumerate(raw_factors)]
        if "constant_unitary" in doc:
            try:
                V = check_unitary(parse_cmatrix(doc["constant_unitary"], (N, N)), 1e-10, "constant_unitary")
            except DilationLabError as exc:
                raise ConfigError(str(exc)) from exc
        else:
            V = np.eye(N, dtype=np.complex128)
        quad = doc.get("quadrature", {})
        initial = int(quad.get("initial", QUAD_INITIAL))
        if initial < 4:
            raise ConfigError("quadrature.initial must be at least 4")
        grid = int(doc.get("grid", DEFAULT_GRID))
        if grid < 3:
            raise ConfigError("grid must be at least 3")
        return cls(N, factors, V, initial, float(quad.get("tol", QUAD_TOL)), grid,
                   int(doc.get("seed", 0)), dict(doc.get("converge", {})), config_hash(doc))

    @classmethod
    def load(cls, path) -> "ProblemConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def parse_omega(spec: str | None, N: int) -> np.ndarray:
    """Read an Omega specification.

    Accepted forms: ``identity``, ``haar:SEED``, ``phase:ALPHA`` (N = 1,
    radians), an inline JSON matrix of ``[re, im]`` pairs, or a path to a
    JSON file holding such a matrix.
    """
    if spec is None or spec.strip().lower() in ("", "identity", "i"):
        return np.eye(N, dtype=np.complex128)
    spec = spec.strip()
    if spec.startswith("haar:"):
        try:
            return haar_unitary(N, int(spec[5:]))
        except ValueError as exc:
            raise ConfigError(f"bad haar seed in {spec!r}") from exc
    if spec.startswith("phase:"):
        if N != 1:
            raise ConfigError("phase:ALPHA is only meaningful for N = 1")
        try:
            alpha = float(spec[6:])
        except ValueError as exc:
            raise ConfigError(f"bad phase in {spec!r}") from exc
        return np.array([[np.exp(1j * alpha)]])
    if spec.startswith("["):
        try:
            rows = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Omega is not valid JSON: {exc}") from exc
    else:
        p = Path(spec)
        if not p.exists():
            raise ConfigError(f"unrecognised Omega spec {spec!r}")
        rows = json.loads(p.read_text(encoding="utf-8"))
    Omega = parse_cmatrix(rows, (N, N))
    return check_unitary(Omega, 1e-10, "Omega", NotUnitaryParam)
