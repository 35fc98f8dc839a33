import numpy as np
import pytest

from dilation_lab.errors import NoConvergence, NotContraction, NotPure
from dilation_lab.inner import BPFactor, BPProduct
from dilation_lab.linalg import haar_unitary
from dilation_lab.modelspace import (
    adaptive_quadrature,
    assemble_augmented,
    assemble_model,
    build_basis,
    circle_nodes,
    defect_data,
    frostman_model,
    h2_inner,
    orthogonality_residual,
)
from dilation_lab.sampling import random_product

Z = BPFactor.full(0.0, 1)


def const(v):
    v = np.asarray(v, dtype=complex)
    return lambda zs: np.broadcast_to(v, (zs.shape[0], v.size))


class TestH2Inner:
    def test_constants(self):
        assert np.isclose(h2_inner(const([1, 2j]), const([1, 2j])), 5.0)

    def test_monomials_orthogonal(self):
        f = lambda zs: (zs**2)[:, None]  # noqa: E731
        g = lambda zs: (zs**5)[:, None]  # noqa: E731
        assert abs(h2_inner(f, g)) < 1e-15

    def test_szego_kernel_norm(self):
        k = lambda zs: (1 / (1 - 0.5 * zs))[:, None]  # noqa: E731
        assert abs(h2_inner(k, k) - 4 / 3) < 1e-13

    def test_cap_raises(self):
        calls = iter(range(100))
        with pytest.raises(NoConvergence):
            adaptive_quadrature(lambda m: np.array([next(calls)]), 8, 1e-12, cap=64)


class TestBasis:
    def test_z_squared(self):
        basis = build_basis(BPProduct([Z, Z]))
        zs = circle_nodes(8)
        E = basis.values(zs)[:, 0, :]
        assert np.allclose(E, np.stack([np.ones(8), zs], axis=1))

    def test_z_identity_c2(self):
        basis = build_basis(BPProduct([BPFactor.full(0.0, 2)]))
        E = basis.values(circle_nodes(4))
        assert np.allclose(E, np.broadcast_to(np.eye(2), (4, 2, 2)))

    def test_single_szego(self):
        basis = build_basis(BPProduct([BPFactor.full(0.5, 1)]))
        zs = circle_nodes(16)
        expected = (np.sqrt(3) / 2) / (1 - zs / 2)
        assert np.allclose(basis.values(zs)[:, 0, 0], expected)

    @pytest.mark.parametrize("seed", range(5))
    def test_orthogonal_to_theta_h2(self, seed, backend):
        B = random_product(seed)
        basis = build_basis(B)
        assert basis.d == B.model_dimension
        assert basis.gram_residual <= 1e-9
        assert orthogonality_residual(basis, B) <= 1e-8

    def test_not_pure(self):
        with pytest.raises(NotPure):
            build_basis(BPProduct([BPFactor(0.3, np.diag([1.0, 0.0]))]))


class TestAssemble:
    def test_scalar_z(self):
        m = assemble_model(BPProduct([Z]))
        assert np.allclose(m.S, 0) and np.allclose(m.iota, 1) and np.allclose(m.iota_star, 1)

    def test_scalar_z_squared(self):
        m = assemble_model(BPProduct([Z, Z]))
        assert np.allclose(m.S, [[0, 0], [1, 0]], atol=1e-14)
        assert np.allclose(m.iota, [[0], [1]], atol=1e-14)
        assert np.allclose(m.iota_star, [[1], [0]], atol=1e-14)

    def test_z_identity_c2(self):
        m = assemble_model(BPProduct([BPFactor.full(0.0, 2)]))
        assert np.allclose(m.S, 0) and np.allclose(m.iota, np.eye(2)) and np.allclose(m.iota_star, np.eye(2))

    @pytest.mark.parametrize("seed", range(10))
    def test_invariants_random(self, seed):
        B = random_product(100 + seed)
        m = assemble_model(B)
        r = m.residuals
        assert max(r["isometry"], r["isometry_star"], r["intertwining"]) <= 1e-8
        assert r["defect_rank"] == r["defect_rank_star"] == B.N
        assert np.linalg.norm(m.S, 2) <= 1 + 1e-9
        w = np.linalg.eigvalsh(np.eye(m.d) - m.S.conj().T @ m.S)
        assert np.all(w[-B.N:] >= 1e-4) and np.all(np.abs(w[: m.d - B.N]) <= 1e-8)

    def test_basis_covariance(self):
        # a constant unitary V changes the basis but not the unitary class of S
        B = random_product(21, N=2)
        B2 = BPProduct(B.factors, haar_unitary(2, 9) @ B.V, N=2)
        s1 = np.linalg.svd(assemble_model(B).S, compute_uv=False)
        s2 = np.linalg.svd(assemble_model(B2).S, compute_uv=False)
        assert np.allclose(s1, s2, atol=1e-10)


class TestAugmented:
    def test_scalar_z(self):
        aug = assemble_augmented(BPProduct([Z]))
        assert np.allclose(aug.J, np.eye(2), atol=1e-14)

    def test_j_star_sends_constants_to_constants(self):
        B = random_product(8, N=2)
        aug = assemble_augmented(B)
        d = aug.base.d
        # the last N augmented basis vectors are Theta xi_i; J_* of (0 (+) xi) is the constant xi
        zs = circle_nodes(32)
        vals = aug.model.basis.values(zs) @ aug.J_star[:, d:]
        assert np.allclose(vals, np.broadcast_to(np.eye(2), (32, 2, 2)), atol=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_unitary(self, seed):
        aug = assemble_augmented(random_product(200 + seed, d_max=6))
        n = aug.J.shape[0]
        assert np.linalg.norm(aug.J.conj().T @ aug.J - np.eye(n), 2) <= 1e-8
        assert np.linalg.norm(aug.J_star.conj().T @ aug.J_star - np.eye(n), 2) <= 1e-8


class TestFrostmanModel:
    def test_zero_parameter(self):
        B = random_product(3, N=2)
        assert np.allclose(frostman_model(B, 0).S, assemble_model(B).S, atol=1e-12)

    def test_invariants(self):
        m = frostman_model(random_product(4, N=2), 0.3 - 0.1j)
        assert m.residuals["isometry"] <= 1e-8 and m.residuals["intertwining"] <= 1e-8


class TestDefectData:
    def test_unitary(self):
        dd = defect_data(haar_unitary(3, 0))
        assert (dd.rank, dd.rank_star) == (0, 0)

    def test_zero(self):
        dd = defect_data(np.zeros((2, 2)))
        assert np.allclose(dd.D, np.eye(2)) and dd.rank == 2

    def test_jordan(self, jordan2):
        dd = defect_data(jordan2)
        assert (dd.rank, dd.rank_star) == (1, 1)

    def test_not_contraction(self):
        with pytest.raises(NotContraction):
            defect_data(2 * np.eye(2))
