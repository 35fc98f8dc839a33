import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilation_lab.errors import EmptyFamily, GridMismatch
from dilation_lab.inner import BPFactor, BPProduct
from dilation_lab.linalg import haar_unitary
from dilation_lab.modelspace import assemble_model
from dilation_lab.numrange import (
    SupportProfile,
    compressed_support,
    contains_points,
    dilation_family_profiles,
    ellipse_oracle,
    grid_angles,
    hausdorff,
    hull_merge,
    intersect_family,
    nr_unitary,
    omega_family,
    rayleigh_samples,
    support_function,
    wrap_gap,
)
from dilation_lab.sampling import random_matrix, random_product

G = 720
ANG = grid_angles(G)
Z = BPFactor.full(0.0, 1)


class TestSupportFunction:
    def test_zero(self):
        assert np.allclose(support_function(np.zeros((3, 3))).values, 0)

    def test_segment(self):
        assert np.allclose(support_function(np.diag([1.0, -1.0])).values, np.abs(np.cos(ANG)))

    def test_jordan(self, jordan2):
        assert np.allclose(support_function(jordan2).values, 0.5)

    def test_self_consistent(self):
        prof = support_function(random_matrix(4, 2), 360)
        again = SupportProfile.of_points(prof.boundary(), 360)
        # central-difference boundary points sit on the curve up to O(step^2)
        assert hausdorff(prof, again) <= 1e-3

    def test_bounded_for_contractions(self):
        T = random_matrix(5, 3)
        T /= np.linalg.norm(T, 2)
        assert np.max(np.abs(support_function(T).values)) <= 1 + 1e-9

    def test_backends_agree(self, backend):
        T = random_matrix(6, 8)
        ref = np.array([np.linalg.eigvalsh(0.5 * (np.exp(-1j * a) * T + np.exp(1j * a) * T.conj().T))[-1]
                        for a in ANG])
        assert np.max(np.abs(support_function(T).values - ref)) <= 1e-12


class TestUnitaryRange:
    def test_identity_point(self):
        assert np.allclose(nr_unitary(np.eye(2)).values, np.cos(ANG))

    def test_segment(self):
        assert np.allclose(nr_unitary(np.diag([1.0, -1.0])).values, np.abs(np.cos(ANG)))

    def test_triangle(self):
        C = np.roll(np.eye(3), 1, axis=0)
        verts = np.exp(2j * np.pi * np.arange(3) / 3)
        expected = np.max((np.exp(-1j * ANG)[:, None] * verts).real, axis=1)
        assert np.allclose(nr_unitary(C).values, expected)
        assert np.allclose(nr_unitary(C).values, support_function(C).values, atol=1e-12)


class TestSetOperations:
    def test_hausdorff_examples(self):
        A = SupportProfile.disc(1.0)
        assert hausdorff(A, A) == 0
        assert np.isclose(hausdorff(A, SupportProfile.disc(0.5)), 0.5)
        assert np.isclose(hausdorff(SupportProfile.of_points([-1, 1]), SupportProfile.of_points([0])), 1.0)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            hausdorff(SupportProfile.disc(1.0, G=10), SupportProfile.disc(1.0, G=12))

    def test_hull_merge(self):
        A = SupportProfile.disc(0.5)
        assert np.array_equal(hull_merge(A, A).values, A.values)
        seg = hull_merge(SupportProfile.of_points([1]), SupportProfile.of_points([-1]))
        assert np.allclose(seg.values, np.abs(np.cos(ANG)))
        cone = hull_merge(A, SupportProfile.of_points([1]))
        assert np.allclose(cone.values, np.maximum(0.5, np.cos(ANG)))

    def test_intersect(self):
        A = SupportProfile.disc(0.3)
        assert np.array_equal(intersect_family([A]).values, A.values)
        with pytest.raises(EmptyFamily):
            intersect_family([])

    def test_diameters_collapse(self):
        m = assemble_model(BPProduct([Z]))
        fam = dilation_family_profiles(m, omega_family(1, 1024), G)
        inter = intersect_family(SupportProfile.from_values(v) for v in fam)
        assert np.max(np.abs(inter.values)) <= 5e-3

    def test_triangles_envelope(self):
        m = assemble_model(BPProduct([Z, Z]))
        fam = dilation_family_profiles(m, omega_family(1, 720), G)
        inter = intersect_family(SupportProfile.from_values(v) for v in fam)
        assert hausdorff(inter, SupportProfile.disc(0.5)) <= 5e-3
        assert hausdorff(inter, support_function(m.S)) <= 5e-3

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31), st.integers(0, 2**31), st.integers(1, 6))
    def test_lipschitz(self, s1, s2, n):
        T, S = random_matrix(n, s1), random_matrix(n, s2)
        assert hausdorff(support_function(T), support_function(S)) <= np.linalg.norm(T - S, 2) + 1e-9

    def test_compressed_support_full_projection(self):
        T = random_matrix(4, 1)
        assert np.allclose(compressed_support(T, np.eye(4)).values, support_function(T).values)
        with pytest.raises(EmptyFamily):
            compressed_support(T, np.zeros((4, 4)))


class TestEllipseOracle:
    def test_segment(self):
        assert np.allclose(ellipse_oracle(np.diag([1.0, -1.0])).values, np.abs(np.cos(ANG)))

    def test_jordan_circle(self, jordan2):
        assert np.allclose(ellipse_oracle(jordan2).values, 0.5)

    def test_vertical_segment(self):
        assert np.allclose(ellipse_oracle(np.diag([1j, -1j])).values, np.abs(np.sin(ANG)))

    @pytest.mark.parametrize("seed", range(20))
    def test_agrees_with_eigen_route(self, seed):
        T = random_matrix(2, seed, scale=2.0)
        assert hausdorff(ellipse_oracle(T), support_function(T)) <= 1e-8

    def test_rejects_larger(self):
        with pytest.raises(ValueError):
            ellipse_oracle(np.eye(3))


class TestRayleigh:
    def test_identity_and_zero(self):
        assert np.allclose(rayleigh_samples(np.eye(3), 50, 1), 1)
        assert np.allclose(rayleigh_samples(np.zeros((3, 3)), 50, 1), 0)

    def test_jordan_disc(self, jordan2):
        assert np.max(np.abs(rayleigh_samples(jordan2, 2000, 2))) <= 0.5 + 1e-9

    def test_inside_profile(self):
        T = random_matrix(5, 4)
        assert contains_points(support_function(T), rayleigh_samples(T, 2000, 5))


class TestWrapGap:
    def test_scalar_z_direction_zero(self):
        rep = wrap_gap(assemble_model(BPProduct([Z])), [0.0])
        assert abs(rep.gaps[0]) <= 1e-6
        assert abs(rep.minimizers[0][0, 0] + 1) <= 1e-4

    def test_z_identity_any_direction(self):
        m = assemble_model(BPProduct([BPFactor.full(0.0, 2)]))
        rep = wrap_gap(m, [0.0, 1.1, 2.5, 4.0], samples=64, seed=1)
        assert np.max(np.abs(rep.gaps)) <= 1e-6

    def test_z_squared(self):
        rep = wrap_gap(assemble_model(BPProduct([Z, Z])), [0.0])
        assert 0 <= rep.gaps[0] + 1e-8 and rep.gaps[0] <= 5e-3

    def test_report_fields_and_determinism(self):
        m = assemble_model(random_product(12, N=2, d_max=4))
        dirs = grid_angles(6)
        a = wrap_gap(m, dirs, samples=16, seed=3)
        b = wrap_gap(m, dirs, samples=16, seed=3)
        assert np.array_equal(a.gaps, b.gaps)
        assert a.samples == 16 and a.evaluations > 16 * 6 and len(a.minimizers) == 6
        for Om in a.minimizers:
            assert np.allclose(Om.conj().T @ Om, np.eye(2), atol=1e-10)

    def test_containment_family(self):
        m = assemble_model(random_product(13, N=2))
        fam = dilation_family_profiles(m, [haar_unitary(2, s) for s in range(20)], G)
        assert np.min(fam - support_function(m.S).values) >= -1e-8
