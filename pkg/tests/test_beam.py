from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import eigh

from flexlife import beam


@pytest.fixture
def steel():
    return beam.Material(rho=7850.0, E=2.1e11, nu=0.3)


@pytest.fixture
def spec(steel):
    return beam.BeamSpec(
        L=0.7,
        section=beam.section_properties(0.035, 0.004),
        material=steel,
        n_v=4,
        n_w=3,
        n_theta=2,
    )


def analytic_frequency(spec, k=1):
    sec, mat = spec.section, spec.material
    beta = beam.clamped_free_root(k) / spec.L
    return beta**2 * np.sqrt(mat.E * sec.I_z / (mat.rho * sec.A_B))


class TestSectionProperties:
    def test_area_closed_form(self):
        assert beam.section_properties(0.035, 0.004).A_B * 1e6 == pytest.approx(496.0)
        assert beam.section_properties(0.035, 0.001).A_B * 1e6 == pytest.approx(136.0)

    def test_bending_inertia_exact_arithmetic(self):
        # (a^4 - (a-2t)^4) / 12 with integer millimeters
        expected = Fraction(35**4 - 27**4, 12)  # mm^4
        sec = beam.section_properties(0.035, 0.004)
        assert sec.I_y * 1e12 == pytest.approx(float(expected), rel=1e-12)
        assert sec.I_y == sec.I_z

    def test_torsion_constant_bredt(self):
        sec = beam.section_properties(0.035, 0.004)
        assert sec.I_D == pytest.approx(0.004 * (0.035 - 0.004) ** 3, rel=1e-15)

    @pytest.mark.parametrize("a,t", [(0.035, 0.0175), (0.035, 0.02), (0.035, 0.0), (0.035, -1e-3)])
    def test_invalid_walls_rejected(self, a, t):
        with pytest.raises(ValueError):
            beam.section_properties(a, t)


class TestMaterial:
    def test_shear_modulus(self, steel):
        assert steel.G == pytest.approx(2.1e11 / 2.6)

    def test_poisson_bounds(self):
        with pytest.raises(ValueError):
            beam.Material(rho=1.0, E=1.0, nu=0.5)
        with pytest.raises(ValueError):
            beam.Material(rho=-1.0, E=1.0, nu=0.3)


class TestShapeBasis:
    def test_clamped_boundary_conditions(self, spec):
        basis = beam.shape_basis(spec)
        np.testing.assert_allclose(basis.v(0.0), 0.0, atol=1e-12)
        np.testing.assert_allclose(basis.v(0.0, 1), 0.0, atol=1e-9)
        np.testing.assert_allclose(basis.w(0.0), 0.0, atol=1e-12)
        np.testing.assert_allclose(basis.theta(0.0), 0.0, atol=1e-15)

    def test_bending_orthogonality(self, spec):
        # eigenfunctions are orthogonal: off-diagonal mass entries vanish
        M = beam.bending_mass_matrix(spec)
        off = M - np.diag(np.diag(M))
        assert np.abs(off).max() < 1e-8 * np.abs(np.diag(M)).max()

    def test_analytic_derivatives_match_finite_differences(self, spec):
        basis = beam.shape_basis(spec)
        xi = np.linspace(0.05, spec.L - 0.05, 11)
        h = 1e-6
        d1 = (basis.v(xi + h) - basis.v(xi - h)) / (2.0 * h)
        np.testing.assert_allclose(d1, basis.v(xi, 1), rtol=1e-6, atol=1e-4)
        d2 = (basis.v(xi + h, 1) - basis.v(xi - h, 1)) / (2.0 * h)
        np.testing.assert_allclose(d2, basis.v(xi, 2), rtol=1e-5, atol=1e-2)

    def test_root_sequence(self):
        for k in range(1, 9):
            x = beam.clamped_free_root(k)
            assert np.cos(x) + 1.0 / np.cosh(x) == pytest.approx(0.0, abs=1e-12)


class _MonomialBasis:
    """Single bending shape v(xi) = xi^2 for the constant-curvature check."""

    def __init__(self, L):
        self.L = L

    def v(self, xi, deriv=0):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = {0: xi**2, 1: 2.0 * xi, 2: np.full_like(xi, 2.0)}[deriv]
        return out[None, :]

    def w(self, xi, deriv=0):
        return self.v(xi, deriv)

    def theta(self, xi, deriv=0):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return {0: xi, 1: np.ones_like(xi), 2: np.zeros_like(xi)}[deriv][None, :]


class TestStiffnessMatrix:
    def test_single_quadratic_shape_constant_curvature(self, steel):
        sec = beam.section_properties(0.035, 0.004)
        spec = beam.BeamSpec(L=0.7, section=sec, material=steel, n_v=1, n_w=1, n_theta=1)
        K = beam.stiffness_matrix(spec, basis=_MonomialBasis(spec.L))
        EI = steel.E * sec.I_z
        assert K[1, 1] == pytest.approx(4.0 * EI * spec.L, rel=1e-12)

    def test_exact_symmetry_and_psd(self, spec):
        K = beam.stiffness_matrix(spec)
        assert np.abs(K - K.T).max() == 0.0
        eig = np.linalg.eigvalsh(K)
        assert eig.min() >= -1e-9 * eig.max()

    def test_block_diagonal_structure(self, spec):
        K = beam.stiffness_matrix(spec)
        i0, i1 = spec.n_theta, spec.n_theta + spec.n_v
        assert np.all(K[:i0, i0:] == 0.0)
        assert np.all(K[i0:i1, i1:] == 0.0)

    def test_first_eigenfrequency_against_analytic(self, spec):
        i0, i1 = spec.n_theta, spec.n_theta + spec.n_v
        K = beam.stiffness_matrix(spec)[i0:i1, i0:i1]
        M = beam.bending_mass_matrix(spec)
        w2 = eigh(K, M, eigvals_only=True)
        assert np.sqrt(w2[0]) == pytest.approx(analytic_frequency(spec), rel=0.01)

    def test_ritz_convergence_from_above(self, steel):
        sec = beam.section_properties(0.035, 0.004)
        freqs = []
        for n in (1, 2, 3, 5):
            s = beam.BeamSpec(L=0.7, section=sec, material=steel, n_v=n, n_w=1, n_theta=1)
            i0, i1 = s.n_theta, s.n_theta + s.n_v
            K = beam.stiffness_matrix(s)[i0:i1, i0:i1]
            M = beam.bending_mass_matrix(s)
            freqs.append(np.sqrt(eigh(K, M, eigvals_only=True)[0]))
        analytic = analytic_frequency(
            beam.BeamSpec(L=0.7, section=sec, material=steel, n_v=1, n_w=1, n_theta=1)
        )
        assert all(f >= analytic * (1.0 - 1e-9) for f in freqs)
        assert all(b <= a * (1.0 + 1e-12) for a, b in zip(freqs, freqs[1:]))


class TestElementInertia:
    def test_distributed_mass(self, spec):
        dm, dJ = beam.element_inertia(spec, 0.3)
        assert dm == pytest.approx(7850.0 * 496e-6, rel=1e-12)
        assert np.all(np.diag(dJ) > 0.0)
        sec = spec.section
        np.testing.assert_allclose(
            np.diag(dJ), 7850.0 * np.array([sec.I_D, sec.I_y, sec.I_z]), rtol=1e-14
        )

    def test_total_mass_is_rho_A_L(self, spec):
        xi, w = beam.quadrature(spec)
        dm = beam.element_inertia(spec, 0.0)[0]
        assert dm * w.sum() == pytest.approx(
            spec.material.rho * spec.section.A_B * spec.L, rel=1e-13
        )

    def test_out_of_range(self, spec):
        with pytest.raises(ValueError):
            beam.element_inertia(spec, -0.1)
        with pytest.raises(ValueError):
            beam.element_inertia(spec, spec.L + 0.1)


class TestCurvature:
    def test_zero_coordinates(self, spec):
        k = beam.curvature_at(spec, 0.0, np.zeros(spec.n_elastic))
        assert k.as_array().tolist() == [0.0, 0.0, 0.0]

    def test_linearity(self, spec):
        rng = np.random.default_rng(3)
        q = rng.normal(size=spec.n_elastic)
        k1 = beam.curvature_at(spec, 0.2, q).as_array()
        k2 = beam.curvature_at(spec, 0.2, 2.0 * q).as_array()
        np.testing.assert_allclose(k2, 2.0 * k1, rtol=1e-14)

    def test_dimension_mismatch(self, spec):
        with pytest.raises(ValueError):
            beam.curvature_at(spec, 0.0, np.zeros(spec.n_elastic + 1))

    def test_static_tip_load_root_curvature(self, steel):
        # solve K q = Q for a tip force; root curvature approaches F L / EI
        sec = beam.section_properties(0.035, 0.004)
        spec = beam.BeamSpec(L=0.7, section=sec, material=steel, n_v=4, n_w=1, n_theta=1)
        basis = beam.shape_basis(spec)
        i0, i1 = spec.n_theta, spec.n_theta + spec.n_v
        K = beam.stiffness_matrix(spec)[i0:i1, i0:i1]
        F = 150.0
        Q = F * basis.v(spec.L)
        qv = np.linalg.solve(K, Q)
        kappa_root = float(basis.v(0.0, 2) @ qv)
        analytic = F * spec.L / (steel.E * sec.I_z)
        assert kappa_root == pytest.approx(analytic, rel=0.02)
