import numpy as np
import pytest

from kglab.grids import GridSpec
from kglab.scattering import (build_scattering, coefficients_by_quadrature,
                              default_k_grid, genericity_classify, jost_solve,
                              scattering_coefficients, small_k_extrapolation,
                              volterra_jost)


@pytest.fixture(scope="module")
def pt_grid():
    return GridSpec.from_spacing(30.0, 0.01)


@pytest.fixture(scope="module")
def pt_potential(pt_grid):
    """Reflectionless -2 sech^2 x potential with a zero-energy resonance."""
    return -2.0 / np.cosh(pt_grid.x) ** 2


def pt_T(k):
    return (k + 1j) / (k - 1j)


def pt_m_plus(x, k):
    return (k + 1j * np.tanh(x)) / (k + 1j)


def test_default_k_grid_shape():
    k = default_k_grid()
    assert k.size == 64 + 256
    assert k[0] == pytest.approx(1e-3)
    assert k[-1] == pytest.approx(40.0)
    assert np.all(np.diff(k) > 0)


def test_jost_closed_form_poschl_teller(pt_grid, pt_potential):
    for k in (0.3, 1.0, 4.0):
        m = jost_solve(pt_potential, pt_grid.x, k, side="plus")
        exact = pt_m_plus(pt_grid.x, k)
        assert np.abs(m - exact).max() < 1e-6


def test_jost_minus_by_reflection(pt_grid, pt_potential):
    m = jost_solve(pt_potential, pt_grid.x, 0.7, side="minus")
    exact = pt_m_plus(-pt_grid.x, 0.7)     # even potential: m_minus(x) = m_plus(-x)
    assert np.abs(m - exact).max() < 1e-6


def test_jost_rejects_bad_side(pt_grid, pt_potential):
    with pytest.raises(ValueError):
        jost_solve(pt_potential, pt_grid.x, 1.0, side="up")


def test_transmission_closed_form(pt_grid, pt_potential):
    ks = np.array([0.2, 1.0, 3.0, 8.0])
    T, Rp, Rm = scattering_coefficients(pt_potential, pt_grid.x, ks)
    assert np.abs(T - pt_T(ks)).max() < 1e-6
    assert np.abs(Rp).max() < 1e-6         # reflectionless
    assert np.abs(Rm).max() < 1e-6


def test_conjugation_symmetry(fine_model):
    V, x = fine_model.V, fine_model.grid.x
    T1, Rp1, _ = scattering_coefficients(V, x, 0.8)
    T2, Rp2, _ = scattering_coefficients(V, x, -0.8)
    assert T2 == pytest.approx(np.conj(T1))
    assert Rp2 == pytest.approx(np.conj(Rp1))


def test_quadrature_cross_check(fine_model):
    V, x = fine_model.V, fine_model.grid.x
    T1, Rp1, _ = scattering_coefficients(V, x, 1.5)
    T2, Rp2, _ = coefficients_by_quadrature(V, x, 1.5)
    assert abs(T1 - T2) < 1e-5
    assert abs(Rp1 - Rp2) < 1e-5


def test_volterra_cross_check(fine_model):
    V, x = fine_model.V, fine_model.grid.x
    m_rk = jost_solve(V, x, 1.0, side="plus")
    m_vo = volterra_jost(V, x, 1.0, side="plus")
    # the Volterra fixed point carries the trapezoid quadrature error O(dx^2)
    assert np.abs(m_rk - m_vo).max() < 5e-4


def test_unitarity_on_grid(fine_model):
    V, x = fine_model.V, fine_model.grid.x
    data = build_scattering(V, x, store_modifiers=False)
    assert data.unitarity_defect.max() < 1e-6


def test_generic_verdict(fine_model):
    verdict = genericity_classify(fine_model.V, fine_model.grid.x)
    assert verdict.verdict == "Generic"
    assert abs(verdict.T0) < 0.05
    assert abs(verdict.R_plus_0 + 1.0) < 0.1


def test_resonant_verdict(pt_grid, pt_potential):
    verdict = genericity_classify(pt_potential, pt_grid.x)
    assert verdict.verdict == "Resonant"
    # zero-energy resonance: T(0) = -1, not 0
    assert abs(verdict.T0 + 1.0) < 0.05


def test_small_k_extrapolation_linear():
    ks = np.array([0.001, 0.002, 0.004, 0.008])
    samples = [(k, 0.3 + 2.0 * k) for k in ks]
    T0, slope, resid = small_k_extrapolation(samples)
    assert T0 == pytest.approx(0.3, abs=1e-12)
    assert slope == pytest.approx(2.0, abs=1e-9)
    assert resid < 1e-12


def test_small_k_extrapolation_needs_samples():
    with pytest.raises(ValueError):
        small_k_extrapolation([(0.001, 0.1), (0.002, 0.2)])


def test_zero_k_rejected(pt_grid, pt_potential):
    with pytest.raises(ValueError):
        scattering_coefficients(pt_potential, pt_grid.x, 0.0)
