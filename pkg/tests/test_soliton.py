import numpy as np
import pytest

from kglab.grids import GridSpec, inner, is_even
from kglab.soliton import (apply_L, build_soliton, discretize_L,
                           ground_eigenpair, soliton_profile, spectrum_report)

SQ21_2 = np.sqrt(21.0) / 2.0


def test_profile_closed_form():
    x = np.array([0.0])
    assert soliton_profile(1.5, x)[0] == pytest.approx(2.5 ** (1.0 / 3.0))


def test_profile_solves_static_equation(spectral_model):
    m = spectral_model
    Q = m.Q
    res = np.empty_like(Q)
    dx = m.dx
    res[1:-1] = (Q[2:] - 2.0 * Q[1:-1] + Q[:-2]) / dx**2 - Q[1:-1] + Q[1:-1] ** 4
    assert np.abs(res[1:-1]).max() < 1e-3      # O(dx^2) discretization residual


def test_model_fields(spectral_model):
    m = spectral_model
    assert m.lambda0 == pytest.approx(-5.25)
    assert m.Omega == pytest.approx(SQ21_2)
    assert is_even(m.Q) and is_even(m.V) and is_even(m.rho)
    assert inner(m.rho, m.rho, m.dx) == pytest.approx(1.0, abs=1e-10)
    # rho is an exact eigenfunction of L up to discretization
    r = apply_L(m, m.rho) - m.lambda0 * m.rho
    assert np.abs(r[1:-1]).max() < 1e-2


def test_build_rejects_bad_alpha():
    with pytest.raises(ValueError):
        build_soliton(1.0, GridSpec.from_spacing(40.0, 0.02))


def test_build_rejects_undecayed_potential():
    with pytest.raises(ValueError):
        build_soliton(1.5, GridSpec.from_spacing(3.0, 0.02))


def test_spectrum_ground_eigenvalue(spectral_model):
    rep = spectrum_report(spectral_model)
    assert abs(rep.eigenvalue_below + 5.25) < 1e-3
    assert rep.parities[int(np.argmin(rep.eigenvalues))] == "even"


def test_spectrum_no_internal_mode(spectral_model):
    rep = spectrum_report(spectral_model)
    assert not rep.has_internal_mode


def test_spectrum_zero_mode_is_odd(spectral_model):
    # translation mode Q' has eigenvalue 0 and odd parity
    rep = spectrum_report(spectral_model)
    j = int(np.argmin(np.abs(rep.eigenvalues)))
    assert abs(rep.eigenvalues[j]) < 1e-2
    assert rep.parities[j] == "odd"


def test_ground_eigenvector_matches_analytic(spectral_model):
    lam, vec = ground_eigenpair(spectral_model)
    diff = vec - spectral_model.rho
    assert np.sqrt(inner(diff, diff, spectral_model.dx)) < 1e-3
    assert lam == pytest.approx(-5.25, abs=1e-3)


def test_spectrum_rejects_coarse_grid():
    m = build_soliton(1.5, GridSpec.from_spacing(40.0, 0.1))
    with pytest.raises(ValueError):
        spectrum_report(m)


def test_discretize_L_symmetric_tridiagonal(spectral_model):
    diag, off = discretize_L(spectral_model)
    assert diag.size == spectral_model.grid.n_points - 2
    assert off.size == diag.size - 1
    assert np.allclose(off, off[0])
