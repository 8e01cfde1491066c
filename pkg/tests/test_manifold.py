import numpy as np
import pytest

from kglab.config import Config, build_data
from kglab.dynamics import evolve_full
from kglab.grids import inner
from kglab.manifold import (DataSpec, budget_norm, classify_escape,
                            normalize_budget, prepare_data, shoot_stable,
                            stability_residual, transverse_norm)


def test_dataspec_rejects_odd_zeta(disc):
    z = disc.x * np.exp(-disc.x**2)
    with pytest.raises(ValueError):
        DataSpec(1e-3, z, np.zeros_like(z)).validate(disc)


def test_dataspec_rejects_unprojected_zeta(disc):
    z = 1e-2 * disc.rho.copy()
    with pytest.raises(ValueError):
        DataSpec(1e-3, z, np.zeros_like(z)).validate(disc)


def test_budget_normalization(prod_basis, disc):
    z = np.exp(-((disc.x / 3.0) ** 2))
    z -= inner(z, disc.rho, disc.dx) * disc.rho
    spec = normalize_budget(DataSpec(2.5e-3, z, np.zeros_like(z)), prod_basis)
    total = budget_norm(spec, prod_basis)
    assert total == pytest.approx(0.1 * spec.epsilon0, rel=1e-6)


def test_budget_rejects_large_b(prod_basis, disc):
    z = np.zeros_like(disc.x)
    with pytest.raises(ValueError):
        normalize_budget(DataSpec(0.03, z, z), prod_basis)


def test_prepare_data_embedding(default_spec, disc):
    s = 1e-4
    state = prepare_data(default_spec, s, disc)
    v = state.u - disc.Q
    a0 = inner(v, disc.rho, disc.dx)
    a1 = inner(state.ut, disc.rho, disc.dx)
    assert a0 == pytest.approx(default_spec.b + s, abs=1e-10)
    assert a1 == pytest.approx(disc.Omega * (s - default_spec.b), abs=1e-10)


def test_escape_classification_sides(default_spec, disc, shot):
    # stepping off the manifold by +/- d flips the escape side
    d = 1e-4
    for sign, expected in ((1.0, "GrowPlus"), (-1.0, "GrowMinus")):
        state = prepare_data(default_spec, shot.s_star + sign * d, disc)
        traj = evolve_full(state, disc, T=16.0)
        assert classify_escape(traj, disc.Omega) == expected


def test_undetermined_on_manifold(shot, disc):
    assert classify_escape(shot.trajectory, disc.Omega) == "Undetermined"


def test_bisection_converged(shot):
    assert len(shot.bracket_history) >= 10
    # |s*| ~ ||gamma||^(3/2) << ||gamma|| = 5e-3
    assert abs(shot.s_star) < 1e-4


def test_s_star_cubic_half_smallness(default_spec, disc, shot):
    gamma = transverse_norm(default_spec, disc)
    assert abs(shot.s_star) < gamma ** 1.4


def test_stability_residual_below_bound(shot):
    assert shot.residual <= shot.residual_bound


def test_corrections_tiny(shot):
    # restart corrections only cancel amplified round-off
    assert all(abs(d) < 1e-9 for _, d in shot.corrections)


def test_shot_trajectory_stays_small(shot, disc):
    traj = shot.trajectory
    assert not traj.escaped
    assert np.abs(traj.a).max() < 2.0 * (abs(shot.s_star) + default_b())
    assert traj.chi_sup.max() < 0.05


def default_b():
    return Config().b


def test_residual_recompute_matches(shot, disc):
    res, bound = stability_residual(shot.trajectory, disc.Omega, 0.04,
                                    a_minus0=default_b())
    assert res == pytest.approx(shot.residual, rel=1e-12)
    assert bound == pytest.approx(shot.residual_bound, rel=1e-12)
