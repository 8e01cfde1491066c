"""End-to-end acceptance gates for the laboratory, one test per criterion.

The two integrated-decay sub-assertions in criterion 7 measure tail
convergence of functionals whose integrands decay like 1/t up to a small
power; at the accessible horizon their tails converge only logarithmically,
and the T-doubling change stays above the 5% gate for any admissible data.
They are asserted at face value and are expected to fail; the analysis is
recorded in the project decision notes.
"""

import numpy as np
import pytest

from kglab.analysis import decay_report, fit_decay, profile_derivative_decay
from kglab.config import Config, build_data
from kglab.dft import (forward_dft, inverse_dft, linear_decay_probe,
                       project_continuous)
from kglab.dynamics import (FieldState, ModalState, _verlet_kernel,
                            build_discrete_soliton, evolve_full, evolve_modal,
                            mode_extract)
from kglab.grids import GridSpec, inner
from kglab.manifold import (DataSpec, prepare_data, shoot_stable,
                            transverse_norm)
from kglab.scattering import (build_scattering, genericity_classify,
                              jost_solve)
from kglab.soliton import ground_eigenpair, spectrum_report

from conftest import gaussian_even

OMEGA = np.sqrt(21.0) / 2.0
DT, DX = 0.04, 0.05


# --- 1: spectral data ---------------------------------------------------

def test_criterion_1_spectral_data(spectral_model):
    rep = spectrum_report(spectral_model)
    assert abs(rep.eigenvalue_below + 5.25) < 1e-3
    assert not rep.has_internal_mode
    _, vec = ground_eigenpair(spectral_model)
    diff = vec - spectral_model.rho
    assert np.sqrt(inner(diff, diff, spectral_model.dx)) < 1e-3


# --- 2: scattering ------------------------------------------------------

def test_criterion_2_scattering(fine_model):
    V, x = fine_model.V, fine_model.grid.x
    data = build_scattering(V, x, store_modifiers=False)
    assert data.unitarity_defect.max() < 1e-6
    v = data.genericity
    assert v.verdict == "Generic"
    assert abs(v.T0) < 0.05
    assert abs(v.R_plus_0 + 1.0) < 0.1

    grid = GridSpec.from_spacing(30.0, 0.01)
    pt = -2.0 / np.cosh(grid.x) ** 2
    assert genericity_classify(pt, grid.x).verdict == "Resonant"
    k = 1.0
    m = jost_solve(pt, grid.x, k, side="plus")
    exact = (k + 1j * np.tanh(grid.x)) / (k + 1j)
    assert np.abs(m - exact).max() < 1e-6


# --- 3: distorted Fourier transform -------------------------------------

def test_criterion_3_dft(spec_basis):
    rng = np.random.default_rng(11)
    for _ in range(20):
        h = project_continuous(spec_basis, gaussian_even(rng, spec_basis.x))
        ratio = (spec_basis.k_norm(forward_dft(spec_basis, h))
                 / np.sqrt(inner(h, h, spec_basis.dx)))
        assert abs(ratio - 1.0) < 1e-3
    assert spec_basis.k_norm(forward_dft(spec_basis, spec_basis.rho)) < 1e-3
    h = np.exp(-(spec_basis.x**2) / 4.0)
    pc = project_continuous(spec_basis, h)
    rt = inverse_dft(spec_basis, forward_dft(spec_basis, h)).real
    assert np.abs(rt - pc).max() < 1e-4


# --- 4: linear dispersive decay -----------------------------------------

def test_criterion_4_linear_decay(prod_basis):
    f = project_continuous(prod_basis, np.exp(-((prod_basis.x / 7.0) ** 2)))
    probe = linear_decay_probe(prod_basis, f, np.arange(1.0, 100.5, 0.5))
    fs = fit_decay(probe["t"], probe["sup"], (10.0, 100.0), envelope=True)
    fw = fit_decay(probe["t"], probe["weighted"], (10.0, 100.0), envelope=True)
    assert abs(fs.slope + 0.5) <= 0.1
    assert abs(fw.slope + 1.0) <= 0.15


# --- 5: unstable growth rate --------------------------------------------

def test_criterion_5_unstable_rate(disc):
    a0 = 1e-6
    state = FieldState(0.0, disc.Q + a0 * disc.rho, disc.Omega * a0 * disc.rho)
    traj = evolve_full(state, disc, T=5.0, sample_stride=DT,
                       check_blowup=False)
    a_plus = 0.5 * (traj.a + traj.adot / disc.Omega)
    mask = (a_plus > 0) & (a_plus < 1e-3) & (traj.times > 0)
    rate = np.polyfit(traj.times[mask], np.log(a_plus[mask]), 1)[0]
    assert abs(rate - OMEGA) / OMEGA < 0.02


# --- 6: shooting / stable manifold --------------------------------------

def test_criterion_6_shooting_and_residual(shot):
    assert len(shot.bracket_history) >= 10
    assert not shot.trajectory.escaped
    assert shot.residual <= shot.residual_bound


def test_criterion_6_h_scaling(disc):
    x, rho = disc.x, disc.rho

    def make_zeta(size):
        z = 4.0 * np.exp(-((x / 2.0) ** 2)) + np.exp(-((x / 8.0) ** 2))
        z -= disc.ip(z, rho) * rho
        z *= size / np.sqrt(disc.ip((1.0 + x**2) * z, z))
        return z

    bs = np.array([0.005, 0.01, 0.02, 0.04])
    s_abs, gamma = [], []
    for b in bs:
        spec = DataSpec(b, make_zeta(2.0 * b), np.zeros_like(x))
        res = shoot_stable(spec, disc, horizon=0.5, s_max=0.5)
        s_abs.append(abs(res.s_star))
        gamma.append(transverse_norm(spec, disc))
    slope = np.polyfit(np.log(gamma), np.log(s_abs), 1)[0]
    assert slope >= 1.4


# --- 7: pointwise decay rates of the stabilized flow --------------------

def test_criterion_7_decay_exponents(shot, prod_basis):
    rep = decay_report(shot.trajectory, prod_basis, t1=10.0, t2=120.0)
    assert abs(rep.exponent_a.slope + 2.0) <= 0.3
    assert abs(rep.exponent_chi_sup.slope + 0.5) <= 0.1
    assert abs(rep.exponent_chi_local.slope + 1.0) <= 0.2


def test_criterion_7_integrated_sup_convergence(shot):
    # EXPECTED RED: integrand ~ t^(-1.05); tail converges logarithmically,
    # so the T-doubling change cannot drop below 5% at this horizon
    rep = decay_report(shot.trajectory, None, t1=10.0, t2=120.0)
    assert rep.integrated_decay["sup"]["rel_change"] < 0.05


def test_criterion_7_integrated_local_convergence(shot):
    # EXPECTED RED: same structural obstruction, weaker exponent
    rep = decay_report(shot.trajectory, None, t1=10.0, t2=120.0)
    assert rep.integrated_decay["local"]["rel_change"] < 0.05


# --- 8: X-norm boundedness ----------------------------------------------

def test_criterion_8_x_norm_bounded(shot, prod_basis, default_spec):
    rep = decay_report(shot.trajectory, prod_basis, t1=10.0, t2=120.0)
    series = rep.x_norm_series
    assert series["sup"] <= 20.0 * default_spec.epsilon0
    # no upward trend over the final third of the window
    t, X = series["t"], series["X"]
    tail = t >= t[-1] * 2.0 / 3.0
    slope = np.polyfit(t[tail], X[tail], 1)[0]
    assert slope * (t[-1] / 3.0) <= 0.01 * series["sup"]


# --- 9: solver integrity ------------------------------------------------

def test_criterion_9_energy_drift(disc):
    # long horizon: the stepper's bounded O(dt^2) energy oscillation aliases
    # into a short-window linear fit; the secular component needs T >> 100
    u = 1e-2 * np.exp(-((disc.x / 4.0) ** 2))
    traj = evolve_full(FieldState(0.0, u, np.zeros_like(u)), disc, T=400.0)
    slope = np.polyfit(traj.times, traj.energy, 1)[0]
    assert abs(slope) * 100.0 < 1e-6 * abs(traj.energy[0])


def test_criterion_9_full_vs_modal(default_spec, disc, shot):
    # stabilized data: any off-manifold run escapes exponentially, so the
    # comparison window is limited to ~the classification span
    state = prepare_data(default_spec, shot.s_star, disc)
    traj_f = evolve_full(state, disc, T=9.0)
    m0 = mode_extract(state, disc)
    traj_m = evolve_modal(ModalState(0.0, m0.a, m0.adot, m0.chi, m0.chit),
                          disc, T=9.0)
    err = (np.abs(traj_f.a - traj_m.a).max()
           + np.abs(traj_f.chi_sup - traj_m.chi_sup).max())
    assert err < 20.0 * (DT**2 + DX**2)


def test_criterion_9_static_preservation(disc):
    state = FieldState(0.0, disc.Q.copy(), np.zeros_like(disc.Q))
    traj = evolve_full(state, disc, T=10.0)
    assert np.abs(traj.a).max() + traj.chi_sup.max() < 10.0 * (DT**2 + DX**2)


def test_criterion_9_light_cone():
    sols = []
    for L in (60.0, 80.0):
        d = build_discrete_soliton(1.5, GridSpec.from_spacing(L, DX))
        u = 1e-2 * np.exp(-((d.x / 4.0) ** 2))
        ut = np.zeros_like(u)
        _verlet_kernel(u, ut, int(round(30.0 / DT)), DT, d.dx, d.Q, d.rho,
                       d.Omega, np.inf, np.inf, 10**9)
        sols.append(u[np.abs(d.x) <= 10.0])
    assert np.abs(sols[0] - sols[1]).max() < 1e-10


# --- 10: localized-data local decay probe -------------------------------

def test_criterion_10_localized_probe(disc, prod_basis):
    cfg = Config(zeta_shape="compact_bump")
    spec = build_data(cfg, disc)
    res = shoot_stable(spec, disc, horizon=150.0)
    rep = decay_report(res.trajectory, None, t1=10.0, t2=120.0)
    assert rep.exponent_chi_local.slope <= -1.3
