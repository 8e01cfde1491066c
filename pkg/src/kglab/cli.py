"""Command-line pipeline: spectrum -> scattering -> dft-check -> linear-decay
-> evolve / shoot -> decay-report.

Artifacts are plain CSV (fixed column order, deterministic) and JSON, plus a
manifest.json recording the config values, a config hash, package versions,
and wall time.  Exit codes: 0 success, 2 invalid config, 3 bracket failure in
shooting, 4 blow-up in a run expected stable, 5 acceptance threshold violated
in --check mode.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import decay_report, fit_decay
from .config import Config, ConfigError, build_data, config_dict, load_config
from .dft import build_basis, forward_dft, inverse_dft, linear_decay_probe, \
    project_continuous
from .dynamics import build_discrete_soliton, evolve_full, FieldState
from .grids import GridSpec, inner
from .manifold import shoot_stable
from .scattering import build_scattering, default_k_grid
from .soliton import build_soliton, spectrum_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BRACKET = 3
EXIT_BLOWUP = 4
EXIT_CHECK = 5


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v))
                        if isinstance(v, (float, np.floating)) else v
                        for v in row])


def _write_json(path, obj):
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, (np.bool_,)):
            return bool(o)
        raise TypeError(f"not serializable: {type(o)}")
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=default)
        fh.write("\n")


def _manifest(outdir, cfg, t0, stages):
    d = config_dict(cfg)
    blob = json.dumps(d, sort_keys=True).encode()
    _write_json(os.path.join(outdir, "manifest.json"), {
        "config": d,
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "versions": {"kglab": __version__, "numpy": np.__version__},
        "wall_time_s": time.monotonic() - t0,
        "stages": stages,
    })


class _Lab:
    """Lazily built shared objects for the pipeline stages."""

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self._cache = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def model(self):
        cfg = self.cfg
        grid = GridSpec.from_spacing(40.0, 0.02)
        return self._get("model", lambda: build_soliton(cfg.alpha, grid))

    @property
    def disc(self):
        cfg = self.cfg
        grid = GridSpec.from_spacing(cfg.L, cfg.dx)
        return self._get("disc", lambda: build_discrete_soliton(cfg.alpha, grid))

    @property
    def basis(self):
        disc = self.disc
        V = -4.0 * disc.Q_analytic**3
        return self._get("basis", lambda: build_basis(V, disc.x, disc.rho,
                                                      k_max=8.0, dk=0.02))

    @property
    def spec_basis(self):
        cfg = self.cfg

        def builder():
            grid = GridSpec.from_spacing(40.0, 0.01)
            model = build_soliton(cfg.alpha, grid)
            return build_basis(model.V, grid.x, model.rho, k_max=15.0, dk=0.02)
        return self._get("spec_basis", builder)

    @property
    def shot(self):
        cfg = self.cfg
        spec = build_data(cfg, self.disc)
        return self._get("shot", lambda: shoot_stable(
            spec, self.disc, horizon=cfg.horizon, tol=cfg.tol, dt=cfg.dt,
            s_max=cfg.s_max, sample_stride=cfg.sample_stride,
            snapshot_stride=0.5))


def stage_spectrum(lab, outdir, check):
    rep = spectrum_report(lab.model)
    payload = {
        "eigenvalues": rep.eigenvalues,
        "even_eigenvalues": rep.even_eigenvalues,
        "parities": rep.parities,
        "eigenvalue_below": rep.eigenvalue_below,
        "has_internal_mode": rep.has_internal_mode,
        "edge_warnings": rep.edge_warnings,
    }
    _write_json(os.path.join(outdir, "spectrum.json"), payload)
    ok = (abs(rep.eigenvalue_below + 5.25) < 1e-3) and not rep.has_internal_mode
    return ok, {"eigenvalue_below": rep.eigenvalue_below,
                "has_internal_mode": rep.has_internal_mode}


def stage_scattering(lab, outdir, check):
    cfg = lab.cfg
    grid = GridSpec.from_spacing(40.0, 0.01)
    model = build_soliton(cfg.alpha, grid)
    kpos = default_k_grid(cfg.k_min, cfg.k_max, cfg.n_log, cfg.n_lin)
    data = build_scattering(model.V, grid.x, k_positive=kpos,
                            store_modifiers=False)
    verdict = data.genericity
    pos = data.k_grid > 0
    _write_csv(os.path.join(outdir, "scattering.csv"),
               ["k", "ReT", "ImT", "ReRp", "ImRp", "ReRm", "ImRm", "defect"],
               [(k, T.real, T.imag, Rp.real, Rp.imag, Rm.real, Rm.imag, d)
                for k, T, Rp, Rm, d in zip(
                    data.k_grid[pos], data.T[pos], data.R_plus[pos],
                    data.R_minus[pos], data.unitarity_defect[pos])])
    payload = {"verdict": verdict.verdict, "T0": abs(verdict.T0),
               "Rp0": [verdict.R_plus_0.real, verdict.R_plus_0.imag],
               "residual": verdict.residual,
               "max_unitarity_defect": float(data.unitarity_defect.max())}
    _write_json(os.path.join(outdir, "genericity.json"), payload)
    ok = (payload["max_unitarity_defect"] < 1e-6
          and verdict.verdict == "Generic")
    return ok, payload


def stage_dft_check(lab, outdir, check):
    basis = lab.spec_basis
    rng = np.random.default_rng(20260826)
    x = basis.x
    ratios = []
    for _ in range(20):
        c = rng.uniform(0.5, 3.0)
        a = rng.uniform(-1.0, 1.0, 3)
        h = (a[0] * np.exp(-((x / c) ** 2)) + a[1] * np.exp(-((x / (2 * c)) ** 2))
             + a[2] * x**2 * np.exp(-((x / c) ** 2)))
        h = project_continuous(basis, h)
        g = forward_dft(basis, h)
        nh = np.sqrt(inner(h, h, basis.dx))
        ratios.append(basis.k_norm(g) / nh)
    ratios = np.array(ratios)
    rho_norm = basis.k_norm(forward_dft(basis, basis.rho))
    h = project_continuous(basis, np.exp(-(x**2) / 4.0))
    rt = inverse_dft(basis, forward_dft(basis, h)).real
    rt_err = float(np.abs(rt - h).max())
    payload = {"isometry_ratio_max_dev": float(np.abs(ratios - 1.0).max()),
               "rho_image_norm": float(rho_norm),
               "round_trip_error": rt_err}
    _write_json(os.path.join(outdir, "dft_check.json"), payload)
    ok = (payload["isometry_ratio_max_dev"] < 1e-3
          and rho_norm < 1e-3 and rt_err < 1e-4)
    return ok, payload


def stage_linear_decay(lab, outdir, check):
    basis = lab.basis
    f = project_continuous(basis, np.exp(-((basis.x / 7.0) ** 2)))
    times = np.arange(1.0, 100.5, 0.5)
    probe = linear_decay_probe(basis, f, times)
    _write_csv(os.path.join(outdir, "linear_decay.csv"),
               ["t", "sup", "weighted"],
               zip(probe["t"], probe["sup"], probe["weighted"]))
    fs = fit_decay(probe["t"], probe["sup"], (10.0, 100.0), envelope=True)
    fw = fit_decay(probe["t"], probe["weighted"], (10.0, 100.0), envelope=True)
    payload = {"sup_slope": fs.slope, "sup_ci": fs.ci,
               "weighted_slope": fw.slope, "weighted_ci": fw.ci}
    _write_json(os.path.join(outdir, "linear_decay.json"), payload)
    ok = abs(fs.slope + 0.5) <= 0.1 and abs(fw.slope + 1.0) <= 0.15
    return ok, payload


def stage_evolve(lab, outdir, check):
    cfg = lab.cfg
    disc = lab.disc
    state = FieldState(0.0, disc.Q.copy(), np.zeros_like(disc.Q))
    traj = evolve_full(state, disc, T=10.0, dt=cfg.dt,
                       sample_stride=cfg.sample_stride)
    _write_csv(os.path.join(outdir, "evolve.csv"),
               ["t", "a", "adot", "chi_sup", "chi_weighted_sup", "energy"],
               zip(traj.times, traj.a, traj.adot, traj.chi_sup,
                   traj.chi_weighted_sup, traj.energy))
    dev = float(np.abs(traj.a).max())
    payload = {"static_mode_deviation": dev, "escaped": traj.escaped}
    _write_json(os.path.join(outdir, "evolve.json"), payload)
    if traj.escaped:
        return EXIT_BLOWUP, payload
    return dev < 1e-4, payload


def stage_shoot(lab, outdir, check):
    try:
        result = lab.shot
    except RuntimeError as exc:
        if "bracket" in str(exc):
            return EXIT_BRACKET, {"error": str(exc)}
        raise
    traj = result.trajectory
    _write_csv(os.path.join(outdir, "shoot_trajectory.csv"),
               ["t", "a", "adot", "chi_sup", "chi_weighted_sup", "energy", "F"],
               zip(traj.times, traj.a, traj.adot, traj.chi_sup,
                   traj.chi_weighted_sup, traj.energy, traj.F))
    payload = {"s_star": result.s_star,
               "n_classifications": len(result.bracket_history),
               "residual": result.residual,
               "residual_bound": result.residual_bound,
               "n_corrections": len(result.corrections),
               "max_correction": max((abs(d) for _, d in result.corrections),
                                     default=0.0),
               "escaped": traj.escaped}
    _write_json(os.path.join(outdir, "shoot.json"), payload)
    if traj.escaped:
        return EXIT_BLOWUP, payload
    ok = result.residual <= result.residual_bound
    return ok, payload


def stage_decay_report(lab, outdir, check):
    cfg = lab.cfg
    result = lab.shot
    traj = result.trajectory
    if traj.escaped:
        return EXIT_BLOWUP, {"escaped": True}
    t2 = min(cfg.t2, 0.8 * float(traj.times[-1]))
    rep = decay_report(traj, lab.basis, t1=cfg.t1, t2=t2,
                       envelope_width=cfg.envelope_width)
    rep.passes["x_norm"] = rep.x_norm_series["sup"] <= 20.0 * cfg.epsilon0
    _write_csv(os.path.join(outdir, "decay_series.csv"),
               ["t", "abs_a", "chi_sup", "chi_weighted_sup"],
               zip(traj.times, np.abs(traj.a), traj.chi_sup,
                   traj.chi_weighted_sup))
    payload = rep.as_dict()
    _write_json(os.path.join(outdir, "decay_report.json"), payload)
    gates = ["exponent_a", "exponent_chi_sup", "exponent_chi_local", "x_norm"]
    ok = all(rep.passes[g] for g in gates)
    return ok, payload


STAGES = {
    "spectrum": stage_spectrum,
    "scattering": stage_scattering,
    "dft-check": stage_dft_check,
    "linear-decay": stage_linear_decay,
    "evolve": stage_evolve,
    "shoot": stage_shoot,
    "decay-report": stage_decay_report,
}
PIPELINE_ORDER = ["spectrum", "scattering", "dft-check", "linear-decay",
                  "shoot", "evolve", "decay-report"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kglab",
        description="Numerical laboratory for quartic Klein-Gordon "
                    "soliton stability")
    parser.add_argument("command", choices=list(STAGES) + ["pipeline"])
    parser.add_argument("--config", default=None)
    parser.add_argument("--check", action="store_true",
                        help="exit 5 if any stage gate fails")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--output", default=None)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = args.output or os.environ.get("KGLAB_OUTPUT") or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)

    names = PIPELINE_ORDER if args.command == "pipeline" else [args.command]
    lab = _Lab(cfg)
    t0 = time.monotonic()
    stages = {}
    failed = False
    for name in names:
        status, summary = STAGES[name](lab, outdir, args.check)
        if status in (EXIT_BLOWUP, EXIT_BRACKET):
            stages[name] = {"ok": False, "summary": summary}
            _manifest(outdir, cfg, t0, stages)
            print(f"stage {name} failed hard", file=sys.stderr)
            return status
        ok = bool(status)
        stages[name] = {"ok": ok, "summary": summary}
        if not ok:
            failed = True
            print(f"stage {name}: gate failed", file=sys.stderr)
    _manifest(outdir, cfg, t0, stages)
    if failed and args.check:
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
