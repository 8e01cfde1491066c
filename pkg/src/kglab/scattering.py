"""Jost solutions and scattering coefficients for H = -d^2/dx^2 + V.

The Jost solutions f_pm(x, k) solve H f = k^2 f with f_pm ~ e^(+-ikx) as
x -> +-infinity.  Their plane-wave modifiers m_pm = e^(-+ikx) f_pm satisfy

    m'' +- 2ik m' = V m,      m_pm -> 1,  m_pm' -> 0  (x -> +-infinity),

which is integrated inward from the decayed end with a fixed-step RK4 scheme.
Transmission and reflection coefficients T, R_pm are read off from the
two-exponential asymptotics of m at the far end; unitarity |T|^2 + |R|^2 = 1
and the symmetry T(-k) = conj(T(k)) are exact consequences checked in tests.

A potential is called generic when it has no zero-energy resonance, which is
equivalent to T(0) = 0 and R_pm(0) = -1; the resonant alternative (such as the
Poschl-Teller well -2 sech^2 x, or V = 0) has |T(0)| = 1.  The k -> 0 limit is
taken by extrapolation since the coefficient formulas are singular at k = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

GENERIC_T0_THRESHOLD = 0.05
GENERIC_R0_THRESHOLD = 0.10


def default_k_grid(k_min: float = 1e-3, k_max: float = 40.0,
                   n_log: int = 64, n_lin: int = 256) -> np.ndarray:
    """Positive half of the scattering grid: log-spaced near zero where the
    coefficients vary fastest, then uniform out to k_max."""
    k_log = np.geomspace(k_min, 0.5, n_log, endpoint=False)
    k_lin = np.linspace(0.5, k_max, n_lin)
    return np.concatenate([k_log, k_lin])


def _jost_sweep(V_spline, x: np.ndarray, k: np.ndarray, side: str,
                store: bool = False):
    """Vectorized inward RK4 integration of m'' +- 2ik m' = V m.

    Integration starts at the decayed end (x = +L for side 'plus', -L for
    'minus') with m = 1, m' = 0 and proceeds to the opposite end.  The step is
    subdivided so that the oscillation scale 1/(2 k dx) stays resolved at the
    largest |k| requested.  Returns (m, m') at the far end and, when store is
    set, m on the whole grid.
    """
    n = x.size
    dx = x[1] - x[0]
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k == 0.0):
        raise ValueError("k = 0 is excluded; use small_k_extrapolation")
    z = (2j if side == "plus" else -2j) * k
    h = -dx if side == "plus" else dx
    nsub = max(1, int(np.ceil(2.0 * np.abs(k).max() * dx / 1.2)))
    hs = h / nsub
    x0 = x[-1] if side == "plus" else x[0]
    npts = (n - 1) * nsub
    V_nodes = V_spline(x0 + hs * np.arange(npts + 1))
    V_mids = V_spline(x0 + hs * (np.arange(npts) + 0.5))
    m = np.ones(k.size, dtype=complex)
    mp = np.zeros(k.size, dtype=complex)
    out = np.empty((n, k.size), dtype=complex) if store else None
    step = -1 if side == "plus" else 1
    gi = n - 1 if side == "plus" else 0
    if store:
        out[gi] = m
    for j in range(npts):
        Va, Vm, Vb = V_nodes[j], V_mids[j], V_nodes[j + 1]
        k1m = mp
        k1p = Va * m - z * mp
        m2 = m + 0.5 * hs * k1m
        p2 = mp + 0.5 * hs * k1p
        k2m = p2
        k2p = Vm * m2 - z * p2
        m3 = m + 0.5 * hs * k2m
        p3 = mp + 0.5 * hs * k2p
        k3m = p3
        k3p = Vm * m3 - z * p3
        m4 = m + hs * k3m
        p4 = mp + hs * k3p
        k4m = p4
        k4p = Vb * m4 - z * p4
        m = m + (hs / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
        mp = mp + (hs / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        if store and (j + 1) % nsub == 0:
            gi += step
            out[gi] = m
    if np.any(np.abs(m) > 1e6):
        raise RuntimeError("Jost solution blew up; potential not admissible")
    return m, mp, out


def jost_solve(V: np.ndarray, x: np.ndarray, k: float, side: str = "plus") -> np.ndarray:
    """Jost modifier m_side(x, k) on the grid for a single wavenumber."""
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    if abs(V[0]) > 1e-8 or abs(V[-1]) > 1e-8:
        raise ValueError("potential has not decayed at the grid ends")
    _, _, out = _jost_sweep(CubicSpline(x, V), x, np.array([k]), side, store=True)
    return out[:, 0]


def _coefficients_from_sweep(V_spline, x, k):
    """T, R_plus, R_minus for an array of nonzero k.

    At the far end of each sweep m is a superposition of the constant and the
    e^(-+2ikx) exponential; matching m and m' there gives 1/T and R/T.  This
    avoids quadratures of oscillatory integrands and keeps unitarity at the
    ODE-solver accuracy for all k on the grid.
    """
    L = x[-1]
    mp_end, dmp_end, _ = _jost_sweep(V_spline, x, k, "plus")
    mm_end, dmm_end, _ = _jost_sweep(V_spline, x, k, "minus")
    inv_T_p = mp_end + dmp_end / (2j * k)
    R_minus = -dmp_end * np.exp(-2j * k * L) / (2j * k) / inv_T_p
    inv_T_m = mm_end - dmm_end / (2j * k)
    R_plus = dmm_end * np.exp(-2j * k * L) / (2j * k) / inv_T_m
    return 1.0 / inv_T_p, R_plus, R_minus


def scattering_coefficients(V: np.ndarray, x: np.ndarray, k,
                            k_min: float = 1e-3):
    """(T, R_plus, R_minus) at one or several nonzero wavenumbers."""
    karr = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(np.abs(karr) < k_min):
        raise ValueError("|k| below k_min; use small_k_extrapolation instead")
    spline = CubicSpline(x, V)
    neg = karr < 0
    T, Rp, Rm = _coefficients_from_sweep(spline, x, np.abs(karr))
    T[neg] = np.conj(T[neg])
    Rp[neg] = np.conj(Rp[neg])
    Rm[neg] = np.conj(Rm[neg])
    if np.isscalar(k):
        return T[0], Rp[0], Rm[0]
    return T, Rp, Rm


def coefficients_by_quadrature(V: np.ndarray, x: np.ndarray, k: float):
    """Cross-check: T and R_pm from the integral formulas

        1/T = 1 - (1/2ik) int V m_plus dx,
        R_minus / T = (1/2ik) int e^(+2ikx) V m_plus dx,
        R_plus  / T = (1/2ik) int e^(-2ikx) V m_minus dx.

    Accurate only while 2 k dx is small (oscillatory quadrature); used at
    moderate k to validate the asymptotic extraction.
    """
    dx = x[1] - x[0]
    m_plus = jost_solve(V, x, k, "plus")
    m_minus = jost_solve(V, x, k, "minus")
    w = np.full(x.size, dx)
    w[0] = w[-1] = 0.5 * dx
    inv_T = 1.0 - np.sum(w * V * m_plus) / (2j * k)
    R_m = np.sum(w * np.exp(2j * k * x) * V * m_plus) / (2j * k) / inv_T
    R_p = np.sum(w * np.exp(-2j * k * x) * V * m_minus) / (2j * k) / inv_T
    return 1.0 / inv_T, R_p, R_m


def volterra_jost(V: np.ndarray, x: np.ndarray, k: float, side: str = "plus",
                  n_iter: int = 40) -> np.ndarray:
    """Cross-check: m_plus by iterating the Volterra integral equation

        m(x) = 1 + int_x^inf D_k(y - x) V(y) m(y) dy,
        D_k(y) = (e^(2iky) - 1) / (2ik),

    (mirrored for side 'minus') with trapezoid quadrature to a fixed point."""
    dx = x[1] - x[0]
    if side == "minus":
        return volterra_jost(V[::-1], x, k, "plus", n_iter)[::-1]
    m = np.ones(x.size, dtype=complex)
    for _ in range(n_iter):
        integrand = V * m
        acc = np.zeros(x.size, dtype=complex)
        new = np.ones(x.size, dtype=complex)
        # backward cumulative trapezoid of both e^{2iky}Vm and Vm
        osc = np.exp(2j * k * x) * integrand
        c1 = np.concatenate([np.cumsum(((osc[1:] + osc[:-1]) * 0.5 * dx)[::-1])[::-1], [0.0]])
        c2 = np.concatenate([np.cumsum(((integrand[1:] + integrand[:-1]) * 0.5 * dx)[::-1])[::-1], [0.0]])
        acc = (np.exp(-2j * k * x) * c1 - c2) / (2j * k)
        prev, m = m, new + acc
        if np.max(np.abs(m - prev)) < 1e-14:
            break
    return m


def small_k_extrapolation(samples) -> tuple[complex, complex, float]:
    """Least-squares linear fit T(k) ~ T0 + alpha k through (k, T) samples.

    Returns (T0, alpha, residual).  Needs at least three samples."""
    samples = list(samples)
    if len(samples) < 3:
        raise ValueError("need at least 3 samples for extrapolation")
    ks = np.array([s[0] for s in samples], dtype=float)
    Ts = np.array([s[1] for s in samples], dtype=complex)
    A = np.column_stack([np.ones_like(ks), ks])
    coef, *_ = np.linalg.lstsq(A, Ts, rcond=None)
    resid = float(np.max(np.abs(A @ coef - Ts)))
    return coef[0], coef[1], resid


@dataclass(frozen=True)
class GenericityVerdict:
    verdict: str                   # 'Generic' | 'Resonant' | 'Inconclusive'
    T0: complex
    R_plus_0: complex
    R_minus_0: complex
    slope_alpha: complex
    residual: float


def genericity_classify(V: np.ndarray, x: np.ndarray, k_min: float = 1e-3,
                        n_samples: int = 8) -> GenericityVerdict:
    """Classify the potential as generic (no zero resonance: T(0) = 0 and
    R(0) = -1) or resonant, by extrapolating T and R_pm from small k."""
    ks = np.geomspace(k_min, 10.0 * k_min, n_samples)
    T, Rp, Rm = scattering_coefficients(V, x, ks, k_min=k_min)
    T0, slope, resid = small_k_extrapolation(list(zip(ks, T)))
    Rp0, _, resid_p = small_k_extrapolation(list(zip(ks, Rp)))
    Rm0, _, _ = small_k_extrapolation(list(zip(ks, Rm)))
    resid_all = max(resid, resid_p)
    is_generic = (abs(T0) < GENERIC_T0_THRESHOLD
                  and abs(Rp0 + 1.0) < GENERIC_R0_THRESHOLD)
    if resid_all > 0.5 * GENERIC_T0_THRESHOLD:
        verdict = "Inconclusive"
    else:
        verdict = "Generic" if is_generic else "Resonant"
    return GenericityVerdict(verdict=verdict, T0=T0, R_plus_0=Rp0, R_minus_0=Rm0,
                             slope_alpha=slope, residual=resid_all)


@dataclass(frozen=True)
class ScatteringData:
    """Scattering coefficients tabulated on the symmetric grid k in
    +-[k_min, k_max]; negative k filled by conjugation symmetry."""

    x: np.ndarray
    k_grid: np.ndarray
    m_plus: np.ndarray           # (n_x, n_k_positive) Jost modifiers
    m_minus: np.ndarray
    T: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray
    genericity: GenericityVerdict

    @property
    def unitarity_defect(self) -> np.ndarray:
        return np.abs(np.abs(self.T) ** 2 + np.abs(self.R_plus) ** 2 - 1.0)


def build_scattering(V: np.ndarray, x: np.ndarray,
                     k_positive: np.ndarray | None = None,
                     store_modifiers: bool = True) -> ScatteringData:
    """Tabulate T, R_pm (and optionally m_pm) over the default k grid."""
    if k_positive is None:
        k_positive = default_k_grid()
    spline = CubicSpline(x, V)
    T, Rp, Rm = _coefficients_from_sweep(spline, x, k_positive)
    if store_modifiers:
        _, _, m_plus = _jost_sweep(spline, x, k_positive, "plus", store=True)
        _, _, m_minus = _jost_sweep(spline, x, k_positive, "minus", store=True)
    else:
        m_plus = m_minus = np.empty((0, 0))
    k_grid = np.concatenate([-k_positive[::-1], k_positive])
    T_full = np.concatenate([np.conj(T[::-1]), T])
    Rp_full = np.concatenate([np.conj(Rp[::-1]), Rp])
    Rm_full = np.concatenate([np.conj(Rm[::-1]), Rm])
    verdict = genericity_classify(V, x, k_min=float(k_positive[0]))
    return ScatteringData(x=x, k_grid=k_grid, m_plus=m_plus, m_minus=m_minus,
                          T=T_full, R_plus=Rp_full, R_minus=Rm_full,
                          genericity=verdict)
