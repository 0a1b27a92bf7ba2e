"""Unified charge model for a long-channel symmetric multi-gate MOSFET.

The mobile sheet charge Q_i (C/m^2, magnitude of the electron charge per
gate) at a channel position with quasi-Fermi potential V_ch satisfies the
implicit equation

    F(Q_i) = V_g - V_fb - V_ch - (Q_i + Q_B)/C_ox
             - V_t * ln[ Q_i (Q_i + Q_B + 5 V_t C_si) / Q_ref^2 ] = 0

with Q_ref^2 = q (n_i^2 / N_A) T_si (Q_B + 5 V_t C_si).  F is strictly
decreasing in Q_i for Q_i > 0, so the root is unique at any bias.  Two
solvers are provided:

* ``solve_charge_reference`` -- bisection on a logarithmic charge grid
  followed by safeguarded Newton, iterated to |F| < 1e-12 V.  Scalar,
  correctness-first; used as the ground truth.
* ``solve_charge_householder`` -- an explicit path: blended asymptotic
  initial guess plus exactly two third-order Householder corrections.
  Fixed operation count, numpy-vectorized.

Drain current integrates the drift-diffusion sheet charge along the
channel; the integral has the closed form

    I_d = mu_eff (W / L_eff) [ B(Q_is) - B(Q_id) ]
    B(Q) = Q^2/(2 C_ox) + 2 V_t Q - V_t (Q_B + 5 V_t C_si) ln(Q + Q_B + 5 V_t C_si)

Terminal charges use Ward-Dutton partitioning evaluated by fixed-order
Gauss-Legendre quadrature after changing the position integrals to charge
integrals through current continuity, with a series expansion in the
symmetric (V_ds -> 0) limit where the quadrature form degenerates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import EPS_OX, EPS_SI, Q_E, thermal_voltage

__all__ = [
    "MosParams",
    "BiasPoint",
    "ChargeSolution",
    "TerminalCharges",
    "ChargeSolveError",
    "implicit_residual",
    "solve_charge_reference",
    "solve_charge_reference_grid",
    "solve_charge_householder",
    "charge_solution",
    "drain_current",
    "current_from_charges",
    "drain_current_and_grads",
    "terminal_charges",
    "terminal_charges_grid",
    "gummel_current",
    "effective_mobility",
    "effective_length",
]

# Smoothing of |V_ds| in the velocity-saturation wrapper.  Keeps the
# wrapper an even, infinitely differentiable function of V_ds so that
# source-drain symmetry of the core is preserved.
VDS_SMOOTHING = 1e-3  # V

# Newton/bisection budget and residual target of the reference solver.
_REF_TOL = 1e-12      # V, |F| at the accepted root
_REF_MAX_ITER = 200

_GL_ORDER = 64
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)

# Relative drain-source charge split below which the Ward-Dutton
# quadrature degenerates and the series expansion takes over.
_SYMMETRIC_SPLIT = 1e-6


class ChargeSolveError(RuntimeError):
    """Raised when the reference charge solver cannot converge."""


@dataclass(frozen=True)
class MosParams:
    """Geometry, doping and transport parameters of the MOSFET core.

    All quantities are SI.  Derived quantities (V_t, C_ox, C_si, Q_B,
    phi_B and the normalization Q_ref^2) are computed once and cached on
    the instance.
    """

    l: float = 30e-9          # channel length, m
    w: float = 40e-9          # effective width (all gates), m
    t_si: float = 10e-9       # body (fin) thickness, m
    eot: float = 1e-9         # equivalent oxide thickness, m
    n_a: float = 1e23         # body acceptor doping, 1/m^3
    n_i: float = 1.45e16      # intrinsic carrier density, 1/m^3
    mu0: float = 0.03         # low-field mobility, m^2/(V s)
    v_fb: float = -0.5        # flat-band voltage, V
    temp: float = 300.0       # lattice temperature, K
    eps_si: float = EPS_SI    # body permittivity, F/m
    eps_ox: float = EPS_OX    # gate dielectric permittivity, F/m
    e_mob: float = 5e8        # mobility-degradation critical field, V/m
    v_sat: float = 1e5        # saturation velocity, m/s
    mob_degradation: bool = False
    vel_saturation: bool = False

    # derived, filled by __post_init__
    v_t: float = 0.0
    c_ox: float = 0.0
    c_si: float = 0.0
    q_b: float = 0.0
    phi_b: float = 0.0
    qb5: float = 0.0          # Q_B + 5 V_t C_si
    q_ref_sq: float = 0.0
    ln_q_ref_sq: float = 0.0

    def __post_init__(self):
        for name in ("l", "w", "t_si", "eot", "n_a", "n_i", "mu0", "temp",
                     "eps_si", "eps_ox", "e_mob", "v_sat"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"MosParams.{name} must be positive")
        if self.n_a < self.n_i:
            raise ValueError("MosParams requires N_A >= n_i")
        set_ = object.__setattr__
        v_t = thermal_voltage(self.temp)
        c_ox = self.eps_ox / self.eot
        c_si = self.eps_si / self.t_si
        q_b = Q_E * self.n_a * self.t_si / 2.0
        qb5 = q_b + 5.0 * v_t * c_si
        q_ref_sq = Q_E * (self.n_i ** 2 / self.n_a) * self.t_si * qb5
        set_(self, "v_t", v_t)
        set_(self, "c_ox", c_ox)
        set_(self, "c_si", c_si)
        set_(self, "q_b", q_b)
        set_(self, "phi_b", v_t * math.log(self.n_a / self.n_i))
        set_(self, "qb5", qb5)
        set_(self, "q_ref_sq", q_ref_sq)
        set_(self, "ln_q_ref_sq", math.log(q_ref_sq))

    def with_effects(self, mob_degradation=None, vel_saturation=None) -> "MosParams":
        kw = {}
        if mob_degradation is not None:
            kw["mob_degradation"] = mob_degradation
        if vel_saturation is not None:
            kw["vel_saturation"] = vel_saturation
        return replace(self, **kw)


@dataclass(frozen=True)
class BiasPoint:
    v_g: float
    v_ds: float
    v_ch: float = 0.0


@dataclass(frozen=True)
class ChargeSolution:
    """Charge densities and surface potentials at both channel ends."""

    q_is: float
    q_id: float
    psi_ss: float
    psi_sd: float
    residual: float  # max |F| over the two ends, V


@dataclass(frozen=True)
class TerminalCharges:
    """Ward-Dutton partitioned terminal charges, coulombs."""

    q_g: float
    q_d: float
    q_s: float
    q_bulk: float

    @property
    def total(self) -> float:
        return self.q_g + self.q_d + self.q_s + self.q_bulk


def implicit_residual(p: MosParams, q_i, v_g, v_ch=0.0):
    """F(Q_i) in volts; zero at the model's charge solution."""
    q_i = np.asarray(q_i, dtype=float)
    return (v_g - p.v_fb - v_ch - (q_i + p.q_b) / p.c_ox
            - p.v_t * (np.log(q_i) + np.log(q_i + p.qb5) - p.ln_q_ref_sq))


# ---------------------------------------------------------------------------
# reference solver


def solve_charge_reference(p: MosParams, v_g: float, v_ch: float = 0.0) -> float:
    """Unique root of F(Q_i) by log-grid bisection plus safeguarded Newton.

    Iterates until |F| < 1e-12 V; raises ChargeSolveError if the bracket
    cannot be established or the iteration budget is exhausted.
    """
    k = v_g - p.v_fb - v_ch - p.q_b / p.c_ox + p.v_t * p.ln_q_ref_sq
    v_t, c_ox, qb5 = p.v_t, p.c_ox, p.qb5

    def f(u: float) -> float:
        q = math.exp(u)
        return k - q / c_ox - v_t * (u + math.log(q + qb5))

    u_lo, u_hi = -640.0, 5.0
    f_lo, f_hi = f(u_lo), f(u_hi)
    if not (f_lo > 0.0 and f_hi < 0.0):
        raise ChargeSolveError(
            f"no sign change on the global charge bracket (V_g={v_g}, V_ch={v_ch})")

    # Bisection until the interval is narrow enough for Newton.
    it = 0
    while u_hi - u_lo > 0.25:
        it += 1
        if it > _REF_MAX_ITER:
            raise ChargeSolveError("bisection budget exhausted")
        u_mid = 0.5 * (u_lo + u_hi)
        if f(u_mid) > 0.0:
            u_lo = u_mid
        else:
            u_hi = u_mid

    # Newton in log-charge space; dF/du = -(Q/C_ox + V_t + V_t Q/(Q+QB5))
    # is bounded away from zero, and the bracket guards each step.
    u = 0.5 * (u_lo + u_hi)
    for _ in range(_REF_MAX_ITER):
        q = math.exp(u)
        fu = k - q / c_ox - v_t * (u + math.log(q + qb5))
        if abs(fu) < _REF_TOL:
            return q
        if fu > 0.0:
            u_lo = u
        else:
            u_hi = u
        du = fu / (q / c_ox + v_t + v_t * q / (q + qb5))
        u_new = u + du
        if not (u_lo < u_new < u_hi):
            u_new = 0.5 * (u_lo + u_hi)
        u = u_new
    raise ChargeSolveError(
        f"Newton refinement did not reach |F| < {_REF_TOL} (V_g={v_g}, V_ch={v_ch})")


def solve_charge_reference_grid(p: MosParams, v_g, v_ch) -> np.ndarray:
    """Reference solve over broadcast bias arrays (python loop per point)."""
    v_g, v_ch = np.broadcast_arrays(np.asarray(v_g, float), np.asarray(v_ch, float))
    out = np.empty(v_g.shape, dtype=float)
    flat_g, flat_c, flat_o = v_g.ravel(), v_ch.ravel(), out.ravel()
    for i in range(flat_g.size):
        flat_o[i] = solve_charge_reference(p, flat_g[i], flat_c[i])
    return out


# ---------------------------------------------------------------------------
# explicit (Householder) solver


def _householder_step(u, k, c_ox, v_t, qb5):
    """One third-order Householder update of G(u) = F(exp(u)) in log space."""
    q = np.exp(u)
    qq = q + qb5
    g0 = k - q / c_ox - v_t * (u + np.log(qq))
    g1 = -(q / c_ox + v_t + v_t * q / qq)
    g2 = -(q / c_ox + v_t * q * qb5 / (qq * qq))
    g3 = -(q / c_ox + v_t * q * qb5 * (qb5 - q) / (qq * qq * qq))
    t = g0 / g1
    a = g2 / g1
    b = g3 / g1
    du = -t * (1.0 - 0.5 * t * a) / (1.0 - t * a + t * t * b / 6.0)
    return u + np.clip(du, -50.0, 50.0)


def solve_charge_householder(p: MosParams, v_g, v_ch=0.0):
    """Explicit charge solution: blended asymptotic seed + two fixed
    third-order Householder corrections in log-charge space.

    No convergence loop; the operation count is identical for every bias
    point.  Accepts scalars or broadcastable arrays and returns the same
    shape; scalar inputs return a float.
    """
    v_g_arr = np.asarray(v_g, dtype=float)
    v_ch_arr = np.asarray(v_ch, dtype=float)
    scalar = v_g_arr.ndim == 0 and v_ch_arr.ndim == 0

    v_t, c_ox, qb5 = p.v_t, p.c_ox, p.qb5
    ln_qb5 = math.log(qb5)
    v_ov = v_g_arr - p.v_fb - v_ch_arr - p.q_b / c_ox
    y = v_ov / v_t

    # Subthreshold asymptote in log space: Q -> (Q_ref^2/QB5) e^(v_ov/V_t).
    u_sub = p.ln_q_ref_sq - ln_qb5 + y

    # Strong-inversion asymptote: two fixed refinements of
    # Q = C_ox (v_ov - V_t ln(Q (Q+QB5)/Q_ref^2)), softplus-limited so the
    # estimate stays positive below threshold (where it is discarded by
    # the blend anyway).
    q_est = c_ox * v_t * 2.0 * np.logaddexp(0.0, 0.5 * y)
    for _ in range(2):
        y_corr = y - (np.log(q_est) + np.log(q_est + qb5) - p.ln_q_ref_sq)
        q_est = c_ox * v_t * 2.0 * np.logaddexp(0.0, 0.5 * y_corr)
    u_inv = np.log(q_est)

    # Smooth minimum of the asymptotes, width 2 in log-charge units
    # (equivalently 2 V_t on the gate axis in subthreshold).
    width = 2.0
    u0 = np.minimum(u_sub, u_inv) - width * np.log1p(
        np.exp(-np.abs(u_sub - u_inv) / width))

    k = v_ov + v_t * p.ln_q_ref_sq
    u1 = _householder_step(np.clip(u0, -700.0, 6.0), k, c_ox, v_t, qb5)
    u2 = _householder_step(np.clip(u1, -700.0, 6.0), k, c_ox, v_t, qb5)
    q = np.exp(np.clip(u2, -745.0, 6.0))
    return float(q) if scalar else q


def charge_solution(p: MosParams, v_g: float, v_ds: float,
                    method: str = "householder") -> ChargeSolution:
    """Solve both channel ends and report surface potentials.

    psi_s follows from Q_i = C_ox (V_g - V_fb - psi_s) - Q_B.
    """
    solve = _pick_solver(method)
    q_is = float(solve(p, v_g, 0.0))
    q_id = float(solve(p, v_g, v_ds))
    psi_ss = v_g - p.v_fb - (q_is + p.q_b) / p.c_ox
    psi_sd = v_g - p.v_fb - (q_id + p.q_b) / p.c_ox
    res = max(abs(float(implicit_residual(p, q_is, v_g, 0.0))),
              abs(float(implicit_residual(p, q_id, v_g, v_ds))))
    return ChargeSolution(q_is=q_is, q_id=q_id, psi_ss=psi_ss,
                          psi_sd=psi_sd, residual=res)


def _pick_solver(method: str):
    if method == "householder":
        return solve_charge_householder
    if method == "reference":
        return lambda p, vg, vch=0.0: solve_charge_reference(p, float(vg), float(vch))
    raise ValueError(f"unknown charge solver '{method}'")


# ---------------------------------------------------------------------------
# drain current


def _bracket(p: MosParams, q):
    """Antiderivative B(Q) of Q (dV_ch/dQ) along the channel."""
    return q * q / (2.0 * p.c_ox) + 2.0 * p.v_t * q \
        - p.v_t * p.qb5 * np.log(q + p.qb5)


def _bracket_diff(p: MosParams, q_hi, q_lo):
    """B(q_hi) - B(q_lo) in a cancellation-safe difference form."""
    dq = q_hi - q_lo
    return dq * ((q_hi + q_lo) / (2.0 * p.c_ox) + 2.0 * p.v_t) \
        - p.v_t * p.qb5 * np.log1p(dq / (q_lo + p.qb5))


def effective_mobility(p: MosParams, q_avg):
    """Vertical-field mobility degradation mu0 / (1 + E_eff/E_mob).

    E_eff is the average-charge field proxy (Q_B + q_avg)/eps_si with
    q_avg = (Q_is + Q_id)/2, which is invariant under source-drain
    reflection, so the wrapper preserves Gummel symmetry.
    """
    if not p.mob_degradation:
        return p.mu0 if np.isscalar(q_avg) else np.full_like(np.asarray(q_avg, float), p.mu0)
    e_eff = (p.q_b + q_avg) / p.eps_si
    return p.mu0 / (1.0 + e_eff / p.e_mob)


def effective_length(p: MosParams, mu, v_ds):
    """Velocity-saturation channel-length stretch.

    L_eff = L + mu sqrt(V_ds^2 + delta^2) / (2 v_sat); the smoothed |V_ds|
    keeps L_eff even and smooth through V_ds = 0.
    """
    if not p.vel_saturation:
        return p.l
    return p.l + mu * np.sqrt(v_ds * v_ds + VDS_SMOOTHING ** 2) / (2.0 * p.v_sat)


def drain_current(p: MosParams, v_gs, v_ds, method: str = "householder"):
    """Drain current, source reference; antisymmetric under terminal swap.

    With both effect wrappers disabled this is exactly
    mu0 (W/L) [B(Q_is) - B(Q_id)].
    """
    if method == "householder":
        q_is = solve_charge_householder(p, v_gs, 0.0)
        q_id = solve_charge_householder(p, v_gs, v_ds)
    else:
        q_is = solve_charge_reference_grid(p, v_gs, 0.0)
        q_id = solve_charge_reference_grid(p, v_gs, v_ds)
        if np.ndim(v_gs) == 0 and np.ndim(v_ds) == 0:
            q_is, q_id = float(q_is), float(q_id)
    return current_from_charges(p, q_is, q_id, v_ds)


def current_from_charges(p: MosParams, q_is, q_id, v_ds):
    """Drain current from already-solved source/drain end charges."""
    delta_b = _bracket_diff(p, q_is, q_id)
    mu = effective_mobility(p, 0.5 * (q_is + q_id)) if p.mob_degradation else p.mu0
    l_eff = effective_length(p, mu, np.asarray(v_ds, float)) if p.vel_saturation else p.l
    i_d = mu * (p.w / l_eff) * delta_b
    if np.ndim(i_d) == 0:
        return float(i_d)
    return i_d


def _charge_slope(p: MosParams, q):
    """-dF/dQ = 1/C_ox + V_t/Q + V_t/(Q + QB5); dQ/dV_g = 1/this."""
    return 1.0 / p.c_ox + p.v_t / q + p.v_t / (q + p.qb5)


def drain_current_and_grads(p: MosParams, v_gs: float, v_ds: float,
                            method: str = "householder"):
    """(I_d, dI_d/dV_gs, dI_d/dV_ds) with analytic chain-rule derivatives."""
    solve = _pick_solver(method)
    q_is = float(solve(p, v_gs, 0.0))
    q_id = float(solve(p, v_gs, v_ds))
    delta_b = float(_bracket_diff(p, q_is, q_id))

    # charge sensitivities from the implicit equation
    dqis_dvgs = 1.0 / _charge_slope(p, q_is)
    dqid_dv = 1.0 / _charge_slope(p, q_id)   # d q_id / d(V_gs - V_ds)
    ddb_dvgs = q_is - q_id
    ddb_dvds = q_id

    q_avg = 0.5 * (q_is + q_id)
    if p.mob_degradation:
        denom = 1.0 + (p.q_b + q_avg) / (p.eps_si * p.e_mob)
        mu = p.mu0 / denom
        dmu_dqavg = -p.mu0 / (denom * denom) / (p.eps_si * p.e_mob)
        dqavg_dvgs = 0.5 * (dqis_dvgs + dqid_dv)
        dqavg_dvds = 0.5 * (-dqid_dv)
        dmu_dvgs = dmu_dqavg * dqavg_dvgs
        dmu_dvds = dmu_dqavg * dqavg_dvds
    else:
        mu = p.mu0
        dmu_dvgs = dmu_dvds = 0.0

    if p.vel_saturation:
        s = math.sqrt(v_ds * v_ds + VDS_SMOOTHING ** 2)
        l_eff = p.l + mu * s / (2.0 * p.v_sat)
        dleff_dvgs = dmu_dvgs * s / (2.0 * p.v_sat)
        dleff_dvds = dmu_dvds * s / (2.0 * p.v_sat) + mu * (v_ds / s) / (2.0 * p.v_sat)
    else:
        l_eff = p.l
        dleff_dvgs = dleff_dvds = 0.0

    i_d = mu * (p.w / l_eff) * delta_b
    di_dvgs = p.w * (dmu_dvgs * delta_b / l_eff
                     + mu * ddb_dvgs / l_eff
                     - mu * delta_b * dleff_dvgs / (l_eff * l_eff))
    di_dvds = p.w * (dmu_dvds * delta_b / l_eff
                     + mu * ddb_dvds / l_eff
                     - mu * delta_b * dleff_dvds / (l_eff * l_eff))
    return i_d, di_dvgs, di_dvds


def gummel_current(p: MosParams, v_g: float, v_x: float,
                   method: str = "householder") -> float:
    """Drain current of the symmetry harness V_d = +V_x/2, V_s = -V_x/2.

    The gate is held at v_g against the midpoint, so V_gs = v_g + v_x/2
    and V_ds = v_x.  For a symmetric core this is an odd function of v_x.
    """
    return float(drain_current(p, v_g + 0.5 * v_x, v_x, method=method))


def gummel_diagnostics(p: MosParams, v_g: float, h: float = 0.05, n: int = 4,
                       method: str = "householder") -> dict:
    """Finite-difference symmetry diagnostics of I(V_x) on a +-n*h grid.

    Returns raw central stencils for the odd derivatives (orders 1 and 3)
    and the even ones (orders 0 and 2, the latter at spacings h and 2h),
    plus ``even_to_odd``: the largest even-stencil magnitude relative to
    the odd-stencil scale in the same units (amps).  An exactly odd I(V_x)
    drives the ratio to rounding noise.
    """
    ks = np.arange(-n, n + 1)
    v_x = ks * h
    i = np.array([gummel_current(p, v_g, float(vx), method=method) for vx in v_x])
    at = {int(k): val for k, val in zip(ks, i)}
    odd1 = (at[1] - at[-1]) / 2.0
    odd3 = (at[2] - 2.0 * at[1] + 2.0 * at[-1] - at[-2]) / 2.0
    even0 = at[0]
    even2_h = at[1] - 2.0 * at[0] + at[-1]
    even2_2h = at[2] - 2.0 * at[0] + at[-2]
    odd_scale = max(abs(odd1), abs(odd3), abs(at[2] - at[-2]) / 2.0)
    even_worst = max(abs(even0), abs(even2_h), abs(even2_2h))
    return {
        "v_x": v_x,
        "current": i,
        "d1": odd1 / h,
        "d3": odd3 / h ** 3,
        "even0": even0,
        "even2_h": even2_h,
        "even2_2h": even2_2h,
        "odd_scale": odd_scale,
        "even_to_odd": even_worst / odd_scale,
    }


# ---------------------------------------------------------------------------
# Ward-Dutton terminal charges


def _channel_weight(p: MosParams, q):
    """g(Q) = Q (dy/dQ) kernel: Q/C_ox + V_t + V_t Q/(Q + QB5)."""
    return q / p.c_ox + p.v_t + p.v_t * q / (q + p.qb5)


def _partition_series(p: MosParams, q_is: float, q_id: float):
    """(channel-average Q, drain-weighted Q) by second-order expansion
    around the symmetric point; valid for nearly equal end charges."""
    qm = 0.5 * (q_is + q_id)
    h = 0.5 * (q_is - q_id)
    g0 = _channel_weight(p, qm)
    g1 = 1.0 / p.c_ox + p.v_t * p.qb5 / (qm + p.qb5) ** 2
    avg = qm + g1 * h * h / (3.0 * g0)
    drain = 0.5 * qm - h / 6.0 + g1 * h * h / (6.0 * g0)
    return avg, drain


def _partition_quadrature(p: MosParams, q_is: float, q_id: float):
    """(channel-average Q, drain-weighted Q) by Gauss-Legendre quadrature
    over the charge variable on [q_id, q_is]."""
    half = 0.5 * (q_is - q_id)
    mid = 0.5 * (q_is + q_id)
    qn = mid + half * _GL_X
    wn = half * _GL_W
    g = _channel_weight(p, qn)
    d = float(_bracket_diff(p, q_is, q_id))          # B(q_is) - B(q_id)
    i_w = float(np.sum(wn * qn * g))                 # integral of Q^2 P
    i_y = float(np.sum(wn * _bracket_diff(p, q_is, qn) * qn * g))
    return i_w / d, i_y / (d * d)


def _partition_quadrature_grid(p: MosParams, q_is, q_id):
    """Array form of the quadrature partition; callers must mask out
    near-symmetric points where the normalizing difference degenerates."""
    half = 0.5 * (q_is - q_id)
    mid = 0.5 * (q_is + q_id)
    qn = mid[..., None] + half[..., None] * _GL_X
    wn = half[..., None] * _GL_W
    g = _channel_weight(p, qn)
    d = _bracket_diff(p, q_is, q_id)
    d = np.where(d == 0.0, 1.0, d)
    i_w = np.sum(wn * qn * g, axis=-1)
    i_y = np.sum(wn * _bracket_diff(p, q_is[..., None], qn) * qn * g,
                 axis=-1)
    return i_w / d, i_y / (d * d)


def terminal_charges_grid(p: MosParams, v_g, v_ds,
                          method: str = "householder",
                          q_is=None, q_id=None) -> TerminalCharges:
    """Vectorized Ward-Dutton charges over broadcast bias arrays.

    Same branch dispatch as the scalar path, evaluated with array masks;
    restricted to V_ds >= 0 (the scalar function handles reversal).
    Pre-solved end charges can be passed to avoid re-solving.
    """
    v_g = np.asarray(v_g, dtype=float)
    v_ds = np.asarray(v_ds, dtype=float)
    if np.any(v_ds < 0.0):
        raise ValueError("terminal_charges_grid requires V_ds >= 0")
    if q_is is None or q_id is None:
        if method == "householder":
            q_is = solve_charge_householder(p, v_g, 0.0)
            q_id = solve_charge_householder(p, v_g, v_ds)
        else:
            q_is = solve_charge_reference_grid(p, v_g, np.zeros_like(v_ds))
            q_id = solve_charge_reference_grid(p, v_g, v_ds)
    q_is, q_id = np.broadcast_arrays(np.asarray(q_is, float),
                                     np.asarray(q_id, float))
    area = p.w * p.l

    sym = np.abs(q_is - q_id) < _SYMMETRIC_SPLIT * (q_is + q_id)
    avg_s, drain_s = _partition_series(p, q_is, q_id)
    avg_q, drain_q = _partition_quadrature_grid(p, q_is, q_id)
    avg = np.where(sym, avg_s, avg_q)
    drain = np.where(sym, drain_s, drain_q)

    q_d = -area * drain
    q_s = -area * avg - q_d
    q_g = area * (avg + p.q_b)
    q_bulk = np.full_like(q_g, -area * p.q_b)
    return TerminalCharges(q_g=q_g, q_d=q_d, q_s=q_s, q_bulk=q_bulk)


def terminal_charges(p: MosParams, v_g: float, v_ds: float,
                     method: str = "householder") -> TerminalCharges:
    """Quasi-static terminal charges by Ward-Dutton partitioning.

    Position integrals are transformed to charge integrals via current
    continuity and evaluated with fixed 64-point Gauss-Legendre
    quadrature.  When the two end charges differ by less than 1e-6 of
    their sum, a second-order series around the symmetric point replaces
    the degenerating quadrature.  Negative V_ds is handled by evaluating
    the swapped device and relabeling.
    """
    if v_ds < 0.0:
        swapped = terminal_charges(p, v_g - v_ds, -v_ds, method=method)
        return TerminalCharges(q_g=swapped.q_g, q_d=swapped.q_s,
                               q_s=swapped.q_d, q_bulk=swapped.q_bulk)

    solve = _pick_solver(method)
    q_is = float(solve(p, v_g, 0.0))
    q_id = float(solve(p, v_g, v_ds))
    area = p.w * p.l

    if abs(q_is - q_id) < _SYMMETRIC_SPLIT * (q_is + q_id):
        avg, drain = _partition_series(p, q_is, q_id)
    else:
        avg, drain = _partition_quadrature(p, q_is, q_id)

    q_d = -area * drain
    q_s = -area * avg - q_d
    q_g = area * (avg + p.q_b)
    q_bulk = -area * p.q_b
    return TerminalCharges(q_g=q_g, q_d=q_d, q_s=q_s, q_bulk=q_bulk)
