"""Independent verification paths for the primary numerics.

Every oracle here deliberately uses a different algorithm family from the
code it validates: the reference integrator is composite Simpson with
Richardson control (the primary integrals are adaptive Gauss-Kronrod), the
covariance reconstruction integrates the raw rotated diffusion matrix
instead of assembling weighted trigonometric integrals, and the symplectic
spectra come from an eigensolver rather than the invariant formula. The
oracles ship with the library (not only the tests) so the command line can
emit verification tables on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import (METHOD_CLOSED, METHOD_QUADRATURE, EnvironmentParams,
                           delta_gamma, gamma_int, gamma_int_closed,
                           delta_closed, pi_closed, require_method)
from .dynamics import make_twb, rotation
from .errors import DomainError, NumericError
from .spectral import SpectralDensity, kernel_cos, kernel_sin

MAX_SIMPSON_POINTS = 2 ** 22


def quad_reference(f, a: float, b: float, tol: float = 1e-10) -> float:
    """Composite-Simpson reference value of the integral of f over [a, b].

    Doubles the grid until the Richardson error estimate |S_2n - S_n|/15
    drops below ``tol`` (absolute, plus the same relative amount), then
    returns the extrapolated value.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("bounds must be finite")
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    if a == b:
        return 0.0

    def simpson(n):
        x = np.linspace(a, b, n + 1)
        y = np.asarray([f(xi) for xi in x], dtype=float)
        h = (b - a) / n
        return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())

    n = 64
    prev = simpson(n)
    while n <= MAX_SIMPSON_POINTS:
        n *= 2
        cur = simpson(n)
        err = abs(cur - prev) / 15.0
        if err <= tol + tol * abs(cur):
            return cur + (cur - prev) / 15.0
        prev = cur
    raise NumericError(f"Simpson reference did not converge below {tol}")


def finite_diff(f, tau: float, h: float) -> float:
    """Central-difference derivative, falling back to forward at the origin."""
    if h <= 0.0:
        raise DomainError("h must be positive")
    if tau - h < 0.0:
        return (f(tau + h) - f(tau)) / h
    return (f(tau + h) - f(tau - h)) / (2.0 * h)


def _cumulative_simpson(y: np.ndarray, h: float) -> np.ndarray:
    """Own running Simpson integral on a uniform grid (odd point count)."""
    n = len(y)
    out = np.empty(n)
    out[0] = 0.0
    for k in range(0, n - 2, 2):
        out[k + 1] = out[k] + h / 12.0 * (5.0 * y[k] + 8.0 * y[k + 1] - y[k + 2])
        out[k + 2] = out[k] + h / 3.0 * (y[k] + 4.0 * y[k + 1] + y[k + 2])
    return out


def propagate_w_matrix(env: EnvironmentParams, tau: float, grid_n: int = 4096,
                       method: str = METHOD_QUADRATURE) -> np.ndarray:
    """Direct 2x2 noise matrix of the channel by raw matrix quadrature.

    Integrates exp(Gamma(s)) R(s)^T M(s) R(s) over [0, tau] on a uniform
    Simpson grid, with M(s) = [[delta(s), -pi(s)/2], [-pi(s)/2, 0]], then
    undamps and unrotates. Twice the result reproduces the additive noise
    block of the assembled covariance evolution.
    """
    require_method(method)
    if grid_n < 256:
        raise DomainError("grid_n must be at least 256")
    if tau < 0.0:
        raise DomainError("tau must be non-negative")
    if tau == 0.0:
        return np.zeros((2, 2))
    if grid_n % 2 == 1:
        grid_n += 1
    s = np.linspace(0.0, tau, grid_n + 1)
    h = s[1] - s[0]

    if method == METHOD_CLOSED:
        delta_s = np.asarray(delta_closed(env, s))
        pi_s = np.asarray(pi_closed(env, s))
        big_gamma = np.asarray(gamma_int_closed(env, s))
    else:
        sd = env.spectral
        gamma_s = _cumulative_simpson(np.sin(s) * kernel_sin(sd, s), h)
        delta_s = _cumulative_simpson(
            np.cos(s) * np.asarray(env.thermal_cos_kernel(s)), h)
        pi_s = _cumulative_simpson(
            np.sin(s) * np.asarray(env.thermal_cos_kernel(s)), h)
        big_gamma = _cumulative_simpson(2.0 * gamma_s, h)

    # literal R^T M R per node, damping folded in as a bounded ratio
    c, n_ = np.cos(s), np.sin(s)
    rot = np.empty((len(s), 2, 2))
    rot[:, 0, 0] = c
    rot[:, 0, 1] = n_
    rot[:, 1, 0] = -n_
    rot[:, 1, 1] = c
    m = np.zeros((len(s), 2, 2))
    m[:, 0, 0] = delta_s
    m[:, 0, 1] = -0.5 * pi_s
    m[:, 1, 0] = -0.5 * pi_s
    integrand = np.transpose(rot, (0, 2, 1)) @ m @ rot
    integrand *= np.exp(big_gamma - big_gamma[-1])[:, None, None]

    weights = np.ones(len(s))
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    w_scaled = h / 3.0 * np.einsum("i,ijk->jk", weights, integrand)

    r_tau = rotation(tau)
    return r_tau @ w_scaled @ r_tau.T


@dataclass(frozen=True)
class OracleReport:
    """One primary-vs-oracle comparison with its verdict."""

    name: str
    primary: float
    oracle: float
    abs_dev: float
    rel_dev: float
    tol: float
    passed: bool

    @classmethod
    def compare(cls, name: str, primary: float, oracle: float, tol: float,
                mode: str = "rel") -> "OracleReport":
        abs_dev = abs(primary - oracle)
        rel_dev = abs_dev / max(abs(oracle), 1e-300)
        dev = rel_dev if mode == "rel" else abs_dev
        # strict comparison so a zero tolerance fails every row by contract
        return cls(name=name, primary=float(primary), oracle=float(oracle),
                   abs_dev=abs_dev, rel_dev=rel_dev, tol=tol,
                   passed=bool(dev < tol))


def run_verification(tol_scale: float = 1.0) -> list[OracleReport]:
    """The library's standing cross-check suite.

    Covers the kernel closed forms against the Simpson reference, the
    assembled covariance against the direct matrix propagator, the invariant
    kappa against the PT eigensolver, and the damping-exponent derivative
    identity. Tolerance scale 1 is the shipped contract; 0 fails every row.
    """
    from .dynamics import apply_channel, channel_snapshot
    from .entanglement import invariants, kappa_symmetric, nu_min_pt

    reports: list[OracleReport] = []

    # kernel closed forms vs brute-force band quadrature
    for omega_lo in (0.1, 1.0, 10.0):
        for delta in (1e-4, 1e-3, 1.0):
            sd = SpectralDensity(1.0, omega_lo, delta)
            for s in (0.01, 0.1, 1.0, 10.0):
                ref_sin = quad_reference(lambda w: math.sin(w * s), sd.omega_lo,
                                         sd.omega_hi, tol=1e-14)
                ref_cos = quad_reference(lambda w: math.cos(w * s), sd.omega_lo,
                                         sd.omega_hi, tol=1e-14)
                reports.append(OracleReport.compare(
                    f"kernel_sin[lo={omega_lo},delta={delta},s={s}]",
                    kernel_sin(sd, s), ref_sin, 1e-9 * tol_scale))
                reports.append(OracleReport.compare(
                    f"kernel_cos[lo={omega_lo},delta={delta},s={s}]",
                    kernel_cos(sd, s), ref_cos, 1e-9 * tol_scale))

    env = EnvironmentParams(SpectralDensity(1.0, 1.0, 1e-3), low_t=True)

    # assembled covariance vs direct matrix propagation. With quadrature
    # inputs both sides evaluate the same object, so the match is exact; the
    # closed route keeps the literal unweighted diffusion variance and agrees
    # with the propagator only to leading order, checked at short time.
    state = make_twb(1.0)
    def propagator_dev(method, tau):
        snap = channel_snapshot(env, tau, method)
        evolved = apply_channel(state, snap)
        w_bar = propagate_w_matrix(env, tau, method=method)
        decay = math.exp(-snap.gamma_int)
        rot = rotation(tau)
        big_rot = np.zeros((4, 4))
        big_rot[:2, :2] = rot
        big_rot[2:, 2:] = rot
        direct = decay * big_rot @ state.cm @ big_rot.T
        direct[:2, :2] += 2.0 * w_bar
        direct[2:, 2:] += 2.0 * w_bar
        return float(np.max(np.abs(evolved.cm - direct)))

    for tau in (0.5, 1.0, 2.0, 5.0):
        dev = propagator_dev(METHOD_QUADRATURE, tau)
        reports.append(OracleReport(
            name=f"cm_vs_propagator[{METHOD_QUADRATURE},tau={tau}]",
            primary=dev, oracle=0.0, abs_dev=dev, rel_dev=dev,
            tol=1e-6 * tol_scale, passed=bool(dev < 1e-6 * tol_scale)))
    dev = propagator_dev(METHOD_CLOSED, 0.5)
    scale = delta_gamma(env, 0.5, METHOD_CLOSED)
    reports.append(OracleReport.compare(
        f"cm_vs_propagator_short_time[{METHOD_CLOSED},tau=0.5]",
        dev / scale, 0.0, 0.01 * tol_scale, mode="abs"))

    # PT eigensolver vs analytic twin-beam spectrum and vs invariant formula
    for r in (0.0, 0.1, 0.5, 1.0, 2.0):
        twb = make_twb(r)
        reports.append(OracleReport.compare(
            f"nu_min_pt[twb r={r}]", nu_min_pt(twb), math.exp(-2.0 * r),
            1e-10 * tol_scale, mode="abs"))
    evolved = apply_channel(state, channel_snapshot(env, 2.0, METHOD_CLOSED))
    reports.append(OracleReport.compare(
        "kappa_symmetric_vs_pt_eigen[r=1,tau=2]",
        kappa_symmetric(invariants(evolved)) / math.sqrt(2.0),
        nu_min_pt(evolved), 1e-9 * tol_scale))

    # derivative identity: d/dtau Gamma = 2*gamma
    from .coefficients import gamma_quad
    for tau in (0.1, 1.0, 5.0, 10.0):
        deriv = finite_diff(lambda t: gamma_int(env, t, METHOD_QUADRATURE),
                            tau, 1e-4)
        reports.append(OracleReport.compare(
            f"dGamma_dtau_vs_2gamma[tau={tau}]", deriv,
            2.0 * gamma_quad(env, tau), 1e-4 * tol_scale))

    # diffusion variance: trace identity against the direct propagator
    for tau in (0.5, 2.0):
        w_bar = propagate_w_matrix(env, tau, method=METHOD_QUADRATURE)
        reports.append(OracleReport.compare(
            f"trace_2wbar_vs_2delta_gamma[tau={tau}]",
            float(np.trace(2.0 * w_bar)),
            2.0 * delta_gamma(env, tau, METHOD_QUADRATURE), 1e-2 * tol_scale))

    return reports
