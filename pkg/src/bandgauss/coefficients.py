"""Time-dependent channel coefficients for the band-limited environment.

Weak-coupling (second-order) coefficients of the time-local master equation:
damping gamma(tau), normal diffusion delta(tau), anomalous diffusion pi(tau)
and the frequency shift r(tau), together with their time-integrated forms:
the accumulated damping exponent Gamma(tau), the diffusion variance
DeltaGamma(tau), and the four oscillatory-weighted integrals that feed the
non-secular covariance blocks.

Every quantity is available on two routes selected by a method tag:

* ``"closed-form"`` -- the low-temperature short-time expressions
  (gamma = J0*delta*Omega*tau^3/3, delta = J0*delta*tau, and their
  integrals Gamma = J0*delta*Omega*tau^4/6, DeltaGamma = J0*delta*tau^2/2);
* ``"quadrature"`` -- full adaptive quadrature over the kernels of
  :mod:`bandgauss.spectral`, at any temperature.

Times are dimensionless (system frequency = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import DomainError, UsageError
from .spectral import SpectralDensity, kernel_cos, kernel_cos_thermal, kernel_sin

METHOD_CLOSED = "closed-form"
METHOD_QUADRATURE = "quadrature"

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-9

# Dense precomputation grid: 8192 Simpson panels, i.e. step <= tau/2048 for
# any target time within a factor-2 bracket of the grid end.
GRID_POINTS = 8193


def require_method(method: str) -> str:
    if method not in (METHOD_CLOSED, METHOD_QUADRATURE):
        raise UsageError(
            f"unknown method tag {method!r}; use {METHOD_CLOSED!r} or {METHOD_QUADRATURE!r}")
    return method


@dataclass(frozen=True)
class EnvironmentParams:
    """Spectral band plus thermal state of the environment.

    Exactly one of ``beta`` (inverse temperature, units of the mode
    frequency) or ``low_t`` must be given; ``low_t=True`` replaces the
    thermal factor coth(beta*w/2) by 1.
    """

    spectral: SpectralDensity
    beta: float | None = None
    low_t: bool = False

    def __post_init__(self):
        if self.low_t and self.beta is not None:
            raise UsageError("beta and low_t are mutually exclusive")
        if not self.low_t and self.beta is None:
            raise UsageError("specify either beta or low_t")
        if self.beta is not None and self.beta <= 0.0:
            raise DomainError(f"beta must be positive, got {self.beta}")

    def thermal_cos_kernel(self, s):
        """Thermal cosine kernel at this environment's temperature."""
        if self.low_t:
            return kernel_cos(self.spectral, s)
        return kernel_cos_thermal(self.spectral, s, beta=self.beta)


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if tau < 0.0:
        raise DomainError(f"tau must be non-negative, got {tau}")
    return tau


def _chunked_quad(f, tau: float, freq: float) -> float:
    """Adaptive quadrature of f over [0, tau], split per oscillation period."""
    if tau == 0.0:
        return 0.0
    n_chunks = max(1, int(math.ceil(tau * max(freq, 1e-12) / math.pi)))
    edges = np.linspace(0.0, tau, n_chunks + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                                limit=200)
        total += val
    return total


# ---------------------------------------------------------------------------
# per-point coefficients, quadrature route
# ---------------------------------------------------------------------------

def gamma_quad(env: EnvironmentParams, tau: float) -> float:
    """Damping coefficient: integral of sin(s)*kernel_sin(s) over [0, tau]."""
    tau = _check_tau(tau)
    sd = env.spectral
    return _chunked_quad(lambda s: math.sin(s) * kernel_sin(sd, s),
                         tau, 1.0 + sd.omega_hi)


def delta_quad(env: EnvironmentParams, tau: float) -> float:
    """Diffusion coefficient: integral of cos(s)*thermal_cos_kernel(s)."""
    tau = _check_tau(tau)
    return _chunked_quad(lambda s: math.cos(s) * env.thermal_cos_kernel(s),
                         tau, 1.0 + env.spectral.omega_hi)


def pi_quad(env: EnvironmentParams, tau: float) -> float:
    """Anomalous diffusion coefficient: integral of sin(s)*thermal_cos_kernel(s)."""
    tau = _check_tau(tau)
    return _chunked_quad(lambda s: math.sin(s) * env.thermal_cos_kernel(s),
                         tau, 1.0 + env.spectral.omega_hi)


def r_quad(env: EnvironmentParams, tau: float) -> float:
    """Frequency-shift coefficient (diagnostic only, never propagated)."""
    tau = _check_tau(tau)
    sd = env.spectral
    return _chunked_quad(lambda s: math.cos(s) * kernel_sin(sd, s),
                         tau, 1.0 + sd.omega_hi)


# ---------------------------------------------------------------------------
# closed forms (low temperature, leading order in time)
# ---------------------------------------------------------------------------

def gamma_closed(env: EnvironmentParams, tau):
    sd = env.spectral
    return sd.j0 * sd.delta * sd.omega_lo * np.asarray(tau, dtype=float) ** 3 / 3.0


def delta_closed(env: EnvironmentParams, tau):
    sd = env.spectral
    return sd.j0 * sd.delta * np.asarray(tau, dtype=float)


def pi_closed(env: EnvironmentParams, tau):
    # Leading term of the short-time series of sin(s)*cos-kernel.
    sd = env.spectral
    return 0.5 * sd.j0 * sd.delta * np.asarray(tau, dtype=float) ** 2


def r_closed(env: EnvironmentParams, tau):
    # Leading term of the short-time series of cos(s)*sin-kernel.
    sd = env.spectral
    return 0.5 * sd.j0 * sd.delta * (sd.omega_lo + 0.5 * sd.delta) \
        * np.asarray(tau, dtype=float) ** 2


def gamma_int_closed(env: EnvironmentParams, tau):
    sd = env.spectral
    return sd.j0 * sd.delta * sd.omega_lo * np.asarray(tau, dtype=float) ** 4 / 6.0


def delta_gamma_closed(env: EnvironmentParams, tau):
    sd = env.spectral
    return 0.5 * sd.j0 * sd.delta * np.asarray(tau, dtype=float) ** 2


# ---------------------------------------------------------------------------
# dense grid cache for the nested (weighted) integrals
# ---------------------------------------------------------------------------

class CoefficientGrid:
    """Dense uniform grid of the per-time coefficients over [0, tau_max].

    The grid carries cumulative-Simpson values of gamma, delta, pi, r and of
    the damping exponent Gamma, plus cubic-spline interpolants used inside
    outer adaptive quadratures. The coefficients are smooth, so spline error
    is far below the quadrature tolerances.
    """

    def __init__(self, env: EnvironmentParams, tau_max: float,
                 n: int = GRID_POINTS):
        if tau_max <= 0.0:
            raise DomainError("tau_max must be positive")
        sd = env.spectral
        s = np.linspace(0.0, tau_max, n)
        ks = kernel_sin(sd, s)
        kc = env.thermal_cos_kernel(s)
        kc = np.asarray(kc, dtype=float)

        self.s = s
        self.gamma = integrate.cumulative_simpson(np.sin(s) * ks, x=s, initial=0.0)
        self.delta = integrate.cumulative_simpson(np.cos(s) * kc, x=s, initial=0.0)
        self.pi = integrate.cumulative_simpson(np.sin(s) * kc, x=s, initial=0.0)
        self.r = integrate.cumulative_simpson(np.cos(s) * ks, x=s, initial=0.0)
        self.big_gamma = integrate.cumulative_simpson(2.0 * self.gamma, x=s,
                                                      initial=0.0)

        self.gamma_fn = CubicSpline(s, self.gamma)
        self.delta_fn = CubicSpline(s, self.delta)
        self.pi_fn = CubicSpline(s, self.pi)
        self.r_fn = CubicSpline(s, self.r)
        self.big_gamma_fn = CubicSpline(s, self.big_gamma)


@lru_cache(maxsize=16)
def _cached_grid(env: EnvironmentParams, tau_ceil: float) -> CoefficientGrid:
    return CoefficientGrid(env, tau_ceil)


def _grid_for(env: EnvironmentParams, tau: float) -> CoefficientGrid:
    # Quantise the grid end to the next power of two so repeated calls in a
    # bracket share one grid; the step then stays below tau/2048.
    ceil = 2.0 ** math.ceil(math.log2(tau))
    return _cached_grid(env, ceil)


# ---------------------------------------------------------------------------
# time-integrated quantities
# ---------------------------------------------------------------------------

def gamma_int(env: EnvironmentParams, tau: float, method: str = METHOD_CLOSED) -> float:
    """Accumulated damping exponent: twice the running integral of gamma.

    The quadrature route uses the exact reordering
    2*int_0^tau gamma(s) ds = 2*int_0^tau (tau-s)*sin(s)*kernel_sin(s) ds,
    which collapses the double integral to a single one.
    """
    require_method(method)
    tau = _check_tau(tau)
    if method == METHOD_CLOSED:
        return float(gamma_int_closed(env, tau))
    if tau == 0.0:
        return 0.0
    sd = env.spectral
    return _chunked_quad(
        lambda s: 2.0 * (tau - s) * math.sin(s) * kernel_sin(sd, s),
        tau, 1.0 + sd.omega_hi)


def delta_gamma(env: EnvironmentParams, tau: float, method: str = METHOD_CLOSED) -> float:
    """Diffusion variance: exp(-Gamma(tau)) * int_0^tau exp(Gamma(s)) delta(s) ds.

    The closed form drops the exponential weights (they are higher order in
    the short-time regime) and is exactly J0*delta*tau^2/2.
    """
    require_method(method)
    tau = _check_tau(tau)
    if method == METHOD_CLOSED:
        return float(delta_gamma_closed(env, tau))
    if tau == 0.0:
        return 0.0
    grid = _grid_for(env, tau)
    g_tau = float(grid.big_gamma_fn(tau))

    def f(s):
        return math.exp(float(grid.big_gamma_fn(s)) - g_tau) * float(grid.delta_fn(s))

    return _chunked_quad(f, tau, 1.0 + env.spectral.omega_hi)


def _closed_inputs(env: EnvironmentParams):
    sd = env.spectral
    c4 = sd.j0 * sd.delta * sd.omega_lo / 6.0

    def big_gamma(s):
        return c4 * s ** 4

    def delta_fn(s):
        return sd.j0 * sd.delta * s

    def pi_fn(s):
        return 0.5 * sd.j0 * sd.delta * s ** 2

    return big_gamma, delta_fn, pi_fn


def secular_coeffs(env: EnvironmentParams, tau: float,
                   method: str = METHOD_CLOSED) -> tuple[float, float, float, float]:
    """The four oscillatory-weighted integrals feeding the non-secular blocks.

    Returns (delta_co, delta_si, pi_co, pi_si) where e.g.
    delta_co(tau) = exp(-Gamma(tau)) * int_0^tau exp(Gamma(s)) delta(s)
    cos(2(tau-s)) ds, and the others swap delta->pi and cos->sin. The method
    tag selects closed-form or quadrature inputs for the integrands and for
    Gamma.
    """
    require_method(method)
    tau = _check_tau(tau)
    if tau == 0.0:
        return (0.0, 0.0, 0.0, 0.0)
    if method == METHOD_CLOSED:
        big_gamma, delta_fn, pi_fn = _closed_inputs(env)
    else:
        grid = _grid_for(env, tau)
        big_gamma = lambda s: float(grid.big_gamma_fn(s))
        delta_fn = lambda s: float(grid.delta_fn(s))
        pi_fn = lambda s: float(grid.pi_fn(s))

    g_tau = big_gamma(tau)
    freq = 2.0 + env.spectral.omega_hi

    def weighted(x_fn, trig):
        return _chunked_quad(
            lambda s: math.exp(big_gamma(s) - g_tau) * x_fn(s) * trig(2.0 * s),
            tau, freq)

    # Accumulate against cos(2s)/sin(2s), then rotate to the cos/sin(2(tau-s))
    # combinations; this keeps a single quadrature pass per integrand.
    d_c, d_s = weighted(delta_fn, math.cos), weighted(delta_fn, math.sin)
    p_c, p_s = weighted(pi_fn, math.cos), weighted(pi_fn, math.sin)
    c2, s2 = math.cos(2.0 * tau), math.sin(2.0 * tau)
    delta_co = c2 * d_c + s2 * d_s
    delta_si = s2 * d_c - c2 * d_s
    pi_co = c2 * p_c + s2 * p_s
    pi_si = s2 * p_c - c2 * p_s
    return (delta_co, delta_si, pi_co, pi_si)


# ---------------------------------------------------------------------------
# whole-trace evaluation on a time grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientTrace:
    """All channel coefficients sampled on an ascending time grid."""

    tau_grid: np.ndarray
    gamma: np.ndarray
    delta_coef: np.ndarray
    pi_coef: np.ndarray
    r_shift: np.ndarray
    gamma_int: np.ndarray
    delta_gamma: np.ndarray
    sec_delta_co: np.ndarray
    sec_delta_si: np.ndarray
    sec_pi_co: np.ndarray
    sec_pi_si: np.ndarray
    method: str


# Largest damping-exponent change per Simpson pair for which polynomial
# quadrature of the weighted integrand is still accurate; stiffer pairs use
# the exponential-integrator step.
_STIFF_PAIR_GAP = 0.05


def _etd_step(y: float, x0: float, x1: float, a: float, h: float) -> float:
    """One step of y' = x - Gamma'*y with x linear and Gamma' constant.

    ``a`` is the damping-exponent change over the step. Exact for that local
    model; only exp(-a) appears, so growing exponents cannot overflow.
    Steeply decreasing exponents are outside the model and get clamped.
    """
    a = max(a, -600.0)
    ema = math.exp(-a)
    if abs(a) < 1e-4:
        phi0 = 0.5 - a / 3.0 + a * a / 8.0
        phi1 = 0.5 - a / 6.0 + a * a / 24.0
    else:
        phi0 = (1.0 - ema * (1.0 + a)) / (a * a)
        phi1 = (a - 1.0 + ema) / (a * a)
    return y * ema + h * (x0 * phi0 + x1 * phi1)


def _weighted_cumulative(s: np.ndarray, x: np.ndarray,
                         big_gamma: np.ndarray) -> np.ndarray:
    """Running y(t) = exp(-Gamma(t)) * int_0^t exp(Gamma(s)) x(s) ds.

    Simpson-order accurate on a uniform grid while the exponent changes
    slowly; pairs where it jumps by more than ``_STIFF_PAIR_GAP`` switch to
    an exponential-integrator step, so arbitrarily large damping exponents
    neither overflow nor blow up the quadrature error.
    """
    n = len(s)
    if n % 2 == 0:
        raise ValueError("weighted cumulative needs an odd number of points")
    h = s[1] - s[0]
    y = np.empty(n)
    y[0] = 0.0
    for k in range(0, n - 2, 2):
        g0, g1, g2 = big_gamma[k], big_gamma[k + 1], big_gamma[k + 2]
        if abs(g2 - g0) > _STIFF_PAIR_GAP:
            y[k + 1] = _etd_step(y[k], x[k], x[k + 1], g1 - g0, h)
            y[k + 2] = _etd_step(y[k + 1], x[k + 1], x[k + 2], g2 - g1, h)
            continue
        w0 = math.exp(g0 - g1)
        w2 = math.exp(g2 - g1)
        # parabola through the triple, integrated over the first half-panel
        y[k + 1] = y[k] * w0 + h / 12.0 * (5.0 * w0 * x[k] + 8.0 * x[k + 1]
                                           - w2 * x[k + 2])
        v0 = math.exp(g0 - g2)
        v1 = math.exp(g1 - g2)
        y[k + 2] = y[k] * v0 + h / 3.0 * (v0 * x[k] + 4.0 * v1 * x[k + 1]
                                          + x[k + 2])
    return y


def build_trace(env: EnvironmentParams, tau_grid, method: str = METHOD_CLOSED,
                n_dense: int = GRID_POINTS) -> CoefficientTrace:
    """Evaluate every coefficient of the channel on ``tau_grid``.

    A dense uniform master grid carries the cumulative integrals; the
    requested grid is filled by cubic interpolation (exact at master nodes).
    """
    require_method(method)
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.ndim != 1 or len(tau_grid) == 0:
        raise UsageError("tau_grid must be a non-empty 1-d array")
    if np.any(tau_grid < 0.0):
        raise DomainError("tau_grid must be non-negative")
    if np.any(np.diff(tau_grid) <= 0.0) and len(tau_grid) > 1:
        raise UsageError("tau_grid must be strictly ascending")

    tau_max = float(tau_grid[-1])
    if tau_max == 0.0:
        zeros = np.zeros_like(tau_grid)
        return CoefficientTrace(tau_grid, zeros, zeros.copy(), zeros.copy(),
                                zeros.copy(), zeros.copy(), zeros.copy(),
                                zeros.copy(), zeros.copy(), zeros.copy(),
                                zeros.copy(), method)

    s = np.linspace(0.0, tau_max, n_dense)
    sd = env.spectral

    if method == METHOD_CLOSED:
        gamma = gamma_closed(env, tau_grid)
        delta = delta_closed(env, tau_grid)
        pi = pi_closed(env, tau_grid)
        r = r_closed(env, tau_grid)
        g_int = gamma_int_closed(env, tau_grid)
        d_gamma = delta_gamma_closed(env, tau_grid)
        big_gamma_s = gamma_int_closed(env, s)
        delta_s = delta_closed(env, s)
        pi_s = pi_closed(env, s)
    else:
        ks = kernel_sin(sd, s)
        kc = np.asarray(env.thermal_cos_kernel(s), dtype=float)
        gamma_s = integrate.cumulative_simpson(np.sin(s) * ks, x=s, initial=0.0)
        delta_s = integrate.cumulative_simpson(np.cos(s) * kc, x=s, initial=0.0)
        pi_s = integrate.cumulative_simpson(np.sin(s) * kc, x=s, initial=0.0)
        r_s = integrate.cumulative_simpson(np.cos(s) * ks, x=s, initial=0.0)
        big_gamma_s = integrate.cumulative_simpson(2.0 * gamma_s, x=s, initial=0.0)
        gamma = CubicSpline(s, gamma_s)(tau_grid)
        delta = CubicSpline(s, delta_s)(tau_grid)
        pi = CubicSpline(s, pi_s)(tau_grid)
        r = CubicSpline(s, r_s)(tau_grid)
        g_int = CubicSpline(s, big_gamma_s)(tau_grid)
        d_gamma = CubicSpline(
            s, _weighted_cumulative(s, delta_s, big_gamma_s))(tau_grid)

    y_dc = _weighted_cumulative(s, delta_s * np.cos(2.0 * s), big_gamma_s)
    y_ds = _weighted_cumulative(s, delta_s * np.sin(2.0 * s), big_gamma_s)
    y_pc = _weighted_cumulative(s, pi_s * np.cos(2.0 * s), big_gamma_s)
    y_ps = _weighted_cumulative(s, pi_s * np.sin(2.0 * s), big_gamma_s)
    d_c = CubicSpline(s, y_dc)(tau_grid)
    d_s = CubicSpline(s, y_ds)(tau_grid)
    p_c = CubicSpline(s, y_pc)(tau_grid)
    p_s = CubicSpline(s, y_ps)(tau_grid)
    c2, s2 = np.cos(2.0 * tau_grid), np.sin(2.0 * tau_grid)

    return CoefficientTrace(
        tau_grid=tau_grid,
        gamma=np.asarray(gamma, dtype=float),
        delta_coef=np.asarray(delta, dtype=float),
        pi_coef=np.asarray(pi, dtype=float),
        r_shift=np.asarray(r, dtype=float),
        gamma_int=np.asarray(g_int, dtype=float),
        delta_gamma=np.asarray(d_gamma, dtype=float),
        sec_delta_co=c2 * d_c + s2 * d_s,
        sec_delta_si=s2 * d_c - c2 * d_s,
        sec_pi_co=c2 * p_c + s2 * p_s,
        sec_pi_si=s2 * p_c - c2 * p_s,
        method=method,
    )
