"""Smoothed billiard in the unit disk and its moment-map profile.

The flow of 1/2 |p|^2 + 1/2 eps U(|q|^2) on the energy level |p|^2 + eps U = 1
conserves the angular momentum v = q x p. Radial motion in u = |q|^2 oscillates
between the turning points u1 < u_bar < u0, the roots of F(u) = v^2 with
F(u) = u (1 - eps U(u)). The Reeb-time gap G(v) and the angular advance alpha(v)
between consecutive radial maxima determine the boundary
(G - alpha v, G + (2 pi - alpha) v) of the moment image.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq
from scipy.special import roots_legendre

from echcap.models import BilliardModel, EchcapError, MomentProfile

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
UPPER_EDGE = 1.0 - 1e-12
QUADRATURE_TOLERANCE = 1e-10
QUADRATURE_MAX_NODES = 4096
ODE_RTOL = 1e-12
ODE_ATOL = 1e-12


class BilliardModelError(EchcapError, ValueError):
    """Raised for invalid models or out-of-range angular momenta."""
    pass


class QuadratureError(EchcapError):
    """Raised when Gauss-Legendre refinement fails to converge."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved error estimate {estimate:.3g})")
        self.estimate = estimate


class EventNotFoundError(EchcapError):
    """Raised when an orbit does not reach the next radial extremum."""
    pass


@dataclass(frozen=True)
class ReciprocalPotential:
    """U(u) = 1 / (2 (1 - u))."""

    def value(self, u):
        return 0.5 / (1.0 - u)

    def derivative(self, u):
        return 0.5 / (1.0 - u) ** 2

    def second_derivative(self, u):
        return 1.0 / (1.0 - u) ** 3


def _check_potential(potential, epsilon: float) -> None:
    probes = np.linspace(0.01, 0.99, 25)
    if not potential.value(0.0) < 1.0:
        raise BilliardModelError("potential must satisfy U(0) < 1")
    if np.any(potential.derivative(probes) <= 0) or np.any(potential.second_derivative(probes) <= 0):
        raise BilliardModelError("potential must be increasing and convex on (0, 1)")
    if not epsilon * potential.value(UPPER_EDGE) > 1.0:
        raise BilliardModelError("potential must blow up at the boundary")


def make_model(epsilon: float, potential=None) -> BilliardModel:
    """Build the billiard model; finds the critical point u_bar of F and M = sqrt(F(u_bar))."""
    if not 0.0 < epsilon < 1.0:
        raise BilliardModelError(f"epsilon must lie in (0, 1), got {epsilon}")
    potential = potential if potential is not None else ReciprocalPotential()
    _check_potential(potential, epsilon)

    def F_prime(u):
        return 1.0 - epsilon * (potential.value(u) + u * potential.derivative(u))

    try:
        u_bar = brentq(F_prime, 0.0, UPPER_EDGE, xtol=1e-15, rtol=1e-15, maxiter=500)
    except ValueError as e:
        raise BilliardModelError(f"critical point of F not bracketed: {e}")
    F_bar = u_bar * (1.0 - epsilon * potential.value(u_bar))
    if F_bar <= 0:
        raise BilliardModelError("F must be positive at its critical point")
    model = BilliardModel(epsilon=epsilon, potential=potential, u_bar=u_bar, M=math.sqrt(F_bar))
    logger.debug(f"Billiard model eps={epsilon}: u_bar={u_bar:.15g}, M={model.M:.15g}")
    return model


def _check_momentum(m: BilliardModel, v: float) -> float:
    if not abs(v) < m.M:
        raise BilliardModelError(f"|v| must be below M={m.M:.12g}, got {v}")
    return abs(v)


def turning_points(m: BilliardModel, v: float) -> tuple[float, float]:
    """Roots u1 < u_bar < u0 of F(u) = v^2 (u1 = 0 when v = 0)."""
    v = _check_momentum(m, v)
    v2 = v * v
    if v == 0.0:
        u0 = brentq(lambda u: 1.0 - m.epsilon * m.U(u), m.u_bar, UPPER_EDGE, xtol=1e-15, rtol=1e-15)
        return 0.0, u0
    g = lambda u: m.F(u) - v2
    u1 = brentq(g, 0.0, m.u_bar, xtol=1e-15, rtol=1e-15)
    u0 = brentq(g, m.u_bar, UPPER_EDGE, xtol=1e-15, rtol=1e-15)
    return u1, u0


@lru_cache(maxsize=16)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return x, w


def _endpoint_quadrature(integrand, u1: float, u0: float, v2: float, F,
                         tol: float, max_nodes: int) -> float:
    """Integrate integrand(u) / sqrt(F(u) - v^2) over [u1, u0].

    With u = c + h sin(theta) the inverse square-root endpoint factors cancel
    against du = h cos(theta) dtheta; Gauss-Legendre in theta with node doubling.
    """
    c, h = 0.5 * (u0 + u1), 0.5 * (u0 - u1)
    previous = None
    n = 32
    while n <= max_nodes:
        x, w = _legendre(n)
        theta = 0.5 * math.pi * x
        u = c + h * np.sin(theta)
        radicand = F(u) - v2
        jac = h * np.cos(theta)
        safe = np.where(radicand > 0.0, radicand, 1.0)
        weight = np.where(radicand > 0.0, jac / np.sqrt(safe), 0.0)
        value = 0.5 * math.pi * float(np.sum(w * integrand(u) * weight))
        if previous is not None and abs(value - previous) <= tol * max(1.0, abs(value)):
            return value
        previous = value
        n *= 2
    raise QuadratureError(f"no convergence with {max_nodes} nodes", abs(value - previous))


def g_alpha(m: BilliardModel, v: float, tol: float = QUADRATURE_TOLERANCE,
            max_nodes: int = QUADRATURE_MAX_NODES) -> tuple[float, float]:
    """Reeb-time gap G(v) and angular advance alpha(v); G is even, alpha(-v) = 2 pi - alpha(v)."""
    speed = _check_momentum(m, v)
    u1, u0 = turning_points(m, speed)
    v2 = speed * speed
    G = _endpoint_quadrature(m.K, u1, u0, v2, m.F, tol, max_nodes)
    if speed == 0.0:
        alpha = math.pi
    else:
        alpha = speed * _endpoint_quadrature(lambda u: 1.0 / u, u1, u0, v2, m.F, tol, max_nodes)
    if not 0.0 < alpha < TWO_PI:
        raise BilliardModelError(f"alpha({v}) = {alpha} left (0, 2pi)")
    if v < 0:
        alpha = TWO_PI - alpha
    return G, alpha


def sigma(m: BilliardModel, v: float) -> float:
    """rho_1(v) by the direct integral of sqrt(F - v^2) / u; sigma(v) = sigma(-v) - 2 pi v."""
    if v < 0:
        return sigma(m, -v) - TWO_PI * v
    speed = _check_momentum(m, v)
    u1, u0 = turning_points(m, speed)
    v2 = speed * speed
    value, err = quad(lambda u: math.sqrt(max(m.F(u) - v2, 0.0)) / u, u1, u0,
                      epsabs=1e-13, epsrel=1e-12, limit=200)
    if err > 1e-8:
        raise QuadratureError(f"sigma({v}) did not converge", err)
    return value


def velocity_grid(M: float, n: int) -> np.ndarray:
    """v = M sin(pi t / 2) with t uniform in (-1, 1), excluding the endpoints."""
    t = np.linspace(-1.0, 1.0, n + 2)[1:-1]
    v = M * np.sin(0.5 * math.pi * t)
    if n % 2 == 1:
        v[n // 2] = 0.0
    return v


def moment_profile(m: BilliardModel, n: int) -> MomentProfile:
    """Sample (v, G, alpha, rho1, rho2) on a grid clustered near +-M."""
    if n < 3:
        raise BilliardModelError("need at least 3 profile samples")
    v = velocity_grid(m.M, n)
    G = np.empty(n)
    alpha = np.empty(n)
    for i, vi in enumerate(v):
        G[i], alpha[i] = g_alpha(m, float(vi))
    rho1 = G - alpha * v
    rho2 = G + (TWO_PI - alpha) * v
    logger.info(f"Moment profile eps={m.epsilon}: {n} samples, min rho1={rho1.min():.6g}")
    return MomentProfile(epsilon=m.epsilon, v=v, G=G, alpha=alpha, rho1=rho1, rho2=rho2)


def moment_profiles(epsilons: Sequence[float], n: int) -> list[MomentProfile]:
    return [moment_profile(make_model(eps), n) for eps in epsilons]


def profile_chain(profile: MomentProfile) -> np.ndarray:
    """The (rho1, rho2) boundary points sorted by increasing rho1."""
    pts = np.column_stack((profile.rho1, profile.rho2))
    return pts[np.argsort(pts[:, 0])]


def _rhs(m: BilliardModel):
    eps = m.epsilon

    def rhs(tau, y):
        q1, q2, p1, p2 = y[0], y[1], y[2], y[3]
        u = q1 * q1 + q2 * q2
        force = eps * m.potential.derivative(u)
        return [p1, p2, -force * q1, -force * q2, m.K(u), (q1 * p2 - q2 * p1) / u]

    return rhs


def _radial_event(direction: int):
    def event(tau, y):
        return y[0] * y[2] + y[1] * y[3]
    event.terminal = True
    event.direction = direction
    return event


def _initial_state(m: BilliardModel, v: float) -> np.ndarray:
    if abs(v) == m.M:
        u0 = m.u_bar
    else:
        _, u0 = turning_points(m, v)
    r = math.sqrt(u0)
    return np.array([r, 0.0, 0.0, v / r, 0.0, 0.0])


def integrate_orbit(m: BilliardModel, v: float, duration: float,
                    max_step: float = np.inf, rtol: float = ODE_RTOL, atol: float = ODE_ATOL):
    """Trajectory from a radial maximum with angular momentum v, |v| <= M.

    Returns the solve_ivp result; rows of ``y`` are q1, q2, p1, p2, Reeb time, angle.
    """
    if abs(v) > m.M:
        raise BilliardModelError(f"|v| must not exceed M={m.M:.12g}")
    if v == 0.0:
        raise BilliardModelError("the angle is undefined on orbits through the origin")
    return solve_ivp(_rhs(m), (0.0, duration), _initial_state(m, v), method="DOP853",
                     rtol=rtol, atol=atol, max_step=max_step, dense_output=True)


def ode_oracle(m: BilliardModel, v: float, dt: float = 0.05, horizon: float = 100.0,
               rtol: float = ODE_RTOL, atol: float = ODE_ATOL) -> tuple[float, float]:
    """(G, alpha) measured by integrating from one radial maximum to the next.

    The run is split at the intermediate minimum so that neither leg starts on
    the event it is looking for. Negative v winds clockwise; its angle is
    reported modulo 2 pi, which gives alpha(-v) = 2 pi - alpha(v).
    """
    if v == 0.0 or not abs(v) < m.M:
        raise BilliardModelError(f"ode_oracle needs 0 < |v| < M={m.M:.12g}, got {v}")
    rhs = _rhs(m)
    state = _initial_state(m, v)
    for direction in (1, -1):
        sol = solve_ivp(rhs, (0.0, horizon), state, method="DOP853", rtol=rtol, atol=atol,
                        max_step=dt, events=_radial_event(direction))
        if sol.status != 1 or not len(sol.t_events[0]):
            raise EventNotFoundError(f"no radial extremum within tau={horizon} (v={v})")
        state = sol.y_events[0][0]
    return float(state[4]), float(state[5] % TWO_PI)


def limit_curve_error(m: BilliardModel, n: int = 64) -> float:
    """sup over interior alpha0 of |sigma(cos(alpha0/2)) - (2 sin(alpha0/2) - alpha0 cos(alpha0/2))|."""
    if n < 3:
        raise BilliardModelError("need at least 3 grid points")
    lo = 2.0 * math.acos(m.M)
    grid = np.linspace(lo, TWO_PI - lo, n + 2)[1:-1]
    worst = 0.0
    for a0 in grid:
        v = math.cos(a0 / 2.0)
        target = 2.0 * math.sin(a0 / 2.0) - a0 * v
        worst = max(worst, abs(sigma(m, v) - target))
    return worst
