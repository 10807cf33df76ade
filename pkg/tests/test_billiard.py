import math

import numpy as np
import pytest

from echcap.services.billiard import (
    BilliardModelError,
    EventNotFoundError,
    QuadratureError,
    g_alpha,
    integrate_orbit,
    limit_curve_error,
    make_model,
    moment_profile,
    moment_profiles,
    ode_oracle,
    profile_chain,
    sigma,
    turning_points,
)
from echcap.services.geometry import region_contains, sample_omega0

EPSILONS = (0.4, 0.2, 0.1, 0.05)


@pytest.fixture(scope="module")
def model():
    return make_model(0.1)


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
def test_critical_point_closed_form(eps):
    m = make_model(eps)
    assert m.u_bar == pytest.approx(1 - math.sqrt(eps / 2), abs=1e-12)
    assert m.M == pytest.approx(1 - math.sqrt(eps / 2), abs=1e-12)
    assert m.epsilon * m.U(0.0) == pytest.approx(eps / 2)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.3])
def test_invalid_epsilon(eps):
    with pytest.raises(BilliardModelError):
        make_model(eps)


def test_potential_probe_checks():
    class Decreasing:
        def value(self, u):
            return 0.5 / (1.0 + u)

        def derivative(self, u):
            return -0.5 / (1.0 + u) ** 2

        def second_derivative(self, u):
            return 1.0 / (1.0 + u) ** 3

    with pytest.raises(BilliardModelError):
        make_model(0.1, potential=Decreasing())


def test_turning_points(model):
    u1, u0 = turning_points(model, 0.0)
    assert u1 == 0.0
    assert u0 == pytest.approx(1 - model.epsilon / 2, abs=1e-13)
    v = 0.5 * model.M
    u1, u0 = turning_points(model, v)
    assert u1 < model.u_bar < u0
    assert model.F(u1) == pytest.approx(v * v, abs=1e-13)
    assert model.F(u0) == pytest.approx(v * v, abs=1e-13)


def test_momentum_out_of_range(model):
    with pytest.raises(BilliardModelError):
        g_alpha(model, model.M)
    with pytest.raises(BilliardModelError):
        sigma(model, -1.01 * model.M)


def test_g_alpha_symmetry(model):
    v = 0.37 * model.M
    G_plus, alpha_plus = g_alpha(model, v)
    G_minus, alpha_minus = g_alpha(model, -v)
    assert G_minus == pytest.approx(G_plus, rel=1e-12)
    assert alpha_minus == pytest.approx(2 * math.pi - alpha_plus, rel=1e-12)
    assert 0 < alpha_plus < 2 * math.pi


def test_alpha_at_zero_momentum(model):
    assert g_alpha(model, 0.0)[1] == math.pi


@pytest.mark.parametrize("fraction", [0.0, 0.3, 0.7, -0.5])
def test_sigma_matches_quadrature(model, fraction):
    v = fraction * model.M
    G, alpha = g_alpha(model, v)
    assert sigma(model, v) == pytest.approx(G - alpha * v, abs=1e-8)


def test_quadrature_node_cap(model):
    with pytest.raises(QuadratureError):
        g_alpha(model, 0.5 * model.M, max_nodes=32)


def test_moment_profile_shape(model):
    profile = moment_profile(model, 9)
    assert len(profile.v) == 9
    assert profile.v[4] == 0.0
    assert profile.alpha[4] == math.pi
    np.testing.assert_allclose(profile.rho2 - profile.rho1, 2 * math.pi * profile.v, atol=1e-12)
    assert np.all(np.abs(profile.v) < model.M)
    assert len(profile.samples) == 9


def test_moment_profiles_per_epsilon():
    profiles = moment_profiles([0.4, 0.2], 5)
    assert [p.epsilon for p in profiles] == [0.4, 0.2]


@pytest.mark.slow
@pytest.mark.parametrize("eps", [0.4, 0.2, 0.1])
def test_ode_oracle_agrees_with_quadrature(eps):
    m = make_model(eps)
    for fraction in (0.2, 0.4, 0.6, 0.8):
        v = fraction * m.M
        G, alpha = g_alpha(m, v)
        G_ode, alpha_ode = ode_oracle(m, v)
        assert G_ode == pytest.approx(G, rel=1e-4)
        assert alpha_ode == pytest.approx(alpha, rel=1e-4)


def test_ode_oracle_reflection_at_negative_momentum(model):
    v = 0.45 * model.M
    G_plus, alpha_plus = ode_oracle(model, v)
    G_minus, alpha_minus = ode_oracle(model, -v)
    assert G_minus == pytest.approx(G_plus, rel=1e-9)
    assert alpha_minus == pytest.approx(2 * math.pi - alpha_plus, rel=1e-9)
    G, alpha = g_alpha(model, -v)
    assert G_minus == pytest.approx(G, rel=1e-4)
    assert alpha_minus == pytest.approx(alpha, rel=1e-4)


def test_ode_oracle_needs_enough_time(model):
    with pytest.raises(EventNotFoundError):
        ode_oracle(model, 0.5 * model.M, horizon=1e-3)


def test_ode_oracle_rejects_zero_momentum(model):
    with pytest.raises(BilliardModelError):
        ode_oracle(model, 0.0)


def test_circular_orbit(model):
    sol = integrate_orbit(model, model.M, 2 * math.pi)
    u = sol.y[0] ** 2 + sol.y[1] ** 2
    np.testing.assert_allclose(u, model.u_bar, atol=1e-8)


def test_orbit_conserves_energy_and_momentum(model):
    v = 0.3 * model.M
    sol = integrate_orbit(model, v, 10.0)
    q1, q2, p1, p2 = sol.y[:4]
    energy = p1 ** 2 + p2 ** 2 + model.epsilon * model.U(q1 ** 2 + q2 ** 2)
    np.testing.assert_allclose(energy, 1.0, atol=1e-8)
    np.testing.assert_allclose(q1 * p2 - q2 * p1, v, atol=1e-9)


def test_sigma_increases_as_epsilon_decreases():
    models = [make_model(eps) for eps in EPSILONS]
    for v in (0.0, 0.25, 0.5):
        values = [sigma(m, v) for m in models]
        assert np.all(np.diff(values) > 0)


@pytest.mark.slow
def test_limit_curve_error_decreases():
    errors = [limit_curve_error(make_model(eps), 32) for eps in EPSILONS]
    assert np.all(np.diff(errors) < 0)


def test_sigma_near_the_hard_wall_limit():
    assert sigma(make_model(0.01), 0.0) == pytest.approx(2.0, abs=0.15)


@pytest.mark.parametrize("eps", [0.4, 0.1])
def test_profile_chain_is_convex_and_decreasing(eps):
    chain = profile_chain(moment_profile(make_model(eps), 33))
    dx, dy = np.diff(chain[:, 0]), np.diff(chain[:, 1])
    assert np.all(dx > 0) and np.all(dy < 0)
    cross = dx[:-1] * dy[1:] - dy[:-1] * dx[1:]
    scale = np.hypot(dx[:-1], dy[:-1]) * np.hypot(dx[1:], dy[1:])
    assert np.all(cross > -1e-12 * scale)


@pytest.mark.parametrize("eps", [0.4, 0.1])
def test_profile_lies_inside_omega0(eps):
    region = sample_omega0(2048)
    profile = moment_profile(make_model(eps), 17)
    for x, y in zip(profile.rho1, profile.rho2):
        assert region_contains(region, x, y, 1e-9)
