import math
from types import SimpleNamespace

from hypothesis import given, strategies as st
import numpy as np
import pytest

from oracles import trace_2x2
from szego_lab.dynamics import SimConfig, Trajectory, simulate
from szego_lab.errors import ValidationError
from szego_lab.gevrey import (
    RadiusBoundParams,
    constant_C0,
    constant_C1,
    estimate_radius,
    hs_growth_bound,
    hs_growth_check,
    lambda_piecewise,
    lambda_tilde,
    lambda_tilde_limit,
    persistence_check,
    tau,
    tau_tilde,
    z_star,
)
from szego_lab.hardy import HardySeries

E = math.e


def test_C1_examples():
    c = 0.6 + 0.8j
    assert constant_C1(HardySeries([c])) == pytest.approx(2 * abs(c) + 1, rel=1e-15)
    # [[0, 1], [1, 0]] has singular values 1, 1
    assert constant_C1(HardySeries([0, 1])) == pytest.approx(2 * trace_2x2(0, 1) + 1, rel=1e-15)
    assert constant_C1(HardySeries([0, 1])) == pytest.approx(5, rel=1e-15)
    for eps in (0.1, 0.5):
        assert constant_C1(HardySeries([eps, 1])) == pytest.approx(2 * trace_2x2(eps, 1) + 1, rel=1e-14)


def test_C0_examples():
    one = HardySeries([1])  # Gevrey norm 1 for every sigma
    assert constant_C0(one, 0.3, 3.0) == pytest.approx((1 + math.sqrt(5)) / 2 * E * 3, rel=1e-15)
    assert constant_C0(one, 0.3, 3.0) == pytest.approx(13.1946, rel=1e-4)
    assert constant_C0(HardySeries([100]), 0.3, 3.0) == 100
    z = z_star(3.0)
    assert constant_C0(HardySeries([z]), 0.3, 3.0) == pytest.approx(z, rel=1e-15)


def test_lambda_branches():
    assert lambda_piecewise(HardySeries([1]), 0.3, 3.0) == pytest.approx(2 * (1 + math.sqrt(5)) * E * 9, rel=1e-15)
    assert lambda_piecewise(HardySeries([1]), 0.3, 3.0) == pytest.approx(158.335, rel=1e-4)
    assert lambda_piecewise(HardySeries([100]), 0.3, 3.0) == pytest.approx(1200, rel=1e-15)


def test_z_star_examples():
    assert z_star(1.0) == pytest.approx(4.39821, rel=1e-4)
    assert z_star(2.0) == pytest.approx(2 * z_star(1.0), rel=1e-15)


@given(st.floats(1.0, 50.0))
def test_z_star_is_riccati_equilibrium(C1):
    # positive root of -2 C1 z^2 + 2 e C1^2 z + 2 e^2 C1^3
    z = z_star(C1)
    val = -2 * C1 * z * z + 2 * E * C1**2 * z + 2 * E**2 * C1**3
    assert abs(val) <= 1e-12 * 2 * C1 * z * z


def test_tau_examples():
    p = SimpleNamespace(sigma=1.0, lam=2.0)
    assert tau(0.0, p) == 1.0
    assert tau(1.0, p) == pytest.approx(math.exp(-2), rel=1e-15)
    assert tau(-1.0, p) == tau(1.0, p)
    assert tau(1e6, p) == 0.0  # flushed below 1e-300


def test_lambda_tilde_examples():
    assert lambda_tilde(1.0, 4.0, 2.0) == pytest.approx(4 * math.sqrt(4 + 20 * E**2) + 8 * E, rel=1e-15)
    assert lambda_tilde_limit(2.0) == pytest.approx(2 * (1 + math.sqrt(5)) * E * 4, rel=1e-15)
    assert lambda_tilde(1e14, 4.0, 2.0) == pytest.approx(lambda_tilde_limit(2.0), rel=1e-12)
    with pytest.raises(ValidationError):
        lambda_tilde(0.0, 4.0, 2.0)


def test_tau_tilde_limit_at_zero():
    u0 = HardySeries([0.5, 1])
    C1 = constant_C1(u0)
    vals = [tau_tilde(t, u0, 0.2, C1) for t in (1e-4, 1e-8, 1e-12)]
    assert abs(vals[-1] - 0.2) < 1e-5
    assert vals[0] < vals[1] < vals[2] < 0.2


def test_radius_bounds_decrease_in_time():
    params = RadiusBoundParams.from_initial(HardySeries([0.5, 1]), 0.2)
    ts = np.linspace(1e-3, 0.05, 30)
    taus = [params.tau(t) for t in ts]
    tildes = [params.tau_tilde(t) for t in ts]
    assert all(x > 0 for x in taus + tildes)
    assert all(np.diff(taus) < 0) and all(np.diff(tildes) < 0)


def test_params_validate():
    with pytest.raises(ValidationError):
        RadiusBoundParams(0.2, 3.0, 1.0, 12.0)  # C0 below z*
    with pytest.raises(ValidationError):
        RadiusBoundParams(0.2, 3.0, 100.0, 1.0)  # lambda != 4 C0 C1
    with pytest.raises(ValidationError):
        RadiusBoundParams(0.0, 3.0, 100.0, 1200.0)


def test_estimator_examples():
    k = np.arange(65)
    assert abs(estimate_radius(HardySeries(np.exp(-0.7 * k))) - 0.7) <= 1e-10
    assert estimate_radius(HardySeries([1])) is None
    rng = np.random.default_rng(0)
    noisy = np.exp(-0.3 * k) * (1 + 0.01 * rng.standard_normal(65))
    assert abs(estimate_radius(HardySeries(noisy)) - 0.3) <= 0.01


def test_estimator_window_rules():
    # window stops at the first mode below the floor
    c = np.exp(-0.5 * np.arange(20))
    c[6] = 0
    assert estimate_radius(HardySeries(c)) == pytest.approx(0.5, abs=1e-12)
    c[3] = 0
    assert estimate_radius(HardySeries(c)) is None
    with pytest.raises(ValidationError):
        estimate_radius(HardySeries(c), min_window=1)


def test_estimator_recovers_exact_rational_profile():
    # b + a z/(1 - p z) has modes a p^{k-1}, decay rate -log|p|
    p = 0.6 * np.exp(0.4j)
    c = np.concatenate([[0.3], 1.2 * p ** np.arange(40)])
    assert estimate_radius(HardySeries(c)) == pytest.approx(-math.log(0.6), abs=1e-10)


def test_persistence_single_mode():
    traj, _ = simulate(SimConfig(HardySeries([0, 1]), t_end=1.0, degree=8, dt=1e-3, sample_every=100))
    rt = persistence_check(traj, 0.5)
    assert rt.passed
    np.testing.assert_allclose(rt.gevrey_at_tau, np.exp(rt.tau), rtol=1e-14)
    assert all(r is None for r in rt.rho_hat)
    assert rt.tau[0] == 0.5 and rt.tau_tilde[0] == 0.5


def test_persistence_zero():
    traj, _ = simulate(SimConfig(HardySeries.zeros(4), t_end=0.1, degree=4, dt=1e-2))
    rt = persistence_check(traj, 0.2)
    assert rt.passed and rt.params.C1 == 1.0
    assert np.all(rt.gevrey_at_tau == 0)


def test_persistence_eps_wave():
    traj, _ = simulate(SimConfig(HardySeries([0.5, 1]), t_end=3.0, degree=128, dt=1e-3, sample_every=100))
    rt = persistence_check(traj, 0.2)
    assert rt.passed and rt.worst_ratio <= 1 + 1e-9
    assert not rt.wiener_above_C1
    # the measured decay rate falls with time and tau stays below it
    rho = rt.rho_hat
    assert all(r is not None for r in rho[1:])
    assert all(b < a for a, b in zip(rho[1:], rho[2:]))
    assert all(r >= t for r, t in zip(rho[1:], rt.tau[1:]))


def test_constant_profile_keeps_rate_above_tau():
    rho0 = 0.4
    c = np.exp(-rho0 * np.arange(40))
    zeros = np.zeros(5)
    traj = Trajectory(np.linspace(0, 1, 5), np.tile(c, (5, 1)).astype(complex), zeros, zeros, zeros)
    rt = persistence_check(traj, rho0)
    assert all(abs(r - rho0) < 1e-10 for r in rt.rho_hat)
    assert all(r >= t - 1e-12 for r, t in zip(rt.rho_hat, rt.tau))


def test_hs_growth_examples():
    lhs, rhs = hs_growth_bound(HardySeries([0, 1]), 1.0, 0.1)
    assert lhs == pytest.approx(2.0)
    assert rhs == pytest.approx(math.exp(-2) * 20**2 * math.exp(0.1) + 1, rel=1e-14)
    assert rhs == pytest.approx(60.8, abs=0.05)


def test_hs_growth_zero_and_guard():
    traj, _ = simulate(SimConfig(HardySeries.zeros(3), t_end=0.1, degree=3, dt=1e-2))
    params = RadiusBoundParams.from_initial(traj.initial, 0.2)
    res = hs_growth_check(traj, 1.0, params)
    assert res.passed and res.min_slack == 0
    with pytest.raises(ValidationError):
        hs_growth_check(traj, 0.5, params)


@pytest.mark.parametrize("s", [0.6, 1.0, 2.0])
def test_hs_growth_random_trajectory(s):
    rng = np.random.default_rng(12)
    c = (rng.standard_normal(17) + 1j * rng.standard_normal(17)) * np.exp(-0.6 * np.arange(17))
    traj, _ = simulate(SimConfig(HardySeries(c), t_end=1.0, degree=32, dt=1e-3, sample_every=50))
    params = RadiusBoundParams.from_initial(traj.initial, 0.2)
    res = hs_growth_check(traj, s, params)
    assert res.passed
