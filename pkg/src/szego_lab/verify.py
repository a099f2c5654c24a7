"""The invariant suite run by ``szego-lab verify``.

Each check returns a :class:`~szego_lab.experiments.Verdict`. Tolerances live
in :data:`TOLERANCES`; naming a check in ``broken`` replaces its tolerance
with an impossible one, which is how the failure path is exercised.
"""
import logging
import math

import numpy as np

from szego_lab.dynamics import SimConfig, _cubic_fft, convergence_study, simulate
from szego_lab.experiments import ExperimentSpec, Preset, SimParams, AnalysisParams, Verdict, run_experiment
from szego_lab.hankel import hankel_report, trace_norm
from szego_lab.hardy import (
    GevreyOrder,
    HardySeries,
    gevrey_wiener_norm,
    hs_norm,
    multiply,
    wiener_norm,
)
from szego_lab import kernels

log = logging.getLogger(__name__)

TOLERANCES = {
    "norm_algebra": 1e-12,
    "wiener_algebra": 1e-12,
    "sigma0_reduction": 0.0,
    "hs_growth_chain": 1e-12,
    "nonlinear_oracle": 1e-12,
    "hankel_inequalities": 1e-10,
    "antidiagonal_trace": 1e-12,
    "rk4_order": 0.2,
    "conservation": 1e-10,
    "persistence_suite": 1e-9,
}

IMPOSSIBLE = -1.0


def random_series(rng, degree, decay=None):
    """Complex Gaussian coefficients, optionally damped by exp(-decay k)."""
    c = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
    if decay is not None:
        c = c * np.exp(-decay * np.arange(degree + 1))
    return HardySeries(c)


def _rel_gap(lhs, rhs):
    """rhs(1+tol) - lhs expressed as the smallest tol that makes lhs <= rhs(1+tol)."""
    return (lhs - rhs) / max(abs(rhs), 1e-300)


def check_norm_algebra(rng, tol, pairs=200):
    worst = -math.inf
    for _ in range(pairs):
        u = random_series(rng, int(rng.integers(0, 40)), rng.uniform(0, 1))
        v = random_series(rng, int(rng.integers(0, 40)), rng.uniform(0, 1))
        for gamma in (0.5, 1.0):
            order = GevreyOrder(float(rng.uniform(0, 2)), gamma)
            lhs = gevrey_wiener_norm(multiply(u, v), order)
            rhs = gevrey_wiener_norm(u, order) * gevrey_wiener_norm(v, order)
            worst = max(worst, _rel_gap(lhs, rhs))
    return Verdict(worst <= tol, tol - worst, f"max relative excess {worst!r}")


def check_wiener_algebra(rng, tol, pairs=200):
    worst = -math.inf
    for _ in range(pairs):
        u = random_series(rng, int(rng.integers(0, 40)))
        v = random_series(rng, int(rng.integers(0, 40)))
        worst = max(worst, _rel_gap(wiener_norm(multiply(u, v)), wiener_norm(u) * wiener_norm(v)))
    return Verdict(worst <= tol, tol - worst, f"max relative excess {worst!r}")


def check_sigma0(rng, tol, count=200):
    worst = 0.0
    for _ in range(count):
        u = random_series(rng, int(rng.integers(0, 64)))
        for gamma in (0.5, 1.0):
            worst = max(worst, abs(gevrey_wiener_norm(u, GevreyOrder(0.0, gamma)) - wiener_norm(u)))
    return Verdict(worst <= tol, tol - worst, f"max difference {worst!r}")


def check_hs_chain(rng, tol, count=200):
    worst = -math.inf
    for _ in range(count):
        u = random_series(rng, int(rng.integers(0, 64)), rng.uniform(0.05, 1))
        s = float(rng.uniform(0.51, 3))
        tau = float(rng.uniform(0.01, 2))
        w = wiener_norm(u)
        peak = math.exp(-2 * s) * (2 * s / tau) ** (2 * s)
        rhs = w * (peak * gevrey_wiener_norm(u, GevreyOrder(tau, 1.0)) + w)
        worst = max(worst, _rel_gap(hs_norm(u, s) ** 2, rhs))
    return Verdict(worst <= tol, tol - worst, f"max relative excess {worst!r}")


def check_nonlinear_oracle(rng, tol, count=200):
    worst = 0.0
    for _ in range(count):
        u = random_series(rng, int(rng.integers(1, 129)), rng.uniform(0, 0.5))
        direct = kernels.cubic_direct(u.coeffs)
        fft = _cubic_fft(np.asarray(u.coeffs))
        worst = max(worst, float(np.linalg.norm(direct - fft) / max(np.linalg.norm(direct), 1e-300)))
    return Verdict(worst <= tol, tol - worst, f"max relative difference {worst!r}")


def check_hankel(rng, tol, count=500):
    worst = math.inf
    failed = set()
    for _ in range(count):
        u = random_series(rng, int(rng.integers(0, 65)), rng.uniform(0, 1))
        rep = hankel_report(u, (1.1, 1.5, 2.0, 3.0))
        for name, c in rep.checks.items():
            scaled = c.slack / max(1.0, abs(c.rhs))
            worst = min(worst, scaled)
            if scaled < -tol:
                failed.add(name)
    return Verdict(not failed and worst >= -tol, worst + tol, ", ".join(sorted(failed)))


def check_antidiagonal(rng, tol):
    worst = 0.0
    for k0 in range(12):
        c = complex(rng.standard_normal(), rng.standard_normal())
        u = HardySeries.monomial(k0, c)
        worst = max(worst, abs(trace_norm(u) - (k0 + 1) * abs(c)) / ((k0 + 1) * abs(c)))
    return Verdict(worst <= tol, tol - worst, f"max relative error {worst!r}")


def check_rk4_order(tol):
    cfg = SimConfig(HardySeries([0.0, 1.0]), t_end=1.0, degree=8, dt=0.1, nonlinear_mode="direct")
    study = convergence_study(cfg, 4)
    err = abs(study.observed_order - 4.0)
    return Verdict(err <= tol, tol - err, f"observed order {study.observed_order!r}")


def check_conservation(tol):
    cfg = SimConfig(HardySeries([0.5, 1.0]), t_end=1.0, degree=32, dt=1e-3,
                    sample_every=50, nonlinear_mode="direct")
    _, rep = simulate(cfg)
    worst = max(rep.max_rel_drift_l2, rep.max_rel_drift_momentum)
    return Verdict(worst <= tol, tol - worst, f"max drift {worst!r}")


def default_suite():
    """Small experiments whose persistence verdicts must pass."""
    return [
        ExperimentSpec("verify_single_mode", Preset.single_mode(1, 1.0),
                       SimParams(t_end=1.0, degree=8, sample_every=50, nonlinear_mode="direct"),
                       AnalysisParams(sigma=0.5)),
        ExperimentSpec("verify_eps_wave", Preset.eps_plus_wave(0.5),
                       SimParams(t_end=1.0, degree=64, sample_every=50, nonlinear_mode="direct"),
                       AnalysisParams(sigma=0.2)),
        ExperimentSpec("verify_random", Preset.random_analytic(0.5, 42, 32),
                       SimParams(t_end=1.0, degree=64, sample_every=50, nonlinear_mode="direct"),
                       AnalysisParams(sigma=0.2)),
    ]


def check_persistence(tol):
    failed, slack = [], math.inf
    for spec in default_suite():
        res = run_experiment(spec)
        rt = res.radius_trace
        if rt is None:
            failed.append(spec.name)
            continue
        excess = rt.worst_ratio - 1.0
        slack = min(slack, tol - excess)
        if excess > tol or not res.verdicts["hankel_initial"].passed:
            failed.append(spec.name)
    return Verdict(not failed, slack, ", ".join(failed))


def run_verification(seed=0, broken=()):
    """Run every check; returns an ordered ``{name: Verdict}``."""
    tol = dict(TOLERANCES)
    for name in broken:
        if name not in tol:
            raise KeyError(f"unknown check {name!r}")
        tol[name] = IMPOSSIBLE
    rng = np.random.default_rng(seed)
    plan = [
        ("norm_algebra", lambda: check_norm_algebra(rng, tol["norm_algebra"])),
        ("wiener_algebra", lambda: check_wiener_algebra(rng, tol["wiener_algebra"])),
        ("sigma0_reduction", lambda: check_sigma0(rng, tol["sigma0_reduction"])),
        ("hs_growth_chain", lambda: check_hs_chain(rng, tol["hs_growth_chain"])),
        ("nonlinear_oracle", lambda: check_nonlinear_oracle(rng, tol["nonlinear_oracle"])),
        ("hankel_inequalities", lambda: check_hankel(rng, tol["hankel_inequalities"])),
        ("antidiagonal_trace", lambda: check_antidiagonal(rng, tol["antidiagonal_trace"])),
        ("rk4_order", lambda: check_rk4_order(tol["rk4_order"])),
        ("conservation", lambda: check_conservation(tol["conservation"])),
        ("persistence_suite", lambda: check_persistence(tol["persistence_suite"])),
    ]
    out = {}
    for name, fn in plan:
        out[name] = fn()
        log.info("%-20s %s %s", name, "PASS" if out[name].passed else "FAIL", out[name].detail)
    return out
