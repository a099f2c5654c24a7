"""Explicit analyticity-radius bounds and their numerical checks.

With C1 an all-time bound on ||u(t)||_W + 1 and

    C0 = max(||u0||_{G_sigma(W)}, (1 + sqrt 5)/2 * e * C1),   lambda = 4 C0 C1,

the Gevrey-Wiener norm at radius tau(t) = sigma exp(-lambda |t|) stays below
C0 for all t. A second radius tau_tilde(t) = sigma exp(-lambda_tilde(t) |t|)
has a rate that becomes independent of ||u0||_{G_sigma(W)} as |t| grows.

Truncated series are entire functions, so :func:`estimate_radius` measures
the exponential decay rate of the resolved coefficients, not a literal
divergence radius.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from szego_lab.errors import ValidationError
from szego_lab.hankel import trace_norm
from szego_lab.hardy import LOG_MAX, GevreyOrder, gevrey_wiener_norm, hs_norm, wiener_norm
from szego_lab.io import write_csv, write_json

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
E = math.e
TAU_FLOOR = 1e-300
PERSISTENCE_RTOL = 1e-9
UNDETERMINED = "undetermined"


def z_star(C1):
    """Zero of the Riccati envelope's right-hand side: (1+sqrt 5)/2 e C1."""
    if not C1 > 0:
        raise ValidationError("C1 must be positive", "C1")
    return GOLDEN * E * C1


def z_bound(z0, C1):
    return max(z0, z_star(C1))


def constant_C1(u0):
    """2 Tr|H_{u0}| + 1, which bounds ||u(t)||_W + 1 for all t."""
    return 2.0 * trace_norm(u0) + 1.0


def _g_sigma(u0, sigma):
    if not sigma > 0:
        raise ValidationError("sigma must be positive", "sigma")
    return gevrey_wiener_norm(u0, GevreyOrder(sigma, 1.0))


def constant_C0(u0, sigma, C1):
    return max(_g_sigma(u0, sigma), z_star(C1))


def lambda_piecewise(u0, sigma, C1):
    """Rate lambda from the two branches of the C0 maximum."""
    g = _g_sigma(u0, sigma)
    if g <= (1.0 + math.sqrt(5.0)) * E * C1 / 2.0:
        lam = 2.0 * (1.0 + math.sqrt(5.0)) * E * C1**2
    else:
        lam = 4.0 * C1 * g
    expected = 4.0 * constant_C0(u0, sigma, C1) * C1
    if not math.isclose(lam, expected, rel_tol=1e-13):
        raise AssertionError(f"branch value {lam!r} disagrees with 4 C0 C1 = {expected!r}")
    return lam


@dataclass(frozen=True)
class RadiusBoundParams:
    sigma: float
    C1: float
    C0: float
    lam: float
    g0: float = float("nan")  # ||u0||_{G_sigma(W)}, needed for tau_tilde

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError("sigma must be positive", "sigma")
        # the zero datum gives C1 = 1 exactly
        if not self.C1 >= 1:
            raise ValidationError("C1 must be >= 1", "C1")
        if not self.C0 >= z_star(self.C1) * (1 - 1e-15):
            raise ValidationError("C0 below (1+sqrt 5)/2 e C1", "C0")
        if not math.isclose(self.lam, 4 * self.C0 * self.C1, rel_tol=1e-13):
            raise ValidationError("lambda must equal 4 C0 C1", "lam")

    @classmethod
    def from_initial(cls, u0, sigma):
        C1 = constant_C1(u0)
        C0 = constant_C0(u0, sigma, C1)
        return cls(sigma, C1, C0, lambda_piecewise(u0, sigma, C1), _g_sigma(u0, sigma))

    def tau(self, t):
        return tau(t, self)

    def tau_tilde(self, t):
        return sigma_exp(self.sigma, lambda_tilde(t, self.g0, self.C1) * abs(t))

    def to_json(self):
        return {"sigma": self.sigma, "C1": self.C1, "C0": self.C0, "lambda": self.lam,
                "gevrey_norm_u0": self.g0}


def sigma_exp(sigma, x):
    """sigma * exp(-x), flushed to 0.0 below 1e-300."""
    val = sigma * math.exp(-x)
    return val if val >= TAU_FLOOR else 0.0


def tau(t, params):
    """sigma exp(-lambda |t|); 0.0 signals underflow."""
    return sigma_exp(params.sigma, params.lam * abs(t))


def tau_underflows(t, params):
    return tau(t, params) == 0.0


def lambda_tilde(t, g0, C1):
    """2 C1 [2 g0/(C1 |t|) + 5 e^2 C1^2]^{1/2} + 2 e C1^2, defined for |t| > 0."""
    if t == 0:
        raise ValidationError("lambda_tilde is defined for |t| > 0 only", "t")
    return 2.0 * C1 * math.sqrt(2.0 * g0 / (C1 * abs(t)) + 5.0 * E**2 * C1**2) + 2.0 * E * C1**2


def lambda_tilde_limit(C1):
    """lambda_tilde as |t| -> infinity: 2 (1 + sqrt 5) e C1^2."""
    return 2.0 * (1.0 + math.sqrt(5.0)) * E * C1**2


def tau_tilde(t, u0, sigma, C1):
    g0 = _g_sigma(u0, sigma)
    return sigma_exp(sigma, lambda_tilde(t, g0, C1) * abs(t))


def estimate_radius(u, floor=1e-13, min_window=4):
    """Exponential decay rate of |u_k|, or ``None`` when undetermined.

    Fits log|u_k| against k by least squares over the contiguous run of modes
    k = 1, 2, ... with |u_k| > floor, and returns minus the slope.
    """
    if min_window < 2:
        raise ValidationError("min_window must be >= 2", "min_window")
    a = np.abs(np.asarray(u.coeffs))[1:]
    below = np.flatnonzero(a <= floor)
    n = int(below[0]) if below.size else a.shape[0]
    if n < min_window:
        return None
    k = np.arange(1, n + 1, dtype=float)
    slope = np.polyfit(k, np.log(a[:n]), 1)[0]
    return float(-slope)


@dataclass
class RadiusTrace:
    """Per-sample radius bounds and the Gevrey norm at tau(t)."""

    times: np.ndarray
    rho_hat: list
    tau: np.ndarray
    tau_tilde: np.ndarray
    gevrey_at_tau: np.ndarray
    wiener: np.ndarray
    params: RadiusBoundParams
    passed: bool
    worst_ratio: float
    violations: list = field(default_factory=list)
    tau_underflow: list = field(default_factory=list)
    wiener_above_C1: list = field(default_factory=list)

    def rows(self):
        for i, t in enumerate(self.times):
            r = self.rho_hat[i]
            yield (float(t), UNDETERMINED if r is None else r, float(self.tau[i]),
                   float(self.tau_tilde[i]), float(self.gevrey_at_tau[i]), self.params.C0)

    def to_json(self):
        return {
            "params": self.params.to_json(),
            "passed": self.passed,
            "worst_ratio": self.worst_ratio,
            "violations": self.violations,
            "tau_underflow": self.tau_underflow,
            "wiener_above_C1": self.wiener_above_C1,
            "samples": [
                {"t": t, "rho_hat": r, "tau": ta, "tau_tilde": tt, "gevrey_at_tau": g, "C0": c0}
                for t, r, ta, tt, g, c0 in self.rows()
            ],
        }

    def write(self, directory, stem="radius_trace"):
        return [
            write_csv(f"{directory}/{stem}.csv",
                      ["t", "rho_hat", "tau", "tau_tilde", "gevrey_at_tau", "C0"], self.rows()),
            write_json(f"{directory}/{stem}.json", self.to_json()),
        ]


def persistence_check(traj, sigma, floor=1e-13, min_window=4):
    """Evaluate ||u_N(t)||_{G_tau(t)(W)} <= C0 at every sample of ``traj``.

    Constants come from the first sample. tau_tilde at t = 0 is recorded as
    its limit sigma.
    """
    params = RadiusBoundParams.from_initial(traj.initial, sigma)
    n = len(traj)
    taus = np.empty(n)
    tildes = np.empty(n)
    gev = np.empty(n)
    wien = np.empty(n)
    rho_hat, violations, underflow, wiener_flags = [], [], [], []
    bound = params.C0 * (1.0 + PERSISTENCE_RTOL)
    for i, (t, u) in enumerate(zip(traj.times, traj.states)):
        taus[i] = params.tau(t)
        tildes[i] = params.sigma if t == 0 else params.tau_tilde(t)
        if taus[i] == 0.0 and t != 0:
            underflow.append(i)
        gev[i] = gevrey_wiener_norm(u, GevreyOrder(taus[i], 1.0))
        wien[i] = wiener_norm(u)
        if gev[i] > bound:
            violations.append(i)
        if wien[i] + 1.0 > params.C1:
            wiener_flags.append(i)
        rho_hat.append(estimate_radius(u, floor, min_window))
    worst = float(np.max(gev) / params.C0) if n else 0.0
    return RadiusTrace(traj.times.copy(), rho_hat, taus, tildes, gev, wien, params,
                       not violations, worst, violations, underflow, wiener_flags)


@dataclass(frozen=True)
class HsGrowthResult:
    s: float
    passed: bool
    worst_ratio: float  # max lhs / rhs over evaluated samples
    min_slack: float  # min rhs - lhs
    skipped: tuple  # sample indices where tau underflowed

    def to_json(self):
        return {"s": self.s, "passed": self.passed, "worst_ratio": self.worst_ratio,
                "min_slack": self.min_slack, "skipped": list(self.skipped)}


def hs_growth_bound(u, s, tau_value):
    """(||u||_{H^s}^2, ||u||_W [e^{-2s} (2s/tau)^{2s} ||u||_{G_tau(W)} + ||u||_W])."""
    w = wiener_norm(u)
    g = gevrey_wiener_norm(u, GevreyOrder(tau_value, 1.0))
    expo = 2.0 * s * (math.log(2.0 * s / tau_value) - 1.0)
    if expo > LOG_MAX:
        return hs_norm(u, s) ** 2, math.inf
    return hs_norm(u, s) ** 2, w * (math.exp(expo) * g + w)


def hs_growth_check(traj, s, params):
    """Pointwise H^s growth inequality at tau = tau(t) for every sample."""
    if not s > 0.5:
        raise ValidationError("s must exceed 1/2", "s")
    worst, min_slack, skipped, ok = 0.0, math.inf, [], True
    for i, (t, u) in enumerate(zip(traj.times, traj.states)):
        tv = params.tau(t)
        if tv == 0.0:
            skipped.append(i)
            continue
        lhs, rhs = hs_growth_bound(u, s, tv)
        if rhs > 0:
            worst = max(worst, lhs / rhs)
        min_slack = min(min_slack, rhs - lhs)
        if lhs > rhs * (1.0 + PERSISTENCE_RTOL):
            ok = False
    if min_slack == math.inf:
        min_slack = 0.0
    return HsGrowthResult(float(s), ok, worst, min_slack, tuple(skipped))
