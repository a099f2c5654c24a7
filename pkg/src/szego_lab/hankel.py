"""Hankel matrix of a symbol, its trace norm, and the bounds that sandwich it.

For a degree-N symbol u the Hankel operator h -> P(u conj(h)) acts on
span{e^{ik theta}, k <= N} through the symmetric matrix G[k, l] = u_{k+l}
(zero past N). It is antilinear, but H_u^2 corresponds to G G^*, so the
trace norm Tr|H_u| is the nuclear norm of G.
"""
from dataclasses import dataclass, field
import math

import numpy as np
import scipy.linalg

from szego_lab.errors import NumericalFailure, ValidationError
from szego_lab.hardy import wiener_norm
from szego_lab.io import write_csv, write_json

# absolute slack (scaled by max(1, |rhs|)) tolerated in the inequality checks
INEQUALITY_SLACK = 1e-10


def hankel_matrix(u):
    """(N+1) x (N+1) matrix with entry (k, l) = u_{k+l}, zero when k + l > N."""
    c = np.asarray(u.coeffs)
    return scipy.linalg.hankel(c, np.zeros_like(c))


def svd(m):
    """Full SVD ``(U, s, Vh)`` with ``s`` non-increasing."""
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise NumericalFailure("matrix has non-finite entries")
    try:
        return np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}; {_diagnostics(m)}") from exc


def singular_values(m):
    """Singular values, sorted descending (LAPACK gesdd)."""
    m = np.asarray(m)
    if m.size == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(m)):
        raise NumericalFailure("matrix has non-finite entries")
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}; {_diagnostics(m)}") from exc
    return np.clip(np.sort(s)[::-1], 0.0, None)


def _diagnostics(m):
    fro = float(np.linalg.norm(m))
    return f"shape={m.shape}, frobenius={fro:.6g}, max|entry|={float(np.max(np.abs(m))):.6g}"


def trace_norm(u):
    """Tr|H_u|: sum of the singular values of the Hankel matrix."""
    return math.fsum(singular_values(hankel_matrix(u)))


def column_energy(u):
    """sum_k (sum_l |u_{k+l}|^2)^{1/2}, the upper bound on Tr|H_u|."""
    a2 = np.abs(np.asarray(u.coeffs)) ** 2
    tails = np.cumsum(a2[::-1])[::-1]
    return math.fsum(np.sqrt(tails))


def parity_sums(u):
    """(sum |u_{2k}|, sum |u_{2k+1}|)."""
    a = np.abs(np.asarray(u.coeffs))
    return math.fsum(a[0::2]), math.fsum(a[1::2])


def hs_chain(u, s):
    """sqrt(s/(s-1)) (sum_n (1+n)^{2s} |u_n|^2)^{1/2}, valid for s > 1."""
    if not s > 1:
        raise ValidationError(f"s={s} must exceed 1 (the constant sqrt(s/(s-1)) blows up)", "s")
    a2 = np.abs(np.asarray(u.coeffs)) ** 2
    n = np.arange(a2.shape[0], dtype=float)
    return math.sqrt(s / (s - 1.0)) * math.sqrt(math.fsum((1.0 + n) ** (2.0 * s) * a2))


@dataclass(frozen=True)
class Check:
    """Outcome of ``lhs <= rhs``; ``slack = rhs - lhs``."""

    lhs: float
    rhs: float
    slack: float
    passed: bool

    @classmethod
    def le(cls, lhs, rhs, tol=INEQUALITY_SLACK):
        slack = rhs - lhs
        return cls(lhs, rhs, slack, bool(slack >= -tol * max(1.0, abs(rhs))))

    def to_json(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "passed": self.passed}


@dataclass
class HankelReport:
    singular_values: np.ndarray
    trace_norm: float
    wiener_half: float
    parity_even: float
    parity_odd: float
    column_energy: float
    hs_chain: dict
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def to_json(self):
        return {
            "trace_norm": self.trace_norm,
            "wiener_half": self.wiener_half,
            "parity_even": self.parity_even,
            "parity_odd": self.parity_odd,
            "column_energy": self.column_energy,
            "hs_chain": {repr(float(s)): v for s, v in self.hs_chain.items()},
            "checks": {k: c.to_json() for k, c in self.checks.items()},
            "passed": self.passed,
            "singular_values": [float(x) for x in self.singular_values],
        }

    def write(self, directory, stem="hankel"):
        return [
            write_json(f"{directory}/{stem}.json", self.to_json()),
            write_csv(f"{directory}/{stem}.csv", ["i", "sigma_i"],
                      ((i, float(x)) for i, x in enumerate(self.singular_values))),
        ]


def hankel_report(u, s_list=(1.1, 1.5, 2.0, 3.0)):
    """Singular spectrum of H_u with every appendix bound evaluated."""
    s_list = [float(s) for s in s_list]
    for s in s_list:
        if not s > 1:
            raise ValidationError(f"s={s} must exceed 1", "s_list")
    sv = singular_values(hankel_matrix(u))
    tn = math.fsum(sv)
    half = 0.5 * wiener_norm(u)
    even, odd = parity_sums(u)
    col = column_energy(u)
    chain = {s: hs_chain(u, s) for s in s_list}
    checks = {
        "wiener_half_le_trace": Check.le(half, tn),
        "trace_le_column_energy": Check.le(tn, col),
        "parity_even_le_trace": Check.le(even, tn),
        "parity_odd_le_trace": Check.le(odd, tn),
        "wiener_le_parity_sum": Check.le(wiener_norm(u), even + odd),
    }
    for s, v in chain.items():
        checks[f"trace_le_hs_chain_s={s!r}"] = Check.le(tn, v)
    return HankelReport(sv, tn, half, even, odd, col, chain, checks)


def isospectral_drift(traj, top=10):
    """max_t max_{i<top} |s_i(t) - s_i(0)| / s_1(0) over the samples of ``traj``."""
    if len(traj) == 0:
        raise ValidationError("empty trajectory", "trajectory")
    spectra = [singular_values(hankel_matrix(u))[:top] for u in traj.states]
    ref = spectra[0]
    scale = max(float(ref[0]) if ref.size else 0.0, 1e-300)
    drift = 0.0
    for s in spectra[1:]:
        drift = max(drift, float(np.max(np.abs(s - ref))) / scale)
    return drift
