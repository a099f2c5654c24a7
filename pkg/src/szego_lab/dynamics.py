"""Galerkin truncation of the cubic Szego equation and its RK4 integration.

The truncated system on modes 0..N reads

    d/dt u_k = -i sum_{n - j + m = k, 0 <= n, j, m <= N} u_n conj(u_j) u_m,

i.e. du/dt = -i P_N(|u|^2 u). Two exact evaluations of the cubic term are
provided: a direct convolution (compiled when the extension is built) and a
zero-padded FFT of length >= 3N + 3, which is alias free.
"""
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from szego_lab import kernels
from szego_lab.errors import IntegrationError, NumericalFailure, ValidationError
from szego_lab.hardy import HardySeries, abs_square, l2_norm, momentum
from szego_lab.io import write_csv, write_json

log = logging.getLogger(__name__)

MODES = ("direct", "fft")


def fft_length(degree):
    """Smallest power of two >= 3N + 3."""
    return 1 << int(math.ceil(math.log2(3 * degree + 3)))


def _cubic_fft(c):
    n = c.shape[0] - 1
    size = fft_length(n)
    pad = np.zeros(size, dtype=np.complex128)
    pad[: n + 1] = c
    phys = size * np.fft.ifft(pad)
    return np.fft.fft((phys.real**2 + phys.imag**2) * phys)[: n + 1] / size


def _cubic(c, mode):
    if mode == "fft":
        return _cubic_fft(c)
    if mode == "direct":
        return kernels.cubic_direct(c)
    raise ValidationError(f"unknown nonlinear mode {mode!r}", "nonlinear_mode")


def nonlinear_term(u, mode="fft", degree=None):
    """P_N(|u|^2 u) as a series of the same degree."""
    if degree is not None and degree != u.degree:
        raise ValidationError(f"series has degree {u.degree}, expected {degree}", "degree")
    return HardySeries(_cubic(np.asarray(u.coeffs), mode))


def rhs(u, mode="fft"):
    """Right-hand side -i P_N(|u|^2 u)."""
    return HardySeries(-1j * _cubic(np.asarray(u.coeffs), mode))


def _rk4_fft(y, dt, nsteps):
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for step in range(nsteps):
        k1 = -1j * _cubic_fft(y)
        k2 = -1j * _cubic_fft(y + h2 * k1)
        k3 = -1j * _cubic_fft(y + h2 * k2)
        k4 = -1j * _cubic_fft(y + dt * k3)
        y = y + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            return y, step + 1
    return y, 0


def _advance(y, dt, nsteps, mode):
    with np.errstate(over="ignore", invalid="ignore"):
        if mode == "direct":
            return kernels.rk4_direct(y, dt, nsteps)
        return _rk4_fft(y, dt, nsteps)


def rk4_step(u, dt, mode="fft"):
    """One classical RK4 step; ``dt`` may be negative."""
    y, bad = _advance(np.asarray(u.coeffs), float(dt), 1, mode)
    if bad:
        raise IntegrationError(1, dt)
    return HardySeries(y)


def hamiltonian(u):
    """1/4 sum_k |(|u|^2)^(k)|^2, i.e. 1/4 of the mean of |u|^4."""
    a = abs_square(u).coeffs
    return 0.25 * math.fsum(a.real * a.real + a.imag * a.imag)


@dataclass(frozen=True)
class SimConfig:
    """Fixed-step integration parameters.

    ``backward=True`` integrates with step -dt, so sample times run from 0
    down to -t_end.
    """

    initial: HardySeries
    t_end: float
    degree: int = 128
    dt: float = 1e-3
    sample_every: int = 1
    nonlinear_mode: str = "fft"
    backward: bool = False

    def __post_init__(self):
        if not isinstance(self.initial, HardySeries):
            object.__setattr__(self, "initial", HardySeries(self.initial))
        if not (isinstance(self.degree, (int, np.integer)) and self.degree >= 1):
            raise ValidationError("degree must be an integer >= 1", "degree")
        if self.initial.degree > self.degree:
            raise ValidationError(
                f"initial datum has degree {self.initial.degree} > N={self.degree}", "degree"
            )
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError("dt must be a positive finite number", "dt")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ValidationError("t_end must be a positive finite number", "t_end")
        if not (isinstance(self.sample_every, (int, np.integer)) and self.sample_every >= 1):
            raise ValidationError("sample_every must be an integer >= 1", "sample_every")
        if self.nonlinear_mode not in MODES:
            raise ValidationError(f"must be one of {MODES}", "nonlinear_mode")

    @property
    def steps(self):
        return max(1, int(math.ceil(self.t_end / self.dt - 1e-9)))

    @property
    def signed_dt(self):
        return -self.dt if self.backward else self.dt

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass
class Trajectory:
    """Sampled solution. ``coeffs[i]`` holds the modes at ``times[i]``."""

    times: np.ndarray
    coeffs: np.ndarray
    l2: np.ndarray
    momentum: np.ndarray
    hamiltonian: np.ndarray

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def states(self):
        return [HardySeries(c) for c in self.coeffs]

    def state(self, i):
        return HardySeries(self.coeffs[i])

    @property
    def initial(self):
        return self.state(0)

    @property
    def final(self):
        return self.state(-1)

    def __len__(self):
        return self.times.shape[0]

    def to_json(self):
        return [
            {"t": float(t), "coeffs": HardySeries(c).to_json()["coeffs"]}
            for t, c in zip(self.times, self.coeffs)
        ]

    def csv_rows(self):
        for t, c in zip(self.times, self.coeffs):
            for k, z in enumerate(c):
                yield (float(t), k, float(z.real), float(z.imag))

    def conservation_rows(self):
        return zip(self.times.tolist(), self.l2.tolist(), self.momentum.tolist(),
                   self.hamiltonian.tolist())

    def write(self, directory, stem="trajectory"):
        """Long-format CSV ``t,k,re,im``, JSON, and a conservation CSV."""
        paths = [
            write_csv(f"{directory}/{stem}.csv", ["t", "k", "re", "im"], self.csv_rows()),
            write_json(f"{directory}/{stem}.json", self.to_json()),
            write_csv(f"{directory}/{stem}_conservation.csv",
                      ["t", "l2_norm", "momentum", "hamiltonian"], self.conservation_rows()),
        ]
        return paths


@dataclass(frozen=True)
class ConservationReport:
    max_rel_drift_l2: float
    max_rel_drift_momentum: float
    max_rel_drift_hamiltonian: float

    def to_json(self):
        return {
            "max_rel_drift_l2": self.max_rel_drift_l2,
            "max_rel_drift_momentum": self.max_rel_drift_momentum,
            "max_rel_drift_hamiltonian": self.max_rel_drift_hamiltonian,
        }


def _rel_drift(q):
    return float(np.max(np.abs(q - q[0])) / max(abs(q[0]), 1e-300))


def conservation_report(traj):
    return ConservationReport(
        _rel_drift(traj.l2), _rel_drift(traj.momentum), _rel_drift(traj.hamiltonian)
    )


def simulate(config):
    """Integrate ``config`` with fixed-step RK4; returns (Trajectory, ConservationReport).

    The final step is always sampled, even when ``steps`` is not a multiple
    of ``sample_every``.
    """
    n_total = config.steps
    h = config.signed_dt
    y = np.array(config.initial.padded(config.degree).coeffs)
    times, states, diags = [], [], []

    def record(step):
        u = HardySeries(y)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                d = (l2_norm(u), momentum(u), hamiltonian(u))
        except NumericalFailure:
            d = (math.inf,)
        if not all(math.isfinite(x) for x in d):
            raise IntegrationError(step, step * h)
        times.append(step * h)
        states.append(y.copy())
        diags.append(d)

    record(0)
    done = 0
    while done < n_total:
        chunk = min(config.sample_every, n_total - done)
        y, bad = _advance(y, h, chunk, config.nonlinear_mode)
        if bad:
            step = done + bad
            raise IntegrationError(step, step * h)
        done += chunk
        record(done)
    diags = np.array(diags)
    traj = Trajectory(
        times=np.array(times),
        coeffs=np.array(states),
        l2=diags[:, 0],
        momentum=diags[:, 1],
        hamiltonian=diags[:, 2],
    )
    report = conservation_report(traj)
    log.debug("simulate: %d steps, %d samples, drift %s", n_total, len(traj), report)
    return traj, report


def single_mode_solution(u0, t):
    """Closed form for data with one nonzero mode: c exp(-i |c|^2 t) at that mode."""
    nz = np.flatnonzero(u0.coeffs)
    if nz.size > 1:
        raise ValidationError("closed form needs at most one nonzero mode", "initial")
    out = np.array(u0.coeffs)
    if nz.size:
        c = out[nz[0]]
        out[nz[0]] = c * np.exp(-1j * abs(c) ** 2 * t)
    return HardySeries(out)


@dataclass
class ConvergenceStudy:
    """Errors at successively halved steps, and the fitted order."""

    dts: list
    errors: list
    reference: str
    orders: list = field(default_factory=list)
    observed_order: float = float("nan")

    def rows(self):
        ratios = [None] + [e0 / e1 if e1 > 0 else None for e0, e1 in zip(self.errors, self.errors[1:])]
        return list(zip(self.dts, self.errors, ratios))


def convergence_study(config, refinements=3):
    """Halve ``config.dt`` ``refinements - 1`` times and measure final-time errors.

    Single-mode data is compared with its closed form; anything else with a
    run at a quarter of the finest step.
    """
    if refinements < 2:
        raise ValidationError("need at least 2 refinements", "refinements")
    dts = [config.dt / 2**i for i in range(refinements)]
    finals = []
    for dt in dts:
        traj, _ = simulate(config.with_(dt=dt, sample_every=10**9))
        finals.append((traj.times[-1], traj.coeffs[-1]))
    if np.count_nonzero(config.initial.coeffs) <= 1:
        reference = "closed_form"
        refs = [single_mode_solution(config.initial.padded(config.degree), t).coeffs
                for t, _ in finals]
    else:
        reference = "self"
        traj, _ = simulate(config.with_(dt=dts[-1] / 4, sample_every=10**9))
        if any(abs(t - traj.times[-1]) > 1e-9 * abs(t) for t, _ in finals):
            raise ValidationError("t_end must be a multiple of dt for self-convergence", "t_end")
        refs = [traj.coeffs[-1]] * len(dts)
    errors = [float(np.linalg.norm(c - r)) for (_, c), r in zip(finals, refs)]
    study = ConvergenceStudy(dts=dts, errors=errors, reference=reference)
    if all(e > 0 for e in errors):
        study.orders = [math.log2(e0 / e1) for e0, e1 in zip(errors, errors[1:])]
        study.observed_order = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    return study
