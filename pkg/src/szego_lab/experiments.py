"""Named, reproducible experiments built from the simulation and analysis modules.

Random presets use numpy's PCG64 bit generator seeded with the given integer:
for k = 0..N two uniforms (U, V) are drawn row by row and
g_k = sqrt(U) exp(2 pi i V) is uniform on the unit disc. The coefficient is
u_k = exp(-rho k) g_k.
"""
from concurrent.futures import ProcessPoolExecutor
import copy
from dataclasses import dataclass, field
import logging
import math
from pathlib import Path
import re

import numpy as np

from szego_lab.dynamics import MODES, SimConfig, simulate
from szego_lab.errors import SzegoLabError, ValidationError
from szego_lab.gevrey import (
    UNDETERMINED,
    estimate_radius,
    hs_growth_check,
    persistence_check,
)
from szego_lab.hankel import hankel_report, isospectral_drift
from szego_lab.hardy import HardySeries
from szego_lab.io import dumps, write_csv, write_json

log = logging.getLogger(__name__)

PRESET_KINDS = ("single_mode", "eps_plus_wave", "random_analytic", "custom")
_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


def _complex(v, name):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float, complex)):
        return complex(v)
    raise ValidationError(f"expected a number or [re, im], got {v!r}", name)


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


@dataclass(frozen=True)
class Preset:
    """Initial datum recipe. ``params`` depends on ``kind``:

    single_mode: k, c; eps_plus_wave: eps; random_analytic: rho, seed, degree;
    custom: coeffs.
    """

    kind: str
    params: dict

    def __post_init__(self):
        if self.kind not in PRESET_KINDS:
            raise ValidationError(f"unknown preset {self.kind!r}", "preset.kind")
        p = self.params
        need = {
            "single_mode": ("k", "c"),
            "eps_plus_wave": ("eps",),
            "random_analytic": ("rho", "seed", "degree"),
            "custom": ("coeffs",),
        }[self.kind]
        for key in need:
            if key not in p:
                raise ValidationError("missing parameter", f"preset.{key}")
        for key in p:
            if key not in need:
                raise ValidationError(f"not a parameter of {self.kind}", f"preset.{key}")
        if self.kind == "single_mode" and (int(p["k"]) != p["k"] or p["k"] < 0):
            raise ValidationError("k must be a non-negative integer", "preset.k")
        if self.kind == "eps_plus_wave" and not float(p["eps"]) > 0:
            raise ValidationError("eps must be positive", "preset.eps")
        if self.kind == "random_analytic":
            if not isinstance(p["seed"], int) or isinstance(p["seed"], bool):
                raise ValidationError("an integer seed is required", "preset.seed")
            if not (isinstance(p["degree"], int) and p["degree"] >= 0):
                raise ValidationError("degree must be a non-negative integer", "preset.degree")
            if not float(p["rho"]) >= 0:
                raise ValidationError("rho must be >= 0", "preset.rho")

    @classmethod
    def single_mode(cls, k, c=1.0):
        return cls("single_mode", {"k": int(k), "c": complex(c)})

    @classmethod
    def eps_plus_wave(cls, eps):
        return cls("eps_plus_wave", {"eps": float(eps)})

    @classmethod
    def random_analytic(cls, rho, seed, degree):
        return cls("random_analytic", {"rho": float(rho), "seed": seed, "degree": degree})

    @classmethod
    def custom(cls, coeffs):
        return cls("custom", {"coeffs": [complex(z) for z in coeffs]})

    @property
    def degree(self):
        p = self.params
        return {
            "single_mode": lambda: int(p["k"]),
            "eps_plus_wave": lambda: 1,
            "random_analytic": lambda: int(p["degree"]),
            "custom": lambda: len(p["coeffs"]) - 1,
        }[self.kind]()

    def to_json(self):
        out = {"kind": self.kind}
        for key, val in self.params.items():
            if key == "c":
                val = _pair(val)
            elif key == "coeffs":
                val = [_pair(z) for z in val]
            out[key] = val
        return out

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValidationError("preset must be an object with a 'kind'", "preset")
        params = {k: v for k, v in obj.items() if k != "kind"}
        if "c" in params:
            params["c"] = _complex(params["c"], "preset.c")
        if "coeffs" in params:
            if not isinstance(params["coeffs"], list):
                raise ValidationError("coeffs must be a list", "preset.coeffs")
            params["coeffs"] = [_complex(z, "preset.coeffs") for z in params["coeffs"]]
        return cls(obj["kind"], params)


def build_preset(preset, degree=None):
    """The initial series described by ``preset``, optionally zero-padded."""
    p = preset.params
    if preset.kind == "single_mode":
        u = HardySeries.monomial(int(p["k"]), complex(p["c"]))
    elif preset.kind == "eps_plus_wave":
        u = HardySeries([float(p["eps"]), 1.0])
    elif preset.kind == "random_analytic":
        n = int(p["degree"])
        rng = np.random.Generator(np.random.PCG64(p["seed"]))
        draws = rng.random((n + 1, 2))
        g = np.sqrt(draws[:, 0]) * np.exp(2j * np.pi * draws[:, 1])
        u = HardySeries(np.exp(-float(p["rho"]) * np.arange(n + 1)) * g)
    else:
        u = HardySeries(p["coeffs"])
    return u if degree is None else u.padded(degree)


@dataclass(frozen=True)
class SimParams:
    t_end: float
    degree: int = 128
    dt: float = 1e-3
    sample_every: int = 1
    nonlinear_mode: str = "fft"
    backward: bool = False

    def to_json(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class AnalysisParams:
    sigma: float = 0.2
    s_list: tuple = (1.1, 1.5, 2.0, 3.0)
    hs_growth_s: tuple = (0.6, 1.0, 2.0)
    floor: float = 1e-13
    min_window: int = 4
    conservation_tol: float = 1e-10

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError("sigma must be positive", "analysis.sigma")
        if any(not s > 1 for s in self.s_list):
            raise ValidationError("every s must exceed 1", "analysis.s_list")
        if any(not s > 0.5 for s in self.hs_growth_s):
            raise ValidationError("every s must exceed 1/2", "analysis.hs_growth_s")
        if not self.floor > 0:
            raise ValidationError("floor must be positive", "analysis.floor")
        if not (isinstance(self.min_window, int) and self.min_window >= 4):
            raise ValidationError("min_window must be an integer >= 4", "analysis.min_window")

    def to_json(self):
        out = dict(self.__dict__)
        out["s_list"] = list(self.s_list)
        out["hs_growth_s"] = list(self.hs_growth_s)
        return out


def _build(cls, obj, prefix):
    if not isinstance(obj, dict):
        raise ValidationError("expected an object", prefix)
    known = cls.__dataclass_fields__
    unknown = set(obj) - set(known)
    if unknown:
        raise ValidationError(f"unknown field(s) {sorted(unknown)}", prefix)
    kwargs = {}
    for key, val in obj.items():
        if key in ("s_list", "hs_growth_s"):
            val = tuple(float(v) for v in val)
        kwargs[key] = val
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValidationError(str(exc), prefix) from exc


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    preset: Preset
    sim: SimParams
    analysis: AnalysisParams = field(default_factory=AnalysisParams)

    def __post_init__(self):
        if not (isinstance(self.name, str) and _NAME_RE.match(self.name)):
            raise ValidationError("name must match [A-Za-z0-9_.-]+", "name")
        if self.preset.degree > self.sim.degree:
            raise ValidationError(
                f"preset degree {self.preset.degree} exceeds sim.degree {self.sim.degree}",
                "sim.degree",
            )
        # validates the numeric simulation fields with their dotted names
        try:
            self.sim_config()
        except ValidationError as exc:
            raise ValidationError(str(exc).split(": ", 1)[-1], f"sim.{exc.field}") from exc

    def sim_config(self):
        s = self.sim
        return SimConfig(
            initial=build_preset(self.preset),
            t_end=float(s.t_end),
            degree=s.degree,
            dt=float(s.dt),
            sample_every=s.sample_every,
            nonlinear_mode=s.nonlinear_mode,
            backward=bool(s.backward),
        )

    def to_json(self):
        return {
            "name": self.name,
            "preset": self.preset.to_json(),
            "sim": self.sim.to_json(),
            "analysis": self.analysis.to_json(),
        }

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise ValidationError("spec must be a JSON object", "spec")
        unknown = set(obj) - {"name", "preset", "sim", "analysis"}
        if unknown:
            raise ValidationError(f"unknown field(s) {sorted(unknown)}", "spec")
        for key in ("name", "preset", "sim"):
            if key not in obj:
                raise ValidationError("missing", key)
        sim = _build(SimParams, obj["sim"], "sim")
        if sim.nonlinear_mode not in MODES:
            raise ValidationError(f"must be one of {MODES}", "sim.nonlinear_mode")
        analysis = _build(AnalysisParams, obj.get("analysis", {}), "analysis")
        return cls(obj["name"], Preset.from_json(obj["preset"]), sim, analysis)

    def with_overrides(self, overrides):
        """New spec with dotted-name overrides, e.g. ``{"sim.dt": 0.01}``."""
        return ExperimentSpec.from_json(apply_overrides(self.to_json(), overrides))


def apply_overrides(obj, overrides):
    out = copy.deepcopy(obj)
    for dotted, val in overrides.items():
        keys = dotted.split(".")
        node = out
        for key in keys[:-1]:
            # missing sections are created; unknown names fail spec validation later
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ValidationError("no such section", dotted)
        node[keys[-1]] = val
    return out


@dataclass(frozen=True)
class Verdict:
    passed: bool
    slack: float = None
    detail: str = ""

    def to_json(self):
        return {"passed": self.passed, "slack": self.slack, "detail": self.detail}


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    summary: dict = field(default_factory=dict)
    conservation: object = None
    hankel_initial: object = None
    hankel_final: object = None
    radius_trace: object = None
    hs_growth: list = field(default_factory=list)
    isospectral_drift: float = None
    verdicts: dict = field(default_factory=dict)
    trajectory: object = None

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts.values())

    def to_json(self):
        def opt(x):
            return None if x is None else x.to_json()

        return {
            "spec": self.spec.to_json(),
            "summary": self.summary,
            "conservation": opt(self.conservation),
            "hankel_initial": opt(self.hankel_initial),
            "hankel_final": opt(self.hankel_final),
            "radius_trace": opt(self.radius_trace),
            "hs_growth": [h.to_json() for h in self.hs_growth],
            "isospectral_drift": self.isospectral_drift,
            "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
            "passed": self.passed,
        }

    def to_json_text(self):
        return dumps(self.to_json())


def _fail_all(names, verdicts, why):
    for name in names:
        verdicts.setdefault(name, Verdict(False, None, f"not evaluated: {why}"))


def run_experiment(spec):
    """Simulate ``spec`` and run every analysis; module errors become failed verdicts."""
    a = spec.analysis
    result = ExperimentResult(spec)
    v = result.verdicts
    planned = (
        ["simulation", "conservation_l2", "conservation_momentum", "hankel_initial",
         "hankel_final", "persistence", "wiener_le_C1"]
        + [f"hs_growth_s={s!r}" for s in a.hs_growth_s]
    )
    try:
        traj, cons = simulate(spec.sim_config())
    except SzegoLabError as exc:
        v["simulation"] = Verdict(False, None, str(exc))
        _fail_all(planned, v, "simulation failed")
        return result
    v["simulation"] = Verdict(True, None, f"{len(traj)} samples")
    result.trajectory = traj
    result.conservation = cons
    result.summary = {
        "degree": traj.degree,
        "n_samples": len(traj),
        "t_final": float(traj.times[-1]),
        "final_state": traj.final.to_json(),
    }
    for name, drift in (("conservation_l2", cons.max_rel_drift_l2),
                        ("conservation_momentum", cons.max_rel_drift_momentum)):
        v[name] = Verdict(drift <= a.conservation_tol, a.conservation_tol - drift,
                          f"max relative drift {drift!r}")

    for name, u in (("hankel_initial", traj.initial), ("hankel_final", traj.final)):
        try:
            rep = hankel_report(u, a.s_list)
        except SzegoLabError as exc:
            v[name] = Verdict(False, None, str(exc))
            continue
        setattr(result, name, rep)
        worst = min(c.slack for c in rep.checks.values())
        failed = [k for k, c in rep.checks.items() if not c.passed]
        v[name] = Verdict(rep.passed, worst, ", ".join(failed))
    try:
        result.isospectral_drift = isospectral_drift(traj)
    except SzegoLabError as exc:
        log.warning("isospectral drift unavailable: %s", exc)

    try:
        rt = persistence_check(traj, a.sigma, a.floor, a.min_window)
    except SzegoLabError as exc:
        v["persistence"] = Verdict(False, None, str(exc))
        _fail_all(planned, v, "persistence check failed")
        return result
    result.radius_trace = rt
    v["persistence"] = Verdict(rt.passed, rt.params.C0 - float(np.max(rt.gevrey_at_tau)),
                               f"violations at samples {rt.violations}" if rt.violations else "")
    v["wiener_le_C1"] = Verdict(
        not rt.wiener_above_C1,
        rt.params.C1 - 1.0 - float(np.max(rt.wiener)),
        f"flagged samples {rt.wiener_above_C1}" if rt.wiener_above_C1 else "",
    )
    for s in a.hs_growth_s:
        name = f"hs_growth_s={s!r}"
        try:
            h = hs_growth_check(traj, s, rt.params)
        except SzegoLabError as exc:
            v[name] = Verdict(False, None, str(exc))
            continue
        result.hs_growth.append(h)
        v[name] = Verdict(h.passed, h.min_slack,
                          f"{len(h.skipped)} samples skipped (tau underflow)" if h.skipped else "")
    return result


def persist_result(result, out_root):
    """Write result.json and companion CSVs under ``out_root/<spec.name>``; returns the index."""
    out = Path(out_root) / result.spec.name
    out.mkdir(parents=True, exist_ok=True)
    files = []
    (out / "result.json").write_text(result.to_json_text(), encoding="utf-8")
    files.append(out / "result.json")
    if result.trajectory is not None:
        files += result.trajectory.write(out)
    if result.conservation is not None:
        files.append(write_json(out / "conservation.json", result.conservation.to_json()))
    if result.hankel_initial is not None:
        files += result.hankel_initial.write(out, "hankel_initial")
    if result.hankel_final is not None:
        files += result.hankel_final.write(out, "hankel_final")
    if result.radius_trace is not None:
        files += result.radius_trace.write(out)
        files.append(write_csv(out / "bounds.csv", ["t", "rho_hat", "tau", "tau_tilde", "flag"],
                               compare_bounds(result)))
    index = {"name": result.spec.name, "artifacts": sorted(p.name for p in files)}
    write_json(out / "index.json", index)
    return index


def compare_bounds(result):
    """Rows (t, rho_hat, tau, tau_tilde, flag) from a result or a RadiusTrace.

    ``flag`` is "ok", "undetermined", or "below_tau" when
    rho_hat < tau - 0.05 sigma. Flags never fail the experiment.
    """
    rt = getattr(result, "radius_trace", result)
    if rt is None:
        raise ValidationError("result has no radius trace", "radius_trace")
    margin = 0.05 * rt.params.sigma
    rows = []
    for i, t in enumerate(rt.times):
        r = rt.rho_hat[i]
        if r is None:
            flag = UNDETERMINED
        elif r < rt.tau[i] - margin:
            flag = "below_tau"
        else:
            flag = "ok"
        rows.append((float(t), UNDETERMINED if r is None else r, float(rt.tau[i]),
                     float(rt.tau_tilde[i]), flag))
    return rows


@dataclass
class SweepResult:
    eps: list
    t_eval: list
    rho_hat: list
    exponent: float = None
    fit_error: str = ""

    @property
    def n_valid(self):
        return sum(r is not None for r in self.rho_hat)

    def rows(self):
        for e, t, r in zip(self.eps, self.t_eval, self.rho_hat):
            yield (e, t, UNDETERMINED if r is None else r, r is not None)

    def to_json(self):
        return {
            "rows": [{"eps": e, "t": t, "rho_hat": r, "valid": ok} for e, t, r, ok in self.rows()],
            "exponent": self.exponent,
            "n_valid": self.n_valid,
            "fit_error": self.fit_error,
        }

    def write(self, directory, stem="sweep"):
        return [
            write_csv(f"{directory}/{stem}.csv", ["eps", "t", "rho_hat", "valid"], self.rows()),
            write_json(f"{directory}/{stem}.json", self.to_json()),
        ]


def fit_exponent(eps, rho):
    """Least-squares slope of log rho against log eps over rows with a radius."""
    pts = [(e, r) for e, r in zip(eps, rho) if r is not None]
    if len(pts) < 3:
        raise ValidationError(f"fit needs >= 3 valid rows, got {len(pts)}", "eps_values")
    if any(r <= 0 for _, r in pts):
        raise ValidationError("non-positive radius cannot be fitted on a log scale", "rho_hat")
    x = np.log([e for e, _ in pts])
    y = np.log([r for _, r in pts])
    return float(np.polyfit(x, y, 1)[0])


def _finish(result):
    try:
        result.exponent = fit_exponent(result.eps, result.rho_hat)
    except ValidationError as exc:
        result.fit_error = str(exc)
    return result


def sweep_from_profiles(eps_values, profiles, floor=1e-13, min_window=4):
    """Sweep regression on given coefficient profiles (no simulation)."""
    rho = [estimate_radius(HardySeries(p), floor, min_window) for p in profiles]
    return _finish(SweepResult(list(map(float, eps_values)), [None] * len(rho), rho))


def _check_eps(eps_values):
    eps = [float(e) for e in eps_values]
    if not eps:
        raise ValidationError("no eps values", "eps_values")
    if any(not 0 < e < 1 for e in eps):
        raise ValidationError("each eps must lie in (0, 1)", "eps_values")
    if any(a <= b for a, b in zip(eps, eps[1:])):
        raise ValidationError("eps values must be strictly descending", "eps_values")
    return eps


def sweep_config(eps, template, eps_ref, time_factor=1.0):
    """SimConfig reaching t = time_factor * pi/eps exactly, dt scaled by eps/eps_ref."""
    t_eval = time_factor * math.pi / eps
    nominal = template.sim.dt * eps / eps_ref
    steps = math.ceil(t_eval / nominal - 1e-9)
    return SimConfig(
        initial=build_preset(Preset.eps_plus_wave(eps)),
        t_end=t_eval,
        degree=template.sim.degree,
        dt=t_eval / steps,
        sample_every=steps,
        nonlinear_mode=template.sim.nonlinear_mode,
    )


def _sweep_entry(args):
    eps, template, eps_ref, time_factor = args
    traj, _ = simulate(sweep_config(eps, template, eps_ref, time_factor))
    a = template.analysis
    return float(traj.times[-1]), estimate_radius(traj.final, a.floor, a.min_window)


def epsilon_sweep(eps_values, template, jobs=1, time_factor=1.0):
    """Radius of u0 = e^{i theta} + eps at t = time_factor * pi/eps, for each eps.

    ``template.sim.t_end`` must reach pi / min(eps). Entries are independent
    and may run in ``jobs`` processes; rows keep input order.
    """
    eps = _check_eps(eps_values)
    need = math.pi / min(eps)
    if template.sim.t_end < need * (1 - 1e-12):
        raise ValidationError(f"t_end={template.sim.t_end!r} < pi/eps_min={need!r}", "sim.t_end")
    tasks = [(e, template, eps[0], time_factor) for e in eps]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_sweep_entry, tasks))
    else:
        out = [_sweep_entry(t) for t in tasks]
    return _finish(SweepResult(eps, [t for t, _ in out], [r for _, r in out]))
