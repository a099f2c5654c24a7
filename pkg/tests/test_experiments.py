import json
import math

import numpy as np
import pytest

from oracles import rational_radius
from szego_lab.errors import ValidationError
from szego_lab.experiments import (
    AnalysisParams,
    ExperimentSpec,
    Preset,
    SimParams,
    build_preset,
    compare_bounds,
    epsilon_sweep,
    fit_exponent,
    persist_result,
    run_experiment,
    sweep_config,
    sweep_from_profiles,
)
from szego_lab.hardy import HardySeries


def _spec(preset, name="t", **sim):
    sim = {"t_end": 1.0, "degree": 8, "dt": 1e-3, "sample_every": 100, **sim}
    return ExperimentSpec(name, preset, SimParams(**sim))


def test_preset_examples():
    u = build_preset(Preset.eps_plus_wave(0.25), degree=4)
    assert u == HardySeries([0.25, 1, 0, 0, 0])
    assert build_preset(Preset.single_mode(2, 3j)) == HardySeries([0, 0, 3j])
    a = build_preset(Preset.random_analytic(0.5, 42, 64))
    b = build_preset(Preset.random_analytic(0.5, 42, 64))
    assert a == b and a.degree == 64
    assert a != build_preset(Preset.random_analytic(0.5, 43, 64))


def test_random_preset_recipe():
    u = build_preset(Preset.random_analytic(0.5, 7, 10))
    draws = np.random.Generator(np.random.PCG64(7)).random((11, 2))
    ref = np.exp(-0.5 * np.arange(11)) * np.sqrt(draws[:, 0]) * np.exp(2j * np.pi * draws[:, 1])
    np.testing.assert_allclose(u.coeffs, ref, rtol=1e-15, atol=0)
    assert np.all(np.abs(u.coeffs) <= np.exp(-0.5 * np.arange(11)))


def test_preset_validation():
    with pytest.raises(ValidationError):
        Preset("wave", {})
    with pytest.raises(ValidationError):
        Preset("eps_plus_wave", {})
    with pytest.raises(ValidationError):
        Preset.single_mode(-1)
    with pytest.raises(ValidationError):
        Preset("random_analytic", {"rho": 0.5, "seed": 1.5, "degree": 3})
    with pytest.raises(ValidationError) as info:
        Preset("eps_plus_wave", {"eps": 0.5, "k": 1})
    assert info.value.field == "preset.k"


def test_spec_json_round_trip():
    spec = ExperimentSpec("x", Preset.custom([1, 0.5j]), SimParams(t_end=2.0, degree=16),
                          AnalysisParams(sigma=0.3))
    text = json.dumps(spec.to_json())
    assert ExperimentSpec.from_json(json.loads(text)) == spec


def test_spec_validation_names_field():
    with pytest.raises(ValidationError) as info:
        _spec(Preset.single_mode(1), dt=0.0)
    assert info.value.field == "sim.dt"
    with pytest.raises(ValidationError) as info:
        _spec(Preset.single_mode(20))
    assert info.value.field == "sim.degree"
    with pytest.raises(ValidationError):
        ExperimentSpec.from_json({"name": "x", "preset": {"kind": "single_mode", "k": 1, "c": 1},
                                  "sim": {"t_end": 1, "bogus": 2}})
    with pytest.raises(ValidationError):
        _spec(Preset.single_mode(1), name="bad/name")


def test_overrides():
    spec = _spec(Preset.eps_plus_wave(0.5))
    new = spec.with_overrides({"sim.dt": 0.01, "preset.eps": 0.25, "analysis.sigma": 0.1})
    assert new.sim.dt == 0.01 and new.preset.params["eps"] == 0.25 and new.analysis.sigma == 0.1
    with pytest.raises(ValidationError):
        spec.with_overrides({"nope.dt": 1})


def test_single_mode_experiment():
    res = run_experiment(_spec(Preset.single_mode(1, 1)))
    assert res.passed, {k: v for k, v in res.verdicts.items() if not v.passed}
    final = res.trajectory.final.coeffs
    assert np.linalg.norm(final - np.array([0, np.exp(-1j)] + [0] * 7)) <= 1e-10
    assert res.isospectral_drift <= 1e-10


def test_zero_experiment():
    res = run_experiment(_spec(Preset.custom([0, 0])))
    assert res.passed


def test_eps_wave_persistence():
    spec = ExperimentSpec("w", Preset.eps_plus_wave(0.5),
                          SimParams(t_end=3.0, degree=128, dt=1e-3, sample_every=100),
                          AnalysisParams(sigma=0.2))
    res = run_experiment(spec)
    assert res.verdicts["persistence"].passed
    assert res.passed


def test_failed_simulation_becomes_verdicts():
    res = run_experiment(_spec(Preset.single_mode(0, 1000), degree=1, dt=1.0, t_end=5.0))
    assert not res.passed
    assert "non-finite" in res.verdicts["simulation"].detail
    assert all(not v.passed for v in res.verdicts.values())


def test_result_json_is_deterministic(tmp_path):
    spec = _spec(Preset.random_analytic(0.5, 3, 8), degree=16, t_end=0.5)
    a = run_experiment(spec).to_json_text()
    b = run_experiment(spec).to_json_text()
    assert a == b
    persist_result(run_experiment(spec), tmp_path / "1")
    persist_result(run_experiment(spec), tmp_path / "2")
    for name in ("result.json", "trajectory.csv", "radius_trace.csv", "bounds.csv"):
        assert (tmp_path / "1" / "t" / name).read_bytes() == (tmp_path / "2" / "t" / name).read_bytes()


def test_persist_layout(tmp_path):
    res = run_experiment(_spec(Preset.eps_plus_wave(0.5), degree=16, t_end=0.2))
    index = persist_result(res, tmp_path)
    out = tmp_path / "t"
    for name in index["artifacts"]:
        assert (out / name).exists()
    assert {"result.json", "hankel_initial.json", "hankel_final.csv", "bounds.csv"} <= set(index["artifacts"])
    data = json.loads((out / "result.json").read_text())
    assert data["passed"] is True
    assert data["spec"] == res.spec.to_json()


def test_compare_bounds_flags():
    res = run_experiment(_spec(Preset.single_mode(1, 1)))
    rows = compare_bounds(res)
    assert all(r[-1] == "undetermined" for r in rows)
    res = run_experiment(_spec(Preset.eps_plus_wave(0.5), degree=64, t_end=1.0))
    rows = compare_bounds(res)
    # u0 = 0.5 + e^{i theta} has a single nonconstant mode
    assert rows[0][-1] == "undetermined"
    assert all(r[-1] == "ok" and r[1] >= r[2] for r in rows[1:])


def test_synthetic_sweep():
    eps = [0.4, 0.3, 0.2, 0.1]
    k = np.arange(200)
    profiles = [np.exp(-0.7 * e**2 * k) for e in eps]
    res = sweep_from_profiles(eps, profiles)
    assert abs(res.exponent - 2) <= 1e-6


def test_fit_needs_three_rows():
    with pytest.raises(ValidationError):
        fit_exponent([0.4, 0.3, 0.2], [0.1, None, 0.02])
    assert fit_exponent([0.4, 0.2, 0.1], [0.16, 0.04, 0.01]) == pytest.approx(2, abs=1e-12)


def test_sweep_guards():
    template = ExperimentSpec("s", Preset.eps_plus_wave(0.4), SimParams(t_end=1.0, degree=16, dt=0.01))
    with pytest.raises(ValidationError) as info:
        epsilon_sweep([0.5], template)
    assert info.value.field == "sim.t_end"
    with pytest.raises(ValidationError):
        epsilon_sweep([0.2, 0.3], template.with_overrides({"sim.t_end": 100}))
    with pytest.raises(ValidationError):
        epsilon_sweep([1.5], template.with_overrides({"sim.t_end": 100}))


def test_sweep_config_hits_target_time():
    template = ExperimentSpec("s", Preset.eps_plus_wave(0.4), SimParams(t_end=20.0, degree=16, dt=2.5e-3))
    for eps in (0.4, 0.3, 0.2):
        cfg = sweep_config(eps, template, 0.4)
        assert cfg.steps * cfg.dt == pytest.approx(math.pi / eps, rel=1e-14)
        assert cfg.dt == pytest.approx(2.5e-3 * eps / 0.4, rel=1e-2)


def test_sweep_parallel_matches_serial():
    eps = [0.9, 0.8, 0.7]
    template = ExperimentSpec("s", Preset.eps_plus_wave(0.9),
                              SimParams(t_end=math.pi / 0.7, degree=32, dt=1e-2))
    a = epsilon_sweep(eps, template, jobs=1)
    b = epsilon_sweep(eps, template, jobs=2)
    assert a.to_json() == b.to_json()
    assert a.t_eval == pytest.approx([math.pi / e for e in eps], rel=1e-14)


@pytest.mark.slow
def test_half_time_sweep_tracks_exact_flow():
    # the exact radius from eps + e^{i theta} dips to about eps^2/8 at t = pi/(2 eps)
    eps = [0.4, 0.3, 0.2]
    template = ExperimentSpec("s", Preset.eps_plus_wave(0.4),
                              SimParams(t_end=math.pi / 0.2, degree=256, dt=2.5e-3))
    res = epsilon_sweep(eps, template, jobs=3, time_factor=0.5)
    exact = [rational_radius(e, math.pi / (2 * e)) for e in eps]
    for r, x in zip(res.rho_hat, exact):
        assert abs(r - x) <= 0.2 * x
    assert abs(fit_exponent(eps, exact) - 2) <= 0.01
    assert abs(res.exponent - 2) <= 0.3
