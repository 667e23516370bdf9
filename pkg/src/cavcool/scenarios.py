"""Scenario presets, run configuration, and on-disk result files."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import FitError, NoCoolingDetected, fit_exponential
from .integrator import DivergenceError, EnsembleSeries, FlatSampler, run_ensemble
from .model import ModeFamily, SimParams
from .predictor import (NoCoolingChannel, predict_single_atom, ring_multimode_predictions)
from .svg import line_plot

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NO_COOLING, EXIT_DIVERGED = 0, 1, 2, 3

PRESETS = ("fig1", "fig2", "fig3", "ring", "multimode")
REQUIRED_PARAM_KEYS = ("n_atoms", "u0", "gamma", "delta", "eta")
SERIES_COLUMNS = ("t", "e_kin_mean", "e_kin_sem", "photon_mean", "localization")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    params: SimParams
    scenario: str = "custom"
    out_dir: str = "out"
    formats: tuple = ("csv", "json")
    e_kin0: float = 1000.0
    stride: int = 100
    threads: int | None = None
    stratified: bool = True

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "out_dir": self.out_dir, "formats": list(self.formats),
                "e_kin0": self.e_kin0, "stride": self.stride, "threads": self.threads,
                "stratified": self.stratified, "params": self.params.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        return parse_config(d)


def _scaled_fig1(n_atoms: int, delta: float) -> dict:
    # N U0 and the potential depth U0 eta^2 / kappa^2 are held fixed
    return dict(n_atoms=n_atoms, u0=-0.6 / n_atoms, gamma=0.03 / n_atoms ** 2, delta=delta,
                eta=3.0 * np.sqrt(n_atoms), kappa_over_omega_r=415.0, dt=0.01,
                t_final=800.0 * n_atoms, n_trajectories=100, seed=1)


def preset(name: str, n_atoms: int | None = None, n_modes: int | None = None) -> RunConfig:
    """Reference parameter sets plus ring and multimode variants.

    ``fig1``/``fig2``/``ring``/``multimode`` scale U0 ~ 1/N and eta ~ sqrt(N);
    ``fig3`` keeps every parameter fixed while N changes.
    """
    n = 1 if n_atoms is None else int(n_atoms)
    if name == "fig1":
        p = _scaled_fig1(n, -0.6)
    elif name == "fig2":
        p = _scaled_fig1(n, -1.0)
    elif name == "fig3":
        p = dict(n_atoms=n, u0=-0.05, gamma=2.5e-4, delta=-1.0, eta=10.0, kappa_over_omega_r=415.0,
                 dt=0.01, t_final=8000.0, n_trajectories=100, seed=1)
    elif name == "ring":
        p = _scaled_fig1(n, -0.6)
        # both running waves pumped: same mean intensity as the standing-wave preset
        p.update(n_modes=2, mode_family="ring_pair", mode_normalization="standing",
                 eta=[p["eta"] / np.sqrt(2), p["eta"] / np.sqrt(2)])
    elif name == "multimode":
        m = 2 if n_modes is None else int(n_modes)
        p = _scaled_fig1(n, -0.6)
        eta = np.zeros(m, dtype=complex)
        eta[0] = p["eta"]
        p.update(n_modes=m, mode_family="degenerate_set", mode_normalization="standing", eta=eta)
    else:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return RunConfig(SimParams(**p), scenario=name, e_kin0=1000.0, stride=100)


_TOP_KEYS = {f.name for f in dataclasses.fields(RunConfig)} - {"params"}
_PARAM_KEYS = {f.name for f in dataclasses.fields(SimParams)}


def parse_config(data: dict | None = None, overrides: dict | None = None,
                 preset_name: str | None = None) -> RunConfig:
    """Build a validated :class:`RunConfig` from a preset, a JSON dict and overrides.

    Precedence: overrides > file values > preset. ``data`` may be nested
    (``{"params": {...}}``) or flat. Overrides are flat.
    """
    data = dict(data or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    nested = data.pop("params", {}) or {}
    flat = {**nested, **data}
    preset_name = overrides.pop("preset", None) or preset_name or flat.pop("preset", None)
    n_atoms_hint = overrides.get("n_atoms", flat.get("n_atoms"))
    n_modes_hint = overrides.get("n_modes", flat.get("n_modes"))
    flat.update(overrides)

    unknown = sorted(set(flat) - _TOP_KEYS - _PARAM_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")

    if preset_name:
        base = preset(preset_name, n_atoms_hint, n_modes_hint)
        # a changed atom number re-derives the preset's scaled parameters
        param_values = base.params.to_dict()
        top = {k: getattr(base, k) for k in _TOP_KEYS}
    else:
        param_values, top = {}, {}

    param_values.update({k: v for k, v in flat.items() if k in _PARAM_KEYS})
    top.update({k: v for k, v in flat.items() if k in _TOP_KEYS})
    missing = [k for k in REQUIRED_PARAM_KEYS if k not in param_values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    try:
        params = SimParams.from_dict(param_values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if "formats" in top and isinstance(top["formats"], str):
        top["formats"] = tuple(x.strip() for x in top["formats"].split(",") if x.strip())
    if "formats" in top:
        top["formats"] = tuple(top["formats"])
        bad = sorted(set(top["formats"]) - {"csv", "json", "svg"})
        if bad:
            raise ConfigError(f"unknown output formats: {', '.join(bad)}")
    top.setdefault("scenario", preset_name or "custom")
    cfg = RunConfig(params=params, **top)
    for msg in params.regime_warnings(params.basis()):
        log.warning("regime: %s", msg)
    return cfg


def predictions(params: SimParams) -> dict:
    try:
        if params.n_modes > 1:
            pred = ring_multimode_predictions(params, params.n_modes)
        else:
            pred = predict_single_atom(params)
    except NoCoolingChannel as exc:
        return {"error": str(exc)}
    return pred.to_dict()


def series_csv(series: EnsembleSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SERIES_COLUMNS)
    for row in zip(series.times, series.e_kin_mean, series.e_kin_sem, series.photon_mean,
                   series.localization_mean):
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _plot(series: EnsembleSeries, fit) -> str:
    curves = [(series.times, series.e_kin_mean, "simulation", "solid")]
    if fit is not None:
        tt = series.times - series.times[0]
        model = (fit.e0 - fit.plateau) * np.exp(-tt / fit.tau_c) + fit.plateau
        curves.append((series.times, model, f"fit, tau_c = {fit.tau_c:.4g}", "dashed"))
    return line_plot(curves, xlabel="t [1/kappa]", ylabel="E_kin per atom [hbar omega_R]")


def simulate(config: RunConfig) -> tuple[EnsembleSeries | None, dict, int]:
    """Run the ensemble and fit it. Returns ``(series, result, exit_code)``."""
    params = config.params
    sampler = FlatSampler(config.e_kin0, stratified=config.stratified)
    result: dict = {}
    try:
        series = run_ensemble(params, params.basis(), sampler, stride=config.stride,
                              threads=config.threads)
    except DivergenceError as exc:
        result.update(status="diverged", error=str(exc))
        series = exc.series
        if series is not None:
            result.update(n_diverged=series.n_diverged, n_completed=series.n_trajectories)
        return series, result, EXIT_DIVERGED
    result.update(n_diverged=series.n_diverged, n_completed=series.n_trajectories)
    try:
        fit = fit_exponential(series, kappa_over_omega_r=params.kappa_over_omega_r)
    except NoCoolingDetected as exc:
        result.update(status="no_cooling", error=str(exc), fit=None)
        return series, result, EXIT_NO_COOLING
    except FitError as exc:
        # the run finished but no cooling law could be established
        result.update(status="fit_failed", error=str(exc), fit=None)
        return series, result, EXIT_NO_COOLING
    result.update(status="ok", fit=fit.to_dict())
    result["_fit"] = fit
    return series, result, EXIT_OK


def run_scenario(config: RunConfig, predict_only: bool = False) -> tuple[dict, int]:
    """Run a configuration and write ``series.csv``, ``summary.json``, ``plot.svg``."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = config.params
    pred = predictions(params)
    summary = {"config": config.to_dict(), "predictions": pred,
               "doppler_reference": {k: pred.get(k) for k in
                                     ("s", "f1_doppler", "tau_c_doppler", "n_ph_doppler")},
               "n_ph": pred.get("n_ph")}
    code = EXIT_OK
    start = time.perf_counter()
    series, fit = None, None
    if not predict_only:
        series, result, code = simulate(config)
        fit = result.pop("_fit", None)
        summary["simulation"] = result
    summary["wall_clock_s"] = time.perf_counter() - start

    if series is not None and len(series):
        if "csv" in config.formats:
            (out / "series.csv").write_text(series_csv(series))
        if "svg" in config.formats:
            (out / "plot.svg").write_text(_plot(series, fit))
    if "json" in config.formats or predict_only:
        (out / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
    return summary, code


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, ModeFamily):
        return obj.value
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def scan_atom_numbers(ns, data: dict | None = None, overrides: dict | None = None) -> list[dict]:
    """Run one scenario per atom number and write ``scaling.csv``.

    ``data`` and ``overrides`` are as for :func:`parse_config`. Each run
    re-derives the preset at its own N, so presets with the collective
    scaling keep N U0 and U0 eta^2 fixed. Runs go to ``<out>/n<N>/``.
    """
    base = parse_config(data, overrides)
    root = Path(base.out_dir)
    rows = []
    for n in ns:
        extra = dict(overrides or {})
        extra.update(n_atoms=int(n), out_dir=str(root / f"n{int(n)}"))
        summary, code = run_scenario(parse_config(data, extra))
        fit = summary.get("simulation", {}).get("fit")
        nan = float("nan")
        rows.append({"n": int(n), "tau_c": fit["tau_c"] if fit else nan,
                     "k_b_t": fit["k_b_t"] if fit else nan, "exit_code": code,
                     "stderr_tau_c": fit["stderr"]["tau_c"] if fit else nan})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "tau_c", "k_b_t"])
    for r in rows:
        writer.writerow([r["n"], repr(float(r["tau_c"])), repr(float(r["k_b_t"]))])
    root.mkdir(parents=True, exist_ok=True)
    (root / "scaling.csv").write_text(buf.getvalue())
    return rows
