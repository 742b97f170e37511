"""Experiment configuration: TOML files with unit-suffixed keys.

The stock tables mix nF, mV and kOhm, so every key carries its unit in its
name (c1_nf, v_in_mv, r_in_kohm) and is converted to SI exactly once, here.
Unknown keys anywhere in the file are rejected.  Shipped presets live in
nbo2neuron/presets and are addressed by bare name (e.g. "fig3a").
"""
from __future__ import annotations

import copy
import sys
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .boundaries import CircuitAnchors
from .circuit import IntegratorControl, NeuronParams
from .devices import PiecewiseParams, RampSpec, ThermalIMTParams
from .network import ChainConfig, Pattern, SynapseBank
from .spikes import DetectorConfig
from .sweeps import SweepControl


class ConfigError(ValueError):
    """Malformed configuration (unknown key, bad value, bad type)."""


DEFAULTS: dict = {
    "model": {"kind": "thermal"},
    "device": {
        "thermal": {
            "t_imt_k": 1080.0, "t_amb_k": 296.0,
            "kappa_w_mk": 1.5, "cv_j_m3k": 2.6e6,
            "rho_met_ohm_m": 1e-4, "rho_ins_ohm_m": 7e-3,
            "r_ch_nm": 30.0, "l_ch_nm": 20.0, "dh_tx_j_m3": 1.6e8,
            "u_min": 0.01, "u_max": 0.9999,
        },
        "piecewise": {
            "r_on_kohm": 0.85, "r_off_kohm": 49.0,
            "v_th_mv": 1448.0, "v_h_mv": 746.0,
        },
    },
    "neuron": {
        "c1_nf": 5.0, "c2_nf": 0.5, "r_in_kohm": 6.0, "r2_kohm": 6.0,
        "v1_v": -1.4, "v2_v": 1.4, "v_in_mv": 400.0,
    },
    "integrator": {
        "rtol": 1e-6, "rtol_u": 3e-4, "atol_v": 1e-9, "atol_u": 1e-6,
        "max_step_us": 1.0, "trace_dt_ns": 10.0, "method": "auto",
    },
    "detector": {
        "transient_frac": 0.25, "prominence_frac": 0.25, "min_isi_ns": 100.0,
        "noise_floor_mv": 50.0, "gap_factor": 3.0, "cv_cutoff": 0.15,
        "min_bursts": 3,
    },
    "simulate": {"t_end_ms": 2.0},
    "iv": {
        "drive": "current", "peak_ma": 2.5, "peak_v": 2.0,
        "t_ramp_us": 50.0, "n_samples": 20001,
    },
    "boundaries": {
        "use_extracted_anchors": False,
        "v_min_mv": 0.0, "v_max_mv": 2000.0, "n_v": 41,
    },
    "sweep": {
        "v_in_min_mv": 0.0, "v_in_max_mv": 1000.0, "n_v": 101,
        "r_in_min_kohm": 0.25, "r_in_max_kohm": 33.0, "n_r": 132,
        "base_duration_ms": 1.2, "duration_per_tau": 6.0, "max_doublings": 3,
        "trace_dt_ns": 20.0, "threads": 0,
    },
    "capacitance": {
        "mode": "pairs",              # pairs | count_range
        "c1_nf_values": [2.0, 3.5, 5.0],
        "c2_nf_values": [0.5],
        "r_in_kohm_values": [],
    },
    "activation": {
        "amplitudes_ua": [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0, 25.0,
                          30.0, 40.0, 50.0],
        "c1_nf": 25.0,
    },
    "perceptron": {
        "c1_nf": 25.0,
        "weights_kohm": [],           # empty = committed default bank
        "patterns": ["n", "z", "v"],
        "t_end_ms": 12.0,
    },
    "chain": {
        "c1_nf": [10.0, 3.0, 1.0],
        "c2_nf": [1.0, 0.3, 0.08],
        "r_m_kohm": 10.0, "r_n_kohm": 10.0, "r_q_kohm": 15.0,
        "v_dc_mv": 400.0, "t_end_ms": 4.0,
    },
}


def _check_keys(data, schema, path=""):
    if not isinstance(data, dict):
        raise ConfigError(f"section {path or '<root>'} must be a table")
    for key, val in data.items():
        if key not in schema:
            raise ConfigError(f"unknown key {path + key!r}")
        if isinstance(schema[key], dict):
            _check_keys(val, schema[key], path + key + ".")


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict):
            out[key] = _merge(base[key], val)
        else:
            out[key] = val
    return out


class ExperimentConfig:
    """Fully-resolved configuration with typed SI accessors."""

    def __init__(self, data: dict | None = None):
        data = data or {}
        _check_keys(data, DEFAULTS)
        self.data = _merge(DEFAULTS, data)
        kind = self.data["model"]["kind"]
        if kind not in ("thermal", "piecewise"):
            raise ConfigError(f"model.kind must be thermal or piecewise, got {kind!r}")

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            try:
                data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"cannot parse {path}: {exc}") from exc
        return cls(data)

    @classmethod
    def from_preset(cls, name: str) -> "ExperimentConfig":
        ref = resources.files("nbo2neuron") / "presets" / f"{name}.toml"
        if not ref.is_file():
            raise ConfigError(f"unknown preset {name!r} (have: {', '.join(available_presets())})")
        with ref.open("rb") as fh:
            return cls(tomllib.load(fh))

    def echo(self) -> dict:
        """The fully-resolved config, embedded in every JSON output."""
        return copy.deepcopy(self.data)

    # — typed accessors —

    def device_params(self):
        if self.data["model"]["kind"] == "piecewise":
            d = self.data["device"]["piecewise"]
            return PiecewiseParams(r_on=d["r_on_kohm"] * 1e3,
                                   r_off=d["r_off_kohm"] * 1e3,
                                   v_th=d["v_th_mv"] * 1e-3,
                                   v_h=d["v_h_mv"] * 1e-3)
        d = self.data["device"]["thermal"]
        return ThermalIMTParams(
            t_imt=d["t_imt_k"], t_amb=d["t_amb_k"], kappa=d["kappa_w_mk"],
            c_v=d["cv_j_m3k"], rho_met=d["rho_met_ohm_m"],
            rho_ins=d["rho_ins_ohm_m"], r_ch=d["r_ch_nm"] * 1e-9,
            l_ch=d["l_ch_nm"] * 1e-9, dh_tx=d["dh_tx_j_m3"],
            u_min=d["u_min"], u_max=d["u_max"])

    def neuron_params(self, **overrides) -> NeuronParams:
        n = self.data["neuron"]
        dev = self.device_params()
        kw = dict(c1=n["c1_nf"] * 1e-9, c2=n["c2_nf"] * 1e-9,
                  r_in=n["r_in_kohm"] * 1e3, r2=n["r2_kohm"] * 1e3,
                  v1=n["v1_v"], v2=n["v2_v"], v_in=n["v_in_mv"] * 1e-3,
                  device1=dev, device2=dev)
        kw.update(overrides)
        return NeuronParams(**kw)

    def integrator_control(self, trace_dt: float | None = None) -> IntegratorControl:
        i = self.data["integrator"]
        return IntegratorControl(
            rtol=i["rtol"], rtol_u=i["rtol_u"], atol_v=i["atol_v"],
            atol_u=i["atol_u"], max_step=i["max_step_us"] * 1e-6,
            trace_dt=trace_dt if trace_dt is not None else i["trace_dt_ns"] * 1e-9,
            method=i["method"])

    def detector_config(self) -> DetectorConfig:
        d = self.data["detector"]
        return DetectorConfig(
            transient_frac=d["transient_frac"], prominence_frac=d["prominence_frac"],
            min_isi=d["min_isi_ns"] * 1e-9, noise_floor=d["noise_floor_mv"] * 1e-3,
            gap_factor=d["gap_factor"], cv_cutoff=d["cv_cutoff"],
            min_bursts=int(d["min_bursts"]))

    def sweep_control(self, threads: int | None = None) -> SweepControl:
        s = self.data["sweep"]
        cfg_threads = int(s["threads"]) or None
        return SweepControl(
            base_duration=s["base_duration_ms"] * 1e-3,
            duration_per_tau=s["duration_per_tau"],
            max_doublings=int(s["max_doublings"]),
            trace_dt=s["trace_dt_ns"] * 1e-9,
            threads=threads if threads is not None else cfg_threads)

    def sweep_grids(self):
        s = self.data["sweep"]
        v = np.linspace(s["v_in_min_mv"] * 1e-3, s["v_in_max_mv"] * 1e-3, int(s["n_v"]))
        r = np.linspace(s["r_in_min_kohm"] * 1e3, s["r_in_max_kohm"] * 1e3, int(s["n_r"]))
        if r[0] <= 0.0:
            r = r[r > 0.0]
        return v, r

    def ramp_spec(self) -> RampSpec:
        iv = self.data["iv"]
        drive = iv["drive"]
        if drive not in ("current", "voltage"):
            raise ConfigError(f"iv.drive must be current or voltage, got {drive!r}")
        peak = iv["peak_ma"] * 1e-3 if drive == "current" else iv["peak_v"]
        return RampSpec(peak=peak, t_ramp=iv["t_ramp_us"] * 1e-6,
                        drive=drive, n_samples=int(iv["n_samples"]))

    def anchors(self) -> CircuitAnchors:
        n = self.data["neuron"]
        pw = self.data["device"]["piecewise"]
        return CircuitAnchors(
            r_on=pw["r_on_kohm"] * 1e3, r_off=pw["r_off_kohm"] * 1e3,
            r_th=41e3, r_h=1.98e3,
            v_th=pw["v_th_mv"] * 1e-3, v_h=pw["v_h_mv"] * 1e-3,
            r2=n["r2_kohm"] * 1e3, v1=n["v1_v"], v2=n["v2_v"])

    def boundary_v_grid(self):
        b = self.data["boundaries"]
        return np.linspace(b["v_min_mv"] * 1e-3, b["v_max_mv"] * 1e-3, int(b["n_v"]))

    def perceptron_setup(self):
        pc = self.data["perceptron"]
        p = self.neuron_params(c1=pc["c1_nf"] * 1e-9)
        weights = pc["weights_kohm"]
        bank = (SynapseBank(tuple(w * 1e3 for w in weights)) if weights
                else SynapseBank())
        patterns = [Pattern.letter(name) for name in pc["patterns"]]
        return p, bank, patterns, pc["t_end_ms"] * 1e-3

    def chain_config(self) -> ChainConfig:
        c = self.data["chain"]
        if len(c["c1_nf"]) != 3 or len(c["c2_nf"]) != 3:
            raise ConfigError("chain.c1_nf and chain.c2_nf need 3 entries")
        dev = self.device_params()
        neurons = [self.neuron_params(c1=a * 1e-9, c2=b * 1e-9,
                                      device1=dev, device2=dev)
                   for a, b in zip(c["c1_nf"], c["c2_nf"])]
        return ChainConfig(n1=neurons[0], n2=neurons[1], n3=neurons[2],
                           r_m=c["r_m_kohm"] * 1e3, r_n=c["r_n_kohm"] * 1e3,
                           r_q=c["r_q_kohm"] * 1e3, v_dc=c["v_dc_mv"] * 1e-3)


def available_presets() -> list[str]:
    out = []
    for entry in (resources.files("nbo2neuron") / "presets").iterdir():
        if entry.name.endswith(".toml"):
            out.append(entry.name[:-5])
    return sorted(out)
