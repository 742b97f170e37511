"""Bit-stable CSV and JSON export of simulation products.

Floats are written with repr-level precision so identical inputs reproduce
byte-identical files on one platform.  Every JSON document embeds the
fully-resolved configuration when one is supplied.
"""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .circuit import Trace
from .devices import IVCurve


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return repr(x)
    return str(x)


def write_trace_csv(path, trace: Trace):
    """Columns: t_s, v_na_V, v_k_V, r_x1_ohm, r_x2_ohm, u1, u2.

    u columns are empty for piecewise devices."""
    t = trace.t
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_s", "v_na_V", "v_k_V", "r_x1_ohm", "r_x2_ohm", "u1", "u2"])
        for k in range(len(trace)):
            w.writerow([_fmt(float(t[k])), _fmt(float(trace.v_na[k])),
                        _fmt(float(trace.v_k[k])), _fmt(float(trace.r_x1[k])),
                        _fmt(float(trace.r_x2[k])), _fmt(float(trace.u1[k])),
                        _fmt(float(trace.u2[k]))])


def write_iv_csv(path, curve: IVCurve):
    """Columns: v_volts, i_amps, state_u, sweep_dir."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["v_volts", "i_amps", "state_u", "sweep_dir"])
        for k in range(len(curve.v)):
            w.writerow([_fmt(float(curve.v[k])), _fmt(float(curve.i[k])),
                        _fmt(float(curve.state[k])),
                        "up" if curve.sweep_dir[k] > 0 else "down"])


def write_phase_csv(path, diagram):
    """Columns: v_in, r_in, regime, spikes_per_burst, duty_cycle,
    inter_burst_freq_hz."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["v_in", "r_in", "regime", "spikes_per_burst",
                    "duty_cycle", "inter_burst_freq_hz"])
        for row in diagram.rows():
            w.writerow([_fmt(c) for c in row])


def write_activation_csv(path, curve):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["amplitude_a", "spikes_per_burst"])
        for a, c in zip(curve.amplitudes, curve.counts):
            w.writerow([_fmt(float(a)), int(c)])


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if math.isnan(x) else x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, payload: dict, config_echo: dict | None = None):
    doc = dict(payload)
    if config_echo is not None:
        doc["config"] = config_echo
    with open(path, "w") as fh:
        json.dump(_sanitize(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def json_line(payload: dict) -> str:
    return json.dumps(_sanitize(payload), sort_keys=True)
