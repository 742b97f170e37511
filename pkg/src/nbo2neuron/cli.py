"""Command-line front end.

Subcommands map one-to-one onto the library surfaces: iv, simulate, phase,
boundaries, perceptron, chain, activation.  Exit codes: 0 success, 2 config
error, 3 numerical failure.  The only stdout output is a one-line JSON
summary; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import io as _io
from .boundaries import all_boundaries, compare_boundaries
from .circuit import IntegrationError, integrate
from .config import ConfigError, ExperimentConfig, available_presets
from .devices import QuasiStaticError, quasistatic_iv_sweep
from .network import chain_simulate, perceptron_forward
from .spikes import classify, NeedsLongerTrace
from .sweeps import activation_curve, phase_diagram

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="nbo2neuron",
        description="NbO2 memristive-neuron simulator and analysis toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in [
            ("iv", "quasi-static device I-V sweep"),
            ("simulate", "single-neuron transient"),
            ("phase", "R_in-V_in phase diagram sweep"),
            ("boundaries", "analytic operating-window boundary lines"),
            ("perceptron", "9x1 burst-coded perceptron forward pass"),
            ("chain", "three-neuron propagation chain"),
            ("activation", "spike count vs input current amplitude")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", type=Path, help="TOML config file")
        p.add_argument("--preset", help="named preset (%s)" % ", ".join(available_presets()))
        p.add_argument("--out", type=Path, help="output file (CSV or JSON per subcommand)")
        p.add_argument("--threads", type=int, default=None,
                       help="sweep worker count (default: available parallelism)")
    return ap


def _load_config(args) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        return ExperimentConfig.from_toml(args.config)
    if args.preset:
        return ExperimentConfig.from_preset(args.preset)
    return ExperimentConfig()


def _out_path(args, default: str) -> Path:
    return args.out if args.out else Path(default)


def _cmd_iv(args, cfg: ExperimentConfig) -> dict:
    curve = quasistatic_iv_sweep(cfg.device_params(), cfg.ramp_spec())
    out = _out_path(args, "iv.csv")
    _io.write_iv_csv(out, curve)
    summary = {
        "switched": curve.switched,
        "v_th_v": curve.v_th, "r_th_ohm": curve.r_th,
        "v_h_v": curve.v_h, "r_h_ohm": curve.r_h,
    }
    _io.write_json(out.with_suffix(out.suffix + ".json"), summary, cfg.echo())
    return {"out": str(out), **summary}


def _cmd_simulate(args, cfg: ExperimentConfig) -> dict:
    p = cfg.neuron_params()
    t_end = cfg.data["simulate"]["t_end_ms"] * 1e-3
    trace = integrate(p, t_end=t_end, ctl=cfg.integrator_control())
    try:
        prof = classify(trace, cfg.detector_config(), strict=True)
    except NeedsLongerTrace:
        prof = classify(trace, cfg.detector_config(), strict=False)
    out = _out_path(args, "trace.csv")
    _io.write_trace_csv(out, trace)
    _io.write_json(out.with_suffix(out.suffix + ".json"),
                   {"profile": prof.to_json_dict(), "t_end_s": t_end,
                    "n_steps": trace.n_steps}, cfg.echo())
    return {"out": str(out), "profile": prof.to_json_dict()}


def _cmd_phase(args, cfg: ExperimentConfig) -> dict:
    v_grid, r_grid = cfg.sweep_grids()
    sweep = cfg.sweep_control(threads=args.threads)
    diagram = phase_diagram(cfg.neuron_params(), v_grid, r_grid,
                            sweep=sweep, cfg=cfg.detector_config(),
                            ctl=cfg.integrator_control())
    out = _out_path(args, "phase.csv")
    _io.write_phase_csv(out, diagram)
    lines = all_boundaries(cfg.anchors())
    devs = compare_boundaries(diagram, lines)
    sidecar = {
        "grid": {"v_in_volts": list(map(float, v_grid)),
                 "r_in_ohm": list(map(float, r_grid))},
        "boundaries": [ln.to_json_dict(v_grid) for ln in lines],
        "boundary_deviation": [
            {"label": d.label.value, "n_columns": int(len(d.v_in)),
             "max_rel": d.max_rel(), "mean_rel": d.mean_rel()}
            for d in devs],
        "bursting_counts": sorted(diagram.bursting_counts()),
    }
    _io.write_json(out.with_suffix(out.suffix + ".json"), sidecar, cfg.echo())
    return {"out": str(out), "bursting_counts": sidecar["bursting_counts"]}


def _cmd_boundaries(args, cfg: ExperimentConfig) -> dict:
    anchors = cfg.anchors()
    if cfg.data["boundaries"]["use_extracted_anchors"]:
        curve = quasistatic_iv_sweep(cfg.device_params(), cfg.ramp_spec())
        if not curve.switched:
            raise QuasiStaticError("device never switched; cannot extract anchors")
        from dataclasses import replace
        anchors = replace(anchors, v_th=curve.v_th, r_th=curve.r_th,
                          v_h=curve.v_h, r_h=curve.r_h)
    v_grid = cfg.boundary_v_grid()
    lines = all_boundaries(anchors)
    out = _out_path(args, "boundaries.json")
    _io.write_json(out, {"lines": [ln.to_json_dict(v_grid) for ln in lines]},
                   cfg.echo())
    return {"out": str(out),
            "slopes_ohm_per_v": {ln.label.value: ln.slope for ln in lines}}


def _cmd_perceptron(args, cfg: ExperimentConfig) -> dict:
    p, bank, patterns, t_end = cfg.perceptron_setup()
    results = {}
    for pat in patterns:
        prof = perceptron_forward(pat, bank, p, t_end=t_end,
                                  cfg=cfg.detector_config())
        results[pat.label] = prof.to_json_dict()
    out = _out_path(args, "perceptron.json")
    _io.write_json(out, {"results": results,
                         "weights_ohm": list(bank.resistances)}, cfg.echo())
    return {"out": str(out),
            "counts": {k: v["spikes_per_burst"] for k, v in results.items()}}


def _cmd_chain(args, cfg: ExperimentConfig) -> dict:
    chain = cfg.chain_config()
    t_end = cfg.data["chain"]["t_end_ms"] * 1e-3
    traces, profiles = chain_simulate(chain, t_end=t_end,
                                      det=cfg.detector_config())
    out = _out_path(args, "chain.json")
    base = out.with_suffix("")
    for k, tr in enumerate(traces):
        _io.write_trace_csv(Path(f"{base}_n{k + 1}.csv"), tr)
    _io.write_json(out, {"profiles": [pr.to_json_dict() for pr in profiles],
                         "trace_files": [f"{base}_n{k + 1}.csv" for k in range(3)]},
                   cfg.echo())
    return {"out": str(out),
            "counts": [pr.to_json_dict()["spikes_per_burst"] for pr in profiles]}


def _cmd_activation(args, cfg: ExperimentConfig) -> dict:
    act = cfg.data["activation"]
    p = cfg.neuron_params(c1=act["c1_nf"] * 1e-9)
    amps = [a * 1e-6 for a in act["amplitudes_ua"]]
    sweep = cfg.sweep_control(threads=args.threads)
    curve = activation_curve(amps, p, sweep=sweep, cfg=cfg.detector_config())
    out = _out_path(args, "activation.csv")
    _io.write_activation_csv(out, curve)
    fit = {"m_a": curve.m, "a": curve.a, "b": curve.b, "k_per_a": curve.k,
           "residual_rms": curve.residual_rms}
    _io.write_json(out.with_suffix(out.suffix + ".json"),
                   {"fit": fit, "counts": curve.counts.tolist()}, cfg.echo())
    return {"out": str(out), "fit": fit}


_COMMANDS = {
    "iv": _cmd_iv,
    "simulate": _cmd_simulate,
    "phase": _cmd_phase,
    "boundaries": _cmd_boundaries,
    "perceptron": _cmd_perceptron,
    "chain": _cmd_chain,
    "activation": _cmd_activation,
}


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = _load_config(args)
        summary = _COMMANDS[args.command](args, cfg)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, QuasiStaticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    summary = {"command": args.command,
               "elapsed_s": round(time.perf_counter() - t0, 3), **summary}
    print(_io.json_line(summary))
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
