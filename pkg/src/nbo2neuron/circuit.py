"""Two-channel memristive neuron circuit.

Node V_Na integrates the input branch, the R2 coupling and the X1 channel on
the slow capacitor C1; node V_K integrates the R2 coupling and the X2 channel
on the fast capacitor C2:

    C1 dV_Na/dt = (V_in - V_Na)/R_in + (V_K - V_Na)/R2 - (V_Na - V1)/R_X1
    C2 dV_K/dt  = (V_Na - V_K)/R2 - (V_K - V2)/R_X2

X1 sees branch voltage (V_Na - V1) against the negative reservoir V1, X2 sees
(V2 - V_K) against the positive reservoir V2.  The mismatch between the slow
charging of V_Na and the fast relaxation of V_K produces spiking and bursting;
V_K is the output node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .devices import (Branch, DeviceParams, DeviceState, PiecewiseParams,
                      PiecewiseState, ThermalIMTParams, ThermalIMTState,
                      initial_state, thermal_memristance, thermal_state_derivative)


class IntegrationError(RuntimeError):
    """Integration failed; t_fail is the last time reached."""

    def __init__(self, msg, t_fail):
        super().__init__(f"{msg} (t = {t_fail:.6e} s)")
        self.t_fail = t_fail


@dataclass(frozen=True)
class NeuronParams:
    """Circuit constants (SI units) with the stock parameter set as defaults."""
    c1: float = 5e-9               # F
    c2: float = 0.5e-9             # F
    r_in: float = 6e3              # ohm
    r2: float = 6e3                # ohm
    v1: float = -1.4               # V
    v2: float = 1.4                # V
    v_in: float = 0.4              # V (DC)
    device1: DeviceParams = field(default_factory=ThermalIMTParams)
    device2: DeviceParams = field(default_factory=ThermalIMTParams)

    def __post_init__(self):
        for name in ("c1", "c2", "r_in", "r2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")

    def with_(self, **kw) -> "NeuronParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class NeuronState:
    v_na: float = 0.0
    v_k: float = 0.0
    x1: DeviceState | None = None
    x2: DeviceState | None = None

    def resolved(self, p: NeuronParams) -> "NeuronState":
        """Fill missing device states with the cold-start defaults."""
        x1 = self.x1 if self.x1 is not None else initial_state(p.device1)
        x2 = self.x2 if self.x2 is not None else initial_state(p.device2)
        return NeuronState(self.v_na, self.v_k, x1, x2)


@dataclass(frozen=True)
class IntegratorControl:
    """Error-control settings for the adaptive stepper.

    rtol_u weights the device state more loosely than the node voltages: u
    enters the circuit only through R(u), so micro-tracking the metallic
    branch buys nothing while costing ~10x in steps.  method "auto" picks the
    semi-implicit Rosenbrock for thermal devices and explicit RK23 for pure
    piecewise circuits."""
    rtol: float = 1e-6
    rtol_u: float = 3e-4
    atol_v: float = 1e-9
    atol_u: float = 1e-6
    max_step: float = 1e-6
    min_step: float = 1e-15
    trace_dt: float = 1e-8
    method: str = "auto"

    def resolve_method(self, devices) -> int:
        if self.method == "rosenbrock":
            return _kernels.ROSENBROCK
        if self.method == "rk23":
            return _kernels.RK23
        if self.method == "auto":
            thermal = any(isinstance(d, ThermalIMTParams) for d in devices)
            return _kernels.ROSENBROCK if thermal else _kernels.RK23
        raise ValueError(f"unknown method {self.method!r}")


@dataclass
class Trace:
    """Uniformly resampled simulation output for one neuron."""
    dt: float
    t0: float
    v_na: np.ndarray
    v_k: np.ndarray
    r_x1: np.ndarray
    r_x2: np.ndarray
    u1: np.ndarray                 # NaN for piecewise devices
    u2: np.ndarray
    params: NeuronParams | None = None
    n_steps: int = 0

    def __post_init__(self):
        if len(self.v_k) < 2:
            raise ValueError("trace must hold at least 2 samples")

    def __len__(self):
        return len(self.v_k)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.v_k))

    @property
    def duration(self) -> float:
        return self.dt * (len(self.v_k) - 1)


def device_resistance(p: DeviceParams, s: DeviceState) -> float:
    if isinstance(p, PiecewiseParams):
        return p.r_on if s.branch is Branch.METALLIC else p.r_off
    return thermal_memristance(s.u, p)


def neuron_derivatives(s: NeuronState, p: NeuronParams, t: float = 0.0):
    """(dV_Na/dt, dV_K/dt, dx1/dt, dx2/dt) at the given state.

    Device resistances are evaluated from the current device states; thermal
    devices also return their du/dt (piecewise devices return 0)."""
    s = s.resolved(p)
    r1 = device_resistance(p.device1, s.x1)
    r2x = device_resistance(p.device2, s.x2)
    vd1 = s.v_na - p.v1
    vd2 = p.v2 - s.v_k
    dvna = ((p.v_in - s.v_na) / p.r_in + (s.v_k - s.v_na) / p.r2 - vd1 / r1) / p.c1
    dvk = ((s.v_na - s.v_k) / p.r2 - (s.v_k - p.v2) / r2x) / p.c2
    du1 = (thermal_state_derivative(s.x1.u, vd1 / r1, p.device1)
           if isinstance(p.device1, ThermalIMTParams) else 0.0)
    du2 = (thermal_state_derivative(s.x2.u, vd2 / r2x, p.device2)
           if isinstance(p.device2, ThermalIMTParams) else 0.0)
    return dvna, dvk, du1, du2


def fixed_point(p: NeuronParams, r_x1: float, r_x2: float):
    """Rest point (v_na, v_k) of the linear circuit with frozen resistances."""
    if r_x1 <= 0.0 or r_x2 <= 0.0:
        raise ValueError("resistances must be positive")
    # a11 v_na + a12 v_k = b1 ; a21 v_na + a22 v_k = b2
    a11 = 1.0 / p.r_in + 1.0 / p.r2 + 1.0 / r_x1
    a12 = -1.0 / p.r2
    b1 = p.v_in / p.r_in + p.v1 / r_x1
    a21 = -1.0 / p.r2
    a22 = 1.0 / p.r2 + 1.0 / r_x2
    b2 = p.v2 / r_x2
    det = a11 * a22 - a12 * a21
    if det == 0.0 or not math.isfinite(det):
        raise ValueError("singular resistance network")
    v_na = (b1 * a22 - b2 * a12) / det
    v_k = (a11 * b2 - a21 * b1) / det
    return v_na, v_k


def _pack_device(p: DeviceParams, s: DeviceState, th: np.ndarray, pw: np.ndarray,
                 dev_type: np.ndarray, branch: np.ndarray, d: int):
    if isinstance(p, ThermalIMTParams):
        dev_type[d] = _kernels.THERMAL
        th[d, :] = p.kernel_row()
        return s.u
    dev_type[d] = _kernels.PIECEWISE
    pw[d, _kernels.PW_RON] = p.r_on
    pw[d, _kernels.PW_ROFF] = p.r_off
    pw[d, _kernels.PW_VTH] = p.v_th
    pw[d, _kernels.PW_VH] = p.v_h
    branch[d] = 1 if s.branch is Branch.METALLIC else 0
    return 0.0


def simulate_network(neurons, src_v, src_r, r_couple, t_end,
                     ctl: IntegratorControl | None = None,
                     states=None, i_bias: float = 0.0):
    """Integrate a chain of neurons; returns one Trace per neuron.

    neurons: list of NeuronParams (neuron 0 receives the source branches and
    i_bias; neuron n>0 couples to the upstream V_K through r_couple[n]).
    src_v/src_r: parallel input branches into neuron 0 (may be empty when
    driving with i_bias alone)."""
    if ctl is None:
        ctl = IntegratorControl()
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    n_neu = len(neurons)
    if states is None:
        states = [NeuronState().resolved(p) for p in neurons]
    else:
        states = [s.resolved(p) for s, p in zip(states, neurons)]

    y0 = np.zeros(4 * n_neu)
    c1 = np.empty(n_neu)
    c2 = np.empty(n_neu)
    r2 = np.empty(n_neu)
    v1 = np.empty(n_neu)
    v2 = np.empty(n_neu)
    dev_type = np.zeros(2 * n_neu, dtype=np.int64)
    branch = np.zeros(2 * n_neu, dtype=np.int64)
    th = np.zeros((2 * n_neu, 9))
    pw = np.zeros((2 * n_neu, 4))
    devices = []
    for n, (p, s) in enumerate(zip(neurons, states)):
        if not all(math.isfinite(x) for x in (s.v_na, s.v_k)):
            raise ValueError("non-finite initial state")
        y0[4 * n] = s.v_na
        y0[4 * n + 1] = s.v_k
        c1[n], c2[n], r2[n], v1[n], v2[n] = p.c1, p.c2, p.r2, p.v1, p.v2
        y0[4 * n + 2] = _pack_device(p.device1, s.x1, th, pw, dev_type, branch, 2 * n)
        y0[4 * n + 3] = _pack_device(p.device2, s.x2, th, pw, dev_type, branch, 2 * n + 1)
        devices.extend([p.device1, p.device2])

    method = ctl.resolve_method(devices)
    out, _, status, t_reached, n_steps = _kernels.simulate_chain(
        y0, n_neu, c1, c2, r2, v1, v2,
        np.asarray(src_v, dtype=float), np.asarray(src_r, dtype=float),
        float(i_bias), np.asarray(r_couple, dtype=float),
        dev_type, branch, th, pw,
        float(t_end), ctl.rtol, ctl.rtol_u, ctl.atol_v, ctl.atol_u,
        ctl.max_step, ctl.min_step, ctl.trace_dt, method)
    if status == _kernels.STATUS_STEP_UNDERFLOW:
        raise IntegrationError("step-size underflow", t_reached)
    if status == _kernels.STATUS_NONFINITE:
        raise IntegrationError("non-finite state", t_reached)

    traces = []
    for n, p in enumerate(neurons):
        piece1 = isinstance(p.device1, PiecewiseParams)
        piece2 = isinstance(p.device2, PiecewiseParams)
        traces.append(Trace(
            dt=ctl.trace_dt, t0=0.0,
            v_na=out[:, 6 * n + 0].copy(), v_k=out[:, 6 * n + 1].copy(),
            r_x1=out[:, 6 * n + 4].copy(), r_x2=out[:, 6 * n + 5].copy(),
            u1=np.full(out.shape[0], np.nan) if piece1 else out[:, 6 * n + 2].copy(),
            u2=np.full(out.shape[0], np.nan) if piece2 else out[:, 6 * n + 3].copy(),
            params=p, n_steps=n_steps))
    return traces


def integrate(p: NeuronParams, s0: NeuronState | None = None,
              t_end: float = 2e-3, ctl: IntegratorControl | None = None) -> Trace:
    """Simulate a single neuron from s0 (cold start by default)."""
    state = s0 if s0 is not None else NeuronState()
    (trace,) = simulate_network([p], [p.v_in], [p.r_in], [0.0], t_end,
                                ctl=ctl, states=[state])
    return trace


def warmup_kernels():
    """Trigger JIT compilation of the integration kernels (cached on disk)."""
    integrate(NeuronParams(), t_end=2e-7,
              ctl=IntegratorControl(trace_dt=1e-7))
    pw = PiecewiseParams()
    integrate(NeuronParams(device1=pw, device2=pw), t_end=2e-7,
              ctl=IntegratorControl(trace_dt=1e-7))
