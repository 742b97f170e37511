"""Lumped NbO2 memristor models.

Two models of the threshold switch are provided:

* ``PiecewiseParams`` - hard switching between two preset resistances:
  R_off while insulating, R_on while metallic, switching to metallic at
  v >= v_th and back at v <= v_h (hysteretic, path-dependent in between).

* ``ThermalIMTParams`` - a continuous insulator-metal-transition model with a
  single state variable u = r_met / r_ch, the radius fraction of a metallic
  core inside a cylindrical conduction channel.  Core and shell conduct in
  parallel, so

      R(u) = (L / pi r_ch^2) / (u^2/rho_met + (1 - u^2)/rho_ins)

  Joule heating moves the phase boundary against the latent heat of the
  transition, with heat escaping radially through the insulating shell:

      du/dt = [ i^2 R(u) - Gamma(u) (T_IMT - T_amb) ] / ( dh_tx 2 pi r_ch^2 L u )
      Gamma(u) = 2 pi L kappa / ln(1/u)

  u is confined to [u_min, u_max]; the derivative is held at zero on a wall
  whenever it points outward.  With the stock parameter set this model
  reproduces the measured switching anchors (V_th, R_th, V_h, R_h) to within
  about 1.5 percent.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels


class DeviceModelError(ValueError):
    """Invalid device parameters or out-of-domain state."""


class Branch(enum.Enum):
    INSULATING = "insulating"
    METALLIC = "metallic"


@dataclass(frozen=True)
class PiecewiseParams:
    """Hard-switching threshold device (resistances in ohm, voltages in V)."""
    r_on: float = 850.0
    r_off: float = 49e3
    v_th: float = 1.448
    v_h: float = 0.746

    def __post_init__(self):
        if not (self.r_on < self.r_off):
            raise DeviceModelError(f"require r_on < r_off, got {self.r_on} >= {self.r_off}")
        if not (0.0 < self.v_h < self.v_th):
            raise DeviceModelError(f"require 0 < v_h < v_th, got v_h={self.v_h}, v_th={self.v_th}")


@dataclass(frozen=True)
class PiecewiseState:
    branch: Branch = Branch.INSULATING


def piecewise_eval(state: PiecewiseState, v: float, p: PiecewiseParams):
    """Resistance at applied voltage v plus the successor state.

    Switching is inclusive at the thresholds: v >= v_th turns metallic,
    v <= v_h returns insulating; in between the branch is held.  The returned
    resistance is that of the successor branch (the switch acts at v)."""
    if state.branch is Branch.INSULATING and v >= p.v_th:
        state = PiecewiseState(Branch.METALLIC)
    elif state.branch is Branch.METALLIC and v <= p.v_h:
        state = PiecewiseState(Branch.INSULATING)
    r = p.r_on if state.branch is Branch.METALLIC else p.r_off
    return r, state


@dataclass(frozen=True)
class ThermalIMTParams:
    """Radial core-shell IMT device (SI units; stock values from NbO2)."""
    t_imt: float = 1080.0          # K
    t_amb: float = 296.0           # K
    kappa: float = 1.5             # W / (m K)
    c_v: float = 2.6e6             # J / (m^3 K)
    rho_met: float = 1e-4          # ohm m
    rho_ins: float = 7e-3          # ohm m
    r_ch: float = 30e-9            # m
    l_ch: float = 20e-9            # m
    dh_tx: float = 1.6e8           # J / m^3
    u_min: float = 0.01
    u_max: float = 0.9999

    def __post_init__(self):
        if not (self.rho_met < self.rho_ins):
            raise DeviceModelError("require rho_met < rho_ins")
        if not (self.t_amb < self.t_imt):
            raise DeviceModelError("require t_amb < t_imt")
        if not (0.0 < self.u_min < self.u_max < 1.0):
            raise DeviceModelError("require 0 < u_min < u_max < 1")

    @property
    def geo(self) -> float:
        """L / (pi r_ch^2), the resistivity-to-resistance geometry factor."""
        return self.l_ch / (math.pi * self.r_ch**2)

    @property
    def r_insulating_limit(self) -> float:
        """R(u -> 0) = L rho_ins / (pi r_ch^2)."""
        return self.geo * self.rho_ins

    @property
    def r_metallic_limit(self) -> float:
        """R(u = 1) = L rho_met / (pi r_ch^2)."""
        return self.geo * self.rho_met

    @property
    def latent_denominator(self) -> float:
        """dh_tx 2 pi r_ch^2 L: latent heat per unit (u du)."""
        return self.dh_tx * 2.0 * math.pi * self.r_ch**2 * self.l_ch

    def thermal_time_constant(self, u: float = 0.1) -> float:
        """c_v volume / Gamma(u): sets the quasi-static ramp rate scale."""
        vol = math.pi * self.r_ch**2 * self.l_ch
        return self.c_v * vol / thermal_conductance(u, self)

    def kernel_row(self) -> np.ndarray:
        row = np.empty(9)
        row[_kernels.TH_A] = 1.0 / self.rho_met
        row[_kernels.TH_B] = 1.0 / self.rho_ins
        row[_kernels.TH_GEO] = self.geo
        row[_kernels.TH_G0] = 2.0 * math.pi * self.l_ch * self.kappa
        row[_kernels.TH_DT] = self.t_imt - self.t_amb
        row[_kernels.TH_DEN] = self.latent_denominator
        row[_kernels.TH_UMIN] = self.u_min
        row[_kernels.TH_UMAX] = self.u_max
        row[_kernels.TH_LNF] = math.log(1.0 / self.u_max)
        return row


@dataclass(frozen=True)
class ThermalIMTState:
    u: float = 0.01


DeviceParams = PiecewiseParams | ThermalIMTParams
DeviceState = PiecewiseState | ThermalIMTState


def thermal_memristance(u, p: ThermalIMTParams):
    """Static resistance of the core-shell channel; strictly decreasing in u."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < p.u_min) or np.any(u_arr > p.u_max):
        raise DeviceModelError(f"u outside [{p.u_min}, {p.u_max}]")
    r = p.geo / (u_arr**2 / p.rho_met + (1.0 - u_arr**2) / p.rho_ins)
    return float(r) if u_arr.ndim == 0 else r


def thermal_conductance(u, p: ThermalIMTParams):
    """Radial heat conductance Gamma(u), ln(1/u) floored at ln(1/u_max)."""
    u_arr = np.asarray(u, dtype=float)
    ln = np.maximum(np.log(1.0 / u_arr), math.log(1.0 / p.u_max))
    g = 2.0 * math.pi * p.l_ch * p.kappa / ln
    return float(g) if u_arr.ndim == 0 else g


def thermal_state_derivative(u: float, i: float, p: ThermalIMTParams) -> float:
    """du/dt from the latent-heat power balance, clamped at the walls.

    Joule heating i^2 R(u) grows the metallic core; conduction loss
    Gamma(u) (T_IMT - T_amb) shrinks it."""
    if not (p.u_min <= u <= p.u_max):
        raise DeviceModelError(f"u={u} outside [{p.u_min}, {p.u_max}]")
    if not math.isfinite(i):
        raise DeviceModelError("current must be finite")
    r = thermal_memristance(u, p)
    gam = thermal_conductance(u, p)
    du = (i * i * r - gam * (p.t_imt - p.t_amb)) / (p.latent_denominator * u)
    if (u <= p.u_min and du < 0.0) or (u >= p.u_max and du > 0.0):
        return 0.0
    return du


def initial_state(p: DeviceParams) -> DeviceState:
    """Cold-start state: insulating branch / u at the lower wall."""
    if isinstance(p, PiecewiseParams):
        return PiecewiseState(Branch.INSULATING)
    return ThermalIMTState(u=p.u_min)


# --------------------------------------------------------------------------
# quasi-static I-V sweep
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RampSpec:
    """Triangular source ramp 0 -> peak -> 0.

    drive="current" ramps an ideal current source (peak in A) and traces the
    full S-curve including the NDR branch; drive="voltage" ramps an ideal
    voltage source (peak in V), which jumps across the NDR at the folds.
    The duration must stay quasi-static: >= ~1e4 device thermal time
    constants per leg for rate-independent anchors."""
    peak: float = 2.0
    t_ramp: float = 50e-6
    drive: str = "voltage"
    n_samples: int = 20001

    def __post_init__(self):
        if self.drive not in ("voltage", "current"):
            raise DeviceModelError(f"unknown drive {self.drive!r}")
        if self.t_ramp <= 0 or self.n_samples < 10:
            raise DeviceModelError("degenerate ramp spec")


def default_ramp(p: DeviceParams) -> RampSpec:
    if isinstance(p, PiecewiseParams):
        return RampSpec(peak=2.0, drive="voltage")
    # 2.5 mA reaches ~2 V on the metallic branch of the stock device
    return RampSpec(peak=2.5e-3, t_ramp=50e-6, drive="current")


@dataclass
class IVCurve:
    v: np.ndarray                 # volts
    i: np.ndarray                 # amps
    state: np.ndarray             # u for thermal, 0/1 branch for piecewise
    sweep_dir: np.ndarray         # +1 ascending leg, -1 descending leg
    v_th: float | None = None
    r_th: float | None = None
    v_h: float | None = None
    r_h: float | None = None
    switched: bool = True

    @property
    def anchors(self):
        return self.v_th, self.r_th, self.v_h, self.r_h


class QuasiStaticError(RuntimeError):
    """The quasi-static solve failed; carries the last reached state."""

    def __init__(self, msg, last_state=None):
        super().__init__(msg)
        self.last_state = last_state


def quasistatic_iv_sweep(p: DeviceParams, ramp: RampSpec | None = None,
                         rtol: float = 1e-7) -> IVCurve:
    """Sweep the bare device with a slow triangular ramp and extract anchors.

    Anchors: v_th and r_th at the turning point ending the insulating ascent,
    v_h and r_h at the minimal voltage on the metallic descent."""
    if ramp is None:
        ramp = default_ramp(p)
    if isinstance(p, PiecewiseParams):
        return _piecewise_sweep(p, ramp)
    return _thermal_sweep(p, ramp, rtol)


def _piecewise_sweep(p: PiecewiseParams, ramp: RampSpec) -> IVCurve:
    if ramp.drive != "voltage":
        raise DeviceModelError("piecewise sweep requires a voltage ramp "
                               "(hard switching is ill-posed under current drive)")
    n = ramp.n_samples
    half = n // 2
    v_up = np.linspace(0.0, ramp.peak, half, endpoint=False)
    v_dn = np.linspace(ramp.peak, 0.0, n - half)
    v = np.concatenate([v_up, v_dn])
    sweep_dir = np.concatenate([np.ones(half), -np.ones(n - half)])
    r = np.empty(n)
    state = np.empty(n)
    st = PiecewiseState(Branch.INSULATING)
    for k in range(n):
        rk, st = piecewise_eval(st, v[k], p)
        r[k] = rk
        state[k] = 1.0 if st.branch is Branch.METALLIC else 0.0
    i = v / r
    curve = IVCurve(v=v, i=i, state=state, sweep_dir=sweep_dir)
    if ramp.peak < p.v_th:
        curve.switched = False
        return curve
    # hard switching: the anchors are the thresholds themselves, with the
    # resistance of the branch being left (R_off at threshold, R_on at hold)
    curve.v_th = p.v_th
    curve.r_th = p.r_off
    curve.v_h = p.v_h
    curve.r_h = p.r_on
    return curve


def _thermal_sweep(p: ThermalIMTParams, ramp: RampSpec, rtol: float) -> IVCurve:
    th = p.kernel_row().reshape(1, 9)
    v, i, u, status = _kernels.iv_ramp_thermal(
        th, ramp.peak, ramp.t_ramp, ramp.drive == "current",
        rtol, 1e-12, 1.0 / 500.0, ramp.n_samples)
    if status != _kernels.STATUS_OK:
        raise QuasiStaticError(
            f"quasi-static solve failed with status {status} after {len(u)} samples",
            last_state=(u[-1] if len(u) else None))
    n = len(v)
    half = ramp.n_samples // 2
    sweep_dir = np.where(np.arange(n) < half, 1.0, -1.0)
    curve = IVCurve(v=v, i=i, state=u, sweep_dir=sweep_dir)
    if np.all(u <= p.u_min + 1e-12):
        curve.switched = False
        return curve
    if ramp.drive == "current":
        _anchors_from_turning_points(curve, half)
    else:
        _anchors_from_jumps(curve, half)
    if curve.v_th is None or curve.v_h is None:
        curve.switched = False
    return curve


def _anchors_from_turning_points(curve: IVCurve, half: int):
    """Current-driven sweep: v has a local max at threshold on the ascent and a
    local min at hold on the descent; no jump-delay error at the folds."""
    v = curve.v
    i = curve.i
    for k in range(1, half - 1):
        if v[k] > 0.5 and v[k] >= v[k - 1] and v[k] > v[k + 1]:
            curve.v_th = float(v[k])
            curve.r_th = float(v[k] / i[k])
            break
    dn_v = v[half:]
    dn_i = i[half:]
    for k in range(1, len(dn_v) - 1):
        if 0.05 < dn_v[k] < 1.2 and dn_v[k] <= dn_v[k - 1] and dn_v[k] < dn_v[k + 1]:
            curve.v_h = float(dn_v[k])
            curve.r_h = float(dn_v[k] / dn_i[k])
            break


def _anchors_from_jumps(curve: IVCurve, half: int):
    """Voltage-driven sweep: the largest inter-sample resistance jump marks the
    switch; the anchor is the last sample on the departing branch."""
    v = curve.v
    with np.errstate(divide="ignore"):
        r = np.where(curve.i > 0.0, v / np.where(curve.i == 0.0, 1.0, curve.i), np.inf)
    mask = v > 0.1
    up_r = r[:half]
    ok = mask[:half]
    ratios = np.where(ok[:-1] & ok[1:], up_r[:-1] / up_r[1:], 0.0)
    k = int(np.argmax(ratios))
    if ratios[k] > 3.0:
        curve.v_th = float(v[k])
        curve.r_th = float(up_r[k])
    dn_r = r[half:]
    dn_v = v[half:]
    ok = mask[half:]
    ratios = np.where(ok[1:] & ok[:-1], dn_r[1:] / dn_r[:-1], 0.0)
    k = int(np.argmax(ratios))
    if ratios[k] > 3.0:
        curve.v_h = float(dn_v[k])
        curve.r_h = float(dn_r[k])
