"""Closed-form operating-window boundaries in the R_in - V_in plane.

Each boundary is the locus where the circuit balances at a critical device
state, obtained by substituting that state into the node equations with zero
derivatives:

* A_PRIME - lower firing edge. X1 metallic (R_on), X2 at its switching point:
  V2 - V_K = V_th with R_X2 = R_th.  Below the line the circuit rests in a
  stuck state; above it X2 can fire.
* B_PRIME - continuous/bursting divide. X1 at its hold point
  (V_Na - V1 = V_h, R_X1 = R_h) while X2 sits at threshold: below the line X1
  never releases (uninterrupted spiking), above it the slow channel cycles.
* C_PRIME - upper firing edge. X1 at its switching point
  (V_Na - V1 = V_th, R_X1 = R_th) with X2 insulating (R_off): above the line
  the input divider is too weak to ever reach threshold.

The unprimed A and B lines are the same balances with the hard-switching
resistances (R_on / R_off) in place of the critical ones.

All three lines are straight: R_in = slope * (V_in - v_zero), with

  A': slope m = R_X1 R_X2 / [R_X2 (V2 - V1 - V_th) - V_th (R2 + R_X1)],
      v_zero = V2 - V_th (R_X2 + R2) / R_X2
  B': slope n = R_X1 R2 / [R2 V_h - R_X1 (V2 - V_th - V_h - V1)],
      v_zero = V1 + V_h
  C': slope q = R_X1 (R2 + R_X2) / [V_th (R2 + R_X2) - R_X1 (V2 - V_th - V1)],
      v_zero = V1 + V_th

The v_zero expressions follow from the critical-balance derivation (the rest
node voltage appears with a minus sign); they are fixed by the requirement
that the line satisfies the zero-derivative node equations identically, which
boundary_residual checks and the test suite asserts to 1e-9.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class BoundaryError(ValueError):
    """Degenerate boundary (zero or sign-flipped denominator)."""


class BoundaryLabel(enum.Enum):
    A = "A"
    B = "B"
    A_PRIME = "A'"
    B_PRIME = "B'"
    C_PRIME = "C'"


@dataclass(frozen=True)
class CircuitAnchors:
    """Resistance/voltage anchors entering the boundary formulas.

    Defaults are the stock calibration; r_th/r_h may be replaced by the
    anchors extracted from a quasi-static sweep of the device model."""
    r_on: float = 850.0
    r_off: float = 49e3
    r_th: float = 41e3
    r_h: float = 1.98e3
    v_th: float = 1.448
    v_h: float = 0.746
    r2: float = 6e3
    v1: float = -1.4
    v2: float = 1.4


@dataclass(frozen=True)
class BoundaryLine:
    label: BoundaryLabel
    slope: float                   # ohm / V
    v_zero: float                  # V_in at which R_in = 0
    note: str = ""

    def r_in(self, v_in):
        """R_in on the line at the given V_in (array-friendly)."""
        return self.slope * (np.asarray(v_in, dtype=float) - self.v_zero)

    def to_json_dict(self, v_grid=None) -> dict:
        d = {
            "label": self.label.value,
            "slope_ohm_per_volt": self.slope,
            "v_intercept_volts": self.v_zero,
        }
        if v_grid is not None:
            v = np.asarray(v_grid, dtype=float)
            d["samples"] = [[float(vv), float(rr)] for vv, rr in zip(v, self.r_in(v))]
        return d


def _guard(den: float, what: str) -> float:
    if den <= 0.0 or not np.isfinite(den):
        raise BoundaryError(f"degenerate boundary: {what} denominator = {den:.4g}")
    return den


def boundary_a_prime(a: CircuitAnchors) -> BoundaryLine:
    """Lower firing edge with the critical resistances (R_on, R_th)."""
    return _line_a(a, a.r_on, a.r_th, BoundaryLabel.A_PRIME)


def boundary_b_prime(a: CircuitAnchors) -> BoundaryLine:
    """Continuous/bursting divide with the critical hold resistance R_h."""
    return _line_b(a, a.r_h, BoundaryLabel.B_PRIME)


def boundary_c_prime(a: CircuitAnchors) -> BoundaryLine:
    """Upper firing edge with X1 critical (R_th) and X2 insulating (R_off)."""
    return _line_c(a, a.r_th, a.r_off, BoundaryLabel.C_PRIME)


def boundary_unprimed(a: CircuitAnchors, which: str) -> BoundaryLine:
    """Hard-switching boundaries: A uses (R_on, R_off), B uses R_on."""
    if which.upper() == "A":
        return _line_a(a, a.r_on, a.r_off, BoundaryLabel.A)
    if which.upper() == "B":
        return _line_b(a, a.r_on, BoundaryLabel.B)
    raise ValueError(f"unknown unprimed boundary {which!r}")


def all_boundaries(a: CircuitAnchors) -> list[BoundaryLine]:
    return [boundary_a_prime(a), boundary_b_prime(a), boundary_c_prime(a),
            boundary_unprimed(a, "A"), boundary_unprimed(a, "B")]


def _line_a(a: CircuitAnchors, r_x1: float, r_x2: float, label) -> BoundaryLine:
    den = _guard(r_x2 * (a.v2 - a.v1 - a.v_th) - a.v_th * (a.r2 + r_x1),
                 label.value)
    m = r_x1 * r_x2 / den
    v_zero = a.v2 - a.v_th * (r_x2 + a.r2) / r_x2
    return BoundaryLine(label, m, v_zero,
                        note=f"R_X1={r_x1:.4g}, R_X2={r_x2:.4g}")


def _line_b(a: CircuitAnchors, r_x1: float, label) -> BoundaryLine:
    den = _guard(a.r2 * a.v_h - r_x1 * (a.v2 - a.v_th - a.v_h - a.v1),
                 label.value)
    n = r_x1 * a.r2 / den
    return BoundaryLine(label, n, a.v1 + a.v_h, note=f"R_X1={r_x1:.4g}")


def _line_c(a: CircuitAnchors, r_x1: float, r_x2: float, label) -> BoundaryLine:
    den = _guard(a.v_th * (a.r2 + r_x2) - r_x1 * (a.v2 - a.v_th - a.v1),
                 label.value)
    q = r_x1 * (a.r2 + r_x2) / den
    return BoundaryLine(label, q, a.v1 + a.v_th,
                        note=f"R_X1={r_x1:.4g}, R_X2={r_x2:.4g}")


def boundary_residual(line: BoundaryLine, a: CircuitAnchors, v_in: float):
    """KCL residuals (A) pinned to zero by the line's critical balance.

    Returns the list of node-equation residuals the derivation sets to zero:
    both equations for A/A' and C' (stable rest at the critical state), the
    V_Na equation alone for B/B' (both device voltages pinned, only
    dV_Na/dt = 0 holds at the release point).  Each entry vanishes
    identically for (V_in, R_in) on the line."""
    r_in = float(line.r_in(v_in))
    if line.label in (BoundaryLabel.A, BoundaryLabel.A_PRIME):
        r_x1 = a.r_on
        r_x2 = a.r_th if line.label is BoundaryLabel.A_PRIME else a.r_off
        v_k = a.v2 - a.v_th
        v_na = v_k - a.r2 * a.v_th / r_x2          # from dV_K/dt = 0
        both = True
    elif line.label in (BoundaryLabel.B, BoundaryLabel.B_PRIME):
        r_x1 = a.r_h if line.label is BoundaryLabel.B_PRIME else a.r_on
        r_x2 = a.r_th
        v_na = a.v1 + a.v_h
        v_k = a.v2 - a.v_th
        both = False
    else:
        r_x1 = a.r_th
        r_x2 = a.r_off
        v_na = a.v1 + a.v_th
        v_k = (r_x2 * v_na + a.r2 * a.v2) / (a.r2 + r_x2)   # dV_K/dt = 0
        both = True
    res1 = ((v_in - v_na) / r_in + (v_k - v_na) / a.r2 - (v_na - a.v1) / r_x1)
    if not both:
        return [res1]
    res2 = (v_na - v_k) / a.r2 - (v_k - a.v2) / r_x2
    return [res1, res2]


# --------------------------------------------------------------------------
# comparison against a simulated phase diagram
# --------------------------------------------------------------------------

@dataclass
class BoundaryDeviation:
    label: BoundaryLabel
    v_in: np.ndarray               # columns where both line and transition exist
    r_line: np.ndarray
    r_sim: np.ndarray              # transition located between classified cells
    cell: float                    # R_in grid spacing

    @property
    def abs_dev(self):
        return np.abs(self.r_sim - self.r_line)

    @property
    def rel_dev(self):
        return self.abs_dev / np.maximum(np.abs(self.r_line), self.cell)

    def max_rel(self):
        return float(self.rel_dev.max()) if len(self.v_in) else float("nan")

    def mean_rel(self):
        return float(self.rel_dev.mean()) if len(self.v_in) else float("nan")


def _transition_r(r_grid, firing, kind):
    """Transition R_in within one column; midpoint of the bracketing cells."""
    if kind == "onset":          # quiescent -> firing, scanning R upward
        for k in range(len(firing) - 1):
            if not firing[k] and firing[k + 1]:
                return 0.5 * (r_grid[k] + r_grid[k + 1])
    elif kind == "offset":       # firing -> quiescent at the top
        for k in range(len(firing) - 1, 0, -1):
            if firing[k - 1] and not firing[k]:
                return 0.5 * (r_grid[k - 1] + r_grid[k])
    return None


def compare_boundaries(diagram, lines) -> list[BoundaryDeviation]:
    """Per-column regime-transition positions vs the analytic lines.

    diagram: a sweeps.PhaseDiagram over (V_in, R_in).  For each boundary the
    matching transition is searched in every V_in column: A' at the low-R
    quiescent->firing edge, B' at the continuous->bursting edge, C' at the
    high-R firing->quiescent edge.  Columns where either the line or the
    transition falls outside the scanned window are reported as absent."""
    from .spikes import Regime

    v_grid = diagram.v_in
    r_grid = diagram.r_in
    cell = float(r_grid[1] - r_grid[0]) if len(r_grid) > 1 else 0.0
    out = []
    for line in lines:
        vs, rl, rs = [], [], []
        for j, v in enumerate(v_grid):
            col = diagram.regimes[:, j]
            firing = np.isin(col, [Regime.CONTINUOUS.value, Regime.BURSTING.value])
            r_pred = float(line.r_in(v))
            if not (r_grid[0] <= r_pred <= r_grid[-1]):
                continue
            if line.label in (BoundaryLabel.A, BoundaryLabel.A_PRIME):
                r_t = _transition_r(r_grid, firing, "onset")
            elif line.label in (BoundaryLabel.B, BoundaryLabel.B_PRIME):
                bursting = col == Regime.BURSTING.value
                cont = col == Regime.CONTINUOUS.value
                r_t = None
                for k in range(len(col) - 1):
                    if cont[k] and bursting[k + 1]:
                        r_t = 0.5 * (r_grid[k] + r_grid[k + 1])
                        break
            else:
                r_t = _transition_r(r_grid, firing, "offset")
            if r_t is None:
                continue
            vs.append(float(v))
            rl.append(r_pred)
            rs.append(r_t)
        out.append(BoundaryDeviation(line.label, np.array(vs), np.array(rl),
                                     np.array(rs), cell))
    return out
