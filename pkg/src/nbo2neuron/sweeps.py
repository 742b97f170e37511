"""Parameter sweeps: phase diagrams, capacitance studies, activation curves.

Cells are independent simulations mapped over a thread pool (the integration
kernels release the GIL); results are keyed by grid index so the output is
identical for any worker count.  Each cell runs an adaptive-duration ladder:
start from a duration scaled to the slow R_in C1 time constant and double it
(up to a cap) whenever the classifier reports too few complete bursts for a
verdict, then mark the cell unresolved.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .circuit import IntegrationError, IntegratorControl, NeuronParams, integrate
from .spikes import BurstProfile, DetectorConfig, NeedsLongerTrace, Regime, classify


@dataclass(frozen=True)
class SweepControl:
    """Per-cell simulation policy for sweeps."""
    base_duration: float = 1.2e-3      # s, floor for the initial trace length
    duration_per_tau: float = 6.0      # initial duration = this * R_in * C1
    max_doublings: int = 3             # duration ladder cap (8x)
    trace_dt: float = 2e-8             # s, sweep traces are sampled coarser
    threads: int | None = None         # None = os.cpu_count()

    def initial_duration(self, p: NeuronParams) -> float:
        return max(self.base_duration, self.duration_per_tau * p.r_in * p.c1)


def _cell_control(sweep: SweepControl, ctl: IntegratorControl | None) -> IntegratorControl:
    base = ctl if ctl is not None else IntegratorControl()
    if base.trace_dt != sweep.trace_dt:
        from dataclasses import replace
        base = replace(base, trace_dt=sweep.trace_dt)
    return base


def classify_point(p: NeuronParams, sweep: SweepControl | None = None,
                   cfg: DetectorConfig | None = None,
                   ctl: IntegratorControl | None = None,
                   i_bias: float | None = None):
    """Simulate one operating point to a steady verdict.

    Returns (BurstProfile, duration_used).  Integrator failures and exhausted
    duration ladders yield an UNRESOLVED profile rather than raising."""
    sweep = sweep or SweepControl()
    cfg = cfg or DetectorConfig()
    ctl = _cell_control(sweep, ctl)
    t_end = sweep.initial_duration(p)
    trace = None
    for _ in range(sweep.max_doublings + 1):
        try:
            if i_bias is None:
                trace = integrate(p, t_end=t_end, ctl=ctl)
            else:
                from .circuit import simulate_network
                (trace,) = simulate_network([p], [], [], [0.0], t_end,
                                            ctl=ctl, i_bias=i_bias)
        except IntegrationError:
            return BurstProfile(Regime.UNRESOLVED, stationary=False), t_end
        try:
            return classify(trace, cfg, strict=True), t_end
        except NeedsLongerTrace:
            t_end *= 2.0
    return classify(trace, cfg, strict=False), t_end / 2.0


@dataclass
class PhaseDiagram:
    """Regime classification over a (V_in, R_in) grid.

    regimes[i, j] is the verdict at r_in[i], v_in[j] (row-major in R_in)."""
    v_in: np.ndarray
    r_in: np.ndarray
    regimes: np.ndarray            # str array, Regime.value
    counts: np.ndarray             # spikes per burst (0 quiescent, 1 continuous)
    duty: np.ndarray
    ibf: np.ndarray                # inter-burst frequency, Hz
    durations: np.ndarray          # s, per-cell simulated span
    params: NeuronParams | None = None

    def bursting_counts(self) -> set[int]:
        mask = self.regimes == Regime.BURSTING.value
        return set(int(c) for c in np.unique(self.counts[mask])) if mask.any() else set()

    def rows(self):
        for i, r in enumerate(self.r_in):
            for j, v in enumerate(self.v_in):
                yield (float(v), float(r), str(self.regimes[i, j]),
                       int(self.counts[i, j]), float(self.duty[i, j]),
                       float(self.ibf[i, j]))


def phase_diagram(p: NeuronParams, v_in_grid, r_in_grid,
                  sweep: SweepControl | None = None,
                  cfg: DetectorConfig | None = None,
                  ctl: IntegratorControl | None = None) -> PhaseDiagram:
    """Classify every (V_in, R_in) grid cell; embarrassingly parallel."""
    sweep = sweep or SweepControl()
    v_grid = np.asarray(v_in_grid, dtype=float)
    r_grid = np.asarray(r_in_grid, dtype=float)
    if np.any(r_grid <= 0.0):
        raise ValueError("R_in grid must be positive")
    shape = (len(r_grid), len(v_grid))
    regimes = np.full(shape, Regime.UNRESOLVED.value, dtype=object)
    counts = np.zeros(shape, dtype=int)
    duty = np.zeros(shape)
    ibf = np.zeros(shape)
    durations = np.zeros(shape)

    def run_cell(idx):
        i, j = idx
        cell = p.with_(r_in=float(r_grid[i]), v_in=float(v_grid[j]))
        prof, t_used = classify_point(cell, sweep, cfg, ctl)
        return i, j, prof, t_used

    cells = [(i, j) for i in range(shape[0]) for j in range(shape[1])]
    with ThreadPoolExecutor(max_workers=sweep.threads) as pool:
        for i, j, prof, t_used in pool.map(run_cell, cells):
            regimes[i, j] = prof.regime.value
            counts[i, j] = prof.spikes_per_burst
            duty[i, j] = prof.duty_cycle
            ibf[i, j] = prof.inter_burst_frequency
            durations[i, j] = t_used
    return PhaseDiagram(v_grid, r_grid, regimes, counts, duty, ibf, durations, p)


def refine_transition(p: NeuronParams, v_in: float, r_lo: float, r_hi: float,
                      upper_side, iters: int = 14,
                      sweep: SweepControl | None = None,
                      cfg: DetectorConfig | None = None) -> float:
    """Bisect R_in at fixed V_in for the regime transition between r_lo, r_hi.

    upper_side(profile) -> bool must hold at r_hi and not at r_lo."""
    sweep = sweep or SweepControl()
    prof_lo, _ = classify_point(p.with_(v_in=v_in, r_in=r_lo), sweep, cfg)
    prof_hi, _ = classify_point(p.with_(v_in=v_in, r_in=r_hi), sweep, cfg)
    if upper_side(prof_lo) or not upper_side(prof_hi):
        raise ValueError(
            f"transition not bracketed: lo={prof_lo.regime.value}({prof_lo.spikes_per_burst}) "
            f"hi={prof_hi.regime.value}({prof_hi.spikes_per_burst})")
    for _ in range(iters):
        r_mid = 0.5 * (r_lo + r_hi)
        prof, _ = classify_point(p.with_(v_in=v_in, r_in=r_mid), sweep, cfg)
        if upper_side(prof):
            r_hi = r_mid
        else:
            r_lo = r_mid
    return 0.5 * (r_lo + r_hi)


def region_connected(diagram: PhaseDiagram, regime: Regime) -> bool:
    """True when all cells of the regime form one 4-connected grid component."""
    mask = diagram.regimes == regime.value
    total = int(mask.sum())
    if total == 0:
        return True
    start = tuple(np.argwhere(mask)[0])
    seen = {start}
    stack = [start]
    while stack:
        i, j = stack.pop()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = i + di, j + dj
            if (0 <= ni < mask.shape[0] and 0 <= nj < mask.shape[1]
                    and mask[ni, nj] and (ni, nj) not in seen):
                seen.add((ni, nj))
                stack.append((ni, nj))
    return len(seen) == total


def capacitance_study(c1_values, c2_values, p: NeuronParams,
                      sweep: SweepControl | None = None,
                      cfg: DetectorConfig | None = None) -> dict:
    """Spikes per burst for each (C1, C2) pair at the fixed (V_in, R_in).

    Returns {(c1, c2): BurstProfile}."""
    sweep = sweep or SweepControl()
    pairs = [(float(a), float(b)) for a in c1_values for b in c2_values]

    def run(pair):
        a, b = pair
        prof, _ = classify_point(p.with_(c1=a, c2=b), sweep, cfg)
        return pair, prof

    out = {}
    with ThreadPoolExecutor(max_workers=sweep.threads) as pool:
        for pair, prof in pool.map(run, pairs):
            out[pair] = prof
    return out


def count_range_vs_c1(c1_values, r_in_values, p: NeuronParams,
                      sweep: SweepControl | None = None,
                      cfg: DetectorConfig | None = None) -> dict:
    """Bursting-count set per C1 with R_in swept at fixed V_in.

    Returns {c1: sorted list of distinct spikes-per-burst over the sweep}."""
    sweep = sweep or SweepControl()
    jobs = [(float(c1), float(r)) for c1 in c1_values for r in r_in_values]

    def run(job):
        c1, r = job
        prof, _ = classify_point(p.with_(c1=c1, r_in=r), sweep, cfg)
        return job, prof

    per_c1: dict = {float(c1): set() for c1 in c1_values}
    with ThreadPoolExecutor(max_workers=sweep.threads) as pool:
        for (c1, _r), prof in pool.map(run, jobs):
            if prof.regime is Regime.BURSTING:
                per_c1[c1].add(int(prof.spikes_per_burst))
    return {c1: sorted(s) for c1, s in per_c1.items()}


# --------------------------------------------------------------------------
# activation function (spike count vs input current amplitude)
# --------------------------------------------------------------------------

@dataclass
class ActivationCurve:
    amplitudes: np.ndarray         # A
    counts: np.ndarray             # spikes per burst (0 below onset)
    m: float                       # largest amplitude with zero spikes
    a: float = float("nan")        # EU fit F(x) = a + b exp(-k x) for x >= m
    b: float = float("nan")
    k: float = float("nan")
    residual_rms: float = float("nan")

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        out = self.a + self.b * np.exp(-self.k * x)
        return np.where(x < self.m, 0.0, out)


def fit_eu(amplitudes, counts):
    """Least-squares fit of the thresholded exponential a + b exp(-k x).

    Fits the firing points only (count > 0); b, k are constrained nonnegative
    so the fitted activation is non-increasing."""
    x = np.asarray(amplitudes, dtype=float)
    y = np.asarray(counts, dtype=float)
    firing = y > 0
    zeros = x[~firing]
    m = float(zeros.max()) if len(zeros) else float(x.min()) - (x[1] - x[0] if len(x) > 1 else 0.0)
    xf = x[firing]
    yf = y[firing]
    if len(xf) < 3:
        raise ValueError("need at least 3 firing points for the EU fit")
    # rescale x to [0, 1] for a well-conditioned exponent, then map back
    x0, x1 = float(xf.min()), float(xf.max())
    span = x1 - x0
    xs = (xf - x0) / span

    def model(xx, a, b, kk):
        return a + b * np.exp(-kk * xx)

    b0 = max(yf[0] - yf[-1], 0.5)
    p0 = (float(yf[-1]), float(b0), 2.0)
    popt, _ = curve_fit(model, xs, yf, p0=p0,
                        bounds=([-np.inf, 0.0, 0.0], [np.inf, np.inf, np.inf]),
                        maxfev=20000)
    a_s, b_s, k_s = popt
    k = k_s / span
    b = b_s * math.exp(k * x0)
    resid = model(xs, *popt) - yf
    return m, float(a_s), float(b), float(k), float(np.sqrt(np.mean(resid**2)))


def activation_curve(amplitudes, p: NeuronParams,
                     sweep: SweepControl | None = None,
                     cfg: DetectorConfig | None = None) -> ActivationCurve:
    """Spike count vs drive amplitude for an ideal current source into V_Na.

    The V_in/R_in input branch is removed; each amplitude is injected as a DC
    current.  Counts are 0 below onset, the burst count when bursting, 1 when
    spiking continuously."""
    sweep = sweep or SweepControl()
    amps = np.asarray(sorted(float(a) for a in amplitudes))
    if len(amps) < 6:
        raise ValueError("need at least 6 amplitude points")

    def run(amp):
        prof, _ = classify_point(p, sweep, cfg, i_bias=float(amp))
        if prof.regime is Regime.BURSTING:
            return prof.spikes_per_burst
        if prof.regime is Regime.CONTINUOUS:
            return 1
        return 0

    with ThreadPoolExecutor(max_workers=sweep.threads) as pool:
        counts = np.array(list(pool.map(run, amps)), dtype=int)
    curve = ActivationCurve(amps, counts, m=float("nan"))
    if not counts.any():
        curve.m = float(amps.max())
        return curve
    try:
        curve.m, curve.a, curve.b, curve.k, curve.residual_rms = fit_eu(amps, counts)
    except ValueError:
        zeros = amps[counts == 0]
        curve.m = float(zeros.max()) if len(zeros) else float(amps.min())
    return curve


def duty_frequency_study(r_in_values, v_in_values, p: NeuronParams,
                         sweep: SweepControl | None = None,
                         cfg: DetectorConfig | None = None) -> dict:
    """Burst metrics across V_in for each preset R_in.

    Returns {r_in: list of (v_in, BurstProfile)} for duty-cycle and
    inter-burst-frequency trend studies."""
    sweep = sweep or SweepControl()
    jobs = [(float(r), float(v)) for r in r_in_values for v in v_in_values]

    def run(job):
        r, v = job
        prof, _ = classify_point(p.with_(r_in=r, v_in=v), sweep, cfg)
        return job, prof

    out: dict = {float(r): [] for r in r_in_values}
    with ThreadPoolExecutor(max_workers=sweep.threads) as pool:
        for (r, v), prof in pool.map(run, jobs):
            out[r].append((v, prof))
    for r in out:
        out[r].sort(key=lambda item: item[0])
    return out
