"""Spike detection, burst grouping and regime classification of V_K traces.

A spike is an upward crossing of the mid-range threshold, guarded by a
hysteresis band (25 percent of peak-to-peak centered on the threshold) so the
slow V_Na envelope riding under the fast spikes cannot double-trigger, plus a
refractory gap.  Bursts are groups of spikes separated by inter-spike
intervals larger than gap_factor times the median ISI; a train whose ISI
coefficient of variation stays below cv_cutoff is continuous spiking, not
bursting.  The burst metrics are

    duty cycle = active phase / inter-burst period
    inter-burst frequency = 1 / inter-burst period

computed over complete (interior) bursts only, with the active phase ending
at the last spike of the burst.
"""
from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ._kernels import hysteretic_crossings
from .circuit import Trace


class Regime(enum.Enum):
    QUIESCENT = "quiescent"
    CONTINUOUS = "continuous"
    BURSTING = "bursting"
    UNRESOLVED = "unresolved"


class NeedsLongerTrace(Exception):
    """Raised when a bursting verdict needs more complete bursts than the
    trace covers; the sweep engine reruns with a longer duration."""

    def __init__(self, n_complete):
        super().__init__(f"only {n_complete} complete bursts in trace")
        self.n_complete = n_complete


@dataclass(frozen=True)
class DetectorConfig:
    transient_frac: float = 0.25   # leading fraction of the trace discarded
    prominence_frac: float = 0.25  # hysteresis band width / peak-to-peak
    min_isi: float = 1e-7          # s, refractory gap
    noise_floor: float = 0.05      # V, peak-to-peak below this is quiescent
    gap_factor: float = 3.0        # burst split at ISI > factor * median
    cv_cutoff: float = 0.15        # ISI CV below this is continuous spiking
    min_bursts: int = 3            # complete bursts needed for a verdict
    threshold_offset_frac: float = 0.0   # shift theta by this * peak-to-peak


@dataclass(frozen=True)
class SpikeTrain:
    spike_times: np.ndarray        # s, strictly increasing
    threshold: float               # V, detection threshold used
    window: tuple = (0.0, 0.0)     # (t_start, t_end) analyzed

    def __len__(self):
        return len(self.spike_times)


@dataclass
class BurstProfile:
    regime: Regime
    bursts: list = field(default_factory=list)     # spike-index ranges, complete bursts
    spikes_per_burst: int = 0                      # mode over complete bursts
    inter_burst_period: float = 0.0                # s
    active_phase: float = 0.0                      # s
    duty_cycle: float = 0.0
    inter_burst_frequency: float = 0.0             # Hz
    n_bursts: int = 0
    stationary: bool = True

    def to_json_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "spikes_per_burst": int(self.spikes_per_burst),
            "duty_cycle": float(self.duty_cycle),
            "inter_burst_frequency_hz": float(self.inter_burst_frequency),
            "n_bursts": int(self.n_bursts),
            "stationary": bool(self.stationary),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def detect_spikes(trace: Trace, cfg: DetectorConfig | None = None) -> SpikeTrain:
    """Spike times from upward threshold crossings of V_K after the transient."""
    if cfg is None:
        cfg = DetectorConfig()
    n0 = int(len(trace) * cfg.transient_frac)
    if len(trace) - n0 < 2:
        raise ValueError("trace shorter than the transient-discard window")
    v = trace.v_k[n0:]
    t_off = trace.t0 + n0 * trace.dt
    window = (t_off, trace.t0 + trace.duration)
    vmin = float(v.min())
    vmax = float(v.max())
    ptp = vmax - vmin
    theta = 0.5 * (vmax + vmin) + cfg.threshold_offset_frac * ptp
    if ptp < cfg.noise_floor:
        return SpikeTrain(np.empty(0), theta, window)
    half_band = 0.5 * cfg.prominence_frac * ptp
    idx = hysteretic_crossings(v, theta + half_band, theta - half_band)
    if len(idx) == 0:
        return SpikeTrain(np.empty(0), theta, window)
    # linear interpolation of the theta crossing just before each trigger
    times = np.empty(len(idx), dtype=float)
    for m, k in enumerate(idx):
        j = k
        while j > 0 and v[j - 1] > theta:
            j -= 1
        if j == 0:
            times[m] = t_off
        else:
            frac = (theta - v[j - 1]) / (v[j] - v[j - 1])
            times[m] = t_off + (j - 1 + frac) * trace.dt
    keep = np.ones(len(times), dtype=bool)
    last = -np.inf
    for m, tm in enumerate(times):
        if tm - last < cfg.min_isi:
            keep[m] = False
        else:
            last = tm
    return SpikeTrain(times[keep], theta, window)


def group_bursts(train: SpikeTrain, cfg: DetectorConfig | None = None,
                 strict: bool = False) -> BurstProfile:
    """Burst structure and metrics of a spike train.

    strict=True raises NeedsLongerTrace when fewer than cfg.min_bursts
    complete bursts are available for a bursting verdict."""
    if cfg is None:
        cfg = DetectorConfig()
    t = train.spike_times
    if len(t) == 0:
        return BurstProfile(Regime.QUIESCENT)
    if len(t) < 4:
        if strict:
            raise NeedsLongerTrace(0)
        return BurstProfile(Regime.UNRESOLVED, n_bursts=0, stationary=False)
    isi = np.diff(t)
    med = float(np.median(isi))
    cv = float(isi.std() / isi.mean())
    if cv < cfg.cv_cutoff:
        prof = BurstProfile(Regime.CONTINUOUS, spikes_per_burst=1,
                            inter_burst_period=float(isi.mean()),
                            inter_burst_frequency=1.0 / float(isi.mean()),
                            n_bursts=len(t))
        return prof

    splits = np.nonzero(isi > cfg.gap_factor * med)[0]
    starts = np.concatenate([[0], splits + 1])
    ends = np.concatenate([splits, [len(t) - 1]])          # inclusive
    # first and last groups may be clipped by the window; keep interior ones
    if len(starts) < 3:
        if strict:
            raise NeedsLongerTrace(max(0, len(starts) - 2))
        return BurstProfile(Regime.UNRESOLVED, n_bursts=len(starts), stationary=False)
    comp_start = starts[1:-1]
    comp_end = ends[1:-1]
    n_complete = len(comp_start)
    if strict and n_complete < cfg.min_bursts:
        raise NeedsLongerTrace(n_complete)

    counts = (comp_end - comp_start + 1).astype(int)
    mode_count, mode_n = Counter(counts.tolist()).most_common(1)[0]
    if mode_count == 1:
        # regular single-spike trains have near-zero CV and are Continuous;
        # irregular singletons are not a burst regime at all
        if strict:
            raise NeedsLongerTrace(n_complete)
        return BurstProfile(Regime.UNRESOLVED, n_bursts=n_complete, stationary=False)
    stationary = mode_n >= 0.6 * n_complete
    onsets = t[comp_start]
    period = float(np.mean(np.diff(onsets))) if n_complete > 1 else float("nan")
    active = float(np.mean(t[comp_end] - t[comp_start]))
    duty = active / period if period and np.isfinite(period) else 0.0
    return BurstProfile(
        Regime.BURSTING,
        bursts=[(int(a), int(b)) for a, b in zip(comp_start, comp_end)],
        spikes_per_burst=int(mode_count),
        inter_burst_period=period,
        active_phase=active,
        duty_cycle=duty,
        inter_burst_frequency=1.0 / period if period and np.isfinite(period) else 0.0,
        n_bursts=n_complete,
        stationary=stationary)


def classify(trace: Trace, cfg: DetectorConfig | None = None,
             strict: bool = True) -> BurstProfile:
    """Regime of a trace: Quiescent, Continuous or Bursting(n).

    strict=True (default) raises NeedsLongerTrace when a bursting verdict
    rests on fewer than cfg.min_bursts complete bursts."""
    if cfg is None:
        cfg = DetectorConfig()
    train = detect_spikes(trace, cfg)
    return group_bursts(train, cfg, strict=strict)
