import numpy as np
import pytest

import nbo2neuron as nb
from nbo2neuron.spikes import DetectorConfig, NeedsLongerTrace, Regime


def make_trace(v_k, dt=1e-6):
    n = len(v_k)
    z = np.zeros(n)
    return nb.Trace(dt=dt, t0=0.0, v_na=z, v_k=np.asarray(v_k, float),
                    r_x1=z + 49e3, r_x2=z + 49e3, u1=z, u2=z)


def pulse_train(spike_times, t_end, dt=1e-6, width=3e-6, amp=1.0):
    """Synthetic generator (its own oracle): unit pulses at given times."""
    t = np.arange(0.0, t_end, dt)
    v = np.zeros_like(t)
    for ts in spike_times:
        v += amp * np.exp(-0.5 * ((t - ts) / width) ** 2)
    return make_trace(v, dt)


def burst_times(n_bursts, per_burst, isi, gap, t0=1e-3):
    times = []
    t = t0
    for _ in range(n_bursts):
        for k in range(per_burst):
            times.append(t + k * isi)
        t = times[-1] + gap
    return np.array(times)


class TestDetect:
    def test_constant_trace(self):
        tr = make_trace(np.full(1000, 0.3))
        assert len(nb.detect_spikes(tr)) == 0

    def test_sinusoid_one_spike_per_period(self):
        # 100 kHz, 1 V amplitude, 1 ms window; transient discard off so the
        # count is exactly cycles in window
        dt = 1e-8
        t = np.arange(0, 1e-3, dt)
        tr = make_trace(np.sin(2 * np.pi * 1e5 * t), dt)
        train = nb.detect_spikes(tr, DetectorConfig(transient_frac=0.0))
        assert len(train) == 100

    def test_burst_generator_recovered(self):
        times = burst_times(4, 5, isi=200e-6, gap=5e-3)
        tr = pulse_train(times, t_end=times[-1] + 2e-3, dt=2e-6)
        train = nb.detect_spikes(tr, DetectorConfig(transient_frac=0.0))
        assert len(train) == 20
        assert np.all(np.abs(train.spike_times - times) < 5e-6)

    def test_spike_times_strictly_increasing(self):
        times = burst_times(3, 5, isi=200e-6, gap=5e-3)
        tr = pulse_train(times, t_end=times[-1] + 2e-3, dt=2e-6)
        st = nb.detect_spikes(tr, DetectorConfig(transient_frac=0.0)).spike_times
        assert np.all(np.diff(st) > 0)

    def test_noise_floor_returns_empty(self):
        tr = make_trace(0.01 * np.sin(np.linspace(0, 60, 2000)))
        assert len(nb.detect_spikes(tr)) == 0

    def test_threshold_offset_robustness(self):
        """Moving theta by +-10% of peak-to-peak changes no spike count."""
        times = burst_times(4, 5, isi=200e-6, gap=5e-3)
        tr = pulse_train(times, t_end=times[-1] + 2e-3, dt=2e-6)
        for off in (-0.1, 0.0, 0.1):
            cfg = DetectorConfig(transient_frac=0.0, threshold_offset_frac=off)
            assert len(nb.detect_spikes(tr, cfg)) == 20


class TestGroup:
    def test_uniform_train_is_continuous(self):
        st = nb.SpikeTrain(np.arange(100) * 10e-6, 0.5)
        prof = nb.group_bursts(st)
        assert prof.regime is Regime.CONTINUOUS
        assert prof.spikes_per_burst == 1

    def test_five_per_group(self):
        times = burst_times(6, 5, isi=200e-6, gap=5e-3)
        prof = nb.group_bursts(nb.SpikeTrain(times, 0.5))
        assert prof.regime is Regime.BURSTING
        assert prof.spikes_per_burst == 5
        # onset-to-onset period = group span + gap
        want = 4 * 200e-6 + 5e-3
        assert abs(prof.inter_burst_period - want) < 1e-9
        assert abs(prof.inter_burst_frequency - 1.0 / want) < 1e-3 / want

    def test_duty_cycle_by_construction(self):
        # active phase 2 ms (5 spikes, 0.5 ms apart), period 10 ms
        times = burst_times(6, 5, isi=0.5e-3, gap=8e-3)
        prof = nb.group_bursts(nb.SpikeTrain(times, 0.5))
        assert abs(prof.duty_cycle - 0.2) < 1e-12
        # Eq-identity: duty * period == active phase, exactly
        assert prof.duty_cycle * prof.inter_burst_period == prof.active_phase

    def test_complete_bursts_only(self):
        times = burst_times(5, 3, isi=100e-6, gap=4e-3)
        prof = nb.group_bursts(nb.SpikeTrain(times, 0.5))
        assert prof.n_bursts == 3          # first and last groups excluded

    def test_nonstationary_flagged(self):
        a = burst_times(3, 3, isi=100e-6, gap=4e-3)
        b = burst_times(3, 5, isi=100e-6, gap=4e-3, t0=a[-1] + 4e-3)
        c = burst_times(2, 4, isi=100e-6, gap=4e-3, t0=b[-1] + 4e-3)
        prof = nb.group_bursts(nb.SpikeTrain(np.concatenate([a, b, c]), 0.5))
        assert prof.regime is Regime.BURSTING
        assert not prof.stationary

    def test_bursting_one_never_emitted(self):
        """Irregular isolated spikes never classify as Bursting(1)."""
        rng = np.random.default_rng(7)
        times = np.cumsum(rng.uniform(1e-4, 3e-3, 24))
        prof = nb.group_bursts(nb.SpikeTrain(times, 0.5))
        assert not (prof.regime is Regime.BURSTING and prof.spikes_per_burst == 1)

    def test_needs_longer_raised_in_strict_mode(self):
        times = burst_times(2, 4, isi=100e-6, gap=5e-3)
        with pytest.raises(NeedsLongerTrace):
            nb.group_bursts(nb.SpikeTrain(times, 0.5), strict=True)

    def test_empty_train_quiescent(self):
        prof = nb.group_bursts(nb.SpikeTrain(np.empty(0), 0.5))
        assert prof.regime is Regime.QUIESCENT

    def test_json_contract(self):
        times = burst_times(6, 5, isi=200e-6, gap=5e-3)
        d = nb.group_bursts(nb.SpikeTrain(times, 0.5)).to_json_dict()
        assert set(d) == {"regime", "spikes_per_burst", "duty_cycle",
                          "inter_burst_frequency_hz", "n_bursts", "stationary"}
        assert d["regime"] == "bursting" and d["spikes_per_burst"] == 5


class TestClassify:
    def test_quiescent_zero_sources(self):
        p = nb.NeuronParams(v_in=0.0, v1=0.0, v2=0.0)
        tr = nb.integrate(p, t_end=2e-4, ctl=nb.IntegratorControl(trace_dt=1e-7))
        assert nb.classify(tr).regime is Regime.QUIESCENT

    def test_transient_discard_invariance(self, table_s1_neuron):
        tr = nb.integrate(table_s1_neuron.with_(r_in=10e3), t_end=2e-3,
                          ctl=nb.IntegratorControl(trace_dt=2e-8))
        a = nb.classify(tr, DetectorConfig(transient_frac=0.20))
        b = nb.classify(tr, DetectorConfig(transient_frac=0.30))
        assert a.regime is b.regime
        assert a.spikes_per_burst == b.spikes_per_burst

    def test_threshold_robustness_on_simulated_trace(self, table_s1_neuron):
        tr = nb.integrate(table_s1_neuron.with_(r_in=10e3), t_end=2e-3,
                          ctl=nb.IntegratorControl(trace_dt=2e-8))
        counts = set()
        for off in (-0.1, 0.0, 0.1):
            prof = nb.classify(tr, DetectorConfig(threshold_offset_frac=off))
            counts.add((prof.regime, prof.spikes_per_burst))
        assert len(counts) == 1
