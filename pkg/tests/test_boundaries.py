import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import nbo2neuron as nb
from nbo2neuron.boundaries import BoundaryError, BoundaryLabel
from nbo2neuron.spikes import Regime


def direct_slopes(a: nb.CircuitAnchors):
    """Independent arithmetic for the slope coefficients (tests' own route)."""
    m = (a.r_on * a.r_th
         / (a.r_th * (a.v2 - a.v1 - a.v_th) - a.v_th * (a.r2 + a.r_on)))
    n = (a.r_h * a.r2
         / (a.r2 * a.v_h - a.r_h * (a.v2 - a.v_th - a.v_h - a.v1)))
    q = (a.r_th * (a.r2 + a.r_off)
         / (a.v_th * (a.r2 + a.r_off) - a.r_th * (a.v2 - a.v_th - a.v1)))
    return m, n, q


class TestLines:
    def test_slope_values(self, anchors):
        m, n, q = direct_slopes(anchors)
        assert nb.boundary_a_prime(anchors).slope == pytest.approx(m, rel=1e-12)
        assert nb.boundary_b_prime(anchors).slope == pytest.approx(n, rel=1e-12)
        assert nb.boundary_c_prime(anchors).slope == pytest.approx(q, rel=1e-12)
        # stock values: m ~ 0.7657 kOhm/V, n ~ 3.626, q ~ 93.15
        assert abs(m - 765.7) < 0.5
        assert abs(n - 3626.2) < 1.0
        assert abs(q - 93151.0) < 5.0

    def test_a_prime_point(self, anchors):
        line = nb.boundary_a_prime(anchors)
        assert float(line.r_in(0.400)) == pytest.approx(505.3, abs=0.5)
        # x-intercept at V2 - V_th (R_X2 + R2)/R_X2
        v0 = anchors.v2 - anchors.v_th * (anchors.r_th + anchors.r2) / anchors.r_th
        assert float(line.r_in(v0)) == pytest.approx(0.0, abs=1e-9)

    def test_b_prime_point(self, anchors):
        line = nb.boundary_b_prime(anchors)
        # R_in = 0 where V_in = V1 + V_h = -0.654 V (critical-balance form)
        assert float(line.r_in(anchors.v1 + anchors.v_h)) == pytest.approx(0.0, abs=1e-9)
        # the 3.795 kOhm verification resistance sits near V_in = 0.4 V
        v_star = 3.795e3 / line.slope + line.v_zero
        assert abs(v_star - 0.3926) < 2e-3

    def test_c_prime_point(self, anchors):
        line = nb.boundary_c_prime(anchors)
        assert float(line.r_in(anchors.v1 + anchors.v_th)) == pytest.approx(0.0, abs=1e-9)
        v_star = 32.95e3 / line.slope + line.v_zero
        assert abs(v_star - 0.4017) < 2e-3

    def test_a_prime_above_a(self, anchors):
        """Refined line sits above the hard-switching one for V_in > 0."""
        ap = nb.boundary_a_prime(anchors)
        a = nb.boundary_unprimed(anchors, "A")
        v = np.linspace(0.05, 2.0, 80)
        assert np.all(ap.r_in(v) > a.r_in(v))

    def test_b_differs_from_b_prime(self, anchors):
        b = nb.boundary_unprimed(anchors, "B")
        bp = nb.boundary_b_prime(anchors)
        assert abs(b.slope - bp.slope) > 1e3

    def test_degenerate_raises(self):
        bad = nb.CircuitAnchors(r_h=1e6)      # flips the B' denominator sign
        with pytest.raises(BoundaryError):
            nb.boundary_b_prime(bad)

    def test_json_contract(self, anchors):
        d = nb.boundary_a_prime(anchors).to_json_dict(np.linspace(0, 1, 5))
        assert set(d) == {"label", "slope_ohm_per_volt", "v_intercept_volts", "samples"}
        assert len(d["samples"]) == 5


class TestResiduals:
    @pytest.mark.parametrize("v_in", [0.1, 0.4, 0.9, 1.7])
    def test_lines_satisfy_critical_balance(self, anchors, v_in):
        """On each line, the pinned node equations vanish to 1e-9 of the
        natural current scale."""
        scale = (abs(anchors.v2) + abs(anchors.v1)) / anchors.r2
        for line in nb.all_boundaries(anchors):
            if float(line.r_in(v_in)) <= 0:
                continue
            for res in nb.boundary_residual(line, anchors, v_in):
                assert abs(res) < 1e-9 * scale

    @given(st.floats(min_value=0.5, max_value=2.0))
    @settings(max_examples=30, deadline=None)
    def test_voltage_scaling_preserves_balance(self, lam):
        """Scaling V_th, V_h and all sources by a common factor keeps the
        zero-crossing structure of the KCL balance (residual route)."""
        a = nb.CircuitAnchors()
        scaled = nb.CircuitAnchors(v_th=a.v_th * lam, v_h=a.v_h * lam,
                                   v1=a.v1 * lam, v2=a.v2 * lam)
        scale = (abs(scaled.v2) + abs(scaled.v1)) / scaled.r2 + 1e-12
        for line in (nb.boundary_a_prime(scaled), nb.boundary_b_prime(scaled),
                     nb.boundary_c_prime(scaled)):
            for v_in in (0.3 * lam, 0.8 * lam):
                if float(line.r_in(v_in)) <= 0:
                    continue
                for res in nb.boundary_residual(line, scaled, v_in):
                    assert abs(res) < 1e-9 * scale


def synthetic_diagram(anchors, v_grid, r_grid):
    """Diagram labeled purely by the analytic lines (self-consistency input)."""
    ap = nb.boundary_a_prime(anchors)
    bp = nb.boundary_b_prime(anchors)
    cp = nb.boundary_c_prime(anchors)
    regimes = np.empty((len(r_grid), len(v_grid)), dtype=object)
    for j, v in enumerate(v_grid):
        for i, r in enumerate(r_grid):
            if r <= ap.r_in(v) or r >= cp.r_in(v):
                regimes[i, j] = Regime.QUIESCENT.value
            elif r <= bp.r_in(v):
                regimes[i, j] = Regime.CONTINUOUS.value
            else:
                regimes[i, j] = Regime.BURSTING.value
    z = np.zeros(regimes.shape)
    return nb.PhaseDiagram(np.asarray(v_grid, float), np.asarray(r_grid, float),
                           regimes, z.astype(int), z, z, z)


class TestCompare:
    def test_self_consistency_zero_deviation(self, anchors):
        v = np.linspace(0.1, 1.0, 10)
        r = np.linspace(0.1e3, 33e3, 150)
        diagram = synthetic_diagram(anchors, v, r)
        lines = [nb.boundary_a_prime(anchors), nb.boundary_b_prime(anchors),
                 nb.boundary_c_prime(anchors)]
        for dev in nb.compare_boundaries(diagram, lines):
            assert len(dev.v_in) > 0
            # transitions located between cells: at most half a cell away
            assert np.all(dev.abs_dev <= 0.5 * dev.cell + 1e-9)

    def test_all_quiescent_reports_absent(self, anchors):
        v = np.linspace(0.1, 1.0, 5)
        r = np.linspace(1e3, 33e3, 10)
        regimes = np.full((10, 5), Regime.QUIESCENT.value, dtype=object)
        z = np.zeros((10, 5))
        diagram = nb.PhaseDiagram(v, r, regimes, z.astype(int), z, z, z)
        for dev in nb.compare_boundaries(diagram, nb.all_boundaries(anchors)):
            assert len(dev.v_in) == 0
