import numpy as np
import pytest

import nbo2neuron as nb


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Compile (or load from cache) the integration kernels once per session."""
    nb.warmup_kernels()


@pytest.fixture(scope="session")
def table_s1_neuron():
    return nb.NeuronParams()


@pytest.fixture(scope="session")
def anchors():
    return nb.CircuitAnchors()


def balance_voltage_curve(p: nb.ThermalIMTParams, n=400001):
    """Independent dense evaluation of the power-balance curve V(u) =
    sqrt(R(u) Gamma(u) dT) from the closed forms (test-side oracle)."""
    u = np.linspace(p.u_min * 1.01, p.u_max, n)
    geo = p.l_ch / (np.pi * p.r_ch**2)
    r = geo / (u**2 / p.rho_met + (1 - u**2) / p.rho_ins)
    gam = 2 * np.pi * p.l_ch * p.kappa / np.maximum(np.log(1 / u), np.log(1 / p.u_max))
    v = np.sqrt(r * gam * (p.t_imt - p.t_amb))
    return u, v, r


@pytest.fixture(scope="session")
def balance_anchors():
    """Threshold / hold turning points of the stock device, from the oracle."""
    p = nb.ThermalIMTParams()
    u, v, r = balance_voltage_curve(p)
    lo = u < 0.3
    hi = ~lo
    k_th = np.argmax(v[lo])
    k_h = np.argmin(v[hi])
    return {
        "u_th": float(u[lo][k_th]), "v_th": float(v[lo][k_th]), "r_th": float(r[lo][k_th]),
        "u_h": float(u[hi][k_h]), "v_h": float(v[hi][k_h]), "r_h": float(r[hi][k_h]),
    }
