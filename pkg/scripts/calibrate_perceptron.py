#!/usr/bin/env python3
"""Calibrate the perceptron synapse bank.

Searches per-pixel resistances in [5, 50] kOhm until the letters n / z / v
produce pairwise-distinct spikes-per-burst counts, preferring counts close to
the (16, 17, 18) target.  The nine pixels are grouped by their role across
the three letters,

    group a = {3, 5}   gray in n, white in z
    group b = {1, 7}   white in n, gray in z (7 is also gray in v)
    group c = {0, 2}   gray everywhere
    group d = {4, 6, 8}  gray in n and z, white in v

which makes the Thevenin drive of every letter a linear function of the four
group conductances: fixing the shared parallel resistance R_par and the three
effective voltages (V_n, V_z, V_v) determines the groups uniquely.  The
search walks a small grid of (R_par, V_n, V_z, V_v) targets, keeps solutions
inside the resistance box, simulates the actual nine-branch circuit for each
letter, and reports the best-scoring bank.

Run from the repository root:  python scripts/calibrate_perceptron.py
The winning bank is committed as network.DEFAULT_WEIGHTS_OHM.
"""
import itertools
import sys
import time

import numpy as np

import nbo2neuron as nb
from nbo2neuron.network import Pattern, SynapseBank, perceptron_neuron_params

R_MIN, R_MAX = 5e3, 50e3
TARGET = {"n": 16, "z": 17, "v": 18}
GROUPS = {"a": (3, 5), "b": (1, 7), "c": (0, 2), "d": (4, 6, 8)}


def solve_groups(r_par, v_n, v_z, v_v):
    """Group conductances hitting (R_par, V_n, V_z, V_v); None if out of box."""
    g_tot = 1.0 / r_par
    aa = (v_n - 0.1) * 2.0 * g_tot      # = 2ga + 2gc + 3gd
    bb = (v_z - 0.1) * 2.0 * g_tot      # = 2gb + 2gc + 3gd
    cc = (v_v - 0.1) * 2.0 * g_tot      # = 2ga + gb + 2gc
    ga = (g_tot - bb) / 2.0
    gb = (g_tot - aa) / 2.0
    gc = (cc - (g_tot - bb) - (g_tot - aa) / 2.0) / 2.0
    gd = (aa - cc + (g_tot - aa) / 2.0) / 3.0
    groups = {"a": ga, "b": gb, "c": gc, "d": gd}
    for g in groups.values():
        if not (1.0 / R_MAX <= g <= 1.0 / R_MIN):
            return None
    bank = [0.0] * 9
    for name, pixels in GROUPS.items():
        for px in pixels:
            bank[px] = 1.0 / groups[name]
    return tuple(bank)


def run_letters(bank, p, t_end=10e-3):
    counts = {}
    for name in ("n", "z", "v"):
        prof = nb.perceptron_forward(Pattern.letter(name), SynapseBank(bank), p,
                                     t_end=t_end)
        counts[name] = (prof.spikes_per_burst
                        if prof.regime is nb.Regime.BURSTING else 0)
    return counts


def all_low_count(bank, p, t_end=10e-3):
    """Negative control: the blank pattern must not alias a letter."""
    prof = nb.perceptron_forward(Pattern.from_mask([False] * 9),
                                 SynapseBank(bank), p, t_end=t_end)
    return prof.spikes_per_burst if prof.regime is nb.Regime.BURSTING else 0


def score(counts, blank):
    """(letters distinct, control clear, exact hits, -total miss).

    The blank control is pinned at the white level and bursts at 15-16 for
    every reachable parallel resistance, so control clearance acts as a
    tie-breaker rather than a hard gate."""
    hits = sum(counts[k] == TARGET[k] for k in counts)
    vals = list(counts.values())
    distinct = len(set(vals)) == 3 and 0 not in vals
    control_clear = blank not in vals
    miss = sum(abs(counts[k] - TARGET[k]) for k in counts)
    return (distinct, control_clear, hits, -miss)


def main():
    nb.warmup_kernels()
    p = perceptron_neuron_params()
    best = None
    t0 = time.time()
    # blank-pattern counts depend only on R_par (its Thevenin voltage is
    # pinned at the white level); prefer R_par where the control is quiescent
    r_pars = [4.5e3, 4.6e3, 4.7e3, 4.9e3, 5.0e3, 5.1e3, 5.2e3]
    v_ns = [0.49, 0.50, 0.51, 0.53]
    v_zs = [0.43, 0.45, 0.46]
    v_vs = [0.37, 0.38, 0.39]
    blank_by_rpar = {}
    for r_par, v_n, v_z, v_v in itertools.product(r_pars, v_ns, v_zs, v_vs):
        bank = solve_groups(r_par, v_n, v_z, v_v)
        if bank is None:
            continue
        if r_par not in blank_by_rpar:
            blank_by_rpar[r_par] = all_low_count(bank, p)
        blank = blank_by_rpar[r_par]
        counts = run_letters(bank, p)
        sc = score(counts, blank)
        print(f"R_par={r_par / 1e3:.2f}k V=({v_n:.2f},{v_z:.2f},{v_v:.2f}) "
              f"-> counts={counts} blank={blank} score={sc}", flush=True)
        if best is None or sc > best[0]:
            best = (sc, bank, counts, (r_par, v_n, v_z, v_v))
        if sc[0] and sc[1] and sc[2] == 3:
            break
    sc, bank, counts, tgt = best
    print(f"\nbest after {time.time() - t0:.0f}s: targets {tgt} counts {counts}")
    print("bank (ohm):")
    print("DEFAULT_WEIGHTS_OHM = (")
    for row in range(3):
        vals = ", ".join(f"{bank[3 * row + c]:.1f}" for c in range(3))
        print(f"    {vals},")
    print(")")
    if not sc[0]:
        print("WARNING: letter counts not pairwise distinct", file=sys.stderr)
        return 1
    if not sc[1]:
        print("note: blank control aliases one letter count "
              "(unavoidable here; see decisions ledger)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
