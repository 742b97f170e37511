"""Compiled integration kernels for the two-channel memristive neuron.

The circuit state is packed per neuron as [V_Na, V_K, x1, x2] where x is the
metallic-core radius fraction u for a thermal device and an unused slot for a
piecewise device (whose branch lives in a separate integer array).  Chains of
neurons concatenate these blocks; neuron n>0 receives its input current from
the upstream V_K node through a coupling resistor.

Two steppers are provided over the same right-hand side:

* ``ROSENBROCK`` - an ode23s-style L-stable Rosenbrock W-method with the
  analytic Jacobian and a dense 4Nx4N LU.  The thermal device state relaxes
  ~1e4 times faster than the circuit nodes, so an explicit method would be
  stability-limited to ~0.1 ns steps; the W-method steps at solution scale.
* ``RK23`` - explicit Bogacki-Shampine 3(2).  Appropriate for piecewise
  devices (no fast continuous state) and used as an independent cross-check
  of the Rosenbrock path on short thermal traces.

Discrete transitions are located as events on the step's cubic Hermite
interpolant and the step is cut exactly at the crossing: piecewise branch
flips at v >= v_th / v <= v_h, and thermal states landing on the u_min/u_max
walls, where they stay pinned (du/dt = 0) until the raw derivative points
back into the interior.
"""
from __future__ import annotations

import numpy as np
from numba import njit

D_GAMMA = 1.0 / (2.0 + np.sqrt(2.0))
E32 = 6.0 + np.sqrt(2.0)

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_NONFINITE = 2

PIECEWISE = 0
THERMAL = 1

ROSENBROCK = 0
RK23 = 1

# thermal parameter column layout
TH_A, TH_B, TH_GEO, TH_G0, TH_DT, TH_DEN, TH_UMIN, TH_UMAX, TH_LNF = range(9)
# piecewise parameter column layout
PW_RON, PW_ROFF, PW_VTH, PW_VH = range(4)

# evaluation guards: stages may transiently leave [u_min, u_max]
U_EVAL_FLOOR = 1e-3
U_EVAL_CEIL = 1.0 - 1e-9


@njit(cache=True, inline="always")
def _r_thermal(u, th, d):
    if u < U_EVAL_FLOOR:
        u = U_EVAL_FLOOR
    elif u > U_EVAL_CEIL:
        u = U_EVAL_CEIL
    den = th[d, TH_B] + u * u * (th[d, TH_A] - th[d, TH_B])
    return th[d, TH_GEO] / den


@njit(cache=True, inline="always")
def _hermite(s, h, y0, f0, y1, f1):
    h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s)
    h10 = s * (1.0 - s) * (1.0 - s)
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@njit(cache=True)
def _rhs_jac(y, f, J, want_jac,
             n_neu, c1, c2, r2, v1, v2,
             src_v, src_r, i_bias, r_c,
             dev_type, branch, pin, th, pw):
    """Kirchhoff RHS (and analytic Jacobian) of the packed chain state.

    Neuron 0 is driven by the source branches (src_v[j] through src_r[j]) plus
    the ideal current i_bias; neuron n>0 by (V_K[n-1] - V_Na[n]) / r_c[n].
    pin[d] in {-1, 0, +1} marks thermal states held at u_min / live / u_max."""
    if want_jac:
        for i in range(4 * n_neu):
            for j in range(4 * n_neu):
                J[i, j] = 0.0
    for n in range(n_neu):
        iv = 4 * n
        ik = iv + 1
        vna = y[iv]
        vk = y[ik]
        vd1 = vna - v1[n]
        vd2 = v2[n] - vk

        for side in range(2):
            d = 2 * n + side
            idx = iv + 2 + side
            vd = vd1 if side == 0 else vd2
            if dev_type[d] != THERMAL:
                f[idx] = 0.0
                continue
            u = y[idx]
            r = _r_thermal(u, th, d)
            ue = u
            if ue < U_EVAL_FLOOR:
                ue = U_EVAL_FLOOR
            elif ue > U_EVAL_CEIL:
                ue = U_EVAL_CEIL
            ln = -np.log(ue)
            if ln < th[d, TH_LNF]:
                ln = th[d, TH_LNF]
            gam = th[d, TH_G0] / ln
            den = th[d, TH_DEN] * ue
            fu = (vd * vd / r - gam * th[d, TH_DT]) / den
            live = True
            if pin[d] == -1 and fu <= 0.0:
                live = False
            elif pin[d] == 1 and fu >= 0.0:
                live = False
            f[idx] = fu if live else 0.0
            if want_jac:
                rp = -2.0 * ue * (th[d, TH_A] - th[d, TH_B]) * r * r / th[d, TH_GEO]
                if side == 0:
                    J[iv, idx] = vd1 * rp / (r * r) / c1[n]
                else:
                    J[ik, idx] = (vk - v2[n]) * rp / (r * r) / c2[n]
                if live:
                    gp = th[d, TH_G0] / (ue * ln * ln) if ln > th[d, TH_LNF] else 0.0
                    dfu_dv = 2.0 * vd / (r * den)
                    if side == 0:
                        J[idx, iv] = dfu_dv
                    else:
                        J[idx, ik] = -dfu_dv
                    J[idx, idx] = (-vd * vd * rp / (r * r) - gp * th[d, TH_DT]) / den - fu / ue

        d1 = 2 * n
        d2 = 2 * n + 1
        if dev_type[d1] == THERMAL:
            r1 = _r_thermal(y[iv + 2], th, d1)
        else:
            r1 = pw[d1, PW_RON] if branch[d1] == 1 else pw[d1, PW_ROFF]
        if dev_type[d2] == THERMAL:
            r2x = _r_thermal(y[iv + 3], th, d2)
        else:
            r2x = pw[d2, PW_RON] if branch[d2] == 1 else pw[d2, PW_ROFF]

        iin = 0.0
        gin = 0.0
        if n == 0:
            for j in range(src_v.shape[0]):
                iin += (src_v[j] - vna) / src_r[j]
                gin += 1.0 / src_r[j]
            iin += i_bias
        else:
            iin = (y[4 * (n - 1) + 1] - vna) / r_c[n]
            gin = 1.0 / r_c[n]
        iout = 0.0
        gout = 0.0
        if n < n_neu - 1:
            iout = (vk - y[4 * (n + 1)]) / r_c[n + 1]
            gout = 1.0 / r_c[n + 1]

        f[iv] = (iin + (vk - vna) / r2[n] - vd1 / r1) / c1[n]
        f[ik] = ((vna - vk) / r2[n] - (vk - v2[n]) / r2x - iout) / c2[n]
        if want_jac:
            J[iv, iv] = -(gin + 1.0 / r2[n] + 1.0 / r1) / c1[n]
            J[iv, ik] = 1.0 / (r2[n] * c1[n])
            if n > 0:
                J[iv, 4 * (n - 1) + 1] = 1.0 / (r_c[n] * c1[n])
            J[ik, iv] = 1.0 / (r2[n] * c2[n])
            J[ik, ik] = -(1.0 / r2[n] + 1.0 / r2x + gout) / c2[n]
            if n < n_neu - 1:
                J[ik, 4 * (n + 1)] = 1.0 / (r_c[n + 1] * c2[n])


@njit(cache=True)
def _lu_factor(W, piv, nd):
    for i in range(nd):
        piv[i] = i
    for k in range(nd):
        p = k
        amax = abs(W[k, k])
        for i in range(k + 1, nd):
            a = abs(W[i, k])
            if a > amax:
                amax = a
                p = i
        if amax == 0.0:
            return False
        if p != k:
            for j in range(nd):
                tmp = W[k, j]
                W[k, j] = W[p, j]
                W[p, j] = tmp
            t = piv[k]
            piv[k] = piv[p]
            piv[p] = t
        for i in range(k + 1, nd):
            W[i, k] /= W[k, k]
            for j in range(k + 1, nd):
                W[i, j] -= W[i, k] * W[k, j]
    return True


@njit(cache=True)
def _lu_solve(W, piv, b, x, nd):
    for i in range(nd):
        x[i] = b[piv[i]]
    for i in range(nd):
        s = x[i]
        for j in range(i):
            s -= W[i, j] * x[j]
        x[i] = s
    for i in range(nd - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, nd):
            s -= W[i, j] * x[j]
        x[i] = s / W[i, i]


@njit(cache=True, nogil=True)
def simulate_chain(y0, n_neu, c1, c2, r2, v1, v2,
                   src_v, src_r, i_bias, r_c,
                   dev_type, branch0, th, pw,
                   t_end, rtol, rtol_u, atol_v, atol_u,
                   max_step, min_step, out_dt, method):
    """Integrate the chain over [0, t_end] and resample onto a uniform grid.

    Returns (out, branch, status, t_reached, n_steps) where
    out[k, 6n+0..5] = (V_Na, V_K, x1, x2, R_X1, R_X2) of neuron n at k*out_dt."""
    nd = 4 * n_neu
    n_dev = 2 * n_neu
    n_out = int(round(t_end / out_dt)) + 1
    out = np.empty((n_out, 6 * n_neu))
    branch = branch0.copy()
    pin = np.zeros(n_dev, dtype=np.int64)

    y = y0.copy()
    f0 = np.empty(nd)
    f1 = np.empty(nd)
    f2 = np.empty(nd)
    f3 = np.empty(nd)
    k1 = np.empty(nd)
    k2 = np.empty(nd)
    k3 = np.empty(nd)
    ytmp = np.empty(nd)
    ynew = np.empty(nd)
    rhsbuf = np.empty(nd)
    J = np.empty((nd, nd))
    W = np.empty((nd, nd))
    piv = np.empty(nd, dtype=np.int64)

    # start devices on their walls if the initial state sits there
    for d in range(n_dev):
        if dev_type[d] == THERMAL:
            idx = 4 * (d // 2) + 2 + (d % 2)
            if y[idx] <= th[d, TH_UMIN]:
                y[idx] = th[d, TH_UMIN]
                pin[d] = -1
            elif y[idx] >= th[d, TH_UMAX]:
                y[idx] = th[d, TH_UMAX]
                pin[d] = 1

    t = 0.0
    h = min(max_step, 1e-10)
    _rhs_jac(y, f0, J, False, n_neu, c1, c2, r2, v1, v2, src_v, src_r, i_bias,
             r_c, dev_type, branch, pin, th, pw)

    for n in range(n_neu):
        for c in range(4):
            out[0, 6 * n + c] = y[4 * n + c]
        for s in range(2):
            d = 2 * n + s
            if dev_type[d] == THERMAL:
                out[0, 6 * n + 4 + s] = _r_thermal(y[4 * n + 2 + s], th, d)
            else:
                out[0, 6 * n + 4 + s] = pw[d, PW_RON] if branch[d] == 1 else pw[d, PW_ROFF]
    i_out = 1
    n_steps = 0

    while t < t_end:
        # live thermal states must sit strictly inside the walls; event cuts can
        # leave other devices marginally outside, so snap and pin them here
        for d in range(n_dev):
            if dev_type[d] == THERMAL and pin[d] == 0:
                idx = 4 * (d // 2) + 2 + (d % 2)
                snapped = False
                if y[idx] <= th[d, TH_UMIN]:
                    y[idx] = th[d, TH_UMIN]
                    pin[d] = -1
                    snapped = True
                elif y[idx] >= th[d, TH_UMAX]:
                    y[idx] = th[d, TH_UMAX]
                    pin[d] = 1
                    snapped = True
                if snapped:
                    _rhs_jac(y, f0, J, False, n_neu, c1, c2, r2, v1, v2, src_v,
                             src_r, i_bias, r_c, dev_type, branch, pin, th, pw)
        if h > t_end - t:
            h = t_end - t
        if h < min_step:
            return out[:i_out], branch, STATUS_STEP_UNDERFLOW, t, n_steps

        if method == ROSENBROCK:
            _rhs_jac(y, f0, J, True, n_neu, c1, c2, r2, v1, v2, src_v, src_r,
                     i_bias, r_c, dev_type, branch, pin, th, pw)
        accepted = False
        errnorm = 0.0
        while not accepted:
            if h < min_step:
                return out[:i_out], branch, STATUS_STEP_UNDERFLOW, t, n_steps
            if method == ROSENBROCK:
                hd = h * D_GAMMA
                for i in range(nd):
                    for j in range(nd):
                        W[i, j] = -hd * J[i, j]
                    W[i, i] += 1.0
                if not _lu_factor(W, piv, nd):
                    h *= 0.5
                    continue
                _lu_solve(W, piv, f0, k1, nd)
                for i in range(nd):
                    ytmp[i] = y[i] + 0.5 * h * k1[i]
                _rhs_jac(ytmp, f1, J, False, n_neu, c1, c2, r2, v1, v2, src_v,
                         src_r, i_bias, r_c, dev_type, branch, pin, th, pw)
                for i in range(nd):
                    rhsbuf[i] = f1[i] - k1[i]
                _lu_solve(W, piv, rhsbuf, k2, nd)
                bad = False
                for i in range(nd):
                    k2[i] += k1[i]
                    ynew[i] = y[i] + h * k2[i]
                    if not np.isfinite(ynew[i]):
                        bad = True
                if bad:
                    h *= 0.25
                    continue
                _rhs_jac(ynew, f2, J, False, n_neu, c1, c2, r2, v1, v2, src_v,
                         src_r, i_bias, r_c, dev_type, branch, pin, th, pw)
                for i in range(nd):
                    rhsbuf[i] = f2[i] - E32 * (k2[i] - f1[i]) - 2.0 * (k1[i] - f0[i])
                _lu_solve(W, piv, rhsbuf, k3, nd)
                errnorm = 0.0
                for i in range(nd):
                    e = (h / 6.0) * (k1[i] - 2.0 * k2[i] + k3[i])
                    rt = rtol if (i % 4) < 2 else rtol_u
                    at = atol_v if (i % 4) < 2 else atol_u
                    sc = at + rt * max(abs(y[i]), abs(ynew[i]))
                    e = abs(e) / sc
                    if e > errnorm:
                        errnorm = e
            else:
                # Bogacki-Shampine 3(2); f0 holds f(y) (FSAL)
                for i in range(nd):
                    ytmp[i] = y[i] + 0.5 * h * f0[i]
                _rhs_jac(ytmp, f1, J, False, n_neu, c1, c2, r2, v1, v2, src_v,
                         src_r, i_bias, r_c, dev_type, branch, pin, th, pw)
                for i in range(nd):
                    ytmp[i] = y[i] + 0.75 * h * f1[i]
                _rhs_jac(ytmp, f3, J, False, n_neu, c1, c2, r2, v1, v2, src_v,
                         src_r, i_bias, r_c, dev_type, branch, pin, th, pw)
                bad = False
                for i in range(nd):
                    ynew[i] = y[i] + h * (2.0 / 9.0 * f0[i] + 1.0 / 3.0 * f1[i]
                                          + 4.0 / 9.0 * f3[i])
                    if not np.isfinite(ynew[i]):
                        bad = True
                if bad:
                    h *= 0.25
                    continue
                _rhs_jac(ynew, f2, J, False, n_neu, c1, c2, r2, v1, v2, src_v,
                         src_r, i_bias, r_c, dev_type, branch, pin, th, pw)
                errnorm = 0.0
                for i in range(nd):
                    e = h * (-5.0 / 72.0 * f0[i] + 1.0 / 12.0 * f1[i]
                             + 1.0 / 9.0 * f3[i] - 1.0 / 8.0 * f2[i])
                    rt = rtol if (i % 4) < 2 else rtol_u
                    at = atol_v if (i % 4) < 2 else atol_u
                    sc = at + rt * max(abs(y[i]), abs(ynew[i]))
                    e = abs(e) / sc
                    if e > errnorm:
                        errnorm = e
            if errnorm <= 1.0:
                accepted = True
            else:
                fac = 0.9 * errnorm ** (-1.0 / 3.0)
                if fac < 0.1:
                    fac = 0.1
                h *= fac

        n_steps += 1
        h_used = h
        t_new = t + h

        # event scan on the accepted interpolant
        ev_s = 2.0
        ev_dev = -1
        ev_kind = 0  # 0 piecewise flip, -1 land u_min, +1 land u_max
        for d in range(n_dev):
            n = d // 2
            if dev_type[d] == PIECEWISE:
                idx_v = 4 * n if d % 2 == 0 else 4 * n + 1
                vd_old = (y[idx_v] - v1[n]) if d % 2 == 0 else (v2[n] - y[idx_v])
                vd_new = (ynew[idx_v] - v1[n]) if d % 2 == 0 else (v2[n] - ynew[idx_v])
                rising = branch[d] == 0
                trig = pw[d, PW_VTH] if rising else pw[d, PW_VH]
                hit = (vd_old < trig <= vd_new) if rising else (vd_old > trig >= vd_new)
                if not hit:
                    continue
                lo = 0.0
                hi = 1.0
                for _ in range(50):
                    mid = 0.5 * (lo + hi)
                    yi = _hermite(mid, h_used, y[idx_v], f0[idx_v], ynew[idx_v], f2[idx_v])
                    vd = (yi - v1[n]) if d % 2 == 0 else (v2[n] - yi)
                    crossed = vd >= trig if rising else vd <= trig
                    if crossed:
                        hi = mid
                    else:
                        lo = mid
                s_ev = hi
                kind = 0
            else:
                if pin[d] != 0:
                    continue
                idx_u = 4 * n + 2 + (d % 2)
                if y[idx_u] > th[d, TH_UMIN] and ynew[idx_u] <= th[d, TH_UMIN]:
                    wall = th[d, TH_UMIN]
                    kind = -1
                elif y[idx_u] < th[d, TH_UMAX] and ynew[idx_u] >= th[d, TH_UMAX]:
                    wall = th[d, TH_UMAX]
                    kind = 1
                else:
                    continue
                lo = 0.0
                hi = 1.0
                for _ in range(50):
                    mid = 0.5 * (lo + hi)
                    yi = _hermite(mid, h_used, y[idx_u], f0[idx_u], ynew[idx_u], f2[idx_u])
                    past = yi <= wall if kind == -1 else yi >= wall
                    if past:
                        hi = mid
                    else:
                        lo = mid
                s_ev = hi
            if s_ev < ev_s:
                ev_s = s_ev
                ev_dev = d
                ev_kind = kind

        if ev_dev >= 0:
            t_new = t + ev_s * h_used

        # dense output over [t, t_new] from the accepted step's interpolant
        while i_out < n_out and i_out * out_dt <= t_new:
            ts = i_out * out_dt
            s = (ts - t) / h_used
            for n in range(n_neu):
                for c in range(4):
                    i = 4 * n + c
                    out[i_out, 6 * n + c] = _hermite(s, h_used, y[i], f0[i], ynew[i], f2[i])
                for sd in range(2):
                    d = 2 * n + sd
                    if dev_type[d] == THERMAL:
                        out[i_out, 6 * n + 4 + sd] = _r_thermal(out[i_out, 6 * n + 2 + sd], th, d)
                    else:
                        out[i_out, 6 * n + 4 + sd] = pw[d, PW_RON] if branch[d] == 1 else pw[d, PW_ROFF]
            i_out += 1

        if ev_dev >= 0:
            for i in range(nd):
                ynew[i] = _hermite(ev_s, h_used, y[i], f0[i], ynew[i], f2[i])
            if dev_type[ev_dev] == PIECEWISE:
                branch[ev_dev] = 1 - branch[ev_dev]
            else:
                idx_u = 4 * (ev_dev // 2) + 2 + (ev_dev % 2)
                if ev_kind == -1:
                    ynew[idx_u] = th[ev_dev, TH_UMIN]
                    pin[ev_dev] = -1
                else:
                    ynew[idx_u] = th[ev_dev, TH_UMAX]
                    pin[ev_dev] = 1

        t = t_new
        for i in range(nd):
            y[i] = ynew[i]
        for d in range(n_dev):
            if dev_type[d] == THERMAL and pin[d] != 0:
                idx_u = 4 * (d // 2) + 2 + (d % 2)
                if pin[d] == -1 and y[idx_u] > th[d, TH_UMIN]:
                    pin[d] = 0
                elif pin[d] == 1 and y[idx_u] < th[d, TH_UMAX]:
                    pin[d] = 0
        bad = False
        for i in range(nd):
            if not np.isfinite(y[i]):
                bad = True
        if bad:
            return out[:i_out], branch, STATUS_NONFINITE, t, n_steps

        if ev_dev >= 0:
            # discrete change: refresh the RHS, keep the step size
            _rhs_jac(y, f0, J, False, n_neu, c1, c2, r2, v1, v2, src_v, src_r,
                     i_bias, r_c, dev_type, branch, pin, th, pw)
            h = min(h_used, max_step)
        else:
            for i in range(nd):
                f0[i] = f2[i]
            fac = 5.0
            if errnorm > 1e-10:
                fac = 0.9 * errnorm ** (-1.0 / 3.0)
                if fac > 5.0:
                    fac = 5.0
            h = min(h * fac, max_step)

    return out[:i_out], branch, STATUS_OK, t, n_steps


@njit(cache=True, nogil=True)
def iv_ramp_thermal(th, peak, t_ramp, current_drive, rtol, atol, max_step_frac, n_out):
    """Quasi-static triangular source ramp 0 -> peak -> 0 across the bare device.

    current_drive selects an ideal current ramp (peak in A; traces the full
    NDR S-curve with no fold jumps) or an ideal voltage ramp (peak in V; the
    metallic branch collapses at the hold fold).  Returns (v, i, u, status)
    sampled uniformly in time."""
    d = 0
    u = th[d, TH_UMIN]
    pin = -1
    t_end = 2.0 * t_ramp
    out_v = np.empty(n_out)
    out_i = np.empty(n_out)
    out_u = np.empty(n_out)
    out_dt = t_end / (n_out - 1)

    t = 0.0
    h = 1e-12
    i_out = 0
    while t < t_end:
        if pin == 0:
            if u <= th[d, TH_UMIN]:
                u = th[d, TH_UMIN]
                pin = -1
            elif u >= th[d, TH_UMAX]:
                u = th[d, TH_UMAX]
                pin = 1
        if h > t_end - t:
            h = t_end - t
        if h < 1e-18:
            return out_v[:i_out], out_i[:i_out], out_u[:i_out], STATUS_STEP_UNDERFLOW

        f0 = _iv_fu(u, t, pin, th, peak, t_ramp, current_drive)
        du = 1e-9 + 1e-7 * abs(u)
        jac = (_iv_fu(u + du, t, pin, th, peak, t_ramp, current_drive)
               - _iv_fu(u - du, t, pin, th, peak, t_ramp, current_drive)) / (2.0 * du)
        w = 1.0 - h * D_GAMMA * jac
        if w == 0.0:
            h *= 0.5
            continue
        k1 = f0 / w
        f1 = _iv_fu(u + 0.5 * h * k1, t + 0.5 * h, pin, th, peak, t_ramp, current_drive)
        k2 = (f1 - k1) / w + k1
        unew = u + h * k2
        f2 = _iv_fu(unew, t + h, pin, th, peak, t_ramp, current_drive)
        k3 = (f2 - E32 * (k2 - f1) - 2.0 * (k1 - f0)) / w
        err = abs(h / 6.0 * (k1 - 2.0 * k2 + k3))
        sc = atol + rtol * max(abs(u), abs(unew))
        if err / sc > 1.0:
            h *= max(0.1, 0.9 * (err / sc) ** (-1.0 / 3.0))
            continue
        t_new = t + h
        h_used = h
        if pin == 0:
            if unew <= th[d, TH_UMIN]:
                unew = th[d, TH_UMIN]
                pin = -1
            elif unew >= th[d, TH_UMAX]:
                unew = th[d, TH_UMAX]
                pin = 1
        while i_out < n_out and i_out * out_dt <= t_new:
            ts = i_out * out_dt
            s = (ts - t) / h_used if h_used > 0.0 else 0.0
            uu = u + s * (unew - u)
            drive = _iv_drive(ts, peak, t_ramp)
            r = _r_thermal(uu, th, d)
            if current_drive:
                out_i[i_out] = drive
                out_v[i_out] = drive * r
            else:
                out_v[i_out] = drive
                out_i[i_out] = drive / r
            out_u[i_out] = uu
            i_out += 1
        t = t_new
        u = unew
        if pin == -1:
            if _iv_fu(u, t, 0, th, peak, t_ramp, current_drive) > 0.0:
                pin = 0
        elif pin == 1:
            if _iv_fu(u, t, 0, th, peak, t_ramp, current_drive) < 0.0:
                pin = 0
        fac = 5.0
        if err / sc > 1e-10:
            fac = min(5.0, 0.9 * (err / sc) ** (-1.0 / 3.0))
        h = min(h * fac, t_ramp * max_step_frac)
    return out_v[:i_out], out_i[:i_out], out_u[:i_out], STATUS_OK


@njit(cache=True, inline="always")
def _iv_drive(t, peak, t_ramp):
    return peak * (t / t_ramp) if t <= t_ramp else peak * (2.0 - t / t_ramp)


@njit(cache=True, inline="always")
def _iv_fu(u, t, pin, th, peak, t_ramp, current_drive):
    d = 0
    ue = u
    if ue < U_EVAL_FLOOR:
        ue = U_EVAL_FLOOR
    elif ue > U_EVAL_CEIL:
        ue = U_EVAL_CEIL
    r = _r_thermal(ue, th, d)
    ln = -np.log(ue)
    if ln < th[d, TH_LNF]:
        ln = th[d, TH_LNF]
    gam = th[d, TH_G0] / ln
    drive = _iv_drive(t, peak, t_ramp)
    if current_drive:
        joule = drive * drive * r
    else:
        joule = drive * drive / r
    fu = (joule - gam * th[d, TH_DT]) / (th[d, TH_DEN] * ue)
    if pin == -1 and fu <= 0.0:
        return 0.0
    if pin == 1 and fu >= 0.0:
        return 0.0
    return fu


@njit(cache=True, nogil=True)
def hysteretic_crossings(v, hi, lo):
    """Indices of upward hi-crossings gated by a prior excursion below lo."""
    idx = np.empty(v.shape[0], dtype=np.int64)
    m = 0
    below = True
    for k in range(v.shape[0]):
        if below and v[k] >= hi:
            below = False
            idx[m] = k
            m += 1
        elif not below and v[k] <= lo:
            below = True
    return idx[:m]
