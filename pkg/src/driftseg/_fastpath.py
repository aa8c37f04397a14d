"""Array-based solver kernel, JIT-compiled when numba is available.

Mirrors the piecewise-quadratic recursion from :mod:`driftseg.pwq` /
:mod:`driftseg.solver` on flat coefficient arrays so the whole forward and
backward pass runs without interpreter overhead.  The pure-Python solver is
the reference; this kernel must agree with it exactly (same formulas, same
tolerances, same tie-breaking) and the test suite checks that it does.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


COEFF_TOL = 1e-12
INF = np.inf


@njit(cache=True)
def _takeover_nb(ai, bi, ci, aj, bj, cj):
    """Takeover point of quadratic i over j: ``(code, x)``.

    code 0: i is strictly below j for mu just right of x;
    code 1: i never drops below j (skip it);
    code 2: the quadratics coincide within tolerance.
    """
    da = ai - aj
    db = bi - bj
    dc = ci - cj
    if abs(da) <= COEFF_TOL:
        if abs(db) <= COEFF_TOL:
            if abs(dc) <= COEFF_TOL:
                return 2, 0.0
            if dc < 0.0:
                return 0, -INF
            return 1, 0.0
        if db < 0.0:
            return 0, -dc / db
        return 1, 0.0
    disc = db * db - 4.0 * da * dc
    if da > 0.0:
        if disc <= 0.0:
            return 1, 0.0
    elif disc <= 0.0:
        return 0, -INF
    sq = np.sqrt(disc)
    if db != 0.0:
        q = -0.5 * (db + np.copysign(sq, db))
    else:
        q = -0.5 * sq
    r1 = q / da
    r2 = dc / q
    if da > 0.0:
        return 0, min(r1, r2)
    return 0, max(r1, r2)


@njit(cache=True)
def _conv_prune(d, a, b, c, lo, s, a_s, b_s, c_s, omega, od, oa, ob, oc):
    """Shift pieces by ``-(a_s, b_s, c_s)``, convolve with ``omega``, prune.

    Reads ``s`` pieces starting at offset ``lo``; writes survivors into the
    output arrays and returns their count.  ``omega`` must be positive and
    finite.
    """
    k = 0
    for i in range(lo, lo + s):
        na = a[i] - a_s
        if na < 0.0:
            na = 0.0
        nb = b[i] - b_s
        nc = c[i] - c_s
        t = na + omega
        ta = na * omega / t
        tb = nb * omega / t
        tc = nc - nb * nb / (4.0 * t)
        if k == 0:
            od[0] = -INF
            oa[0] = ta
            ob[0] = tb
            oc[0] = tc
            k = 1
            continue
        while True:
            code, x = _takeover_nb(ta, tb, tc, oa[k - 1], ob[k - 1], oc[k - 1])
            if code != 0:
                break
            if x > od[k - 1]:
                od[k] = x
                oa[k] = ta
                ob[k] = tb
                oc[k] = tc
                k += 1
                break
            k -= 1
            if k == 0:
                od[0] = -INF
                oa[0] = ta
                ob[0] = tb
                oc[0] = tc
                k = 1
                break
    return k


@njit(cache=True)
def _min_sweep(d1, a1, b1, c1, n1, d2, a2, b2, c2, n2, od, oa, ob, oc):
    """Pointwise minimum of two piece lists; ties keep the first argument."""
    i = 0
    j = 0
    k = 0
    left = -INF
    while True:
        dF = d1[i + 1] if i + 1 < n1 else INF
        dG = d2[j + 1] if j + 1 < n2 else INF
        right = dF if dF < dG else dG
        if left < right:
            fa = a1[i]
            fb = b1[i]
            fc = c1[i]
            da = fa - a2[j]
            db = fb - b2[j]
            dc = fc - c2[j]
            nr = 0
            x1 = INF
            x2 = INF
            if abs(da) <= COEFF_TOL:
                if abs(db) > COEFF_TOL:
                    x = -dc / db
                    if left < x < right:
                        x1 = x
                        nr = 1
            else:
                disc = db * db - 4.0 * da * dc
                if disc > 0.0:
                    sq = np.sqrt(disc)
                    if db != 0.0:
                        q = -0.5 * (db + np.copysign(sq, db))
                    else:
                        q = -0.5 * sq
                    r1 = q / da
                    r2 = dc / q
                    if r1 > r2:
                        r1, r2 = r2, r1
                    if r2 - r1 > 1e-12 * max(1.0, abs(r1), abs(r2)):
                        if left < r1 < right:
                            x1 = r1
                            nr = 1
                        if left < r2 < right:
                            if nr == 0:
                                x1 = r2
                            else:
                                x2 = r2
                            nr += 1
            lo = left
            for seg in range(3):
                if seg == 0:
                    hi = x1 if nr >= 1 else right
                elif seg == 1:
                    if nr == 0:
                        break
                    hi = x2 if nr == 2 else right
                else:
                    if nr < 2:
                        break
                    hi = right
                if lo < hi:
                    if lo == -INF:
                        t = 0.0 if hi == INF else hi - 1.0
                    elif hi == INF:
                        t = lo + 1.0
                    else:
                        t = 0.5 * (lo + hi)
                    diff = (da * t + db) * t + dc
                    if diff <= 0.0:
                        pa = fa
                        pb = fb
                        pc = fc
                    else:
                        pa = a2[j]
                        pb = b2[j]
                        pc = c2[j]
                    if (
                        k > 0
                        and abs(pa - oa[k - 1]) <= COEFF_TOL
                        and abs(pb - ob[k - 1]) <= COEFF_TOL
                        and abs(pc - oc[k - 1]) <= COEFF_TOL
                    ):
                        pass
                    else:
                        od[k] = lo
                        oa[k] = pa
                        ob[k] = pb
                        oc[k] = pc
                        k += 1
                lo = hi
                if hi >= right:
                    break
        if right == INF:
            break
        if dF == right:
            i += 1
        if dG == right:
            j += 1
        left = right
    return k


@njit(cache=True)
def _piece_min(d, a, b, c, lo, s):
    """Minimum value over a piece list (assumed bounded below)."""
    best = INF
    for k in range(lo, lo + s):
        right = d[k + 1] if k + 1 - lo < s else INF
        pa = a[k]
        pb = b[k]
        pc = c[k]
        if pa > COEFF_TOL:
            v = -pb / (2.0 * pa)
            if v < d[k]:
                val = (pa * d[k] + pb) * d[k] + pc
            elif v >= right:
                continue
            else:
                val = pc - pb * pb / (4.0 * pa)
        elif abs(pb) <= COEFF_TOL:
            val = pc
        elif pb > 0.0:
            val = (pa * d[k] + pb) * d[k] + pc
        else:
            continue
        if val < best:
            best = val
    return best


@njit(cache=True)
def _argmin_shifted(d, a, b, c, lo, s, add_a, add_b, add_c, box_min):
    """Leftmost argmin and min of pieces plus a shared quadratic."""
    best_x = box_min
    best_v = INF
    found = False
    for k in range(lo, lo + s):
        left = d[k]
        right = d[k + 1] if k + 1 - lo < s else INF
        pa = a[k] + add_a
        pb = b[k] + add_b
        pc = c[k] + add_c
        if pa > COEFF_TOL:
            v = -pb / (2.0 * pa)
            if v < left:
                x = left
                val = (pa * left + pb) * left + pc
            elif v >= right:
                continue
            else:
                x = v
                val = pc - pb * pb / (4.0 * pa)
        elif abs(pb) <= COEFF_TOL:
            x = left if left > -INF else box_min
            val = pc
        elif pb > 0.0:
            x = left
            val = (pa * left + pb) * left + pc
        else:
            continue
        if val < best_v or (val == best_v and found and x < best_x):
            best_v = val
            best_x = x
            found = True
    return best_x, best_v


@njit(cache=True)
def _eval_pieces(d, a, b, c, lo, s, mu):
    i = lo
    hi = lo + s
    while hi - i > 1:
        mid = (i + hi) // 2
        if d[mid] <= mu:
            i = mid
        else:
            hi = mid
    return (a[i] * mu + b[i]) * mu + c[i]


@njit(cache=True)
def _solve_kernel(y, gam, phi, lam, beta, box_min):
    """Full forward/backward pass; returns ``(mu, cost, max_pieces)``."""
    n = y.shape[0]
    cap = 64 * n + 64
    Hd = np.empty(cap)
    Ha = np.empty(cap)
    Hb = np.empty(cap)
    Hc = np.empty(cap)
    off = np.empty(n + 1, np.int64)

    one_m = 1.0 - phi
    a0 = (1.0 - phi * phi) * gam
    off[0] = 0
    Hd[0] = -INF
    Ha[0] = a0
    Hb[0] = -2.0 * a0 * y[0]
    Hc[0] = a0 * y[0] * y[0]
    off[1] = 1
    max_pieces = 1

    # scratch buffers, regrown when a step could overflow them
    scap = 256
    sd = np.empty(scap)
    sa = np.empty(scap)
    sb = np.empty(scap)
    sc = np.empty(scap)
    ed = np.empty(scap)
    ea = np.empty(scap)
    eb = np.empty(scap)
    ec = np.empty(scap)

    for t in range(1, n):
        lo = off[t - 1]
        s = off[t] - lo
        need = 3 * (2 * s + 4) + 8
        if need > scap:
            scap = 2 * need
            sd = np.empty(scap)
            sa = np.empty(scap)
            sb = np.empty(scap)
            sc = np.empty(scap)
            ed = np.empty(scap)
            ea = np.empty(scap)
            eb = np.empty(scap)
            ec = np.empty(scap)

        z = y[t] - phi * y[t - 1]
        a_s = gam * phi * one_m
        b_s = -2.0 * gam * phi * z
        c_s = gam * phi * z * z / one_m
        sh_a = gam * one_m
        sh_b = -2.0 * gam * z
        sh_c = gam * z * z / one_m

        # tie branch, with the shared residual quadratic already added
        if lam == INF:
            n_eq = s
            qa = gam * one_m * one_m
            qb = -2.0 * gam * one_m * z
            qc = gam * z * z
            for i in range(s):
                ed[i] = Hd[lo + i]
                ea[i] = Ha[lo + i] + qa
                eb[i] = Hb[lo + i] + qb
                ec[i] = Hc[lo + i] + qc
        else:
            n_eq = _conv_prune(Hd, Ha, Hb, Hc, lo, s, a_s, b_s, c_s,
                               gam * phi + lam, ed, ea, eb, ec)
            for i in range(n_eq):
                ea[i] += sh_a
                eb[i] += sh_b
                ec[i] += sh_c

        # change branch
        if beta == INF:
            n_out = n_eq
            out_d, out_a, out_b, out_c = ed, ea, eb, ec
        else:
            gphi = gam * phi
            if gphi == 0.0:
                m = _piece_min(Hd, Ha, Hb, Hc, lo, s)
                sd[0] = -INF
                sa[0] = sh_a
                sb[0] = sh_b
                sc[0] = m + beta + sh_c
                n_ne = 1
            else:
                n_ne = _conv_prune(Hd, Ha, Hb, Hc, lo, s, a_s, b_s, c_s,
                                   gphi, sd, sa, sb, sc)
                for i in range(n_ne):
                    sa[i] += sh_a
                    sb[i] += sh_b
                    sc[i] += sh_c + beta
            base = n_eq + n_ne + 2
            n_out = _min_sweep(ed, ea, eb, ec, n_eq, sd, sa, sb, sc, n_ne,
                               sd[base:], sa[base:], sb[base:], sc[base:])
            out_d = sd[base:]
            out_a = sa[base:]
            out_b = sb[base:]
            out_c = sc[base:]

        # append to history, growing as needed
        end = off[t] + n_out
        if end > cap:
            newcap = max(2 * cap, end + 64)
            nHd = np.empty(newcap)
            nHa = np.empty(newcap)
            nHb = np.empty(newcap)
            nHc = np.empty(newcap)
            nHd[: off[t]] = Hd[: off[t]]
            nHa[: off[t]] = Ha[: off[t]]
            nHb[: off[t]] = Hb[: off[t]]
            nHc[: off[t]] = Hc[: off[t]]
            Hd, Ha, Hb, Hc = nHd, nHa, nHb, nHc
            cap = newcap
        for i in range(n_out):
            Hd[off[t] + i] = out_d[i]
            Ha[off[t] + i] = out_a[i]
            Hb[off[t] + i] = out_b[i]
            Hc[off[t] + i] = out_c[i]
        off[t + 1] = end
        if n_out > max_pieces:
            max_pieces = n_out

    # backward pass
    mu = np.empty(n)
    lo = off[n - 1]
    s = off[n] - lo
    mu[n - 1], cost = _argmin_shifted(Hd, Ha, Hb, Hc, lo, s, 0.0, 0.0, 0.0, box_min)
    scap2 = 4 * max_pieces + 16
    td = np.empty(scap2)
    ta = np.empty(scap2)
    tb = np.empty(scap2)
    tc = np.empty(scap2)
    for t in range(n - 2, -1, -1):
        lo = off[t]
        s = off[t + 1] - lo
        mu_next = mu[t + 1]
        w = (y[t + 1] - mu_next) - phi * y[t]
        ar_a = gam * phi * phi
        ar_b = 2.0 * gam * phi * w
        ar_c = gam * w * w
        if lam == INF:
            val_eq = _eval_pieces(Hd, Ha, Hb, Hc, lo, s, mu_next)
            val_eq += (ar_a * mu_next + ar_b) * mu_next + ar_c
            if beta == INF:
                mu[t] = mu_next
                continue
            x, v = _argmin_shifted(Hd, Ha, Hb, Hc, lo, s,
                                   ar_a, ar_b, ar_c + beta, box_min)
            mu[t] = mu_next if val_eq <= v else x
        else:
            for i in range(s):
                td[i] = Hd[lo + i]
                ta[i] = Ha[lo + i] + lam
                tb[i] = Hb[lo + i] - 2.0 * lam * mu_next
                tc[i] = Hc[lo + i] + lam * mu_next * mu_next
            if beta == INF:
                x, v = _argmin_shifted(td, ta, tb, tc, 0, s,
                                       ar_a, ar_b, ar_c, box_min)
                mu[t] = x
                continue
            base = s + 2
            for i in range(s):
                td[base + i] = Hd[lo + i]
                ta[base + i] = Ha[lo + i]
                tb[base + i] = Hb[lo + i]
                tc[base + i] = Hc[lo + i] + beta
            base2 = 2 * s + 4
            need2 = base2 + 3 * (2 * s + 2) + 8
            if need2 > scap2:
                scap2 = 2 * need2
                ntd = np.empty(scap2)
                nta = np.empty(scap2)
                ntb = np.empty(scap2)
                ntc = np.empty(scap2)
                ntd[:base2] = td[:base2]
                nta[:base2] = ta[:base2]
                ntb[:base2] = tb[:base2]
                ntc[:base2] = tc[:base2]
                td, ta, tb, tc = ntd, nta, ntb, ntc
            n_m = _min_sweep(td, ta, tb, tc, s,
                             td[base:], ta[base:], tb[base:], tc[base:], s,
                             td[base2:], ta[base2:], tb[base2:], tc[base2:])
            x, v = _argmin_shifted(td[base2:], ta[base2:], tb[base2:], tc[base2:],
                                   0, n_m, ar_a, ar_b, ar_c, box_min)
            mu[t] = x
    return mu, cost, max_pieces


def solve_arrays(y: np.ndarray, gam: float, phi: float, lam: float, beta: float, box_min: float):
    """Entry point used by :func:`driftseg.solver.solve`."""
    return _solve_kernel(np.ascontiguousarray(y, dtype=np.float64),
                         float(gam), float(phi), float(lam), float(beta), float(box_min))
