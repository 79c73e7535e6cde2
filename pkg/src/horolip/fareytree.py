"""Stern-Brocot / Farey enumeration of curve slopes with log-trace kernels.

Traces of simple closed curves on the punctured torus satisfy the mediant
recursion t(a (+) b) = t(a) t(b) - t(far parent) along the Stern-Brocot
tree.  At Farey depth Q ~ 2000 the traces overflow float64, so all kernels
work with u = log t; the recursion becomes

    u_m = u_a + u_b + log1p(-exp(u_far - u_a - u_b)),

which is numerically stable because the far-parent trace is always smaller
than the product of the parents' traces.

The tree is built once per depth Q and cached: arrays of slopes (p, q) with
p, q >= 1, gcd 1, max(p, q) <= Q, in an order where parents precede
children, plus parent/far-parent indices driving the recursion.  Negative
slopes reuse the same structure through the reflected chart
(x, y, z) -> (x, y, x*y - z).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

LN2 = math.log(2.0)


def _totients(Q: int) -> np.ndarray:
    phi = np.arange(Q + 1, dtype=np.int64)
    for i in range(2, Q + 1):
        if phi[i] == i:  # prime
            phi[i::i] -= phi[i::i] // i
    return phi


def _node_count(Q: int) -> int:
    if Q < 1:
        raise ValueError("depth must be >= 1")
    phi = _totients(Q)
    return int(3 + 2 * phi[2:].sum())


@njit(cache=True)
def _fill_tree(Q, p, q, ia, ib, ifar, stack):
    p[0], q[0] = 0, 1
    p[1], q[1] = 1, 0
    p[2], q[2] = 1, 1
    for k in range(3):
        ia[k] = -1
        ib[k] = -1
        ifar[k] = -1
    count = 3
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = 2
    stack[top, 2] = 1
    top = 1
    while top > 0:
        top -= 1
        iL = stack[top, 0]
        iM = stack[top, 1]
        iR = stack[top, 2]
        pl = p[iL] + p[iM]
        ql = q[iL] + q[iM]
        if pl <= Q and ql <= Q:
            k = count
            p[k] = pl
            q[k] = ql
            ia[k] = iL
            ib[k] = iM
            ifar[k] = iR
            count += 1
            stack[top, 0] = iL
            stack[top, 1] = k
            stack[top, 2] = iM
            top += 1
        pr = p[iM] + p[iR]
        qr = q[iM] + q[iR]
        if pr <= Q and qr <= Q:
            k = count
            p[k] = pr
            q[k] = qr
            ia[k] = iM
            ib[k] = iR
            ifar[k] = iL
            count += 1
            stack[top, 0] = iM
            stack[top, 1] = k
            stack[top, 2] = iR
            top += 1
    return count


@njit(cache=True)
def _logtraces(ia, ib, ifar, count, lx, ly, lz, u):
    u[0] = lx
    u[1] = ly
    u[2] = lz
    for k in range(3, count):
        s = u[ia[k]] + u[ib[k]]
        u[k] = s + math.log1p(-math.exp(u[ifar[k]] - s))


_LN2 = math.log(2.0)


@njit(cache=True)
def _logtraces_into(ia, ib, ifar, count, lx, ly, lz, out, start, skip):
    u = np.empty(count, dtype=np.float64)
    u[0] = lx
    u[1] = ly
    u[2] = lz
    for k in range(3, count):
        s = u[ia[k]] + u[ib[k]]
        d = u[ifar[k]] - s
        if d < -37.0:
            u[k] = s  # correction below float64 resolution
        else:
            u[k] = s + math.log1p(-math.exp(d))
    out[start:start + count - skip] = u[skip:]


@njit(cache=True)
def _ell_transform(out):
    for k in range(out.shape[0]):
        v = out[k] - _LN2
        if v > 19.0:
            out[k] = 2.0 * v + 2.0 * _LN2  # asymptotic branch, error < 1e-16
        else:
            out[k] = 2.0 * (v + math.log1p(math.sqrt(-math.expm1(-2.0 * v))))


# Compensated (double-double) trace recursion with a separate power-of-two
# exponent.  A node value is (h + l) * 2^e with h in [1, 2).  Used at
# distorted markings where the plain log recursion amplifies rounding
# through deep cancellations; a per-node relative error bound is tracked
# and entries whose bound exceeds DD_ERR_LIMIT come out as nan.

DD_ERR_LIMIT = 1e-8
_SPLITTER = 134217729.0  # 2^27 + 1, Dekker split constant


@njit(cache=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, inline="always")
def _two_prod(a, b):
    p = a * b
    ca = _SPLITTER * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLITTER * b
    bh = cb - (cb - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


@njit(cache=True, inline="always")
def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    s = p + e
    return s, e - (s - p)


@njit(cache=True, inline="always")
def _dd_sub(ah, al, bh, bl):
    s, e = _two_sum(ah, -bh)
    e += al - bl
    r = s + e
    return r, e - (r - s)


@njit(cache=True)
def _dd_logtraces_into(ia, ib, ifar, count, h, l, e, err, out, start, skip):
    # h[:3], l[:3], e[:3], err[:3] hold the seeds
    for k in range(3, count):
        a = ia[k]
        b = ib[k]
        f = ifar[k]
        if h[a] != h[a] or h[b] != h[b] or h[f] != h[f]:
            h[k] = math.nan
            l[k] = 0.0
            e[k] = 0.0
            err[k] = math.inf
            continue
        ep = e[a] + e[b]
        ph, pl = _dd_mul(h[a], l[a], h[b], l[b])
        shift = e[f] - ep
        if shift < -110.0:
            rh, rl = ph, pl
            ratio_f = 0.0
        else:
            fh = math.ldexp(h[f], int(shift))
            fl = math.ldexp(l[f], int(shift))
            rh, rl = _dd_sub(ph, pl, fh, fl)
            if rh <= 0.0:
                h[k] = math.nan
                l[k] = 0.0
                e[k] = 0.0
                err[k] = math.inf
                continue
            ratio_f = fh / rh
        frac, ex = math.frexp(rh)
        h[k] = frac
        l[k] = math.ldexp(rl, -ex)
        e[k] = ep + ex
        amp = ph / rh
        err[k] = (err[a] + err[b]) * amp + err[f] * ratio_f + 1e-30
    for k in range(skip, count):
        if err[k] > DD_ERR_LIMIT or h[k] != h[k]:
            out[start + k - skip] = math.nan
        else:
            out[start + k - skip] = math.log(h[k] + l[k]) + e[k] * _LN2


@njit(cache=True)
def _masked_far_argmax(r, theta, theta0, min_dist):
    best = -math.inf
    idx = -1
    for k in range(r.shape[0]):
        d = abs(theta[k] - theta0)
        if d > math.pi - d:
            d = math.pi - d
        if d > min_dist and r[k] > best:
            best = r[k]
            idx = k
    return idx


class FareyTree:
    """Enumeration of all canonical slopes with |p|, q <= Q (and 1/0)."""

    def __init__(self, Q: int):
        n = _node_count(Q)
        p = np.empty(n, dtype=np.int64)
        q = np.empty(n, dtype=np.int64)
        ia = np.empty(n, dtype=np.int32)
        ib = np.empty(n, dtype=np.int32)
        ifar = np.empty(n, dtype=np.int32)
        stack = np.empty((4 * Q + 16, 3), dtype=np.int32)
        count = _fill_tree(Q, p, q, ia, ib, ifar, stack)
        if count != n:
            raise RuntimeError("tree size mismatch")
        self.Q = Q
        self.count = count
        self.p = p
        self.q = q
        self.ia = ia
        self.ib = ib
        self.ifar = ifar
        # full slope list: positive chart nodes, then the negative-chart
        # copies of every node except the shared seeds 0/1 and 1/0
        self.slope_p = np.concatenate([p, -p[2:]])
        self.slope_q = np.concatenate([q, q[2:]])
        # angle on the projective slope circle, for basin separation
        self.theta = np.arctan2(self.slope_p.astype(np.float64),
                                self.slope_q.astype(np.float64))
        half = Q // 2
        if half >= 1:
            m = (np.maximum(p, q) <= half)
            self.mask_half = np.concatenate([m, m[2:]])
        else:
            self.mask_half = np.ones(self.slope_p.shape, dtype=bool)

    def logtraces(self, lx: float, ly: float, lz: float) -> np.ndarray:
        u = np.empty(self.count, dtype=np.float64)
        _logtraces(self.ia, self.ib, self.ifar, self.count, lx, ly, lz, u)
        return u

    def lengths(self, chart_pos, chart_neg) -> np.ndarray:
        """Hyperbolic lengths over the full slope list (positive then negative)."""
        out = np.empty(2 * self.count - 2, dtype=np.float64)
        _logtraces_into(self.ia, self.ib, self.ifar, self.count, *chart_pos,
                        out, 0, 0)
        _logtraces_into(self.ia, self.ib, self.ifar, self.count, *chart_neg,
                        out, self.count, 2)
        _ell_transform(out)
        return out

    def lengths_dd(self, chart_pos: "DDChart", chart_neg: "DDChart") -> np.ndarray:
        """Lengths via compensated recursion; stable at distorted markings.

        Entries whose tracked error bound is too large come out as nan.
        """
        out = np.empty(2 * self.count - 2, dtype=np.float64)
        for chart, start, skip in ((chart_pos, 0, 0), (chart_neg, self.count, 2)):
            h = np.empty(self.count, dtype=np.float64)
            l = np.empty(self.count, dtype=np.float64)
            e = np.empty(self.count, dtype=np.float64)
            err = np.empty(self.count, dtype=np.float64)
            for i, (sh, sl, se, serr) in enumerate(chart.seeds):
                h[i], l[i], e[i], err[i] = sh, sl, se, serr
            _dd_logtraces_into(self.ia, self.ib, self.ifar, self.count,
                               h, l, e, err, out, start, skip)
        _ell_transform(out)
        return out

    def far_argmax(self, r: np.ndarray, theta0: float,
                   min_dist: float = 0.15) -> int:
        return int(_masked_far_argmax(r, self.theta, theta0, min_dist))


_TREES: dict[int, FareyTree] = {}


def tree(Q: int) -> FareyTree:
    t = _TREES.get(Q)
    if t is None:
        if len(_TREES) >= 4:  # trees are large; keep only a few
            _TREES.pop(next(iter(_TREES)))
        t = FareyTree(Q)
        _TREES[Q] = t
    return t


def lengths_from_logtraces(u: np.ndarray) -> np.ndarray:
    """Hyperbolic lengths 2*arccosh(t/2) from log-traces, overflow-free."""
    v = u - LN2
    return 2.0 * (v + np.log1p(np.sqrt(-np.expm1(-2.0 * v))))


def ell_scalar(u: float) -> float:
    v = u - LN2
    return 2.0 * (v + math.log1p(math.sqrt(-math.expm1(-2.0 * v))))


def combine_logtrace(ua: float, ub: float, ufar: float) -> float:
    """Log-trace of the mediant of Farey neighbours a, b with far parent."""
    s = ua + ub
    return s + math.log1p(-math.exp(ufar - s))


class LogTraceChart:
    """Carries log-traces through the mediant recursion (fast path).

    Accurate at tame markings; at wildly distorted trace triples the
    subtraction in the recursion amplifies rounding multiplicatively and
    DDChart should be used instead.
    """

    __slots__ = ("seeds",)

    def __init__(self, lx: float, ly: float, lz: float):
        self.seeds = (lx, ly, lz)

    def combine(self, va, vb, vfar):
        return combine_logtrace(va, vb, vfar)

    def logtrace(self, v):
        return v


def dd_from_float(v: float):
    """Compensated value (h, l, e, err) with v = (h + l) * 2^e exactly."""
    frac, ex = math.frexp(v)
    return (frac, 0.0, float(ex), 0.0)


def dd_combine(va, vb, vfar):
    """Mediant step t_m = t_a t_b - t_far in compensated arithmetic."""
    ah, al, ae, aerr = va
    bh, bl, be, berr = vb
    fh, fl, fe, ferr = vfar
    if ah != ah or bh != bh or fh != fh:
        return (math.nan, 0.0, 0.0, math.inf)
    ep = ae + be
    ph, pl = _dd_mul(ah, al, bh, bl)
    shift = fe - ep
    if shift < -110.0:
        rh, rl = ph, pl
        ratio_f = 0.0
    else:
        fhs = math.ldexp(fh, int(shift))
        fls = math.ldexp(fl, int(shift))
        rh, rl = _dd_sub(ph, pl, fhs, fls)
        if rh <= 0.0:
            return (math.nan, 0.0, 0.0, math.inf)
        ratio_f = fhs / rh
    frac, ex = math.frexp(rh)
    amp = ph / rh
    return (frac, math.ldexp(rl, -ex), ep + ex,
            (aerr + berr) * amp + ferr * ratio_f + 1e-30)


def dd_logtrace(v) -> float:
    h, l, e, err = v
    if h != h or err > DD_ERR_LIMIT:
        return math.nan
    return math.log(h + l) + e * _LN2


class DDChart:
    """Carries compensated traces; reliable at wildly distorted markings.

    Values are (h, l, e, err) with trace = (h + l) * 2^e; err is a running
    relative error bound and values beyond DD_ERR_LIMIT decode to nan.
    """

    __slots__ = ("seeds",)

    def __init__(self, sx, sy, sz):
        self.seeds = (sx, sy, sz)

    def combine(self, va, vb, vfar):
        return dd_combine(va, vb, vfar)

    def logtrace(self, v):
        return dd_logtrace(v)


def walk_logtrace(p: int, q: int, charts: list) -> tuple:
    """Mediant walk to the canonical slope (p, q) with p, q >= 0.

    charts is a list of chart objects (LogTraceChart or MatrixChart); the
    walk carries one opaque chart value per chart.  Returns (values, state)
    where state is the sandwich ((pL,qL,vL), (pM,qM,vM), (pR,qR,vR)) around
    the target, usable for further mediant refinement; state is None for
    the seeds 0/1, 1/0.
    """
    if q == 1 and p == 0:
        return [c.seeds[0] for c in charts], None
    if q == 0 and p == 1:
        return [c.seeds[1] for c in charts], None
    if p == 1 and q == 1:
        uL = [c.seeds[0] for c in charts]
        uM = [c.seeds[2] for c in charts]
        uR = [c.seeds[1] for c in charts]
        return list(uM), ((0, 1, uL), (1, 1, uM), (1, 0, uR))
    pL, qL, uL = 0, 1, [c.seeds[0] for c in charts]
    pR, qR, uR = 1, 0, [c.seeds[1] for c in charts]
    pM, qM, uM = 1, 1, [c.seeds[2] for c in charts]
    steps = 0
    while (pM, qM) != (p, q):
        steps += 1
        if steps > 10_000_000:
            raise RuntimeError("mediant walk did not terminate")
        if p * qM > pM * q:  # target slope is to the right of the mediant
            pn, qn = pM + pR, qM + qR
            un = [c.combine(uM[i], uR[i], uL[i]) for i, c in enumerate(charts)]
            pL, qL, uL = pM, qM, uM
        else:
            pn, qn = pL + pM, qL + qM
            un = [c.combine(uL[i], uM[i], uR[i]) for i, c in enumerate(charts)]
            pR, qR, uR = pM, qM, uM
        pM, qM, uM = pn, qn, un
    return list(uM), ((pL, qL, uL), (pM, qM, uM), (pR, qR, uR))


def refine_max(state, charts: list, objective, iters: int = 400,
               qcap: float = 1e14):
    """Greedy mediant descent maximising objective(p, q, values).

    Starting from a sandwich (L, M, R) around an incumbent slope, repeatedly
    evaluates the two mediant children and moves toward the better one,
    tracking the best value seen.  Converges like a continued-fraction
    approximation of the argmax within the bracket.
    """
    (pL, qL, uL), (pM, qM, uM), (pR, qR, uR) = state
    best = objective(pM, qM, uM)
    best_slope = (pM, qM)
    if best != best:
        best = -math.inf
    for _ in range(iters):
        pl, ql = pL + pM, qL + qM
        ul = [c.combine(uL[i], uM[i], uR[i]) for i, c in enumerate(charts)]
        pr, qr = pM + pR, qM + qR
        ur = [c.combine(uM[i], uR[i], uL[i]) for i, c in enumerate(charts)]
        vl = objective(pl, ql, ul)
        vr = objective(pr, qr, ur)
        if vl > best:
            best, best_slope = vl, (pl, ql)
        if vr > best:
            best, best_slope = vr, (pr, qr)
        if vl >= vr:
            pR, qR, uR = pM, qM, uM
            pM, qM, uM = pl, ql, ul
        else:
            pL, qL, uL = pM, qM, uM
            pM, qM, uM = pr, qr, ur
        if qM > qcap or pM > qcap:
            break
    return best, best_slope
