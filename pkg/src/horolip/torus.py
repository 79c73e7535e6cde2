"""Thurston's Lipschitz metric on the once-punctured torus.

Teichmueller space is charted by Fricke trace triples (x, y, z) on the
Markov cubic x^2 + y^2 + z^2 = x y z, the traces of the curves of slope
0/1, 1/0, 1/1.  Simple closed curves are coprime slopes; measured
laminations are projective slopes with a weight.  Lengths come from the
trace-length relation ell = 2 arccosh(t / 2), and the distance

    L(x, y) = log sup_curves ell_y / ell_x

is approximated by exhaustive Farey enumeration to depth Q followed by
mediant (continued-fraction) refinement around the incumbent.  The limiting
horofunction of a sequence converging to the projective lamination [mu] is

    log( sup_eta i(mu, eta) / ell_x(eta)  /  sup_eta i(mu, eta) / ell_b(eta) ),

evaluated by the same slope search.  The mapping class group acts through
the linear action on slopes; pulled-back trace triples are obtained by
evaluating traces of the preimage marking curves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import fareytree
from .errors import ContractError, DegenerateError
from .fareytree import combine_logtrace, ell_scalar, refine_max, walk_logtrace
from .horoboundary import AsymmetricSpace

# validation gate for incoming triples; loose enough to accept literals
# quoted to 8 significant digits, while the constructors themselves stay
# on the cubic to ~1e-14 relative
MARKOV_TOL = 1e-6
DEGENERATE_TRACE_TOL = 1e-12
LOG_TRACE_OVERFLOW = 700.0
DEFAULT_DEPTH = 2000
REDUCE_TRIGGER = 1e4  # above this trace, reduce the marking before searching


def _canon_slope(p: int, q: int) -> tuple[int, int]:
    if p == 0 and q == 0:
        raise ContractError("slope (0, 0) is not a curve")
    g = math.gcd(abs(p), abs(q))
    p, q = p // g, q // g
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return p, q


@dataclass(frozen=True)
class CurveSlope:
    """A simple closed curve, as a canonical coprime slope p/q."""

    p: int
    q: int

    def __post_init__(self):
        if (self.p, self.q) != _canon_slope(self.p, self.q):
            raise ContractError(f"slope ({self.p}, {self.q}) is not canonical")

    @classmethod
    def make(cls, p: int, q: int) -> "CurveSlope":
        return cls(*_canon_slope(p, q))

    def __repr__(self):
        return f"CurveSlope({self.p}/{self.q})"


@dataclass(frozen=True)
class ProjectiveSlope:
    """A point of projective lamination space: a real pair up to scale."""

    a: float
    b: float

    @classmethod
    def make(cls, a: float, b: float) -> "ProjectiveSlope":
        s = max(abs(a), abs(b))
        if s == 0:
            raise ContractError("projective slope needs a nonzero pair")
        a, b = a / s, b / s
        if b < 0 or (b == 0 and a < 0):
            a, b = -a, -b
        return cls(a, b)

    @classmethod
    def of_curve(cls, c: CurveSlope) -> "ProjectiveSlope":
        return cls.make(float(c.p), float(c.q))

    def same(self, other: "ProjectiveSlope", tol: float = 1e-12) -> bool:
        return abs(self.a * other.b - self.b * other.a) <= tol


@dataclass(frozen=True)
class MeasuredLam:
    """A measured lamination on the torus: projective slope plus weight."""

    slope: ProjectiveSlope
    weight: float

    def __post_init__(self):
        if not self.weight > 0:
            raise ContractError("lamination weight must be positive")

    @classmethod
    def of_curve(cls, c: CurveSlope, weight: float = 1.0) -> "MeasuredLam":
        """The measured lamination weight * c; the stored weight absorbs the
        projective normalization so intersection numbers scale correctly."""
        scale = max(abs(c.p), abs(c.q))
        return cls(ProjectiveSlope.of_curve(c), weight * scale)


@dataclass(frozen=True)
class TracePoint:
    """A hyperbolic structure as the trace triple of the marking curves."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for t in (self.x, self.y, self.z):
            if not t > 2:
                raise ContractError(f"trace {t} not > 2; not a hyperbolic point")
        res = self.markov_residual()
        if res > MARKOV_TOL:
            raise ContractError(f"relative Markov residual {res:.3e} too large")

    def markov_residual(self) -> float:
        """Relative defect from the cubic, stable for arbitrarily large traces.

        The smallest coordinate of an exact triple is the minus root of
        t^2 - ab t + a^2 + b^2 in the two larger ones, evaluated through the
        product of roots so no overflow or cancellation occurs.
        """
        a, s, c = sorted((self.x, self.y, self.z), reverse=True)
        if a * s < 1e150:
            disc = (a * s) ** 2 - 4.0 * (a * a + s * s)
            if disc <= 0:
                return abs(a * a + s * s + c * c - a * s * c) / max(1.0, a * s * c)
            pred = (a * a + s * s) / ((a * s + math.sqrt(disc)) / 2.0)
        else:
            pred = a / s + s / a
        return abs(c - pred) / pred

    def to_json(self) -> str:
        return json.dumps({"x": self.x, "y": self.y, "z": self.z})

    @classmethod
    def from_json(cls, text: str) -> "TracePoint":
        d = json.loads(text)
        return cls(float(d["x"]), float(d["y"]), float(d["z"]))


BASE = TracePoint(3.0, 3.0, 3.0)  # the modular torus


def teich_from_xy(x: float, y: float, branch: str = "minus") -> TracePoint:
    """Chart on Teichmueller space: solve the Markov cubic for z.

    `plus` picks the larger root of z^2 - x y z + x^2 + y^2 = 0.
    """
    if not (x > 2 and y > 2):
        raise ContractError("chart requires x, y > 2")
    disc = (x * y) ** 2 - 4.0 * (x * x + y * y)
    if disc < 0:
        raise ContractError("outside chart: negative discriminant")
    r = math.sqrt(disc)
    if branch == "plus":
        z = (x * y + r) / 2.0
    elif branch == "minus":
        z = (x * y - r) / 2.0
    else:
        raise ContractError("branch must be 'plus' or 'minus'")
    return TracePoint(x, y, z)


def _chart(pt: TracePoint, sign: int) -> tuple[float, float, float]:
    """Log-trace seeds; negative slopes use the reflected chart z -> xy - z."""
    if sign >= 0:
        return (math.log(pt.x), math.log(pt.y), math.log(pt.z))
    zr = pt.x * pt.y - pt.z
    if not zr > 2:
        raise DegenerateError("reflected trace not > 2")
    return (math.log(pt.x), math.log(pt.y), math.log(zr))


def _distorted(pt: TracePoint) -> bool:
    return max(pt.x, pt.y, pt.z) > REDUCE_TRIGGER


def _dd_chart(pt: TracePoint, sign: int) -> fareytree.DDChart:
    sx = fareytree.dd_from_float(pt.x)
    sy = fareytree.dd_from_float(pt.y)
    if sign >= 0:
        sz = fareytree.dd_from_float(pt.z)
    else:
        # reflected chart seed x*y - z, compensated so the cancellation
        # against a huge product stays exact
        sz = fareytree.dd_combine(sx, sy, fareytree.dd_from_float(pt.z))
        if not fareytree.dd_logtrace(sz) > math.log(2.0):
            raise DegenerateError("reflected trace not > 2")
    return fareytree.DDChart(sx, sy, sz)


def _chart_obj(pt: TracePoint, sign: int):
    if _distorted(pt):
        return _dd_chart(pt, sign)
    return fareytree.LogTraceChart(*_chart(pt, sign))


def curve_log_trace(pt: TracePoint, c: CurveSlope) -> float:
    sign = 1 if c.p >= 0 else -1
    ch = _chart_obj(pt, sign)
    u, _ = walk_logtrace(abs(c.p), c.q, [ch])
    return ch.logtrace(u[0])


def curve_trace(pt: TracePoint, c: CurveSlope) -> float:
    """Trace of the curve of slope c, via the Farey mediant recursion."""
    u = curve_log_trace(pt, c)
    if u > LOG_TRACE_OVERFLOW:
        raise DegenerateError(f"trace overflow for slope {c}")
    return math.exp(u)


def curve_length(pt: TracePoint, c: CurveSlope) -> float:
    """Hyperbolic length 2 arccosh(t/2) of the geodesic of slope c."""
    u = curve_log_trace(pt, c)
    if u <= math.log(2.0 + DEGENERATE_TRACE_TOL):
        raise DegenerateError(f"trace within tolerance of 2 for slope {c}")
    return ell_scalar(u)


def intersection(mu: MeasuredLam, c: CurveSlope) -> float:
    """Geometric intersection number of a lamination with a curve."""
    return mu.weight * abs(mu.slope.a * c.q - mu.slope.b * c.p)


def intersection_curves(c1: CurveSlope, c2: CurveSlope) -> int:
    return abs(c1.p * c2.q - c1.q * c2.p)


def realize_matrices(pt: TracePoint):
    """SL(2, R) matrices (A, B) with tr A = x, tr B = y, tr AB = z.

    The commutator trace is forced to -2 by the Fricke identity whenever
    the triple lies on the Markov cubic.
    """
    if pt.z <= 2:
        raise DegenerateError("z must exceed 2")
    if pt.z < 1e150:
        zeta = (pt.z + math.sqrt(pt.z * pt.z - 4.0)) / 2.0
    else:
        zeta = pt.z  # the 1/z correction is below float resolution
    A = np.array([[pt.x, -1.0], [1.0, 0.0]])
    B = np.array([[0.0, zeta], [-1.0 / zeta, pt.y]])
    return A, B


def matrix_word(pt: TracePoint, c: CurveSlope) -> np.ndarray:
    """Matrix for the curve word of slope c: W(mediant) = W(left) W(right)."""
    A, B = realize_matrices(pt)
    if c.p < 0:
        B = np.linalg.inv(B)
    p, q = abs(c.p), c.q
    if (p, q) == (0, 1):
        return A
    if (p, q) == (1, 0):
        return B
    WL, (pL, qL) = A, (0, 1)
    WR, (pR, qR) = B, (1, 0)
    WM, (pM, qM) = A @ B, (1, 1)
    while (pM, qM) != (p, q):
        if p * qM > pM * q:
            Wn, pn, qn = WM @ WR, pM + pR, qM + qR
            WL, pL, qL = WM, pM, qM
        else:
            Wn, pn, qn = WL @ WM, pL + pM, qL + qM
            WR, pR, qR = WM, pM, qM
        WM, pM, qM = Wn, pn, qn
    return WM


# ---------------------------------------------------------------------------
# Mapping class group action


def _check_mcg(g) -> tuple[int, int, int, int]:
    a, b = int(g[0][0]), int(g[0][1])
    c, d = int(g[1][0]), int(g[1][1])
    if abs(a * d - b * c) != 1:
        raise ContractError("mapping class matrix must have determinant +-1")
    return a, b, c, d


def mcg_apply_slope(g, c: CurveSlope) -> CurveSlope:
    a, b, cc, d = _check_mcg(g)
    return CurveSlope.make(a * c.p + b * c.q, cc * c.p + d * c.q)


def mcg_apply(g, pt: TracePoint) -> TracePoint:
    """Pull back the hyperbolic structure along the mapping class g.

    The new trace of the marking curve e is the old trace of g^{-1} e, so
    the image point is computed by three trace evaluations; the Markov
    relation is inherited from the underlying representation.
    """
    a, b, c, d = _check_mcg(g)
    det = a * d - b * c
    ginv = ((det * d, -det * b), (-det * c, det * a))
    traces = []
    for e in ((0, 1), (1, 0), (1, 1)):
        p = ginv[0][0] * e[0] + ginv[0][1] * e[1]
        q = ginv[1][0] * e[0] + ginv[1][1] * e[1]
        s = CurveSlope.make(p, q)
        u = curve_log_trace(pt, s)
        if u != u or u > LOG_TRACE_OVERFLOW:
            raise DegenerateError("trace overflow under mapping class action")
        traces.append(math.exp(u))
    return TracePoint(*_project_markov(*traces))


def _project_markov(tx: float, ty: float, tz: float):
    """Recompute the smallest trace stably from the other two.

    Any coordinate of a Markov triple is a root of t^2 - ab t + a^2 + b^2
    in the other two; the smallest coordinate is always the minus root,
    and evaluating it through the product of roots avoids the cancellation
    that otherwise accumulates under repeated marking changes.
    """
    vals = [tx, ty, tz]
    i = vals.index(min(vals))
    a, b = (v for j, v in enumerate(vals) if j != i)
    if a * b < 1e150:
        disc = (a * b) ** 2 - 4.0 * (a * a + b * b)
        if disc <= 0:
            return tx, ty, tz  # nearly symmetric triple; nothing to clean
        big = (a * b + math.sqrt(disc)) / 2.0
        vals[i] = (a * a + b * b) / big
    else:
        vals[i] = a / b + b / a
    return vals[0], vals[1], vals[2]


def twist_matrix(c: CurveSlope):
    """Dehn twist about the curve of slope c, acting on slopes."""
    p, q = c.p, c.q
    return ((1 - p * q, p * p), (-q * q, 1 + p * q))


def _mat_mul(m1, m2):
    return (
        (m1[0][0] * m2[0][0] + m1[0][1] * m2[1][0],
         m1[0][0] * m2[0][1] + m1[0][1] * m2[1][1]),
        (m1[1][0] * m2[0][0] + m1[1][1] * m2[1][0],
         m1[1][0] * m2[0][1] + m1[1][1] * m2[1][1]),
    )


def _mat_inv(m):
    a, b = m[0]
    c, d = m[1]
    det = a * d - b * c
    return ((det * d, -det * b), (-det * c, det * a))


def _mat_vec(m, p, q):
    return (m[0][0] * p + m[0][1] * q, m[1][0] * p + m[1][1] * q)


def _orbit_point(m, base: TracePoint) -> TracePoint:
    """Orbit point m . base carrying its exact marking as provenance.

    The attached (m, base) pair lets distance and horofunction evaluations
    transport slopes back to the tame base marking, which stays accurate at
    distortions far beyond what any fixed-precision recursion can handle.
    """
    pt = mcg_apply(m, base)
    object.__setattr__(pt, "_orbit", (m, base))
    return pt


def twist_sequence(c: CurveSlope, n_max: int, base: TracePoint = BASE):
    """Orbit of the base point under powers of the Dehn twist about c."""
    T = twist_matrix(c)
    out = [base]
    g = ((1, 0), (0, 1))
    for _ in range(n_max):
        g = _mat_mul(T, g)
        out.append(_orbit_point(g, base))
    return out


def pa_sequence(g, n_max: int, base: TracePoint = BASE):
    """Orbit of the base point under powers of a hyperbolic mapping class."""
    a, b, c, d = _check_mcg(g)
    if a * d - b * c != 1 or abs(a + d) <= 2:
        raise ContractError("pseudo-Anosov matrix must have det 1 and |trace| > 2")
    gt = ((a, b), (c, d))
    out = [base]
    acc = ((1, 0), (0, 1))
    for _ in range(n_max):
        acc = _mat_mul(gt, acc)
        out.append(_orbit_point(acc, base))
    return out


_REDUCE_GENS = (
    ((0, -1), (1, 0)),
    ((1, 1), (0, 1)),
    ((1, -1), (0, 1)),
    ((1, 0), (1, 1)),
    ((1, 0), (-1, 1)),
)


def _max_trace(pt: TracePoint) -> float:
    return max(pt.x, pt.y, pt.z)


def _reduce_key(x: TracePoint, y: TracePoint) -> tuple[float, float]:
    lx = math.log(_max_trace(x))
    ly = math.log(_max_trace(y))
    return (max(lx, ly), lx + ly)


def _key_better(k1, k0) -> bool:
    if k1[0] < k0[0] - 1e-9:
        return True
    if k1[0] > k0[0] + 1e-9:
        return False
    return k1[1] < k0[1] - 1e-9


def reduce_marking_pair(x: TracePoint, y: TracePoint):
    """Common change of marking taming both trace triples.

    Walking the Farey recursion from a wildly distorted marking loses
    precision, so distance computations first move the pair to a marking
    minimising the traces.  Returns (g0, x', y') with x' = g0 . x and
    y' = g0 . y; greedy descent on (larger max trace, product of max
    traces).  For genuinely distant pairs no marking tames both ends; the
    descent then balances the distortion between them.
    """
    g0 = ((1, 0), (0, 1))
    key = _reduce_key(x, y)
    for _ in range(1000):
        best = None
        for h in _REDUCE_GENS:
            try:
                nx = mcg_apply(h, x)
                ny = mcg_apply(h, y)
            except (DegenerateError, ContractError):
                continue
            k = _reduce_key(nx, ny)
            if _key_better(k, key):
                best = (h, nx, ny)
                key = k
        if best is None:
            break
        h, x, y = best
        g0 = _mat_mul(h, g0)
    return g0, x, y


def attracting_slope(g) -> ProjectiveSlope:
    """Expanding eigendirection of a hyperbolic integer matrix."""
    a, b, c, d = _check_mcg(g)
    tr = a + d
    if a * d - b * c != 1 or abs(tr) <= 2:
        raise ContractError("matrix must have det 1 and |trace| > 2")
    lam = (tr + math.copysign(math.sqrt(tr * tr - 4.0), tr)) / 2.0
    if abs(b) > abs(lam - a):
        return ProjectiveSlope.make(b, lam - a)
    return ProjectiveSlope.make(lam - d, c)


# ---------------------------------------------------------------------------
# Distance and horofunction via Farey enumeration + mediant refinement


@lru_cache(maxsize=8)
def _ell_cached(x: float, y: float, z: float, Q: int) -> np.ndarray:
    """Hyperbolic lengths over the full depth-Q slope list."""
    t = fareytree.tree(Q)
    pt = TracePoint(x, y, z)
    if _distorted(pt):
        return t.lengths_dd(_dd_chart(pt, 1), _dd_chart(pt, -1))
    return t.lengths(_chart(pt, 1), _chart(pt, -1))


_LN2_FLOOR = math.log(2.0) + 1e-15


def _ell_of(u: float) -> float:
    """Length from a log-trace; nan marks unusable (corrupt or degenerate)."""
    if u != u or u <= _LN2_FLOOR:
        return math.nan
    return ell_scalar(u)


def _ell(pt: TracePoint, Q: int) -> np.ndarray:
    return _ell_cached(pt.x, pt.y, pt.z, Q)


def _witness_index(r: np.ndarray, t: "fareytree.FareyTree", atol: float = 1e-12) -> int:
    """Deterministic argmax: smallest q, then smallest |p|, then p >= 0 first."""
    with np.errstate(invalid="ignore"):
        m = np.nanmax(r)
    if not math.isfinite(m):
        raise DegenerateError("length ratio search produced no finite values")
    cand = np.flatnonzero(r >= m - atol)
    keys = np.lexsort((t.slope_p[cand] < 0, np.abs(t.slope_p[cand]), t.slope_q[cand]))
    return int(cand[keys[0]])


def _refine_states(sign: int, p: int, q: int, charts_of_sign):
    """Mediant-refinement starting sandwiches around a grid incumbent."""
    states = []
    if q == 1 and p == 0:
        for s in (1, -1):
            ch = charts_of_sign(s)
            _, st = walk_logtrace(1, 2, ch)
            states.append((s, ch, st))
    elif q == 0:
        for s in (1, -1):
            ch = charts_of_sign(s)
            _, st = walk_logtrace(2, 1, ch)
            states.append((s, ch, st))
    else:
        ch = charts_of_sign(sign)
        _, st = walk_logtrace(abs(p), q, ch)
        states.append((sign, ch, st))
    return states


def _refined_max(r: np.ndarray, t, charts_of_sign, objective_of_sign,
                 iters: int) -> tuple[float, int]:
    """Grid max of r plus mediant refinement around the top two basins."""
    idx = _witness_index(r, t)
    best = float(r[idx])
    starts = [idx]
    far = t.far_argmax(r, float(t.theta[idx]))
    if far >= 0:
        starts.append(far)
    if iters > 0:
        for i in starts:
            sign = 1 if t.slope_p[i] >= 0 else -1
            for s, ch, st in _refine_states(sign, int(abs(t.slope_p[i])),
                                            int(t.slope_q[i]), charts_of_sign):
                if st is None:
                    continue
                v, _ = refine_max(st, ch, objective_of_sign(s, ch), iters=iters)
                if v > best:
                    best = v
    return best, idx


@dataclass(frozen=True)
class DistanceResult:
    value: float
    witness: CurveSlope
    err_estimate: float

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# Distances between orbit points via slope transport
#
# Points produced by twist_sequence / pa_sequence carry their exact marking
# change (m, base).  The length of a slope s at m.base equals the length of
# m^{-1} s at the tame base, where the scalar log-trace walk is stable for
# arbitrarily large slopes; this evaluates distances at distortions far
# beyond the reach of any fixed-precision recursion at the distorted triple.


class _TransportedLength:
    """Log-length evaluator for a point, routed through its tame marking."""

    def __init__(self, pt: TracePoint):
        orbit = getattr(pt, "_orbit", None)
        if orbit is not None:
            m, base = orbit
            self.mat = m
            self.minv = _mat_inv(m)
            self.base = base
        else:
            self.mat = ((1, 0), (0, 1))
            self.minv = ((1, 0), (0, 1))
            self.base = pt
        self.charts = (fareytree.LogTraceChart(*_chart(self.base, 1)),
                       fareytree.LogTraceChart(*_chart(self.base, -1)))
        self.cache: dict = {}

    def log_trace(self, p: int, q: int) -> float:
        key = (p, q)
        v = self.cache.get(key)
        if v is None:
            tp, tq = _canon_slope(*_mat_vec(self.minv, p, q))
            ch = self.charts[0] if tp >= 0 else self.charts[1]
            try:
                u, _ = walk_logtrace(abs(tp), tq, [ch])
                v = u[0]
            except (DegenerateError, RuntimeError):
                v = math.nan
            self.cache[key] = v
        return v

    def log_ell(self, p: int, q: int) -> float:
        ell = _ell_of(self.log_trace(p, q))
        return math.log(ell) if ell == ell and ell > 0 else math.nan


_TRANSPORT_CACHE: dict = {}


def _transported_length(pt: TracePoint) -> _TransportedLength:
    orbit = getattr(pt, "_orbit", None)
    if orbit is None:
        key = (None, pt.x, pt.y, pt.z)
    else:
        m, base = orbit
        key = (m, base.x, base.y, base.z)
    ln = _TRANSPORT_CACHE.get(key)
    if ln is None:
        if len(_TRANSPORT_CACHE) >= 64:
            _TRANSPORT_CACHE.pop(next(iter(_TRANSPORT_CACHE)))
        ln = _TransportedLength(pt)
        _TRANSPORT_CACHE[key] = ln
    return ln


def _farey_parents(p: int, q: int):
    """Vectors L, R with L + R = (p, q) and det(L, R) = -1; needs q >= 1."""
    if q == 1:
        return (-1, 0), (p + 1, 1)
    b = pow(p % q, -1, q)
    a = (b * p - 1) // q
    return (a, b), (p - a, q - b)


def _vec_refine(ends, objective, L, M, R, iters: int, cap: int):
    """Greedy mediant descent on integer slope vectors, tracking the best.

    The trace recursion commutes with the linear change of marking, so the
    per-endpoint log-traces are carried incrementally through the sandwich:
    for M = L + R the children are L+M and M+R with the opposite vertex as
    far parent.  Only the three seed vectors need explicit walks.
    """
    uL = [e.log_trace(*L) for e in ends]
    uM = [e.log_trace(*M) for e in ends]
    uR = [e.log_trace(*R) for e in ends]
    if any(u != u for u in uL + uM + uR):
        return -math.inf, M

    def child(i, ua, ub, ufar, vec):
        # when the subtraction would cancel badly (the child passes near a
        # short transported curve) fall back to a fresh stable walk
        if ua != ua or ub != ub or ufar != ufar:
            return math.nan
        s = ua + ub
        if ufar - s > -20.0:
            return ends[i].log_trace(*vec)
        return s + math.log1p(-math.exp(ufar - s))

    best = objective(uM)
    best_slope = M
    if best != best:
        best = -math.inf
    for _ in range(iters):
        Ml = (L[0] + M[0], L[1] + M[1])
        Mr = (M[0] + R[0], M[1] + R[1])
        ul = [child(i, uL[i], uM[i], uR[i], Ml) for i in range(len(ends))]
        ur = [child(i, uM[i], uR[i], uL[i], Mr) for i in range(len(ends))]
        vl = objective(ul)
        vr = objective(ur)
        if vl > best:
            best, best_slope = vl, Ml
        if vr > best:
            best, best_slope = vr, Mr
        if vl >= vr:
            R, M, uR, uM = M, Ml, uM, ul
        else:
            L, M, uL, uM = M, Mr, uM, ur
        if abs(M[0]) > cap or M[1] > cap:
            break
    return best, best_slope


_TRANSPORT_GRID = 48
_TRANSPORT_IMAGE_GRID = 36


def _transported_candidates(ends) -> set:
    """Canonical Farey grid plus its images under the marking changes."""
    t1 = fareytree.tree(_TRANSPORT_GRID)
    cands = {(int(t1.slope_p[i]), int(t1.slope_q[i]))
             for i in range(len(t1.slope_p))}
    t2 = fareytree.tree(_TRANSPORT_IMAGE_GRID)
    for ln in ends:
        if ln.mat == ((1, 0), (0, 1)):
            continue
        for i in range(len(t2.slope_p)):
            v = _mat_vec(ln.mat, int(t2.slope_p[i]), int(t2.slope_q[i]))
            cands.add(_canon_slope(*v))
    return cands


def _transported_max(ends, objective, refine_iters: int):
    """Grid search plus incremental mediant refinement over slope vectors.

    objective maps the list of per-endpoint log-traces to a real; returns
    (best value, witness vector, grid-only value).
    """
    best = -math.inf
    wit = None
    for p, q in sorted(_transported_candidates(ends),
                       key=lambda s: (s[1], abs(s[0]), s[0] < 0)):
        v = objective([e.log_trace(p, q) for e in ends])
        if v > best + 1e-15:
            best, wit = v, (p, q)
    if wit is None:
        raise DegenerateError("transported ratio search produced no finite values")
    grid_best = best
    starts = []
    if wit[1] == 0:
        for pp in (2, -2):
            L, R = _farey_parents(pp, 1)
            starts.append((L, (pp, 1), R))
    else:
        L, R = _farey_parents(*wit)
        starts.append((L, wit, R))
    cap = max(abs(wit[0]), wit[1], 1) << 60
    for L, M, R in starts:
        v, s = _vec_refine(ends, objective, L, M, R, refine_iters, cap)
        if v > best:
            best, wit = v, s
    return best, wit, grid_best


def _transported_distance(x: TracePoint, y: TracePoint,
                          refine_iters: int) -> DistanceResult:
    ends = [_transported_length(x), _transported_length(y)]

    def objective(us):
        a = _ell_of(us[0])
        b = _ell_of(us[1])
        if a != a or b != b:
            return -math.inf
        return math.log(b) - math.log(a)

    best, wit, grid_best = _transported_max(ends, objective, refine_iters)
    return DistanceResult(best, CurveSlope.make(*wit), abs(best - grid_best))


def lipschitz_distance(x: TracePoint, y: TracePoint, depth: int = DEFAULT_DEPTH,
                       refine_iters: int = 400) -> DistanceResult:
    """log sup over curves of ell_y / ell_x, by depth-Q search + refinement.

    The result is a lower bound on the true supremum; the reported error
    estimate is the observed change from the half-depth grid.
    """
    if depth < 1:
        raise ContractError("depth must be >= 1")
    if (x.x, x.y, x.z) == (y.x, y.y, y.z):
        return DistanceResult(0.0, CurveSlope(0, 1), 0.0)
    if _distorted(x) or _distorted(y):
        ox = getattr(x, "_orbit", None)
        oy = getattr(y, "_orbit", None)
        if ((ox is not None or not _distorted(x))
                and (oy is not None or not _distorted(y))):
            return _transported_distance(x, y, refine_iters)
    if max(_max_trace(x), _max_trace(y)) > REDUCE_TRIGGER:
        g0, xr, yr = reduce_marking_pair(x, y)
        if g0 != ((1, 0), (0, 1)):
            res = lipschitz_distance(xr, yr, depth, refine_iters)
            a, b = g0[0]
            c, d = g0[1]
            det = a * d - b * c
            ginv = ((det * d, -det * b), (-det * c, det * a))
            w = mcg_apply_slope(ginv, res.witness)
            return DistanceResult(res.value, w, res.err_estimate)
    t = fareytree.tree(depth)
    ax = _ell(x, depth)
    ay = _ell(y, depth)
    r = ay / ax

    def charts_of_sign(s):
        return [_chart_obj(x, s), _chart_obj(y, s)]

    def objective_of_sign(s, ch):
        def obj(p, q, u):
            den = _ell_of(ch[0].logtrace(u[0]))
            num = _ell_of(ch[1].logtrace(u[1]))
            if den != den or num != num:
                return -math.inf
            return num / den
        return obj

    best, idx = _refined_max(r, t, charts_of_sign, objective_of_sign, refine_iters)
    with np.errstate(invalid="ignore"):
        half = math.log(float(np.nanmax(r[t.mask_half])))
    value = math.log(best)
    witness = CurveSlope(int(t.slope_p[idx]), int(t.slope_q[idx]))
    return DistanceResult(value, witness, abs(value - half))


def maxset(x: TracePoint, y: TracePoint, depth: int = DEFAULT_DEPTH,
           rel_tol: float = 1e-8) -> list[CurveSlope]:
    """All depth-Q slopes whose length ratio is within rel_tol of the max."""
    if depth < 1:
        raise ContractError("depth must be >= 1")
    t = fareytree.tree(depth)
    r = _ell(y, depth) / _ell(x, depth)
    with np.errstate(invalid="ignore"):
        m = np.nanmax(r)
    if not math.isfinite(m):
        raise DegenerateError("length ratio search produced no finite values")
    cand = np.flatnonzero(r >= m * (1.0 - rel_tol))
    order = np.lexsort((t.slope_p[cand] < 0, np.abs(t.slope_p[cand]),
                        t.slope_q[cand]))
    return [CurveSlope(int(t.slope_p[i]), int(t.slope_q[i])) for i in cand[order]]


def _log_sup_i_over_ell(a: float, b: float, pt: TracePoint, Q: int,
                        refine_iters: int) -> tuple[float, float]:
    """log sup over slopes of i((a:b), .) / ell_pt, with half-depth value."""
    t = fareytree.tree(Q)
    inter = np.abs(a * t.slope_q - b * t.slope_p.astype(np.float64))
    r = inter / _ell(pt, Q)

    def charts_of_sign(s):
        return [_chart_obj(pt, s)]

    def objective_of_sign(s, ch):
        def obj(p, q, u):
            den = _ell_of(ch[0].logtrace(u[0]))
            if den != den:
                return -math.inf
            return abs(a * q - b * s * p) / den
        return obj

    best, _ = _refined_max(r, t, charts_of_sign, objective_of_sign, refine_iters)
    with np.errstate(invalid="ignore"):
        half = math.log(float(np.nanmax(r[t.mask_half])))
    return math.log(best), half


@lru_cache(maxsize=32)
def _horo_denominator(a: float, b: float, bx: float, by: float, bz: float,
                      Q: int, refine_iters: int) -> tuple[float, float]:
    return _log_sup_i_over_ell(a, b, TracePoint(bx, by, bz), Q, refine_iters)


@dataclass(frozen=True)
class HoroResult:
    value: float
    err_estimate: float

    def __float__(self):
        return self.value


def horofunction(mu: MeasuredLam, x: TracePoint, depth: int = DEFAULT_DEPTH,
                 base: TracePoint = BASE, refine_iters: int = 400) -> HoroResult:
    """Limiting horofunction of sequences converging to [mu], evaluated at x.

    The weight of mu cancels algebraically and is never used, so scale
    invariance holds bit-for-bit.
    """
    if depth < 1:
        raise ContractError("depth must be >= 1")
    a, b = mu.slope.a, mu.slope.b
    na, nb, nx = a, b, x
    if _distorted(x):
        # evaluate the numerator in a tame marking: sup i(mu, s)/ell_x(s)
        # equals sup i(g0 mu, w)/ell_{g0 x}(w) with w = g0 s, same scale
        orbit = getattr(x, "_orbit", None)
        if orbit is not None:
            m, b0 = orbit
            mi = _mat_inv(m)
            na = mi[0][0] * a + mi[0][1] * b
            nb = mi[1][0] * a + mi[1][1] * b
            nx = b0
        else:
            g0, xr, _ = reduce_marking_pair(x, x)
            if g0 != ((1, 0), (0, 1)):
                na = g0[0][0] * a + g0[0][1] * b
                nb = g0[1][0] * a + g0[1][1] * b
                nx = xr
    num, num_half = _log_sup_i_over_ell(na, nb, nx, depth, refine_iters)
    den, den_half = _horo_denominator(a, b, base.x, base.y, base.z,
                                      depth, refine_iters)
    value = num - den
    return HoroResult(value, abs(value - (num_half - den_half)))


def default_probes() -> tuple:
    """Small fixed probe set of tame points for convergence experiments.

    Points on the minus branch near the base, where the coordinate
    functions of twist orbits approach their limit with a small constant
    (the residual decays like c / n with c depending on the probe).
    """
    return (BASE,
            teich_from_xy(3.2, 3.05, "minus"),
            teich_from_xy(3.5, 3.05, "minus"),
            teich_from_xy(3.5, 3.2, "minus"),
            teich_from_xy(3.05, 3.2, "minus"))


def convergence_report(kind: str, parameter, n_max: int, probes=None,
                       depth: int = DEFAULT_DEPTH, base: TracePoint = BASE,
                       refine_iters: int = 400):
    """Coordinate-function convergence along an escaping orbit.

    Rows (n, d(b, x_n), residual, witness_p, witness_q) where the residual
    is max over probes of |psi_{x_n}(p) - Psi_mu(p)| against the limiting
    horofunction of the orbit, and the witness is the maximally stretched
    slope from x_n toward the base (it converges to the stretched
    lamination of the orbit).  A pseudo-Anosov orbit stops early when its
    traces overflow the representable range.
    """
    if n_max < 0:
        raise ContractError("n_max must be >= 0")
    if probes is None:
        probes = default_probes()
    if kind == "twist":
        c = parameter
        if not isinstance(c, CurveSlope):
            c = CurveSlope.make(int(parameter[0]), int(parameter[1]))
        mu = MeasuredLam.of_curve(c)
        step = twist_matrix(c)
    elif kind == "pa":
        mu = MeasuredLam(attracting_slope(parameter), 1.0)
        a, b = parameter[0]
        c_, d_ = parameter[1]
        step = ((int(a), int(b)), (int(c_), int(d_)))
    else:
        raise ContractError("kind must be 'twist' or 'pa'")
    horo = [horofunction(mu, p, depth, base, refine_iters).value for p in probes]
    rows = []
    g = ((1, 0), (0, 1))
    xn = base
    for n in range(n_max + 1):
        if n > 0:
            g = _mat_mul(step, g)
            try:
                xn = _orbit_point(g, base)
            except (DegenerateError, OverflowError):
                break  # orbit left the representable range
        dbx = lipschitz_distance(base, xn, depth, refine_iters)
        dxb = lipschitz_distance(xn, base, depth, refine_iters)
        resid = 0.0
        for p, h in zip(probes, horo):
            dpx = lipschitz_distance(p, xn, depth, refine_iters)
            resid = max(resid, abs((dpx.value - dbx.value) - h))
        w = dxb.witness
        rows.append((n, dbx.value, resid, w.p, w.q))
    return rows


def space(depth: int = DEFAULT_DEPTH, base: TracePoint = BASE,
          refine_iters: int = 400) -> AsymmetricSpace:
    """The Lipschitz metric as a generic asymmetric-space oracle."""
    def dist(p, q):
        return lipschitz_distance(p, q, depth, refine_iters).value
    return AsymmetricSpace(dist, base, tol=1e-8)
