"""Generic horoboundary machinery for possibly asymmetric metric spaces.

A space is given as a distance oracle d(x, y) together with a base point b.
Coordinate functions psi_z(x) = d(x, z) - d(b, z) are tabulated on finite
probe sets; limits along escaping sequences are estimated numerically.
The detour cost along a sequence and its symmetrisation (the detour metric)
are computed on top of these tables.

A finite weighted digraph with its shortest-path distance serves as an
exactly computable test space; everything is integer-exact there when the
edge weights are integers.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ContractError, EvaluationError

INF_CAP = 1e12  # values above this are reported as infinity


@dataclass(frozen=True)
class SampledFunction:
    """A real-valued function known on a finite ordered probe set."""

    probes: tuple
    values: tuple
    exact: bool = True
    residual: float | None = None

    def __post_init__(self):
        if len(self.probes) != len(self.values):
            raise ContractError("probe and value lists must have equal length")

    def value_at(self, probe):
        for p, v in zip(self.probes, self.values):
            if p == probe:
                return v
        raise EvaluationError(f"probe {probe!r} not in sampled function")

    def __call__(self, probe):
        return self.value_at(probe)

    def to_json(self, probe_encoder=None) -> str:
        enc = probe_encoder or (lambda p: p)
        return json.dumps({
            "probes": [enc(p) for p in self.probes],
            "values": list(self.values),
            "exact": self.exact,
            "residual": self.residual,
        })


class AsymmetricSpace:
    """A possibly non-symmetric metric space given by a distance oracle.

    d(x, x) = 0, d >= 0, and the triangle inequality are expected to hold
    up to the declared tolerance; they are not enforced on every call.
    """

    def __init__(self, dist: Callable, base, same: Callable | None = None,
                 tol: float = 1e-9):
        self._dist = dist
        self.base = base
        self.same = same or (lambda a, b: a == b)
        self.tol = tol

    def d(self, x, y) -> float:
        v = self._dist(x, y)
        if v != v or v < -self.tol:
            raise EvaluationError(f"distance undefined or negative for pair ({x!r}, {y!r})")
        return max(v, 0.0)

    def d_sym(self, x, y) -> float:
        return self.d(x, y) + self.d(y, x)


def psi(space: AsymmetricSpace, z, probes: Sequence) -> SampledFunction:
    """Tabulate psi_z(x) = d(x, z) - d(b, z) over the probe set."""
    if not probes:
        raise ContractError("probe set must be nonempty")
    dbz = space.d(space.base, z)
    if not math.isfinite(dbz):
        raise EvaluationError(f"infinite distance for pair ({space.base!r}, {z!r})")
    vals = []
    for p in probes:
        dpz = space.d(p, z)
        if not math.isfinite(dpz):
            raise EvaluationError(f"infinite distance for pair ({p!r}, {z!r})")
        vals.append(dpz - dbz)
    return SampledFunction(tuple(probes), tuple(vals), exact=True)


def rebase(xi: SampledFunction, b_prime) -> SampledFunction:
    """Renormalise a coordinate function to the base point b_prime."""
    shift = xi.value_at(b_prime)
    return SampledFunction(xi.probes, tuple(v - shift for v in xi.values),
                           exact=xi.exact, residual=xi.residual)


def horolimit_estimate(space: AsymmetricSpace, sequence: Sequence, probes: Sequence,
                       tail_window: int = 5, escape_threshold: float = 10.0):
    """Estimate the horofunction limit of psi along a sequence.

    Returns the last psi table together with diagnostics: per-probe
    oscillation (max - min of the tables over the tail window, a Cauchy
    proxy) and an escape flag.  A sequence whose symmetrised distance from
    the base never exceeds the escape threshold over the tail cannot
    converge to a horofunction; the flag is a heuristic, not a gate.
    """
    if tail_window < 2:
        raise ContractError("tail_window must be >= 2")
    if len(sequence) <= tail_window:
        raise ContractError("sequence must be longer than the tail window")
    if not probes:
        raise ContractError("probe set must be nonempty")
    tail = sequence[-tail_window:]
    tables = [psi(space, z, probes) for z in tail]
    osc = []
    for i in range(len(probes)):
        col = [t.values[i] for t in tables]
        osc.append(max(col) - min(col))
    tail_dsym = [space.d_sym(space.base, z) for z in tail]
    escaping = min(tail_dsym) > escape_threshold
    residual = max(osc)
    last = SampledFunction(tables[-1].probes, tables[-1].values,
                           exact=False, residual=residual)
    diagnostics = {
        "oscillation": osc,
        "escaping": escaping,
        "tail_d_sym": tail_dsym,
    }
    return last, diagnostics


def detour_cost_along(space: AsymmetricSpace, sequence: Sequence, eta,
                      tail_window: int = 10, cap: float = INF_CAP):
    """Upper bound on the detour cost H(xi, eta) along a sequence toward xi.

    Evaluates d(b, x_n) + eta(x_n) and returns the infimum over the last
    tail_window entries (a discrete stand-in for the liminf), together with
    the full value trace.  The result is an upper bound on H and equals it
    when the sequence is an almost-geodesic.  Values above the cap are
    reported as infinity.
    """
    if not sequence:
        raise ContractError("sequence must be nonempty")
    evaluate = eta.value_at if isinstance(eta, SampledFunction) else eta
    trace = []
    for x in sequence:
        try:
            ev = evaluate(x)
        except EvaluationError:
            raise
        except Exception as exc:  # propagate with context
            raise EvaluationError(f"eta evaluation failed at {x!r}: {exc}") from exc
        trace.append(space.d(space.base, x) + ev)
    window = trace[-tail_window:]
    value = min(window)
    if value > cap:
        value = math.inf
    return value, trace


def detour_metric(h12: float, h21: float) -> float:
    """Symmetrised detour cost; infinity absorbs."""
    if h12 < 0 or h21 < 0:
        raise ContractError("detour costs must be nonnegative")
    if math.isinf(h12) or math.isinf(h21):
        return math.inf
    return h12 + h21


def almost_geodesic_defect(space: AsymmetricSpace, path: Sequence,
                           tail_fraction: float = 0.5, max_pairs: int = 1000) -> float:
    """Worst two-leg defect |d(p0, ps) + d(ps, pt) - t| over late pairs s <= t.

    The path is a list of (t, point) pairs with t the intended cumulative
    length.  Only pairs in the final tail_fraction of the path are checked.
    All pairs are used when there are at most max_pairs of them; otherwise a
    deterministic stride sample keeps the cost quadratic-bounded.
    """
    if len(path) < 3:
        raise ContractError("path must have at least 3 points")
    for entry in path:
        if not (isinstance(entry, tuple) and len(entry) == 2):
            raise ContractError("path entries must be (parameter, point) pairs")
    start = path[0][1]
    k0 = int(len(path) * (1.0 - tail_fraction))
    k0 = min(max(k0, 0), len(path) - 2)
    tail = path[k0:]
    n = len(tail)
    stride = 1
    while (n // stride) * (n // stride) // 2 > max_pairs:
        stride += 1
    idx = list(range(0, n, stride))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    defect = 0.0
    d0 = {i: space.d(start, tail[i][1]) for i in idx}
    for a in range(len(idx)):
        i = idx[a]
        s_param, s_pt = tail[i]
        for b in range(a, len(idx)):
            j = idx[b]
            t_param, t_pt = tail[j]
            val = abs(d0[i] + space.d(s_pt, t_pt) - t_param)
            if val > defect:
                defect = val
    return defect


# ---------------------------------------------------------------------------
# Finite weighted digraph demo space


@dataclass
class DigraphSpace:
    """Finite digraph with nonnegative weights and shortest-path distance."""

    n: int
    weights: dict = field(default_factory=dict)  # (u, v) -> weight
    base: int = 0
    _dist: list | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for (u, v), w in self.weights.items():
            if w < 0:
                raise ContractError(f"negative weight on edge {u}->{v}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ContractError(f"edge {u}->{v} out of range")
        if not (0 <= self.base < self.n):
            raise ContractError("base vertex out of range")

    @classmethod
    def from_edgelist(cls, text: str) -> "DigraphSpace":
        """Parse the plain-text format: header `base <v>`, lines `u v w`."""
        base = 0
        edges = {}
        nmax = -1
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "base":
                if len(parts) != 2:
                    raise ContractError(f"line {lineno}: malformed base header")
                base = int(parts[1])
                continue
            if len(parts) != 3:
                raise ContractError(f"line {lineno}: expected `u v w`")
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2])
            if w == int(w):
                w = int(w)
            edges[(u, v)] = w
            nmax = max(nmax, u, v)
        if nmax < 0:
            raise ContractError("empty edge list")
        return cls(n=max(nmax + 1, base + 1), weights=edges, base=base)

    def _dijkstra(self, src: int) -> list:
        adj = [[] for _ in range(self.n)]
        for (u, v), w in self.weights.items():
            adj[u].append((v, w))
        dist = [math.inf] * self.n
        dist[src] = 0
        heap = [(0, src)]
        seen = [False] * self.n
        while heap:
            du, u = heapq.heappop(heap)
            if seen[u]:
                continue
            seen[u] = True
            for v, w in adj[u]:
                nd = du + w
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist

    def distance_table(self) -> list:
        if self._dist is None:
            self._dist = [self._dijkstra(s) for s in range(self.n)]
        return self._dist

    def d(self, u: int, v: int) -> float:
        return self.distance_table()[u][v]

    def as_space(self) -> AsymmetricSpace:
        return AsymmetricSpace(self.d, self.base, tol=0.0)


def digraph_brute_oracle(g: DigraphSpace):
    """Independent all-pairs oracle by min-plus matrix squaring.

    Returns the exact distance table and the list of distinct psi_z tables
    over all vertices (a finite space has no horofunctions; the tables are
    used to validate psi/rebase/detour arithmetic exactly).
    """
    n = g.n
    dist = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0
    for (u, v), w in g.weights.items():
        if w < dist[u][v]:
            dist[u][v] = w
    # repeated min-plus squaring: after k squarings, paths of <= 2^k edges
    steps = max(1, (n - 1).bit_length())
    for _ in range(steps):
        new = [[math.inf] * n for _ in range(n)]
        for i in range(n):
            di = dist[i]
            for k in range(n):
                dik = di[k]
                if math.isinf(dik):
                    continue
                row = dist[k]
                for j in range(n):
                    c = dik + row[j]
                    if c < new[i][j]:
                        new[i][j] = c
        dist = new
    probes = tuple(range(n))
    tables = []
    seen = set()
    for z in range(n):
        vals = tuple(dist[x][z] - dist[g.base][z] for x in range(n))
        if vals not in seen:
            seen.add(vals)
            tables.append(SampledFunction(probes, vals, exact=True))
    return dist, tables
