"""Closed-form detour costs between horofunctions of measured laminations.

Laminations are formal nonnegative weightings of named ergodic components
with pairwise-vanishing intersection numbers.  For sigma = sum_j f_j b_j a
reweighting of beta = sum_j g_j b_j (the relation sigma << beta), the
detour cost and detour metric have closed forms

    H(Psi_beta, Psi_sigma) = log LF(beta) + log max_j f_j - log LF(sigma)
    delta(Psi_sigma, Psi_beta) = log max_j (f_j / g_j) + log max_j (g_j / f_j)

where LF is the supremum of intersection over base length, here evaluated
on a finite test-curve model.  The detour metric is model independent (the
LF factors cancel) and both are infinite when the support condition fails.
All arithmetic is exact (Fractions) whenever every input is rational, so
the equality cases come out as exact zeros.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import ContractError


def _as_number(v):
    """Accept ints, Fractions, floats, and 'a/b' strings."""
    if isinstance(v, bool):
        raise ContractError(f"boolean is not a weight: {v!r}")
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ContractError(f"malformed rational literal {v!r}") from exc
    if isinstance(v, (int, Fraction)):
        return v
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ContractError(f"non-finite weight {v!r}")
        return v
    raise ContractError(f"unsupported number type {type(v).__name__}")


def _F(v) -> Fraction:
    """Exact value of any accepted number (floats are binary rationals)."""
    return v if isinstance(v, Fraction) else Fraction(v)


def _log(v) -> float:
    """Logarithm that stays accurate for huge rationals."""
    if isinstance(v, Fraction):
        if v == 1:
            return 0.0
        return math.log(v.numerator) - math.log(v.denominator)
    if v == 1:
        return 0.0
    return math.log(v)


@dataclass(frozen=True)
class ErgodicBasis:
    """Named ergodic components, declared pairwise disjoint."""

    ids: tuple

    def __post_init__(self):
        if len(self.ids) == 0:
            raise ContractError("basis must have at least one component")
        if len(set(self.ids)) != len(self.ids):
            raise ContractError("basis component ids must be distinct")


@dataclass(frozen=True)
class FormalLamination:
    """A weighted sum of basis components; weights >= 0, not all zero."""

    basis: ErgodicBasis
    weights: tuple  # aligned with basis.ids

    def __post_init__(self):
        if len(self.weights) != len(self.basis.ids):
            raise ContractError("one weight per basis component required")
        pos = 0
        for w in self.weights:
            if not isinstance(w, (int, float, Fraction)):
                raise ContractError(f"bad weight {w!r}")
            if isinstance(w, float) and not math.isfinite(w):
                raise ContractError("weights must be finite")
            if w < 0:
                raise ContractError("weights must be nonnegative")
            if w > 0:
                pos += 1
        if pos == 0:
            raise ContractError("lamination must have a positive weight")

    @classmethod
    def make(cls, basis: ErgodicBasis, weight_map: dict) -> "FormalLamination":
        unknown = set(weight_map) - set(basis.ids)
        if unknown:
            raise ContractError(f"weights on unknown components {sorted(unknown)}")
        ws = tuple(_as_number(weight_map.get(i, 0)) for i in basis.ids)
        return cls(basis, ws)

    def support(self) -> tuple:
        return tuple(i for i, w in zip(self.basis.ids, self.weights) if w > 0)

    def scaled(self, c) -> "FormalLamination":
        c = _as_number(c)
        if not c > 0:
            raise ContractError("scale factor must be positive")
        return FormalLamination(self.basis, tuple(w * c for w in self.weights))

    def to_json(self) -> str:
        enc = {}
        for i, w in zip(self.basis.ids, self.weights):
            enc[i] = str(w) if isinstance(w, Fraction) else w
        return json.dumps({"basis": list(self.basis.ids), "weights": enc})

    @classmethod
    def from_json(cls, text: str, basis: ErgodicBasis | None = None):
        d = json.loads(text)
        if basis is None:
            basis = ErgodicBasis(tuple(d["basis"]))
        return cls.make(basis, d.get("weights", {}))


@dataclass(frozen=True)
class TestCurveModel:
    """Finite stand-in for the supremum over all measured laminations.

    M[j][k] is the intersection number of basis component j with test
    curve k; lb[k] is the base length of test curve k.
    """

    __test__ = False  # not a pytest case despite the Test prefix

    basis: ErgodicBasis
    curves: tuple
    M: tuple  # rows per basis component
    lb: tuple

    def __post_init__(self):
        if len(self.curves) == 0:
            raise ContractError("model needs at least one test curve")
        if len(self.M) != len(self.basis.ids):
            raise ContractError("one intersection row per basis component")
        for row in self.M:
            if len(row) != len(self.curves):
                raise ContractError("intersection row length mismatch")
            if any(v < 0 for v in row):
                raise ContractError("intersection numbers must be nonnegative")
            if not any(v > 0 for v in row):
                raise ContractError("a basis component meets no test curve")
        if len(self.lb) != len(self.curves):
            raise ContractError("one base length per test curve")
        if any(not v > 0 for v in self.lb):
            raise ContractError("base lengths must be strictly positive")

    @classmethod
    def make(cls, basis: ErgodicBasis, curves, M, lb) -> "TestCurveModel":
        rows = tuple(tuple(_as_number(v) for v in row) for row in M)
        return cls(basis, tuple(curves), rows,
                   tuple(_as_number(v) for v in lb))

    @classmethod
    def from_json(cls, text: str, basis: ErgodicBasis | None = None):
        d = json.loads(text)
        if basis is None:
            if "basis" in d:
                basis = ErgodicBasis(tuple(d["basis"]))
            else:
                basis = ErgodicBasis(tuple(f"e{j + 1}" for j in range(len(d["M"]))))
        return cls.make(basis, d["curves"], d["M"], d["lb"])


def _same_basis(a, b):
    if a.basis != b.basis:
        raise ContractError("laminations live on different bases")


def ll_relation(sigma: FormalLamination, beta: FormalLamination):
    """Whether sigma is a reweighting of beta's components (sigma << beta).

    Returns (flag, f) with f the coefficient list over beta's support:
    sigma = sum_j f_j beta_j there.  The flag is False when sigma puts
    weight outside beta's support; f is None in that case.
    """
    _same_basis(sigma, beta)
    f = []
    for ws, wb in zip(sigma.weights, beta.weights):
        if wb > 0:
            f.append(_F(ws) / _F(wb))
        elif ws > 0:
            return False, None
    return True, f


def lfactor_model(mu: FormalLamination, model: TestCurveModel):
    """Max over test curves of intersection with mu over base length."""
    if mu.basis != model.basis:
        raise ContractError("lamination and model bases differ")
    best = None
    for k in range(len(model.curves)):
        inter = sum(_F(w) * _F(model.M[j][k]) for j, w in enumerate(mu.weights))
        val = inter / _F(model.lb[k])
        if best is None or val > best:
            best = val
    return best


def detour_cost_closed(beta: FormalLamination, sigma: FormalLamination,
                       model: TestCurveModel) -> float:
    """Closed-form detour cost H(Psi_beta, Psi_sigma); infinite unless
    sigma << beta."""
    ok, f = ll_relation(sigma, beta)
    if not ok:
        return math.inf
    fmax = max(v for v in f if v > 0)
    lfb = lfactor_model(beta, model)
    lfs = lfactor_model(sigma, model)
    return _log(lfb * fmax / lfs)


def detour_metric_closed(sigma: FormalLamination, beta: FormalLamination,
                         model: TestCurveModel | None = None) -> float:
    """Closed-form detour metric; model independent, infinite unless the
    supports coincide."""
    _same_basis(sigma, beta)
    if sigma.support() != beta.support():
        return math.inf
    rmax = smax = None
    for ws, wb in zip(sigma.weights, beta.weights):
        if ws == 0:
            continue
        r = _F(ws) / _F(wb)
        if rmax is None or r > rmax:
            rmax = r
        s = 1 / r
        if smax is None or s > smax:
            smax = s
    return _log(rmax * smax)


def ratio_sup_bound(sigma: FormalLamination, beta: FormalLamination,
                    model: TestCurveModel, samples: int = 10_000,
                    seed: int = 42):
    """Ratio supremum check: closed form max_j f_j versus a sampled
    maximum of i(sigma, eta) / i(beta, eta) over nonnegative combinations
    eta of test-curve columns.

    The sampled maximum never exceeds the closed form (a mediant
    inequality, exact in rational mode); the pure columns are always
    included among the samples, so a near-diagonal column pushes the
    sampled maximum close to the bound.  Returns (closed form, sampled
    max); the closed form is infinite when sigma is not << beta.
    """
    if samples < 0:
        raise ContractError("sample count must be >= 0")
    if sigma.basis != model.basis:
        raise ContractError("lamination and model bases differ")
    ok, f = ll_relation(sigma, beta)
    closed = max(v for v in f if v > 0) if ok else math.inf
    ncur = len(model.curves)
    scol = []
    bcol = []
    for k in range(ncur):
        scol.append(sum(_F(w) * _F(model.M[j][k])
                        for j, w in enumerate(sigma.weights)))
        bcol.append(sum(_F(w) * _F(model.M[j][k])
                        for j, w in enumerate(beta.weights)))
    rng = random.Random(seed)
    best = None
    combos = [[1 if i == k else 0 for i in range(ncur)] for k in range(ncur)]
    for _ in range(max(0, samples - ncur)):
        combos.append([rng.randrange(0, 8) for _ in range(ncur)])
    for w in combos:
        num = sum(wi * si for wi, si in zip(w, scol))
        den = sum(wi * bi for wi, bi in zip(w, bcol))
        if den == 0:
            continue
        r = num / den
        if best is None or r > best:
            best = r
    if best is not None and ok and best > closed:
        raise ContractError("sampled ratio exceeded the closed-form bound")
    return closed, best


def model_from_torus(basis: ErgodicBasis, component_slopes: dict,
                     test_curves, base=None) -> TestCurveModel:
    """Induce a test-curve model from torus geometry.

    component_slopes maps basis ids to curve slopes; intersection numbers
    are exact integers and base lengths come from the hyperbolic structure
    (the default base is the modular torus).
    """
    from . import torus

    if base is None:
        base = torus.BASE
    curves = [c if isinstance(c, torus.CurveSlope) else torus.CurveSlope.make(*c)
              for c in test_curves]
    M = []
    for i in basis.ids:
        s = component_slopes[i]
        if not isinstance(s, torus.CurveSlope):
            s = torus.CurveSlope.make(*s)
        M.append([torus.intersection_curves(s, c) for c in curves])
    lb = [torus.curve_length(base, c) for c in curves]
    return TestCurveModel(basis, tuple(curves), tuple(tuple(r) for r in M),
                          tuple(lb))
