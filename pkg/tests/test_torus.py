import math
import random

import numpy as np
import pytest

from horolip.errors import ContractError, DegenerateError
from horolip.torus import (
    BASE,
    CurveSlope,
    MeasuredLam,
    ProjectiveSlope,
    TracePoint,
    attracting_slope,
    curve_length,
    curve_trace,
    horofunction,
    intersection,
    intersection_curves,
    lipschitz_distance,
    matrix_word,
    maxset,
    mcg_apply,
    mcg_apply_slope,
    pa_sequence,
    realize_matrices,
    reduce_marking_pair,
    teich_from_xy,
    twist_matrix,
    twist_sequence,
    _canon_slope,
    _mat_inv,
    _mat_vec,
)

# frozen regression values for the pair base=(3,3,3), y=teich_from_xy(4,4,minus),
# pinned by a dense-grid search with depth doubling and cross-checked against
# the matrix-word oracle
GOLDEN_L_XY = 0.3920307519023678
GOLDEN_L_YX = 0.5103676034620374
GOLDEN_HORO = 0.422394449881169  # limiting horofunction of curve 0/1 at y


def int_trace(p, q):
    """Exact integer trace of the slope (p, q) at the base (3, 3, 3).

    Independent oracle: the mediant trace recursion in pure integer
    arithmetic (all traces at the modular torus are integers).
    """
    p, q = _canon_slope(p, q)
    if p < 0:
        p = -p
        seeds = (3, 3, 6)  # reflected chart z -> x*y - z
    else:
        seeds = (3, 3, 3)
    if (p, q) == (0, 1):
        return seeds[0]
    if (p, q) == (1, 0):
        return seeds[1]
    L = (0, 1, seeds[0])
    R = (1, 0, seeds[1])
    M = (1, 1, seeds[2])
    while (M[0], M[1]) != (p, q):
        if p * M[1] > M[0] * q:
            n = (M[0] + R[0], M[1] + R[1], M[2] * R[2] - L[2])
            L = M
        else:
            n = (L[0] + M[0], L[1] + M[1], L[2] * M[2] - R[2])
            R = M
        M = n
    return M[2]


def exact_log_length(p, q):
    """log of 2*arccosh(t/2) from the exact integer trace, any size."""
    t = int_trace(p, q)
    if t < 10**15:
        return math.log(2.0 * math.acosh(t / 2.0))
    lt = math.log(t)  # exact integer log, any size
    return math.log(2.0 * (lt - math.log(2.0)))


def test_small_traces():
    assert curve_trace(BASE, CurveSlope(0, 1)) == pytest.approx(3, rel=1e-14)
    assert curve_trace(BASE, CurveSlope(1, 0)) == pytest.approx(3, rel=1e-14)
    assert curve_trace(BASE, CurveSlope(1, 1)) == pytest.approx(3, rel=1e-14)
    assert abs(curve_trace(BASE, CurveSlope(1, 2)) - 6) < 1e-12
    assert abs(curve_trace(BASE, CurveSlope(1, 3)) - 15) < 1e-11


def test_trace_against_integer_oracle():
    rng = random.Random(7)
    for _ in range(40):
        p = rng.randint(-30, 30)
        q = rng.randint(0, 30)
        if (p, q) == (0, 0):
            continue
        c = CurveSlope.make(p, q)
        t = int_trace(c.p, c.q)
        if t < 1e300:
            assert curve_trace(BASE, c) == pytest.approx(t, rel=1e-9)


def test_curve_length_formula():
    assert curve_length(BASE, CurveSlope(0, 1)) == pytest.approx(
        2.0 * math.acosh(1.5), rel=1e-14)


def test_matrix_word_oracle():
    pts = [BASE, teich_from_xy(4, 4, "minus"), teich_from_xy(3.3, 5.1, "plus")]
    for pt in pts:
        for (p, q) in [(1, 2), (2, 3), (-1, 2), (-3, 4), (5, 7), (-5, 3)]:
            c = CurveSlope.make(p, q)
            w = matrix_word(pt, c)
            assert curve_trace(pt, c) == pytest.approx(abs(np.trace(w)), rel=1e-9)


def test_realize_matrices_traces():
    pt = teich_from_xy(3.7, 4.2, "minus")
    A, B = realize_matrices(pt)
    assert np.trace(A) == pytest.approx(pt.x, rel=1e-12)
    assert np.trace(B) == pytest.approx(pt.y, rel=1e-12)
    assert np.trace(A @ B) == pytest.approx(pt.z, rel=1e-12)
    comm = A @ B @ np.linalg.inv(A) @ np.linalg.inv(B)
    assert np.trace(comm) == pytest.approx(-2.0, abs=1e-9)


def test_teich_from_xy_branches():
    lo = teich_from_xy(4, 4, "minus")
    hi = teich_from_xy(4, 4, "plus")
    assert lo.z == pytest.approx(8 - math.sqrt(32), rel=1e-14)
    assert hi.z == pytest.approx(8 + math.sqrt(32), rel=1e-14)
    assert lo.markov_residual() < 1e-12
    with pytest.raises(ContractError):
        teich_from_xy(2.0, 4.0)
    with pytest.raises(ContractError):
        teich_from_xy(3.0, 3.0, "other")


def test_trace_point_validation():
    TracePoint(4, 4, 2.3431458)  # 8-digit literal accepted
    with pytest.raises(ContractError):
        TracePoint(3, 3, 4)  # off the cubic
    with pytest.raises(ContractError):
        TracePoint(2, 3, 3)  # not hyperbolic


def test_slope_canonicalization():
    assert CurveSlope.make(2, -4) == CurveSlope(-1, 2)
    assert CurveSlope.make(-3, 0) == CurveSlope(1, 0)
    with pytest.raises(ContractError):
        CurveSlope.make(0, 0)
    with pytest.raises(ContractError):
        CurveSlope(2, 4)


def test_intersections():
    assert intersection_curves(CurveSlope(0, 1), CurveSlope(1, 0)) == 1
    assert intersection_curves(CurveSlope(1, 2), CurveSlope(3, 5)) == 1
    assert intersection_curves(CurveSlope(1, 2), CurveSlope(-1, 2)) == 4
    mu = MeasuredLam.of_curve(CurveSlope(1, 2), 3.0)
    assert intersection(mu, CurveSlope(1, 0)) == pytest.approx(6.0)


def test_mcg_apply_examples():
    S = ((0, -1), (1, 0))
    img = mcg_apply(S, BASE)
    assert (img.x, img.y, img.z) == pytest.approx((3, 3, 6), rel=1e-12)
    ident = mcg_apply(((1, 0), (0, 1)), BASE)
    assert (ident.x, ident.y, ident.z) == pytest.approx((3, 3, 3), rel=1e-12)
    assert mcg_apply_slope(S, CurveSlope(0, 1)) == CurveSlope(1, 0)
    with pytest.raises(ContractError):
        mcg_apply(((1, 1), (1, 1)), BASE)


def test_mcg_preserves_markov_residual():
    rng = random.Random(5)
    pt = teich_from_xy(3.4, 4.6, "plus")
    gens = [((1, 1), (0, 1)), ((1, 0), (1, 1)), ((0, -1), (1, 0))]
    g = ((1, 0), (0, 1))
    for _ in range(6):
        h = gens[rng.randrange(3)]
        g = tuple(tuple(v) for v in np.array(h) @ np.array(g))
    img = mcg_apply(g, pt)
    assert img.markov_residual() < 1e-9


def test_twist_matrix_action():
    T = twist_matrix(CurveSlope(0, 1))
    c = mcg_apply_slope(T, CurveSlope(0, 1))
    assert c == CurveSlope(0, 1)  # twist fixes its own curve
    seq = twist_sequence(CurveSlope(0, 1), 4)
    assert len(seq) == 5
    for pt in seq:
        assert pt.markov_residual() < 1e-9


def test_pa_sequence_contract():
    with pytest.raises(ContractError):
        pa_sequence(((1, 1), (0, 1)), 3)  # parabolic
    seq = pa_sequence(((2, 1), (1, 1)), 3)
    assert len(seq) == 4
    for pt in seq:
        assert pt.markov_residual() < 1e-9


def test_attracting_slope_golden_ratio():
    s = attracting_slope(((2, 1), (1, 1)))
    phi = (1 + math.sqrt(5)) / 2
    assert s.a / s.b == pytest.approx(phi, rel=1e-12)
    with pytest.raises(ContractError):
        attracting_slope(((1, 1), (0, 1)))


def test_distance_identity_and_golden_pair():
    y = teich_from_xy(4, 4, "minus")
    assert lipschitz_distance(BASE, BASE).value == 0.0
    r1 = lipschitz_distance(BASE, y)
    r2 = lipschitz_distance(y, BASE)
    assert r1.value == pytest.approx(GOLDEN_L_XY, abs=1e-9)
    assert r2.value == pytest.approx(GOLDEN_L_YX, abs=1e-9)
    assert abs(r1.value - r2.value) > 1e-2  # asymmetry witness pair
    assert r1.witness == CurveSlope(-1, 1)
    assert r2.witness == CurveSlope(1, 1)


def test_distance_depth_stability():
    y = teich_from_xy(3.6, 4.4, "plus")
    v1 = lipschitz_distance(BASE, y, depth=1000).value
    v2 = lipschitz_distance(BASE, y, depth=2000).value
    assert v1 == pytest.approx(v2, abs=1e-9)


def test_maxset_contains_witness():
    y = teich_from_xy(4, 4, "minus")
    ms = maxset(BASE, y, depth=500, rel_tol=1e-8)
    assert CurveSlope(-1, 1) in ms
    assert ms[0] == CurveSlope(-1, 1)  # deterministic tie-break ordering


def test_reduce_marking_pair_tames():
    T = twist_matrix(CurveSlope(0, 1))
    g = ((1, 0), (0, 1))
    for _ in range(15):
        g = tuple(tuple(r) for r in np.array(T, dtype=object) @ np.array(g, dtype=object))
    x = mcg_apply(g, BASE)  # distorted, no orbit tag
    g0, xr, yr = reduce_marking_pair(x, BASE)
    assert max(xr.x, xr.y, xr.z) < max(x.x, x.y, x.z)


def test_transported_distance_matches_integer_oracle():
    # twist orbit point at n = 10; supremum over a slope set evaluated in
    # exact integer arithmetic bounds the distance from below
    n = 10
    seq = twist_sequence(CurveSlope(0, 1), n)
    xn = seq[n]
    m = ((1, 0), (0, 1))
    T = twist_matrix(CurveSlope(0, 1))
    for _ in range(n):
        m = ((T[0][0] * m[0][0] + T[0][1] * m[1][0],
              T[0][0] * m[0][1] + T[0][1] * m[1][1]),
             (T[1][0] * m[0][0] + T[1][1] * m[1][0],
              T[1][0] * m[0][1] + T[1][1] * m[1][1]))
    minv = _mat_inv(m)
    d = lipschitz_distance(BASE, xn)
    # exact value of the ratio at the reported witness slope
    w = d.witness
    num = exact_log_length(*_mat_vec(minv, w.p, w.q))
    den = exact_log_length(w.p, w.q)
    assert d.value == pytest.approx(num - den, abs=1e-9)
    # and no slope in a moderate exact sweep beats the reported value
    best = -math.inf
    for p in range(-12, 13):
        for q in range(0, 13):
            if math.gcd(abs(p), q) != 1:
                continue
            v = (exact_log_length(*_mat_vec(minv, p, q))
                 - exact_log_length(p, q))
            best = max(best, v)
    assert d.value >= best - 1e-9


def test_triangle_inequality_sample():
    pts = [BASE, teich_from_xy(4, 4, "minus"), teich_from_xy(3.3, 4.8, "plus")]
    for x in pts:
        for y in pts:
            for z in pts:
                lxz = lipschitz_distance(x, z, depth=500).value
                lxy = lipschitz_distance(x, y, depth=500).value
                lyz = lipschitz_distance(y, z, depth=500).value
                assert lxz <= lxy + lyz + 1e-8


def test_horofunction_golden_and_scale_invariance():
    y = teich_from_xy(4, 4, "minus")
    mu = MeasuredLam.of_curve(CurveSlope(0, 1))
    r = horofunction(mu, y)
    assert r.value == pytest.approx(GOLDEN_HORO, abs=1e-6)
    r2 = horofunction(MeasuredLam(mu.slope, 3.7), y)
    assert r2.value == r.value  # weight cancels bit-for-bit
    assert horofunction(mu, BASE).value == 0.0


def test_horofunction_along_twist_orbit():
    # psi_{x_n} converges to the limiting horofunction of the twist curve
    mu = MeasuredLam.of_curve(CurveSlope(0, 1))
    y = teich_from_xy(3.5, 3.05, "minus")
    h = horofunction(mu, y).value
    seq = twist_sequence(CurveSlope(0, 1), 40)
    vals = []
    for xn in (seq[20], seq[40]):
        vals.append(lipschitz_distance(y, xn).value
                    - lipschitz_distance(BASE, xn).value)
    assert abs(vals[1] - h) < abs(vals[0] - h)
    assert abs(vals[1] - h) < 5e-3


def test_horofunction_equivariance():
    # Psi transforms under the mapping class action like a rebased
    # horofunction: Psi_mu(x) = Psi_gmu(gx) - Psi_gmu(gb)
    g = ((1, 1), (0, 1))
    mu = MeasuredLam.of_curve(CurveSlope(1, 2))
    gmu = MeasuredLam.of_curve(mcg_apply_slope(g, CurveSlope(1, 2)))
    x = teich_from_xy(3.8, 4.1, "minus")
    gx = mcg_apply(g, x)
    gb = mcg_apply(g, BASE)
    lhs = horofunction(mu, x).value
    rhs = horofunction(gmu, gx).value - horofunction(gmu, gb).value
    assert lhs == pytest.approx(rhs, abs=1e-5)


def test_projective_slope():
    s = ProjectiveSlope.make(2.0, 4.0)
    assert s.same(ProjectiveSlope.make(1.0, 2.0))
    with pytest.raises(ContractError):
        ProjectiveSlope.make(0.0, 0.0)


def test_json_roundtrip():
    pt = teich_from_xy(3.9, 4.3, "minus")
    again = TracePoint.from_json(pt.to_json())
    assert (again.x, again.y, again.z) == (pt.x, pt.y, pt.z)
