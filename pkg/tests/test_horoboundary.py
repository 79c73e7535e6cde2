import math

import pytest

from horolip.errors import ContractError
from horolip.horoboundary import (
    AsymmetricSpace,
    DigraphSpace,
    SampledFunction,
    almost_geodesic_defect,
    detour_cost_along,
    detour_metric,
    digraph_brute_oracle,
    horolimit_estimate,
    psi,
    rebase,
)

# three-vertex digraph used throughout (vertices 0, 1, 2)
DEMO_EDGES = {(0, 1): 1, (1, 0): 4, (1, 2): 2, (2, 1): 1, (0, 2): 5, (2, 0): 6}


def demo_graph():
    return DigraphSpace(n=3, weights=dict(DEMO_EDGES), base=0)


def ray_graph(N=20, back=1000):
    w = {}
    for i in range(N):
        w[(i, i + 1)] = 1
        w[(i + 1, i)] = back
    return DigraphSpace(n=N + 1, weights=w, base=0)


def test_demo_distances():
    g = demo_graph()
    assert g.d(0, 2) == 3
    assert g.d(2, 0) == 5
    assert g.d(0, 1) == 1
    assert g.d(1, 0) == 4


def test_psi_demo_value():
    g = demo_graph()
    table = psi(g.as_space(), 2, [0, 1, 2])
    assert table(1) == -1  # d(1,2) - d(0,2) = 2 - 3
    assert table(0) == 0


def test_psi_at_base_is_zero():
    g = demo_graph()
    for z in range(3):
        assert psi(g.as_space(), z, [0])(0) == 0


def test_psi_with_z_base():
    g = demo_graph()
    table = psi(g.as_space(), 0, [0, 1, 2])
    for v in range(3):
        assert table(v) == g.d(v, 0)


def test_psi_one_lipschitz():
    g = demo_graph()
    sp = g.as_space()
    for z in range(3):
        t = psi(sp, z, [0, 1, 2])
        for x in range(3):
            for y in range(3):
                assert abs(t(x) - t(y)) <= sp.d_sym(x, y)


def test_psi_separation_inequality():
    # for d(b,x) >= d(b,y): psi_y(x) - psi_x(x) >= d(x,y)
    g = demo_graph()
    sp = g.as_space()
    for x in range(3):
        for y in range(3):
            if x == y or g.d(0, x) < g.d(0, y):
                continue
            px = psi(sp, x, [x])(x)
            py = psi(sp, y, [x])(x)
            assert py - px >= g.d(x, y)


def test_sampled_function_contract():
    with pytest.raises(ContractError):
        SampledFunction((1, 2), (0.0,))


def test_ray_busemann():
    g = ray_graph()
    sp = g.as_space()
    probes = [0, 1, 2, 3]
    seq = list(range(5, 21))
    limit, diag = horolimit_estimate(sp, seq, probes, tail_window=4)
    assert diag["escaping"]
    for k, v in zip(probes, limit.values):
        assert v == -k
    assert limit.residual == 0


def test_constant_sequence_not_escaping():
    g = demo_graph()
    sp = g.as_space()
    limit, diag = horolimit_estimate(sp, [1] * 6, [0, 1, 2], tail_window=3)
    assert not diag["escaping"]
    ref = psi(sp, 1, [0, 1, 2])
    assert limit.values == ref.values


def test_rebase_identity_and_involution():
    g = demo_graph()
    t = psi(g.as_space(), 2, [0, 1, 2])
    assert rebase(t, 0).values == t.values
    rb = rebase(rebase(t, 1), 0)
    assert rb.values == t.values


def test_rebase_ray_shift():
    g = ray_graph()
    t = psi(g.as_space(), 15, [0, 1, 2, 3])
    shifted = rebase(t, 2)
    for k, v in zip([0, 1, 2, 3], shifted.values):
        assert v == -k + 2


def test_detour_cost_along_own_limit():
    g = ray_graph()
    sp = g.as_space()
    eta = lambda n: -n
    val, trace = detour_cost_along(sp, list(range(5, 21)), eta)
    assert val == 0
    assert all(v == 0 for v in trace)


def test_detour_cost_prefix_invariance():
    g = demo_graph()
    sp = g.as_space()
    eta = psi(sp, 2, [0, 1, 2])
    seq = [1, 2, 1, 2, 1, 2]
    v1, _ = detour_cost_along(sp, seq, eta, tail_window=3)
    v2, _ = detour_cost_along(sp, seq[2:], eta, tail_window=3)
    assert v1 == v2


def test_detour_cost_divergent_reported_infinite():
    # two disjoint forward rays from the base; climbing ray A while eta is
    # the Busemann function of ray B makes the sum blow up
    w = {}
    N = 10
    for i in range(N):
        w[(2 * i, 2 * i + 2)] = 1       # ray A: even vertices
        w[(2 * i + 1, 2 * i + 3)] = 1   # ray B: odd vertices
    w[(0, 1)] = 1
    big = 10**13
    for i in range(N):
        w[(2 * i + 2, 2 * i)] = big
        w[(2 * i + 3, 2 * i + 1)] = big
    w[(1, 0)] = big
    g = DigraphSpace(n=2 * N + 2, weights=w, base=0)
    sp = g.as_space()
    eta = lambda v: -g.d(0, v) if v % 2 == 1 else g.d(1, v) - g.d(0, v)
    seq = [2 * i for i in range(3, N + 1)]
    val, _ = detour_cost_along(sp, seq, eta, tail_window=3)
    assert math.isinf(val)


def test_detour_metric_values():
    assert detour_metric(0.0, 0.0) == 0.0
    assert abs(detour_metric(math.log(2), math.log(3)) - math.log(6)) < 1e-15
    assert math.isinf(detour_metric(math.inf, 0.0))
    with pytest.raises(ContractError):
        detour_metric(-1.0, 0.0)


def test_almost_geodesic_ray():
    g = ray_graph()
    sp = g.as_space()
    path = [(n, n) for n in range(0, 21)]
    assert almost_geodesic_defect(sp, path) == 0
    # sub-path of a defect-0 path, reparametrized from its own start
    sub = [(t - 3, pt) for t, pt in path[3:15]]
    assert almost_geodesic_defect(sp, sub) == 0


def test_almost_geodesic_detour_vertex():
    # ray where the leg into vertex 5 costs 1 + c instead of 1
    c = 3
    w = {}
    for i in range(10):
        cost = 1 + c if i + 1 == 5 else 1
        w[(i, i + 1)] = cost
        w[(i + 1, i)] = 1000
    g = DigraphSpace(n=11, weights=w, base=0)
    sp = g.as_space()
    path = [(n, n) for n in range(11)]
    assert almost_geodesic_defect(sp, path, tail_fraction=1.0) == c


def test_brute_oracle_demo():
    g = demo_graph()
    dist, tables = digraph_brute_oracle(g)
    assert dist == g.distance_table()
    assert dist[0][2] == 3 and dist[2][0] == 5
    table_set = {t.values for t in tables}
    for z in range(3):
        t = psi(g.as_space(), z, (0, 1, 2))
        assert t.values in table_set


def test_brute_oracle_trivial_graphs():
    g1 = DigraphSpace(n=1, weights={}, base=0)
    dist, tables = digraph_brute_oracle(g1)
    assert dist == [[0]]
    assert len(tables) == 1 and tables[0].values == (0,)
    w = {(u, v): 1 for u in range(4) for v in range(4) if u != v}
    g4 = DigraphSpace(n=4, weights=w, base=0)
    dist, _ = digraph_brute_oracle(g4)
    for u in range(4):
        for v in range(4):
            assert dist[u][v] == (0 if u == v else 1)


def test_edgelist_parse_and_errors():
    text = "base 0\n0 1 1\n1 0 4\n1 2 2\n2 1 1\n0 2 5\n2 0 6\n"
    g = DigraphSpace.from_edgelist(text)
    assert g.n == 3 and g.weights[(0, 1)] == 1
    with pytest.raises(ContractError):
        DigraphSpace.from_edgelist("")
    with pytest.raises(ContractError):
        DigraphSpace.from_edgelist("0 1\n")
    with pytest.raises(ContractError):
        DigraphSpace(n=2, weights={(0, 1): -1}, base=0)


def test_space_rejects_negative_distance():
    sp = AsymmetricSpace(lambda a, b: -1.0, 0, tol=1e-9)
    with pytest.raises(Exception):
        sp.d(0, 1)
