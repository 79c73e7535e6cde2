"""Horofunction machinery on a finite weighted digraph.

Directed shortest-path distance is a small asymmetric metric space where
everything can be checked by hand, so the generic pipeline (psi tables,
rebasing, horofunction limits, detour costs) can be compared against a
brute-force oracle, and a long one-way ray exhibits a genuine Busemann
point at infinity.
"""

from horolip import (
    DigraphSpace,
    detour_cost_along,
    digraph_brute_oracle,
    horolimit_estimate,
    psi,
)

EDGELIST = """\
base 0
0 1 1
1 0 4
1 2 2
2 1 1
0 2 5
2 0 6
"""


def main():
    g = DigraphSpace.from_edgelist(EDGELIST)
    sp = g.as_space()
    print("three-vertex demo digraph, base", g.base)
    print("distance table d(u, v):")
    for u, row in enumerate(g.distance_table()):
        print(f"  from {u}: {row}")
    print()

    print("normalized distance functions psi_z(v) = d(v,z) - d(base,z):")
    for z in range(g.n):
        t = psi(sp, z, range(g.n))
        print(f"  z={z}: {list(t.values)}")
    dist, tables = digraph_brute_oracle(g)
    match = dist == g.distance_table() and all(
        psi(sp, z, tuple(range(g.n))).values in {t.values for t in tables}
        for z in range(g.n))
    print("matches the brute-force oracle exactly:", match)
    print()

    n_ray = 20
    w = {}
    for i in range(n_ray):
        w[(i, i + 1)] = 1
        w[(i + 1, i)] = 1000
    ray = DigraphSpace(n=n_ray + 1, weights=w, base=0)
    rsp = ray.as_space()
    probes = [0, 1, 2, 3, 4]
    seq = list(range(8, n_ray + 1))
    limit, diag = horolimit_estimate(rsp, seq, probes, tail_window=4)
    print("one-way ray of length", n_ray)
    print("  escaping:", diag["escaping"])
    print("  limiting horofunction on probes:", list(limit.values),
          "(the Busemann function -k)")
    val, trace = detour_cost_along(rsp, seq, lambda v: -v)
    print("  detour cost of the ray against its own limit:", val)


if __name__ == "__main__":
    main()
