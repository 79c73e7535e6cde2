"""Walkthrough of the asymmetric Lipschitz distance on the punctured torus.

Points are Fricke trace triples (x, y, z) on the Markov cubic
x^2 + y^2 + z^2 = x y z.  The distance from x to y is the log of the
largest ratio length_y(curve) / length_x(curve) over simple closed
curves, realized here as a supremum over Farey slopes.
"""

import math

from horolip import (
    BASE,
    CurveSlope,
    curve_length,
    curve_trace,
    lipschitz_distance,
    maxset,
    mcg_apply,
    teich_from_xy,
)


def main():
    x = teich_from_xy(3.2, 3.05, "minus")
    y = teich_from_xy(3.5, 3.2, "minus")
    print("base point :", BASE)
    print("point x    :", x)
    print("point y    :", y)
    print()

    print("a few curve traces and lengths at x:")
    for c in [CurveSlope(0, 1), CurveSlope(1, 0), CurveSlope(1, 1),
              CurveSlope(-1, 2), CurveSlope(3, 5)]:
        print(f"  slope {c.p:>2}/{c.q}  trace {curve_trace(x, c):10.5f}"
              f"  length {curve_length(x, c):.6f}")
    print()

    d_xy = lipschitz_distance(x, y)
    d_yx = lipschitz_distance(y, x)
    print(f"L(x, y) = {d_xy.value:.12f}  witness slope "
          f"{d_xy.witness.p}/{d_xy.witness.q}")
    print(f"L(y, x) = {d_yx.value:.12f}  witness slope "
          f"{d_yx.witness.p}/{d_yx.witness.q}")
    print(f"asymmetry |L(x,y) - L(y,x)| = {abs(d_xy.value - d_yx.value):.6f}")
    print()

    near = maxset(x, y, rel_tol=1e-6)
    print(f"{len(near)} slopes within relative tolerance 1e-6 of the maximal "
          "ratio (the length ratio varies continuously across slopes, so a "
          "tolerance band catches many deep neighbors of the witness); "
          "first few:")
    for c in near[:6]:
        print(f"  {c.p}/{c.q}")
    print()

    g = ((1, 1), (0, 1))
    gx, gy = mcg_apply(g, x), mcg_apply(g, y)
    d_g = lipschitz_distance(gx, gy)
    print("mapping class g = [[1,1],[0,1]] acts by isometries:")
    print(f"  L(gx, gy) = {d_g.value:.12f}")
    print(f"  residual  = {abs(d_g.value - d_xy.value):.2e}")
    print()

    d_xx = lipschitz_distance(x, x)
    tri = (lipschitz_distance(x, y).value + lipschitz_distance(y, BASE).value
           - lipschitz_distance(x, BASE).value)
    print(f"L(x, x) = {d_xx.value} and a triangle slack L(x,y)+L(y,b)-L(x,b) "
          f"= {tri:.6f} >= 0: {tri >= -1e-12}")
    assert math.isclose(d_g.value, d_xy.value, abs_tol=1e-8)


if __name__ == "__main__":
    main()
