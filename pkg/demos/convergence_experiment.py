"""Convergence of coordinate functions to the limiting horofunction.

Along an escaping orbit x_n the normalized distance functions
psi_{x_n}(p) = L(p, x_n) - L(b, x_n) converge pointwise to the
horofunction of the limiting projective lamination.  The residual below
is the max over a fixed probe set of |psi_{x_n}(p) - Psi_mu(p)|; the
witness is the maximally stretched slope from x_n back toward the base
and converges to the stretched lamination.
"""

import math

from horolip import CurveSlope, convergence_report


def show(title, rows):
    print(title)
    print(f"  {'n':>3} {'d(b,x_n)':>12} {'residual':>12} {'witness':>10}")
    for n, d, res, wp, wq in rows:
        print(f"  {n:>3} {d:12.6f} {res:12.3e} {f'{wp}/{wq}':>10}")
    print()


def main():
    rows = convergence_report("twist", CurveSlope(0, 1), 30)
    show("Dehn twist about the slope 0/1:", rows[::3] + rows[-2:])
    print(f"final residual {rows[-1][2]:.3e} (tends to 0 like c/n)")
    print()

    rows = convergence_report("pa", ((2, 1), (1, 1)), 30)
    show("pseudo-Anosov [[2,1],[1,1]] (stops when traces overflow):", rows)
    wp, wq = rows[-1][3], rows[-1][4]
    phi = (1 + math.sqrt(5)) / 2
    print(f"witness slope {wp}/{wq} = {wp / wq:.8f} approaches the golden "
          f"ratio {phi:.8f} (gap {abs(wp / wq - phi):.1e})")


if __name__ == "__main__":
    main()
