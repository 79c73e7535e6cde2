"""Exact detour costs between lamination horofunctions.

On formal laminations written in a basis of ergodic components, the
detour cost H(Psi_beta, Psi_sigma) has a closed form: it is finite
exactly when sigma is absolutely continuous with respect to beta, and
the symmetrized detour metric between sigma = 2 eta1 + eta2 and
beta = eta1 + 3 eta2 comes out to log 6 exactly.
"""

import math
from fractions import Fraction

from horolip import (
    BASE,
    CurveSlope,
    ErgodicBasis,
    FormalLamination,
    MeasuredLam,
    TestCurveModel,
    detour_cost_closed,
    detour_metric_closed,
    horofunction,
    lipschitz_distance,
    model_from_torus,
    ratio_sup_bound,
    twist_sequence,
)


def main():
    basis = ErgodicBasis(("eta1", "eta2"))
    sigma = FormalLamination.make(basis, {"eta1": 2, "eta2": 1})
    beta = FormalLamination.make(basis, {"eta1": 1, "eta2": 3})
    model = TestCurveModel.make(basis, ("c1", "c2"),
                                [[1, 0], [0, 1]], [1, 1])

    delta = detour_metric_closed(sigma, beta, model)
    print(f"delta(2 eta1 + eta2, eta1 + 3 eta2) = {delta!r}")
    print(f"log 6                               = {math.log(6)!r}")
    print()

    h = detour_cost_closed(beta, beta.scaled(Fraction(7, 3)), model)
    print(f"H(Psi_beta, Psi_(7/3 beta)) = {h} (exactly zero: horofunctions "
          "only see the projective class)")
    s1 = FormalLamination.make(basis, {"eta1": 1})
    s2 = FormalLamination.make(basis, {"eta2": 1})
    print(f"H across disjoint supports  = {detour_cost_closed(s1, s2, model)}")
    print()

    closed, sampled = ratio_sup_bound(sigma, beta, model, samples=2000)
    print(f"supremum of i(eta, sigma)/i(eta, beta): closed form {closed}, "
          f"best of 2000 samples {sampled}")
    print()

    print("running upper bound along a twist orbit on the torus")
    print("(d(b, x_n) + Psi_sigma(x_n) stays above the closed form 0):")
    tw = CurveSlope(0, 1)
    torus_model = model_from_torus(ErgodicBasis(("mu",)), {"mu": (0, 1)},
                                   [(1, 0), (1, 1), (2, 1)])
    mu1 = FormalLamination.make(ErgodicBasis(("mu",)), {"mu": 1})
    print(f"  closed form H(Psi_mu, Psi_2mu) = "
          f"{detour_cost_closed(mu1, mu1.scaled(2), torus_model)}")
    sig = MeasuredLam(MeasuredLam.of_curve(tw).slope, 2.0)
    for n, xn in enumerate(twist_sequence(tw, 8)):
        val = (lipschitz_distance(BASE, xn).value
               + horofunction(sig, xn).value)
        print(f"  n={n}  running value {val:.6f}")


if __name__ == "__main__":
    main()
