#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

import math
import unittest
from fractions import Fraction

import numpy as np

from litechain.common import DomainError
from litechain.potentials import (TaylorData, make_lennard_jones, make_quadratic,
    taylor_coefficients, evaluate)
from litechain.ensemble import EnsembleParams, integrator, partition_integral
from litechain.laplace import *

from test.model.common import relative_error, seeded
from test.model.potentials import LJ_A, LJ_C2, LJ_C3, LJ_C4, LJ_M1


def random_taylor(rng):
    c2 = rng.uniform(0.5, 20)
    c3, c4 = rng.uniform(-c2, c2, 2)
    return TaylorData(rng.uniform(0.5, 2.0), 0.0, c2, c3, c4)


class TestLaplace(unittest.TestCase):
    def residual_growth_test(self, t, chi):
        z = 0.05*math.sqrt(t.c2)*0.5**np.arange(4)
        r = np.abs(functional_residual(t, chi, z))/z**5
        # O(z^5): r settles to a constant, an O(z^4) residual would double per halving
        return r[-1]/np.max(r[:-1])

    def test_closed_forms(self):
        t = TaylorData(LJ_A, -0.25, LJ_C2, LJ_C3, LJ_C4)
        chi = invert_series(t)
        f1, f2, f3 = chi.f
        self.assertLess(relative_error(f1, LJ_C2**-0.5), 1e-14)
        self.assertLess(relative_error(f2, -LJ_C3/(2*LJ_C2**2)), 1e-14)
        self.assertLess(relative_error(f3, -(LJ_C2*f2**2 + 3*LJ_C3*f1**2*f2 + LJ_C4*f1**4)/
                                           (2*LJ_C2*f1)), 1e-12)

    def test_random_reversion(self):
        rng = seeded(6)
        for _ in range(20):
            t = random_taylor(rng)
            chi = invert_series(t)
            for generic, closed in zip(chi.f, closed_form_chi(t)):
                self.assertLess(relative_error(generic, closed), 1e-12)
            self.assertLess(self.residual_growth_test(t, chi), 1.75)
            lx = laplace_coefficients(t.a, chi)
            self.assertLess(relative_error(lx.d0/lx.b0, t.a), 1e-12)

    def test_higher_order(self):
        rng = seeded(7)
        for _ in range(5):
            t = random_taylor(rng)
            chi3, chi5 = invert_series(t), invert_series(t, order=5)
            self.assertEqual(len(chi5.f), 5)
            self.assertEqual(chi5.f[:3], chi3.f)
            z = 0.01*math.sqrt(t.c2)
            self.assertLess(abs(functional_residual(t, chi5, z)),
                            abs(functional_residual(t, chi3, z)))
        with self.assertRaises(DomainError):
            invert_series(TaylorData(1.0, 0.0, 1.0, 0.0, 0.0), order=2)
        with self.assertRaises(DomainError):
            invert_series(TaylorData(1.0, 0.0, -1.0, 0.0, 0.0))

    def test_lennard_jones_functional_equation(self):
        p = make_lennard_jones(1.0)
        t = taylor_coefficients(p)
        chi = invert_series(t)
        for z in [0.01, -0.01, 0.02, -0.02]:
            y = sum(f*z**k for k, f in enumerate(chi.f, start=1))
            residual = evaluate(p, t.a + y) - t.V_min - z**2
            self.assertLess(abs(residual)/abs(z)**5, 1e3)

    def test_exact_coefficient_chain(self):
        for c2, c3, c4 in [(Fraction(1), Fraction(-3, 7), Fraction(5, 11)),
                           (Fraction(4), Fraction(2, 3), Fraction(-1, 9))]:
            f1 = Fraction(1, 2) if c2 == 4 else Fraction(1)
            f2 = -c3/(2*c2**2)
            f3 = -(c2*f2**2 + 3*c3*f1**2*f2 + c4*f1**4)/(2*c2*f1)
            a = Fraction(9, 8)
            lx = laplace_coefficients(a, ChiSeries((f1, f2, f3)))
            self.assertEqual(lx.m1, Fraction(3, 2)*f2)
            self.assertEqual(lx.m1, thermal_expansion_coefficient(c2, c3))
            self.assertEqual(lx.d0/lx.b0, a)
            self.assertEqual(lx.b2, 3*f3)
            self.assertEqual(lx.d2, 3*(f1*f2 + a*f3))

    def test_thermal_expansion_coefficient(self):
        self.assertLess(relative_error(thermal_expansion_coefficient(LJ_C2, LJ_C3), LJ_M1), 1e-14)
        self.assertAlmostEqual(thermal_expansion_coefficient(LJ_C2, LJ_C3), 0.65477, delta=1e-5)
        self.assertEqual(thermal_expansion_coefficient(1.0, 0.0), 0.0)
        self.assertLess(thermal_expansion_coefficient(1.0, 0.05), 0)
        for c2 in [0.0, -1.0]:
            with self.assertRaises(DomainError):
                thermal_expansion_coefficient(c2, -1.0)
        t = taylor_coefficients(make_lennard_jones(1.0))
        self.assertAlmostEqual(low_temperature_mean(t, 0.01), t.a + 0.01*LJ_M1, delta=1e-10)

    def test_scaling_law(self):
        for lam in [0.5, 2.0, 3.0]:
            m1 = thermal_expansion_coefficient(LJ_C2, LJ_C3)
            self.assertLess(relative_error(thermal_expansion_coefficient(LJ_C2, lam*LJ_C3), lam*m1),
                            1e-14)
            self.assertLess(relative_error(thermal_expansion_coefficient(lam*LJ_C2, LJ_C3),
                                           m1/lam**2), 1e-14)

    def test_second_order_remainder(self):
        p = make_lennard_jones(1.0)
        t = taylor_coefficients(p)
        m1 = thermal_expansion_coefficient(t.c2, t.c3)
        ratios = [abs(integrator(p, EnsembleParams(1/T)).mean() - t.a - m1*T)/T**2
                  for T in [0.0025, 0.005, 0.01]]
        # o(T) remainder behaves as O(T^2) while the chain stays in its well
        self.assertLess(max(ratios), 10)
        self.assertLess(max(ratios)/min(ratios), 1.5)

    def test_quadratic_integrals(self):
        p = make_quadratic(1.0, 1.0)
        g = asymptotic_gibbs_integrals(p, 100.0)
        z = partition_integral(p, EnsembleParams(100.0))
        self.assertLess(relative_error(g.denominator, z.value), 1e-3)
        self.assertLess(relative_error(g.numerator/g.denominator, 1.0), 1e-12)

    def test_lennard_jones_mean(self):
        p = make_lennard_jones(1.0)
        beta = 1000.0
        m = integrator(p, EnsembleParams(beta)).mean()
        self.assertLess(relative_error(asymptotic_mean(p, beta), m), 1e-4)
        g = asymptotic_gibbs_integrals(p, beta)
        self.assertLess(relative_error(g.numerator/g.denominator, asymptotic_mean(p, beta)), 1e-14)

    def test_reliability_flag(self):
        p = make_lennard_jones(1.0)
        t = taylor_coefficients(p)
        self.assertTrue(laplace_reliable(t, 1000.0))
        self.assertFalse(laplace_reliable(t, 1.0))
        with self.assertLogs("litechain.laplace", level="WARNING"):
            asymptotic_mean(p, 1.0)
        with self.assertRaises(DomainError):
            asymptotic_mean(p, 0.0)


if __name__ == "__main__":
    unittest.main()
