#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

"""Low temperature asymptotics of the mean spacing.

The substitution u = a + chi(z) with V(a + chi(z)) = V(a) + z^2 turns both Gibbs
integrals into Gaussian integrals in z:

    int exp(-beta V) du   ~ sqrt(pi/beta) exp(-beta V(a)) (b0 + b2/(2 beta) + ...)
    int u exp(-beta V) du ~ sqrt(pi/beta) exp(-beta V(a)) (d0 + d2/(2 beta) + ...)

with chi'(z) = sum b_k z^k and (a + chi(z)) chi'(z) = sum d_k z^k.
"""

import logging
import math
from collections import namedtuple

import numpy as np
from numpy.polynomial import polynomial as P

from litechain.common import DomainError, ConvergenceError
from litechain.potentials import taylor_coefficients

logger = logging.getLogger(__name__)

# beta c2 a^2 below this and the two-term expansion is only indicative
RELIABLE_BETA_C2_A2 = 50

ChiSeries        = namedtuple("ChiSeries", "f")  # (f1, f2, f3, ...)
LaplaceExpansion = namedtuple("LaplaceExpansion", "a b0 b2 d0 d2 m1")
GibbsAsymptotics = namedtuple("GibbsAsymptotics", "numerator denominator")

# Series reversion ---------------------------------------------------------------------------------

def compose(c, chi, degree):
    """Coefficients of sum_k c[k] chi(z)^k up to z^degree; c and chi are power series."""
    result = np.zeros(degree + 1)
    power  = np.ones(1)
    for k in range(1, len(c)):
        power = P.polymul(power, chi)[:degree + 1]
        result[:len(power)] += c[k]*power
    return result


def closed_form_chi(t):
    """f1, f2, f3 of chi from c2, c3, c4."""
    c2, c3, c4 = t.c2, t.c3, t.c4
    f1 = c2**-0.5
    f2 = -c3/(2*c2**2)
    f3 = -(c2*f2**2 + 3*c3*f1**2*f2 + c4*f1**4)/(2*c2*f1)
    return f1, f2, f3


def invert_series(t, order=3):
    """chi(z) = f1 z + ... + f_order z^order solving V(a + chi(z)) = V(a) + z^2.

    Coefficients are matched power by power on the quartic Taylor polynomial of V:
    the z^(n+1) coefficient is linear in f_n with factor 2 c2 f1.
    """
    if order < 3 or int(order) != order:
        raise DomainError('order = {} must be an integer >= 3'.format(order))
    if not t.c2 > 0:
        raise DomainError('c2 = {} must be positive'.format(t.c2))
    c = np.array([0.0, 0.0, t.c2, t.c3, t.c4])
    chi = [0.0, t.c2**-0.5]
    for n in range(2, order + 1):
        s = compose(c, np.array(chi + [0.0]), n + 1)
        chi.append(-s[n + 1]/(2*t.c2*chi[1]))
    f = tuple(float(v) for v in chi[1:])

    for k, (generic, closed) in enumerate(zip(f, closed_form_chi(t)), start=1):
        if abs(generic - closed) > 1e-10*max(1.0, abs(closed)):
            raise ConvergenceError('f{} = {} from reversion disagrees with closed form {}'.format(
                k, generic, closed))
    return ChiSeries(f)


def functional_residual(t, chi, z):
    """sum_k c_k chi(z)^k - z^2 on the quartic Taylor polynomial."""
    z = np.asarray(z, dtype=float)
    y = P.polyval(z, (0.0,) + tuple(chi.f))
    return t.c2*y**2 + t.c3*y**3 + t.c4*y**4 - z**2

# Coefficient chain --------------------------------------------------------------------------------

def laplace_coefficients(a, chi):
    """b0, b2, d0, d2 and m1 from a and chi; exact for exact (e.g. Fraction) inputs."""
    f1, f2, f3 = chi.f[:3]
    if not f1 > 0:
        raise DomainError('f1 = {} must be positive'.format(f1))
    b0 = f1
    b2 = 3*f3
    d0 = a*f1
    d2 = 3*(f1*f2 + a*f3)
    m1 = d2/(2*b0) - d0*b2/(2*b0**2)
    return LaplaceExpansion(a, b0, b2, d0, d2, m1)


def thermal_expansion_coefficient(c2, c3):
    """m1 = -3 c3 / (4 c2^2); positive iff c3 < 0."""
    if not c2 > 0:
        raise DomainError('c2 = {} must be positive'.format(c2))
    return -3*c3/(4*c2**2)


def low_temperature_mean(t, T):
    """a + m1 T."""
    if not T > 0:
        raise DomainError('T = {} must be positive'.format(T))
    return t.a + thermal_expansion_coefficient(t.c2, t.c3)*T

# Gibbs integrals ----------------------------------------------------------------------------------

def laplace_reliable(t, beta):
    return beta*t.c2*t.a**2 >= RELIABLE_BETA_C2_A2


def expansion(p, beta):
    t = taylor_coefficients(p)
    if not laplace_reliable(t, beta):
        logger.warning("beta c2 a^2 = %.3g < %d: two-term Laplace expansion is indicative only",
                       beta*t.c2*t.a**2, RELIABLE_BETA_C2_A2)
    return t, laplace_coefficients(t.a, invert_series(t))


def asymptotic_gibbs_integrals(p, beta):
    """Two-term Laplace approximations of int u w(u) du and int w(u) du."""
    if not beta > 0:
        raise DomainError('beta = {} must be positive'.format(beta))
    t, lx = expansion(p, beta)
    try:
        prefactor = math.sqrt(math.pi/beta)*math.exp(-beta*t.V_min)
    except OverflowError:
        raise DomainError('Laplace prefactor overflows at beta = {}'.format(beta))
    numerator   = prefactor*(lx.d0 + lx.d2/(2*beta))
    denominator = prefactor*(lx.b0 + lx.b2/(2*beta))
    return GibbsAsymptotics(numerator, denominator)


def asymptotic_mean(p, beta):
    """(d0 + d2/(2 beta))/(b0 + b2/(2 beta)) = a + m1/beta + O(beta^-2)."""
    if not beta > 0:
        raise DomainError('beta = {} must be positive'.format(beta))
    _, lx = expansion(p, beta)
    return (lx.d0 + lx.d2/(2*beta))/(lx.b0 + lx.b2/(2*beta))
