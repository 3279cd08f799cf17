#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

"""Reference values of Gibbs averages: Gaussian wells and brute force Simpson."""

import math
from collections import namedtuple

import numpy as np
from scipy.integrate import simpson

SimpsonMoments = namedtuple("SimpsonMoments", "log_partition mean variance")

# quadratic well V(a+y) = c2 y^2, tails beyond the domain neglected


def gaussian_mean(a, c2, T, F=0.0):
    return a + F/(2*c2)


def gaussian_variance(c2, T):
    return T/(2*c2)


def gaussian_modulus(c2):
    return 1/(2*c2)


def gaussian_partition(a, c2, beta, F=0.0):
    return math.sqrt(math.pi/(beta*c2))*math.exp(beta*(F*a + F**2/(4*c2)))

# brute force


def simpson_moments(energy, beta, force, lo, hi, points=1000001):
    """log Z, <u> and Var u of exp(-beta (V(u) - F u)) on a uniform grid over [lo, hi]."""
    u = np.linspace(lo, hi, points)
    exponent = -beta*(energy(u) - force*u)
    peak = exponent.max()
    w = np.exp(exponent - peak)
    z = simpson(w, x=u)
    mean = simpson(u*w, x=u)/z
    variance = simpson((u - mean)**2*w, x=u)/z
    return SimpsonMoments(math.log(z) + peak, mean, variance)
