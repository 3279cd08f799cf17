#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

"""Confining pair potentials on (0, wall].

A potential is admissible when it has a single quadratic well at a > 0 and V(a)
is its strict minimum over the domain. The hard wall at u_max stands for the
confinement at large distances: configurations beyond it are forbidden, which
leaves every local quantity at a unchanged.
"""

import json
import logging
import math
from collections import namedtuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq
from scipy.special import poch

from litechain.common import DomainError, ConvergenceError, ConfigError, is_number

logger = logging.getLogger(__name__)

KINDS = ("lennard_jones", "polynomial", "quadratic")

# grid used for admissibility checks and minimum bracketing
GRID_POINTS = 10000
GRID_START  = 1e-3

LJ_MINIMUM = 2**(1/6)  # in units of sigma

# |V'(a)| in units of energy_scale/scale
MINIMUM_RESIDUAL = 1e-12

TaylorData = namedtuple("TaylorData", "a V_min c2 c3 c4")

# Potential ----------------------------------------------------------------------------------------

class PotentialSpec:
    """Immutable description of one admissible pair potential.

    - kind:   "lennard_jones", "polynomial" or "quadratic"
    - params: (sigma,) for lennard_jones, (a, c2, c3, ...) for polynomial and
              quadratic, with V(a+y) = sum_k c_k y^k
    - wall:   u_max, the domain is (0, wall]

    The minimum (a, V_min) is located and cached at construction.
    """
    def __init__(self, kind, params, wall):
        if kind not in KINDS:
            raise DomainError('unknown potential kind: {}'.format(kind))
        params = tuple(float(p) for p in params)
        wall   = float(wall)
        self.__dict__.update(kind=kind, params=params, wall=wall, minimum=None)
        if kind == "lennard_jones":
            if len(params) != 1 or not params[0] > 0:
                raise DomainError('sigma = {} must be positive'.format(params))
            if not wall > 2*LJ_MINIMUM*params[0]:
                raise DomainError('wall = {} must exceed 2*2^(1/6)*sigma = {}'.format(
                    wall, 2*LJ_MINIMUM*params[0]))
        else:
            if len(params) < 2:
                raise DomainError('polynomial needs a and at least c2')
            if not params[0] > 0:
                raise DomainError('a = {} must be positive'.format(params[0]))
            if not params[1] > 0:
                raise DomainError('c2 = {} must be positive'.format(params[1]))
            if not wall > 2*params[0]:
                raise DomainError('wall = {} must exceed 2a = {}'.format(wall, 2*params[0]))
            # V(a+y) coefficients in y, constant and linear terms vanish
            coeffs = np.array((0.0, 0.0) + params[1:])
            self.__dict__["_coeffs"] = coeffs
        self.__dict__["minimum"] = self._locate_minimum()

    @property
    def scale(self):
        """Length scale of the potential: sigma or a."""
        return self.params[0]

    @property
    def energy_scale(self):
        """Energy unit: the LJ well is written with epsilon = 1, polynomials use c2 a^2."""
        if self.kind == "lennard_jones":
            return 1.0
        return self.params[1]*self.params[0]**2

    # energy and derivatives, no domain checks, numpy friendly

    def energy(self, u):
        if self.kind == "lennard_jones":
            s6 = (self.params[0]/u)**6
            return s6*s6 - s6
        return P.polyval(u - self.params[0], self._coeffs)

    def derivative(self, u, order=1):
        if order == 0:
            return self.energy(u)
        if self.kind == "lennard_jones":
            sigma = self.params[0]
            sign  = (-1)**order
            return sign*(poch(12, order)*sigma**12*u**(-12 - order) -
                         poch(6, order)*sigma**6*u**(-6 - order))
        return P.polyval(u - self.params[0], P.polyder(self._coeffs, order))

    def grid(self, points=GRID_POINTS):
        return np.geomspace(GRID_START*self.scale, self.wall, points)

    def _locate_minimum(self):
        u  = self.grid()
        dv = np.sign(self.derivative(u))
        nonzero = dv != 0
        u, dv = u[nonzero], dv[nonzero]
        rising = np.flatnonzero((dv[:-1] < 0) & (dv[1:] > 0))
        if len(rising) == 0:
            raise DomainError('no sign change of V\' found in (0, {}]: potential has no well'.format(
                self.wall))
        if len(rising) > 1:
            raise DomainError('V\' has {} wells in (0, {}]: minimum is not unique'.format(
                len(rising), self.wall))
        lo, hi = u[rising[0]], u[rising[0] + 1]

        # bisection on the bracket, then one safeguarded Newton polish
        a = brentq(self.derivative, lo, hi, xtol=1e-14*self.scale)
        d1, d2 = self.derivative(a, 1), self.derivative(a, 2)
        if d2 > 0:
            polished = a - d1/d2
            if lo <= polished <= hi and abs(self.derivative(polished)) <= abs(d1):
                a = polished
        if self.kind != "lennard_jones" and abs(a - self.params[0]) <= 1e-12*self.scale:
            # constructed about its minimum
            a = self.params[0]
        v_min = float(self.energy(a))
        if not self.derivative(a, 2) > 0:
            raise DomainError('minimum at {} is not quadratic'.format(a))

        # V(a) must be the strict minimum over the whole domain, both ends included
        ends = [float(self.energy(self.wall))]
        if self.kind != "lennard_jones":
            ends.append(float(self.energy(0.0)))
        slack = 1e-12*max(1.0, abs(v_min))
        if min(ends) <= v_min or np.min(self.energy(u)) < v_min - slack:
            raise DomainError('second stationary point inside (0, {}]: V(a) = {} is not the '
                              'minimum of the domain'.format(self.wall, v_min))
        logger.debug("%s minimum a=%.17g V=%.17g", self.kind, a, v_min)
        return (float(a), v_min)

    def to_dict(self):
        if self.kind == "lennard_jones":
            return {"kind": self.kind, "sigma": self.params[0], "wall": self.wall}
        if self.kind == "quadratic":
            return {"kind": self.kind, "a": self.params[0], "c2": self.params[1],
                    "wall": self.wall}
        return {"kind": self.kind, "a": self.params[0], "coeffs": list(self.params[1:]),
                "wall": self.wall}

    def __setattr__(self, name, value):
        raise AttributeError('PotentialSpec is immutable')

    def __eq__(self, other):
        return (isinstance(other, PotentialSpec) and
                (self.kind, self.params, self.wall) == (other.kind, other.params, other.wall))

    def __hash__(self):
        return hash((self.kind, self.params, self.wall))

    def __getstate__(self):
        return (self.kind, self.params, self.wall)

    def __setstate__(self, state):
        kind, params, wall = state
        self.__init__(kind, params, wall)

    def __repr__(self):
        return "PotentialSpec({}, params={}, wall={})".format(self.kind, self.params, self.wall)

# Constructors -------------------------------------------------------------------------------------

def make_lennard_jones(sigma, wall=None):
    """V(r) = (sigma/r)^12 - (sigma/r)^6 on (0, wall], default wall 10a."""
    if not sigma > 0:
        raise DomainError('sigma = {} must be positive'.format(sigma))
    if wall is None:
        wall = 10*LJ_MINIMUM*sigma
    return PotentialSpec("lennard_jones", (sigma,), wall)


def make_polynomial(a, c, wall=None):
    """V(a+y) = c2 y^2 + c3 y^3 + ... with c = (c2, c3, ...), default wall 10a."""
    c = list(c)
    if len(c) == 0 or not c[0] > 0:
        raise DomainError('c2 = {} must be positive'.format(c[0] if c else None))
    if wall is None:
        wall = 10*a
    kind = "quadratic" if len(c) == 1 else "polynomial"
    return PotentialSpec(kind, [a] + c, wall)


def make_quadratic(a, c2, wall=None):
    return make_polynomial(a, [c2], wall)

# Operations ---------------------------------------------------------------------------------------

def evaluate(p, u):
    """V(u), u in (0, wall]; arrays are evaluated elementwise."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0) or np.any(arr > p.wall):
        raise DomainError('u = {} outside the domain (0, {}]'.format(u, p.wall))
    v = p.energy(arr)
    return float(v) if np.ndim(v) == 0 else v


def derivative(p, u, order=1):
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0) or np.any(arr > p.wall):
        raise DomainError('u = {} outside the domain (0, {}]'.format(u, p.wall))
    v = p.derivative(arr, order)
    return float(v) if np.ndim(v) == 0 else v


def find_minimum(p):
    """(a, V_min) of an admissible potential, |V'(a)| <= 1e-12 in reduced units."""
    a, v_min = p.minimum
    residual = abs(p.derivative(a))
    if residual > MINIMUM_RESIDUAL*p.energy_scale/p.scale:
        raise ConvergenceError('V\'(a) = {} did not vanish at a = {}'.format(residual, a))
    return a, v_min


def taylor_coefficients(p):
    """c_k = V^(k)(a)/k! for k = 2, 3, 4."""
    a, v_min = p.minimum
    if p.kind == "lennard_jones":
        c2, c3, c4 = (float(p.derivative(a, k))/math.factorial(k) for k in (2, 3, 4))
    else:
        c = list(p.params[1:]) + [0.0, 0.0]
        c2, c3, c4 = c[:3]
    if not c2 > 0:
        raise DomainError('c2 = {} must be positive'.format(c2))
    return TaylorData(a, v_min, c2, c3, c4)


def well_depth(p):
    """Energy to leave the well: V at the lower domain end above V(a)."""
    ends = [p.energy(p.wall)]
    if p.kind != "lennard_jones":
        ends.append(p.energy(0.0))
    return float(min(ends)) - p.minimum[1]


def numeric_taylor_coefficients(p, h=None):
    """Taylor data from central finite differences with one Richardson step."""
    a, v_min = p.minimum
    if h is None:
        h = a*1e-3
    f = p.energy

    def d2(h):
        return (f(a + h) - 2*f(a) + f(a - h))/h**2

    def d3(h):
        return (f(a + 2*h) - 2*f(a + h) + 2*f(a - h) - f(a - 2*h))/(2*h**3)

    def d4(h):
        return (f(a + 2*h) - 4*f(a + h) + 6*f(a) - 4*f(a - h) + f(a - 2*h))/h**4

    c = []
    for k, d in ((2, d2), (3, d3), (4, d4)):
        richardson = (4*d(h) - d(2*h))/3
        c.append(float(richardson)/math.factorial(k))
    if not c[0] > 0:
        raise DomainError('c2 = {} must be positive'.format(c[0]))
    return TaylorData(a, v_min, *c)

# JSON ---------------------------------------------------------------------------------------------

_KEYS = {
    "lennard_jones": ({"kind", "sigma"}, {"wall"}),
    "polynomial":    ({"kind", "a", "coeffs"}, {"wall"}),
    "quadratic":     ({"kind", "a", "c2"}, {"wall"}),
}


def from_dict(d):
    if not isinstance(d, dict):
        raise ConfigError('potential {!r} must be an object'.format(d))
    kind = d.get("kind")
    if not isinstance(kind, str) or kind not in _KEYS:
        raise ConfigError('unknown potential kind: {}'.format(kind))
    required, optional = _KEYS[kind]
    missing = required - set(d)
    extra   = set(d) - required - optional
    if missing:
        raise ConfigError('potential {} is missing {}'.format(kind, sorted(missing)))
    if extra:
        raise ConfigError('potential {} has unknown fields {}'.format(kind, sorted(extra)))
    for key in sorted(required - {"kind", "coeffs"} | (optional & set(d))):
        if not is_number(d[key]):
            raise ConfigError('potential {}: {} = {!r} is not a number'.format(kind, key, d[key]))
    if "coeffs" in required:
        coeffs = d["coeffs"]
        if not isinstance(coeffs, list) or not all(is_number(c) for c in coeffs):
            raise ConfigError('potential {}: coeffs = {!r} is not a list of numbers'.format(
                kind, coeffs))
    wall = d.get("wall")
    if kind == "lennard_jones":
        return make_lennard_jones(d["sigma"], wall)
    if kind == "quadratic":
        return make_quadratic(d["a"], d["c2"], wall)
    return make_polynomial(d["a"], d["coeffs"], wall)


def load_potential(path):
    try:
        with open(path, 'r') as f:
            d = json.load(f)
    except FileNotFoundError:
        raise ConfigError('potential file not found: {}'.format(path))
    except json.JSONDecodeError as e:
        raise ConfigError('potential file {} is not valid JSON: {}'.format(path, e))
    if not isinstance(d, dict):
        raise ConfigError('potential file {} must hold a JSON object'.format(path))
    return from_dict(d)
