#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

"""Gibbs expectations of the spacing distribution.

Spacings of the chain are i.i.d. with density proportional to
w(u) = exp(-beta (V(u) - F u)) on (0, wall]. Everything here is a ratio of
one-dimensional integrals of w, evaluated by adaptive Gauss-Kronrod panels
around the minimum of the effective potential W(u) = V(u) - F u.
"""

import logging
import math
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from litechain.common import DomainError, ConvergenceError, BudgetExceeded

logger = logging.getLogger(__name__)

DEFAULT_TOL    = 1e-10
DEFAULT_BUDGET = 1000000

# integrand below 1e-16 of its peak is outside the window
WINDOW_DECADES = 16
WINDOW_CUTOFF  = WINDOW_DECADES*math.log(10)
TAIL_LIMIT     = 1e-13

QuadResult = namedtuple("QuadResult", "value abs_error evaluations")

# Parameters ---------------------------------------------------------------------------------------

class EnsembleParams(namedtuple("EnsembleParams", "beta force")):
    """Inverse temperature beta and external force F acting on the chain end."""
    def __new__(cls, beta, force=0.0):
        beta, force = float(beta), float(force)
        if not beta > 0 or not math.isfinite(beta):
            raise DomainError('beta = {} must be positive'.format(beta))
        if not math.isfinite(force):
            raise DomainError('force = {} must be finite'.format(force))
        return super().__new__(cls, beta, force)

    @classmethod
    def from_temperature(cls, T, force=0.0):
        if not T > 0:
            raise DomainError('T = {} must be positive'.format(T))
        return cls(1/T, force)

    @property
    def temperature(self):
        return 1/self.beta

# Effective minimum --------------------------------------------------------------------------------

def effective_minimum(p, e):
    """(u*, W*) of W(u) = V(u) - F u; an error when F drives it onto the wall."""
    if e.force == 0:
        return p.minimum
    force = e.force

    def dw(u):
        return p.derivative(u) - force

    u  = p.grid()
    dv = np.sign(dw(u))
    keep = dv != 0
    u, dv = u[keep], dv[keep]
    rising = np.flatnonzero((dv[:-1] < 0) & (dv[1:] > 0))
    if len(rising) != 1:
        raise DomainError('force F = {} pushes the effective minimum against the wall'.format(
            force))
    lo, hi = u[rising[0]], u[rising[0] + 1]
    u_star = brentq(dw, lo, hi, xtol=1e-14*p.scale)
    d1, d2 = dw(u_star), p.derivative(u_star, 2)
    if d2 > 0:
        polished = u_star - d1/d2
        if lo <= polished <= hi and abs(dw(polished)) <= abs(d1):
            u_star = polished
    w_star = float(p.energy(u_star) - force*u_star)

    ends = [float(p.energy(p.wall) - force*p.wall)]
    if p.kind != "lennard_jones":
        ends.append(float(p.energy(0.0)))
    if min(ends) <= w_star:
        raise DomainError('force F = {} pushes the effective minimum against the wall'.format(
            force))
    return float(u_star), w_star

# Quadrature ---------------------------------------------------------------------------------------

class GibbsIntegrator:
    """Integrals of g(u) w(u) over (0, wall] for one (potential, parameters) pair.

    The integrand is shifted by the effective minimum W*, w(u) = exp(-beta (W(u) - W*)),
    so that the peak value is 1 at any beta; the shift cancels in all ratios.
    """
    def __init__(self, p, e, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
        if not tol >= 1e-13:
            raise DomainError('tol = {} is below what the quadrature can deliver'.format(tol))
        self.p, self.e = p, e
        self.tol, self.budget = tol, budget
        self.u_star, self.w_star = effective_minimum(p, e)

        # width estimate of the peak, sets the absolute scale of centered moments
        curvature = e.beta*p.derivative(self.u_star, 2)
        self.width = 1/math.sqrt(2*curvature)

        grid = p.grid()
        with np.errstate(over="ignore"):
            excess = e.beta*(p.energy(grid) - e.force*grid - self.w_star)
        inside = np.flatnonzero(excess < WINDOW_CUTOFF)
        if len(inside) == 0:
            raise ConvergenceError('integrand peak not locatable for {} at beta = {}'.format(
                p, e.beta))
        first, last = inside[0], inside[-1]
        self.u_lo = 0.0 if first == 0 else float(grid[first - 1])
        self.u_hi = p.wall if last >= len(grid) - 2 else float(grid[last + 1])
        self.u_lo = min(self.u_lo, self.u_star)
        self.u_hi = max(self.u_hi, self.u_star)
        logger.debug("window [%.6g, %.6g] around u*=%.17g beta=%g F=%g",
                     self.u_lo, self.u_hi, self.u_star, e.beta, e.force)

        self.partition = self._partition()
        # the instance is shared through the integrator cache, nothing changes after this
        u_star = self.u_star
        self._moments = (1.0,
                         self.integrate(lambda u: u - u_star, self.width),
                         self.integrate(lambda u: (u - u_star)**2, self.width**2))

    def density(self, u):
        u = np.float64(u)
        if u <= 0:
            return 0.0
        w = np.exp(-self.e.beta*(self.p.energy(u) - self.e.force*u - self.w_star))
        # inf - inf from the repulsive core at vanishing u
        return w if w == w else 0.0

    def _quad(self, f, lo, hi, epsabs, breakpoint=None):
        kwargs = dict(epsabs=epsabs, epsrel=self.tol, limit=max(50, self.budget//42),
                      full_output=1)
        if breakpoint is not None and lo < breakpoint < hi:
            kwargs["points"] = [breakpoint]
        with np.errstate(over="ignore", under="ignore"):
            result = quad(f, lo, hi, **kwargs)
        value, err, info = result[:3]
        if info["neval"] > self.budget:
            raise BudgetExceeded('quadrature used {} evaluations, budget is {}'.format(
                info["neval"], self.budget))
        if len(result) > 3 and err > max(epsabs, self.tol*abs(value)):
            message = result[3]
            if "maximum number of subdivisions" in message:
                raise BudgetExceeded('quadrature on [{}, {}]: {}'.format(lo, hi, message))
            raise ConvergenceError('quadrature on [{}, {}] reached {:.3g} only: {}'.format(
                lo, hi, err, message))
        return value, err, info["neval"]

    def _tails(self, f, epsabs):
        value, err, evals = 0.0, 0.0, 0
        for lo, hi in ((0.0, self.u_lo), (self.u_hi, self.p.wall)):
            if hi > lo:
                v, e, n = self._quad(f, lo, hi, epsabs)
                value += v
                err += e
                evals += n
        return value, err, evals

    def _partition(self):
        f = self.density
        main, err, evals = self._quad(f, self.u_lo, self.u_hi, 0.0, self.u_star)
        if not main > 0:
            raise ConvergenceError('integrand peak not locatable for {}'.format(self.p))
        tail, tail_err, tail_evals = self._tails(f, self.tol*main*1e-3)
        total = main + tail
        if abs(tail) > TAIL_LIMIT*total:
            logger.warning("tail panels hold %.3g of the partition integral", tail/total)
        return QuadResult(total, err + tail_err, evals + tail_evals)

    def integrate(self, g, scale):
        """<g> = int g w / int w; `scale` is the typical size of |g| under w."""
        z = self.partition.value

        def f(u):
            return g(u)*self.density(u)

        epsabs = self.tol*scale*z
        main, _, _ = self._quad(f, self.u_lo, self.u_hi, epsabs, self.u_star)
        tail, _, _ = self._tails(f, epsabs*1e-3)
        return (main + tail)/z

    def central_moment(self, k):
        """<(u - u*)^k>, centered at the effective minimum."""
        if k < len(self._moments):
            return self._moments[k]
        u_star = self.u_star
        return self.integrate(lambda u: (u - u_star)**k, self.width**k)

    def mean(self):
        return self.u_star + self.central_moment(1)

    def variance(self):
        d1 = self.central_moment(1)
        return self.central_moment(2) - d1*d1

    def covariance_with_energy(self):
        """<(u - <u>)(V - <V>)>, evaluated about (u*, V(u*))."""
        p, u_star = self.p, self.u_star
        v_star = float(p.energy(u_star))

        def dv(u):
            return p.energy(u) - v_star

        temperature = 1/self.e.beta
        d1 = self.central_moment(1)
        uv = self.integrate(lambda u: (u - u_star)*dv(u), self.width*temperature)
        v  = self.integrate(dv, temperature)
        return uv - d1*v


@lru_cache(maxsize=256)
def integrator(p, e, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    return GibbsIntegrator(p, e, tol, budget)

# Operations ---------------------------------------------------------------------------------------

def partition_integral(p, e, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """int_0^wall exp(-beta (V(u) - F u)) du."""
    gi = integrator(p, e, tol, budget)
    z = gi.partition
    try:
        factor = math.exp(-e.beta*gi.w_star)
    except OverflowError:
        raise DomainError('partition integral overflows at beta = {}; use ratios'.format(e.beta))
    return QuadResult(z.value*factor, z.abs_error*factor, z.evaluations)


def moment(p, e, k, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """<u^k>, assembled from moments centered at the effective minimum."""
    if k < 0 or int(k) != k:
        raise DomainError('k = {} must be a non-negative integer'.format(k))
    gi = integrator(p, e, tol, budget)
    return sum(math.comb(k, j)*gi.u_star**(k - j)*gi.central_moment(j) for j in range(k + 1))


def mean_spacing(p, T, F=0.0, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """m(T, F)."""
    return integrator(p, EnsembleParams.from_temperature(T, F), tol, budget).mean()


def variance(p, e, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    return integrator(p, e, tol, budget).variance()


def elastic_modulus(p, T, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """R = dm/dF at F = 0 = beta (<u^2> - <u>^2)."""
    e = EnsembleParams.from_temperature(T)
    r = e.beta*integrator(p, e, tol, budget).variance()
    if not r > 0:
        raise ConvergenceError('elastic modulus R = {} is not positive'.format(r))
    return r


def elastic_expansion(p, T, F, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """m(T, F) - m(T, 0)."""
    if F == 0:
        return 0.0
    return mean_spacing(p, T, F, tol, budget) - mean_spacing(p, T, 0.0, tol, budget)


def covariance_uV(p, beta, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """<uV> - <u><V> at F = 0; equals d/de m(1/(beta - e)) at e = 0."""
    return integrator(p, EnsembleParams(beta), tol, budget).covariance_with_energy()


def chain_length(p, T, F, N, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """<x_N> = N m(T, F)."""
    if N < 1 or int(N) != N:
        raise DomainError('N = {} must be a positive integer'.format(N))
    return N*mean_spacing(p, T, F, tol, budget)


def cumulative_distribution(p, e, u, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Numeric CDF of the spacing law at the points u."""
    gi = integrator(p, e, tol, budget)
    u = np.asarray(u, dtype=float)
    flat = np.clip(u.ravel(), 0.0, p.wall)
    order = np.argsort(flat)
    z = gi.partition.value
    cdf = np.empty(len(flat))
    acc, prev = 0.0, 0.0
    for i in order:
        x = flat[i]
        if x > prev:
            inner = [b for b in (gi.u_lo, gi.u_star, gi.u_hi) if prev < b < x]
            with np.errstate(over="ignore", under="ignore"):
                v, _ = quad(gi.density, prev, x, epsabs=tol*z*1e-3, epsrel=tol,
                            points=inner or None, limit=200)
            acc += v
            prev = x
        cdf[i] = acc/z
    return np.clip(cdf, 0.0, 1.0).reshape(u.shape)

# Sweeps -------------------------------------------------------------------------------------------

def sweep(func, grid, jobs=1):
    """[func(x) for x in grid], evaluated by `jobs` worker processes, in grid order."""
    grid = list(grid)
    if jobs <= 1 or len(grid) <= 1:
        return [func(x) for x in grid]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, grid))
