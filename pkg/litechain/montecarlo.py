#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

"""Sampling of chains with i.i.d. spacings and of perturbed harmonic lattices."""

import logging
import math
from collections import namedtuple
from functools import lru_cache, partial

import numpy as np
from scipy import stats

from litechain.common import DomainError, ConvergenceError, write_csv, write_json
from litechain.ensemble import DEFAULT_TOL, DEFAULT_BUDGET, integrator, cumulative_distribution, sweep

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "Philox"

# interpolated CDF error of the inverse table
TABLE_TOLERANCE = 1e-8
TABLE_BASE_CELLS = 256
TABLE_MAX_PASSES = 40

# rejection envelope: gaussian core widened over the spacing sd, uniform floor over the window
ENVELOPE_WIDENING = 1.25
ENVELOPE_FLOOR    = 1e-2
ENVELOPE_SAFETY   = 1.2

SAMPLERS = ("inverse_cdf", "rejection")

_nodes, _weights = np.polynomial.legendre.leggauss(8)

# Random streams -----------------------------------------------------------------------------------

def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**64:
        raise DomainError('seed = {} is not an unsigned 64 bit integer'.format(seed))
    return int(seed)


class RandomStream:
    """Stream `index` of a master seed.

    Streams are keyed by SeedSequence(seed, spawn_key=(index,)) on a Philox counter
    based generator, so stream k of a seed is the same whichever process draws it.
    """
    algorithm = RNG_ALGORITHM

    def __init__(self, seed, index=0):
        self.seed  = check_seed(seed)
        self.index = int(index)
        if self.index < 0:
            raise DomainError('stream index = {} must be non-negative'.format(index))
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.index,))
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def __repr__(self):
        return "RandomStream(seed={}, index={}, {})".format(self.seed, self.index, self.algorithm)


def _generator(rng):
    if isinstance(rng, RandomStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise DomainError('{} is not a random source'.format(rng))

# Spacing sampler ----------------------------------------------------------------------------------

class SpacingSampler:
    """Draws from the density proportional to exp(-beta (V(u) - F u)) on (0, wall].

    The window and the effective minimum come from the ensemble integrator. The
    inverse CDF is tabulated on cells that are halved until linear interpolation of
    the CDF is off by less than TABLE_TOLERANCE at every cell midpoint.
    """
    def __init__(self, p, e, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
        self.p, self.e = p, e
        self.gi = gi = integrator(p, e, tol, budget)
        self.lo, self.hi = max(gi.u_lo, 0.0), gi.u_hi
        self._tabulate()
        self._envelope()

    def density(self, u):
        """Unnormalized, vectorized; peak value 1 at u*."""
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            w = np.exp(-self.e.beta*(self.p.energy(u) - self.e.force*u - self.gi.w_star))
        return np.where((u > 0) & np.isfinite(w), w, 0.0)

    def _mass(self, lo, hi):
        half = 0.5*(hi - lo)
        mid  = 0.5*(hi + lo)
        u = mid[:, None] + half[:, None]*_nodes[None, :]
        return half*(self.density(u) @ _weights)

    def _tabulate(self):
        gi = self.gi
        core = np.linspace(max(self.lo, gi.u_star - 40*gi.width),
                           min(self.hi, gi.u_star + 40*gi.width), TABLE_BASE_CELLS + 1)
        edges = np.unique(np.concatenate([
            np.linspace(self.lo, self.hi, TABLE_BASE_CELLS + 1), core, [gi.u_star]]))
        lo, hi = edges[:-1], edges[1:]
        scale = np.sum(self._mass(lo, hi))

        for passes in range(TABLE_MAX_PASSES):
            mid  = 0.5*(lo + hi)
            left = self._mass(lo, mid)
            mass = left + self._mass(mid, hi)
            error = np.abs(left - 0.5*mass)/scale
            bad = error > TABLE_TOLERANCE
            logger.debug("table pass %d: %d cells, %d refined", passes, len(lo), np.count_nonzero(bad))
            if not np.any(bad):
                break
            lo = np.concatenate([lo[~bad], lo[bad], mid[bad]])
            hi = np.concatenate([hi[~bad], mid[bad], hi[bad]])
            order = np.argsort(lo)
            lo, hi = lo[order], hi[order]
        else:
            raise ConvergenceError('inverse CDF table did not reach {} after {} passes'.format(
                TABLE_TOLERANCE, TABLE_MAX_PASSES))

        cdf = np.concatenate([[0.0], np.cumsum(mass)])
        self.norm = cdf[-1]
        if not self.norm > 0:
            raise ConvergenceError('spacing density vanishes on [{}, {}]'.format(self.lo, self.hi))
        self.cdf_nodes = cdf/self.norm
        self.u_nodes   = np.concatenate([lo, hi[-1:]])
        logger.debug("inverse CDF table: %d cells on [%.6g, %.6g]", len(lo), self.lo, self.hi)

    def _envelope(self):
        gi = self.gi
        self.env_mean  = gi.u_star
        self.env_sd    = ENVELOPE_WIDENING*math.sqrt(gi.variance())
        self.env_width = self.hi - self.lo
        u = np.unique(np.concatenate([
            np.linspace(self.lo, self.hi, 20001),
            np.clip(np.linspace(gi.u_star - 10*self.env_sd, gi.u_star + 10*self.env_sd, 4001),
                    self.lo, self.hi)]))
        ratio = self.normalized_density(u)/self.envelope(u)
        self.bound = ENVELOPE_SAFETY*float(np.max(ratio))
        if self.bound > 1e3:
            logger.warning("rejection sampler accepts 1 in %.3g proposals", self.bound)

    def normalized_density(self, u):
        return self.density(u)/self.norm

    def envelope(self, u):
        u = np.asarray(u, dtype=float)
        inside = (u >= self.lo) & (u <= self.hi)
        core = stats.norm.pdf(u, loc=self.env_mean, scale=self.env_sd)
        return np.where(inside, (1 - ENVELOPE_FLOOR)*core + ENVELOPE_FLOOR/self.env_width, 0.0)

    def inverse_cdf(self, generator, size):
        # 1 - U lies in (0, 1], so u = lo only on a zero mass cell
        q = 1.0 - generator.random(size)
        return np.interp(q, self.cdf_nodes, self.u_nodes)

    def rejection(self, generator, size):
        out = np.empty(0)
        while len(out) < size:
            n = int(1.2*self.bound*(size - len(out))) + 16
            core = generator.random(n) >= ENVELOPE_FLOOR
            u = np.where(core, generator.normal(self.env_mean, self.env_sd, n),
                         generator.uniform(self.lo, self.hi, n))
            v = generator.random(n)
            g = self.envelope(u)
            accept = (g > 0) & (v*self.bound*g < self.normalized_density(u))
            out = np.concatenate([out, u[accept]])
        return out[:size]

    def draw(self, rng, size, method="inverse_cdf"):
        if method not in SAMPLERS:
            raise DomainError('unknown sampler: {}'.format(method))
        return getattr(self, method)(_generator(rng), size)


@lru_cache(maxsize=64)
def spacing_sampler(p, e, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    return SpacingSampler(p, e, tol, budget)

# Chains -------------------------------------------------------------------------------------------

ChainSample = namedtuple("ChainSample", "spacings positions seed stream params")


def sample_spacing(p, e, rng, method="inverse_cdf"):
    """One draw of the spacing law."""
    return float(spacing_sampler(p, e).draw(rng, 1, method)[0])


def sample_chain(p, e, N, rng, method="inverse_cdf"):
    """N i.i.d. spacings and the positions x_0 = 0 < x_1 < ... < x_N."""
    if N < 1 or int(N) != N:
        raise DomainError('N = {} must be a positive integer'.format(N))
    spacings  = spacing_sampler(p, e).draw(rng, int(N), method)
    positions = np.concatenate([[0.0], np.cumsum(spacings)])
    if np.any(np.diff(positions) <= 0):
        raise DomainError('spacing below the resolution of the positions')
    seed, stream = (rng.seed, rng.index) if isinstance(rng, RandomStream) else (None, None)
    return ChainSample(spacings, positions, seed, stream, (p, e))


def empirical_stats(samples):
    """(mean, unbiased variance, standard error of the mean)."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise DomainError('need at least 2 samples, got {}'.format(x.size))
    mean = float(np.mean(x))
    var  = float(np.var(x, ddof=1))
    return mean, var, math.sqrt(var/len(x))


def _replica_length(p, e, N, seed, method, index):
    return float(sample_chain(p, e, N, RandomStream(seed, index), method).positions[-1])


def sample_replicas(p, e, N, seed, replicas, jobs=1, method="inverse_cdf"):
    """x_N of `replicas` chains; replica k draws from stream k of the seed."""
    if replicas < 1:
        raise DomainError('replicas = {} must be positive'.format(replicas))
    check_seed(seed)
    return sweep(partial(_replica_length, p, e, N, seed, method), range(replicas), jobs)


def ks_test(p, e, samples, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Kolmogorov-Smirnov test of spacings against the numeric CDF."""
    return stats.kstest(np.asarray(samples, dtype=float),
                        lambda u: cumulative_distribution(p, e, u, tol, budget))

# Export -------------------------------------------------------------------------------------------

def write_chain_csv(path, chain):
    rows = [(0, 0.0, "")]
    rows += [(k, float(x), float(u)) for k, (x, u) in
             enumerate(zip(chain.positions[1:], chain.spacings), start=1)]
    return write_csv(path, ("k", "x_k", "u_k"), rows)


def provenance(chain):
    p, e = chain.params
    return {
        "seed":          chain.seed,
        "kind":          p.kind,
        "beta":          e.beta,
        "force":         e.force,
        "N":             len(chain.spacings),
        "rng_algorithm": RNG_ALGORITHM,
    }


def write_provenance(path, chain):
    return write_json(path, provenance(chain))

# Harmonic spread ----------------------------------------------------------------------------------

class TailModel(namedtuple("TailModel", "kind param")):
    """Law of the displacements xi_i of a harmonic lattice.

    - bounded(M):    uniform on [-M, M]
    - gaussian(s):   normal with standard deviation s
    - pareto(alpha): symmetric Lomax, P(|xi| > x) = (1 + x)^-alpha
    """
    PARAMS = {"bounded": "M", "gaussian": "s", "pareto": "alpha"}

    def __new__(cls, kind, param):
        if kind not in cls.PARAMS:
            raise DomainError('unknown tail model: {}'.format(kind))
        param = float(param)
        if not param > 0 or not math.isfinite(param):
            raise DomainError('{} = {} must be positive'.format(cls.PARAMS[kind], param))
        return super().__new__(cls, kind, param)

    @classmethod
    def bounded(cls, M):
        return cls("bounded", M)

    @classmethod
    def gaussian(cls, s):
        return cls("gaussian", s)

    @classmethod
    def pareto(cls, alpha):
        return cls("pareto", alpha)

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind")
        if kind not in cls.PARAMS or set(d) != {"kind", cls.PARAMS[kind]}:
            raise DomainError('tail model {} must be one of {}'.format(d, cls.PARAMS))
        return cls(kind, d[cls.PARAMS[kind]])

    def describe(self):
        return "{}({}={:g})".format(self.kind, self.PARAMS[self.kind], self.param)

    def draw(self, generator, size):
        if self.kind == "bounded":
            return generator.uniform(-self.param, self.param, size)
        if self.kind == "gaussian":
            return generator.normal(0.0, self.param, size)
        sign = np.where(generator.random(size) < 0.5, -1.0, 1.0)
        return sign*generator.pareto(self.param, size)


SpreadResult = namedtuple("SpreadResult", "N ratio tail_model")


def harmonic_spread_experiment(tail_model, a, N, rng):
    """X/(N a) for x_i = i a + xi_i, i = 0..N, X = max x_i - min x_i."""
    if not isinstance(tail_model, TailModel):
        raise DomainError('{} is not a tail model'.format(tail_model))
    if N < 10 or int(N) != N:
        raise DomainError('N = {} must be an integer >= 10'.format(N))
    if not a > 0:
        raise DomainError('a = {} must be positive'.format(a))
    generator = _generator(rng)
    x = np.arange(int(N) + 1)*a + tail_model.draw(generator, int(N) + 1)
    ratio = float(np.ptp(x))/(N*a)
    return SpreadResult(int(N), ratio, tail_model.describe())
