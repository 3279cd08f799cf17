#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

"""litechain command line: sweeps, sampling runs and the validation suite.

Data products (CSV, JSON report) go to --out, or to stdout without it. The
summary of a run goes to stdout when the data went to a file, to stderr otherwise.

Exit codes: 0 success, 1 failed check or compute error, 2 usage or config error.
"""

import argparse
import logging
import math
import os
import sys
from functools import partial

import numpy as np
from scipy import stats

from litechain.common import (LiteChainError, ConfigError, RunConfig, fmt, write_csv,
    write_json)
from litechain.potentials import (TaylorData, make_quadratic, make_polynomial,
    taylor_coefficients, well_depth)
from litechain.ensemble import (EnsembleParams, integrator, mean_spacing, elastic_modulus,
    covariance_uV, sweep)
from litechain.laplace import (closed_form_chi, invert_series, functional_residual,
    laplace_coefficients, thermal_expansion_coefficient, asymptotic_mean)
from litechain.montecarlo import (RandomStream, TailModel, sample_chain, sample_replicas,
    spacing_sampler, empirical_stats, ks_test, harmonic_spread_experiment, write_chain_csv,
    write_provenance)

logger = logging.getLogger(__name__)

# beta times the well depth below this and the weight near the wall shows up in m(T)
BOUND_DEPTH = 20

# Helpers ------------------------------------------------------------------------------------------

def _mean_at_temperature(p, F, tol, budget, T):
    return mean_spacing(p, T, F, tol, budget)


def _mean_at_force(p, T, tol, budget, F):
    return mean_spacing(p, T, F, tol, budget)


def _mean_at_beta(p, tol, budget, beta):
    return integrator(p, EnsembleParams(beta), tol, budget).mean()


def fit_slope(x, y, intercept=0.0):
    """Slope s of y = intercept + s x + q x^2, from (y - intercept)/x regressed on [1, x]."""
    x = np.asarray(x, dtype=float)
    z = (np.asarray(y, dtype=float) - intercept)/x
    if len(x) == 1:
        return float(z[0])
    design = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(design, z, rcond=None)
    return float(coef[0])


def smallest_decade(grid):
    grid = sorted(grid)
    return [v for v in grid if abs(v) <= 10*abs(grid[0])]


def fit_temperatures(p, grid):
    """Temperatures of the smallest decade at which the chain stays bound to its well."""
    depth  = well_depth(p)
    decade = smallest_decade(grid)
    bound  = [T for T in decade if depth/T >= BOUND_DEPTH]
    if not bound:
        logger.warning("no temperature with beta D >= %d, fitting T = %g only", BOUND_DEPTH, decade[0])
        bound = decade[:1]
    return bound


def relative_error(measured, expected):
    if expected == 0:
        return abs(measured)
    return abs(measured - expected)/abs(expected)


def _emit(config, data, summary):
    """Data to --out or stdout, summary JSON alongside."""
    if config.out is None:
        sys.stdout.write(data)
        sys.stderr.write(write_json(None, summary))
    else:
        with open(config.out, "w", newline="\n") as f:
            f.write(data)
        sys.stdout.write(write_json(None, summary))

# Commands -----------------------------------------------------------------------------------------

def cmd_sweep_temperature(config):
    p = config.potential_spec()
    t = taylor_coefficients(p)
    m1 = thermal_expansion_coefficient(t.c2, t.c3)
    temperatures = config.temperatures
    m = sweep(partial(_mean_at_temperature, p, 0.0, config.tol, config.budget), temperatures,
              config.jobs)
    rows = []
    for T, mq in zip(temperatures, m):
        ml = asymptotic_mean(p, 1/T)
        rows.append((T, mq, ml, mq - ml))
    fit = fit_temperatures(p, temperatures)
    at  = dict(zip(temperatures, m))
    slope = fit_slope(fit, [at[T] for T in fit], t.a)
    summary = {
        "command":        "sweep-temperature",
        "a":              t.a,
        "m1":             m1,
        "slope":          slope,
        "relative_error": relative_error(slope, m1),
        "fit_points":     fit,
        "fit_model":      "m - a = slope*T + q*T^2",
    }
    _emit(config, write_csv(None, ("T", "m_quadrature", "m_laplace", "residual"), rows), summary)
    return 0


def cmd_sweep_force(config):
    p = config.potential_spec()
    T = config.temperature
    forces = config.forces
    m = sweep(partial(_mean_at_force, p, T, config.tol, config.budget), forces, config.jobs)
    m0 = mean_spacing(p, T, 0.0, config.tol, config.budget)
    R = elastic_modulus(p, T, config.tol, config.budget)
    rows, fx, fy = [], [], []
    for F, mf in zip(forces, m):
        expansion = mf - m0 if F != 0 else 0.0
        rows.append((F, mf, expansion, R*F))
        if F != 0:
            fx.append(F)
            fy.append(expansion)
    slope = fit_slope(fx, fy) if fx else None
    summary = {
        "command":        "sweep-force",
        "T":              T,
        "R":              R,
        "slope":          slope,
        "relative_error": relative_error(slope, R) if fx else None,
        "fit_points":     len(fx),
        "fit_model":      "m(T,F) - m(T,0) = slope*F + q*F^2",
    }
    _emit(config, write_csv(None, ("F", "m", "elastic_expansion", "R_F"), rows), summary)
    return 0


def cmd_sample(config):
    sidecar = None
    if config.out is not None:
        sidecar = os.path.splitext(config.out)[0] + ".json"
        if os.path.abspath(sidecar) == os.path.abspath(config.out):
            raise ConfigError('--out {} collides with its provenance sidecar, use a .csv path'.format(
                config.out))
    p = config.potential_spec()
    e = EnsembleParams.from_temperature(config.temperature, config.force)
    chain = sample_chain(p, e, config.N, RandomStream(config.seed, 0))
    expected = config.N*mean_spacing(p, config.temperature, config.force, config.tol,
                                     config.budget)
    summary = {
        "command":  "sample",
        "N":        config.N,
        "replicas": config.replicas,
        "seed":     config.seed,
        "expected_length": expected,
    }
    if config.replicas > 1:
        lengths = sample_replicas(p, e, config.N, config.seed, config.replicas, config.jobs)
        mean, var, stderr = empirical_stats(lengths)
        summary.update(mean_length=mean, variance=var, stderr=stderr,
                       z_score=(mean - expected)/stderr if stderr > 0 else None)
        if config.out is not None:
            write_csv(config.out + ".replicas.csv", ("replica", "x_N"), enumerate(lengths))
    else:
        summary.update(mean_length=float(chain.positions[-1]))
    if sidecar is not None:
        write_provenance(sidecar, chain)
    _emit(config, write_chain_csv(None, chain), summary)
    return 0


def cmd_harmonic_demo(config):
    try:
        models = [TailModel.from_dict(d) for d in config.tail_models]
    except (LiteChainError, AttributeError, TypeError, ValueError) as e:
        raise ConfigError('tail_models: {}'.format(e))
    rows, groups = [], []
    stream = 0
    for model in models:
        for N in config.sizes:
            ratios = []
            for _ in range(config.seeds):
                r = harmonic_spread_experiment(model, config.spacing, N,
                                               RandomStream(config.seed, stream))
                stream += 1
                rows.append((r.N, r.tail_model, r.ratio))
                ratios.append(r.ratio)
            ratios = np.array(ratios)
            groups.append({
                "tail_model":   model.describe(),
                "N":            N,
                "mean_ratio":   float(np.mean(ratios)),
                "max_ratio":    float(np.max(ratios)),
                "within_1e-2":  int(np.count_nonzero(np.abs(ratios - 1) < 1e-2)),
                "above_1.05":   int(np.count_nonzero(ratios > 1.05)),
            })
    summary = {"command": "harmonic-demo", "seeds": config.seeds, "groups": groups}
    _emit(config, write_csv(None, ("N", "tail_model", "ratio"), rows), summary)
    return 0

# Validation suite ---------------------------------------------------------------------------------

class Checks:
    """Collects {name, measured, tolerance, passed} entries."""
    def __init__(self, scale):
        self.scale   = scale
        self.entries = []

    def add(self, name, measured, tolerance, passed):
        self.entries.append({
            "name":      name,
            "measured":  float(measured),
            "tolerance": float(tolerance),
            "passed":    bool(passed),
        })
        logger.info("%-28s measured %s tolerance %s %s", name, fmt(float(measured)),
                    fmt(float(tolerance)), "ok" if passed else "FAILED")

    def at_most(self, name, measured, tolerance):
        tolerance = tolerance*self.scale
        self.add(name, measured, tolerance, measured <= tolerance)

    def at_least(self, name, measured, bound):
        self.add(name, measured, bound, measured >= bound)

    @property
    def passed(self):
        return all(entry["passed"] for entry in self.entries)


def _test_potentials(p):
    return [p, make_quadratic(1.0, 1.0), make_quadratic(1.0, 4.0),
            make_polynomial(1.0, [1.0, -0.1]), make_polynomial(1.0, [1.0, 0.05])]


def validate_thermal_expansion(checks, p, config):
    t = taylor_coefficients(p)
    m1 = thermal_expansion_coefficient(t.c2, t.c3)
    fit = fit_temperatures(p, config.temperatures)
    m = sweep(partial(_mean_at_temperature, p, 0.0, config.tol, config.budget), fit, config.jobs)
    checks.at_most("thermal_slope", relative_error(fit_slope(fit, m, t.a), m1), 2e-2)

    q = make_quadratic(1.0, 1.0)
    fit = fit_temperatures(q, config.temperatures)
    m = sweep(partial(_mean_at_temperature, q, 0.0, config.tol, config.budget), fit, config.jobs)
    checks.at_most("thermal_slope_quadratic", abs(fit_slope(fit, m, 1.0)), 1e-3)


def validate_modulus(checks, p, config):
    T, delta = 0.01, 1e-4
    R = elastic_modulus(p, T, config.tol, config.budget)
    fd = (mean_spacing(p, T, delta, config.tol, config.budget) -
          mean_spacing(p, T, -delta, config.tol, config.budget))/(2*delta)
    checks.at_most("modulus_identity", relative_error(fd, R), 1e-4)

    moduli = [elastic_modulus(q, T, config.tol, config.budget) for q in _test_potentials(p)]
    checks.add("modulus_positive", min(moduli), 0.0, min(moduli) > 0)

    worst = max(relative_error(elastic_modulus(make_quadratic(1.0, c2), T, config.tol,
                                               config.budget), 1/(2*c2)) for c2 in (1.0, 4.0))
    checks.at_most("modulus_quadratic", worst, 1e-4)


def validate_covariance(checks, p, config):
    beta, eps = 100.0, 1.0
    cov = covariance_uV(p, beta, config.tol, config.budget)
    lower, upper = sweep(partial(_mean_at_beta, p, config.tol, config.budget),
                         [beta - eps, beta + eps], config.jobs)
    fd = (lower - upper)/(2*eps)
    checks.at_most("covariance_identity", relative_error(cov, fd), 1e-3)

    t = taylor_coefficients(p)
    if t.c3 != 0:
        checks.add("covariance_sign", cov, 0.0, (cov > 0) == (t.c3 < 0))
    opposite = covariance_uV(make_polynomial(1.0, [1.0, 0.05]), 200.0, config.tol,
                             config.budget)
    checks.add("covariance_sign_flip", opposite, 0.0, opposite < 0)


def validate_reversion(checks, config):
    rng = np.random.default_rng(config.seed)
    closed, growth, leading = 0.0, 0.0, 0.0
    for _ in range(20):
        c2 = rng.uniform(0.5, 20)
        c3, c4 = rng.uniform(-c2, c2, 2)
        a = rng.uniform(0.5, 2.0)
        t = TaylorData(a, 0.0, c2, c3, c4)
        chi = invert_series(t)
        for generic, exact in zip(chi.f, closed_form_chi(t)):
            closed = max(closed, abs(generic - exact)/abs(exact))
        z = 0.05*math.sqrt(c2)*0.5**np.arange(4)
        r = np.abs(functional_residual(t, chi, z))/z**5
        growth = max(growth, r[-1]/(np.max(r[:-1]) + 1e-300))
        lx = laplace_coefficients(a, chi)
        leading = max(leading, abs(lx.d0/lx.b0 - a)/a)
    checks.at_most("reversion_closed_form", closed, 1e-12)
    checks.at_most("reversion_residual_order", growth, 1.75)
    checks.at_most("laplace_leading_ratio", leading, 1e-12)


def validate_laplace(checks, p, config):
    beta = 1000.0
    m = _mean_at_beta(p, config.tol, config.budget, beta)
    checks.at_most("laplace_vs_quadrature", relative_error(asymptotic_mean(p, beta), m), 1e-4)


def validate_montecarlo(checks, p, config):
    N, replicas, alpha = 10000, 100, 0.01
    e = EnsembleParams(100.0)
    expected = N*integrator(p, e, config.tol, config.budget).mean()
    lengths = sample_replicas(p, e, N, config.seed, replicas, config.jobs)
    mean, _, stderr = empirical_stats(lengths)
    checks.at_most("chain_length_zscore", abs(mean - expected)/stderr, 3.0)

    chain = sample_chain(p, e, N, RandomStream(config.seed, 0))
    checks.at_least("spacing_ks_pvalue", ks_test(p, e, chain.spacings).pvalue, alpha)

    rejected = spacing_sampler(p, e).draw(RandomStream(config.seed, replicas), N, "rejection")
    checks.at_least("sampler_agreement_pvalue",
                    stats.ks_2samp(chain.spacings, rejected).pvalue, alpha)


def validate_harmonic(checks, config):
    N, a = 10000, 1.0
    bounded = TailModel.bounded(1.0)
    worst = max(abs(harmonic_spread_experiment(bounded, a, N,
                    RandomStream(config.seed, 1000 + k)).ratio - 1) for k in range(10))
    checks.at_most("spread_bounded", worst, 2e-4)

    gaussian = TailModel.gaussian(1.0)
    threshold = 1e-2*checks.scale
    within = sum(abs(harmonic_spread_experiment(gaussian, a, N,
                     RandomStream(config.seed, 2000 + k)).ratio - 1) < threshold
                 for k in range(100))
    checks.at_least("spread_gaussian_seeds", within, 99)


def cmd_validate(config):
    p = config.potential_spec()
    checks = Checks(config.check_tolerance_scale)
    validate_thermal_expansion(checks, p, config)
    validate_modulus(checks, p, config)
    validate_covariance(checks, p, config)
    validate_reversion(checks, config)
    validate_laplace(checks, p, config)
    validate_montecarlo(checks, p, config)
    validate_harmonic(checks, config)

    report = {
        "potential": p.to_dict(),
        "seed":      config.seed,
        "checks":    checks.entries,
        "passed":    checks.passed,
    }
    lines = ["{:<28s} {:>24s} {:>24s} {}".format(c["name"], fmt(c["measured"]),
             fmt(c["tolerance"]), "ok" if c["passed"] else "FAILED") for c in checks.entries]
    text = "\n".join(lines) + "\n"
    if config.out is None:
        sys.stdout.write(write_json(None, report))
        sys.stderr.write(text)
    else:
        write_json(config.out, report)
        sys.stdout.write(text)
    return 0 if checks.passed else 1

# Entry point --------------------------------------------------------------------------------------

COMMANDS = {
    "sweep-temperature": cmd_sweep_temperature,
    "sweep-force":       cmd_sweep_force,
    "sample":            cmd_sample,
    "harmonic-demo":     cmd_harmonic_demo,
    "validate":          cmd_validate,
}


def u64(text):
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError('invalid seed: {}'.format(text))
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError('seed {} is not an unsigned 64 bit integer'.format(text))
    return value


def positive_int(text):
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError('invalid integer: {}'.format(text))
    if value < 1:
        raise argparse.ArgumentTypeError('{} must be positive'.format(text))
    return value


def positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError('invalid number: {}'.format(text))
    if not value > 0:
        raise argparse.ArgumentTypeError('{} must be positive'.format(text))
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config",    default=None, help="run configuration (JSON)")
    common.add_argument("--out",       default=None, help="output path")
    common.add_argument("--seed",      default=None, type=u64, help="master RNG seed")
    common.add_argument("--tol",       default=None, type=positive_float,
                        help="relative quadrature tolerance")
    common.add_argument("--jobs",      default=None, type=positive_int, help="worker processes")
    common.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    parser = argparse.ArgumentParser(prog="litechain",
        description="Equilibrium statistics of a one-dimensional nearest-neighbor chain.")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common])
    return parser


def load_config(args):
    config = RunConfig.from_json(args.config) if args.config is not None else RunConfig()
    for name in ("seed", "tol", "jobs", "out"):
        value = getattr(args, name)
        if value is not None:
            setattr(config, name, value)
    config.check()
    return config


def _origin(exc):
    """Module of the innermost litechain frame that raised `exc`."""
    name, tb = "litechain", exc.__traceback__
    while tb is not None:
        module = tb.tb_frame.f_globals.get("__name__", "")
        if module.startswith("litechain."):
            name = module
        tb = tb.tb_next
    return name


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args)
        return COMMANDS[args.command](config)
    except ConfigError as e:
        print("{}: {}: {}".format(_origin(e), type(e).__name__, e), file=sys.stderr)
        return 2
    except LiteChainError as e:
        print("{}: {}: {}".format(_origin(e), type(e).__name__, e), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
