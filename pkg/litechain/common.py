#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

import json
import math
import os

# Errors -------------------------------------------------------------------------------------------

class LiteChainError(Exception):
    pass


class DomainError(LiteChainError, ValueError):
    """Input outside the admissible domain of the model."""


class ConvergenceError(LiteChainError, RuntimeError):
    """A numerical procedure did not reach its tolerance."""


class BudgetExceeded(ConvergenceError):
    """A numerical procedure ran out of its evaluation budget."""


class ConfigError(LiteChainError, ValueError):
    """Malformed run configuration or potential description."""

# Number formatting --------------------------------------------------------------------------------

def fmt(value):
    """Fixed 17 significant digits so that identical runs give identical files."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, int)) and not isinstance(value, float):
        return str(int(value))
    return "%.17g" % value


def write_csv(path, header, rows):
    """Comma separated, header row, LF line endings. `path=None` returns the text."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        return text
    with open(path, "w", newline="\n") as f:
        f.write(text)
    return text


def write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        return text
    with open(path, "w", newline="\n") as f:
        f.write(text)
    return text


def is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_integer(v):
    return isinstance(v, int) and not isinstance(v, bool)

# Run configuration --------------------------------------------------------------------------------

class RunConfig():
    ''' Manage all settings of a command-line run '''
    FIELDS = {
        # fld_name:              [default, description]
        "potential":             [{"kind": "lennard_jones", "sigma": 1.0},
                                  "inline potential object or path to a potential JSON file"],
        "temperatures":          [[0.0025, 0.005, 0.01, 0.02], "T-grid for sweep-temperature"],
        "temperature":           [0.01,   "fixed T for sweep-force and sample"],
        "forces":                [[-2e-3, -1e-3, 0.0, 1e-3, 2e-3], "F-grid for sweep-force"],
        "force":                 [0.0,    "external force for sample"],
        "N":                     [10000,  "chain length (spacings per chain)"],
        "replicas":              [1,      "independent chains for sample"],
        "seed":                  [20240613, "master RNG seed (u64)"],
        "tol":                   [1e-10,  "relative quadrature tolerance"],
        "budget":                [1000000, "quadrature evaluation budget"],
        "jobs":                  [1,      "parallel workers for sweeps and replicas"],
        "tail_models":           [[{"kind": "bounded", "M": 1.0},
                                   {"kind": "gaussian", "s": 1.0},
                                   {"kind": "pareto", "alpha": 0.8}],
                                  "tail models for harmonic-demo"],
        "sizes":                 [[100, 1000, 10000], "N-grid for harmonic-demo"],
        "spacing":               [1.0,    "ground state spacing a for harmonic-demo"],
        "seeds":                 [100,    "seed count per (N, tail model) for harmonic-demo"],
        "check_tolerance_scale": [1.0,    "multiplier applied to every validation tolerance"],
        "out":                   [None,   "output path"],
    }

    def __init__(self, base_dir=None, **kwargs):
        '''
            Holds all settings of one run.

            kwargs are taken as field names for initialization, missing ones
            fall back to the defaults of FIELDS.

            base_dir:
                directory against which a potential file path is resolved
                (the directory of the config file when loaded from JSON).
        '''
        self.__dict__["_values"] = {}
        self.__dict__["base_dir"] = base_dir
        for name, (default, _) in RunConfig.FIELDS.items():
            self._values[name] = json.loads(json.dumps(default))
        for k, v in kwargs.items():
            setattr(self, k, v)
        self.check()

    @classmethod
    def from_json(cls, json_file):
        try:
            with open(json_file, 'r') as f:
                j = json.load(f)
        except FileNotFoundError:
            raise ConfigError('config file not found: {}'.format(json_file))
        except json.JSONDecodeError as e:
            raise ConfigError('config file {} is not valid JSON: {}'.format(json_file, e))
        if not isinstance(j, dict):
            raise ConfigError('config file {} must hold a JSON object'.format(json_file))
        return cls(base_dir=os.path.dirname(os.path.abspath(json_file)), **j)

    def check(self):
        for name in ("temperatures", "forces", "sizes"):
            grid = self._values[name]
            if not isinstance(grid, list) or len(grid) == 0:
                raise ConfigError('{} must be a non-empty list'.format(name))
            if not all(is_number(v) for v in grid):
                raise ConfigError('{} = {!r} must hold numbers only'.format(name, grid))
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError('{} = {} is not strictly increasing'.format(name, grid))
        for name in ("temperature", "force", "tol", "budget", "spacing", "check_tolerance_scale"):
            if not is_number(self._values[name]):
                raise ConfigError('{} = {!r} is not a number'.format(name, self._values[name]))
        if any(t <= 0 for t in self.temperatures) or self.temperature <= 0:
            raise ConfigError('temperatures must be positive')
        if self.tol <= 0:
            raise ConfigError('tol = {} must be positive'.format(self.tol))
        if self.budget < 1000:
            raise ConfigError('budget = {} is too small'.format(self.budget))
        for name in ("N", "replicas", "jobs", "seeds"):
            v = self._values[name]
            if not _is_integer(v) or v < 1:
                raise ConfigError('{} = {!r} must be a positive integer'.format(name, v))
        if any(not _is_integer(n) or n < 10 for n in self.sizes):
            raise ConfigError('sizes = {} must be integers >= 10'.format(self.sizes))
        if not _is_integer(self.seed) or not (0 <= self.seed < 2**64):
            raise ConfigError('seed = {!r} is not an unsigned 64 bit integer'.format(self.seed))
        if self.check_tolerance_scale < 0:
            raise ConfigError('check_tolerance_scale must be >= 0')
        if self.spacing <= 0:
            raise ConfigError('spacing must be positive')
        if not isinstance(self.potential, (str, dict)):
            raise ConfigError('potential must be an object or a file path')
        if not isinstance(self.tail_models, list) or not all(isinstance(d, dict)
                                                             for d in self.tail_models):
            raise ConfigError('tail_models must be a list of objects')
        if self.out is not None and not isinstance(self.out, str):
            raise ConfigError('out = {!r} must be a path'.format(self.out))

    def potential_spec(self):
        # Deferred import: potentials imports the error classes from here.
        from litechain.potentials import from_dict, load_potential
        pot = self.potential
        try:
            if isinstance(pot, str):
                path = pot
                if self.base_dir is not None and not os.path.isabs(path):
                    path = os.path.join(self.base_dir, path)
                return load_potential(path)
            return from_dict(pot)
        except DomainError as e:
            raise ConfigError('inadmissible potential {}: {}'.format(pot, e)) from e

    def __getattr__(self, name):
        if name in RunConfig.FIELDS:
            return self._values[name]
        raise AttributeError(name)

    def __setattr__(self, name, value):
        if name in RunConfig.FIELDS:
            self._values[name] = value
        else:
            raise ConfigError('unknown configuration field: {}'.format(name))

    def __repr__(self):
        s = "RunConfig(): "
        for name in sorted(RunConfig.FIELDS):
            s += '\n  {:>22s}: {}'.format(name, self._values[name])
        return s
