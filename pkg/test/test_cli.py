#
# This file is part of LiteChain
#
# SPDX-License-Identifier: BSD-2-Clause

import io
import os
import json
import tempfile
import unittest
from contextlib import redirect_stdout, redirect_stderr

from litechain.common import RunConfig, ConfigError
from litechain.cli import main, fit_slope, fit_temperatures, smallest_decade
from litechain.potentials import make_lennard_jones, make_quadratic

from test.model.potentials import LJ_M1

QUADRATIC = {"kind": "quadratic", "a": 1.0, "c2": 1.0}


class TestCLI(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.dir, name)

    def config(self, **fields):
        path = self.path("config.json")
        with open(path, "w") as f:
            json.dump(fields, f)
        return path

    def run_test(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def read(self, name):
        with open(self.path(name), newline="") as f:
            return f.read()

    def test_fit_slope(self):
        x = [0.0025, 0.005, 0.01, 0.02]
        y = [2 + 3*t + 0.5*t**2 for t in x]
        self.assertAlmostEqual(fit_slope(x, y, 2.0), 3.0, delta=1e-10)
        self.assertAlmostEqual(fit_slope([0.5], [2.0], 1.0), 2.0, delta=1e-15)
        self.assertEqual(smallest_decade([0.02, 0.001, 0.005, 0.5]), [0.001, 0.005])

    def test_fit_temperatures(self):
        grid = [0.0025, 0.005, 0.01, 0.02]
        self.assertEqual(fit_temperatures(make_lennard_jones(1.0), grid), [0.0025, 0.005, 0.01])
        self.assertEqual(fit_temperatures(make_quadratic(1.0, 1.0), grid), grid)
        self.assertEqual(fit_temperatures(make_lennard_jones(1.0), [0.5, 1.0]), [0.5])

    def test_run_config(self):
        config = RunConfig(seed=5)
        self.assertEqual(config.seed, 5)
        self.assertEqual(config.temperatures, [0.0025, 0.005, 0.01, 0.02])
        for fields in [{"temperatures": []}, {"forces": [0.0, -1.0]}, {"tol": 0},
                       {"seed": -1}, {"colour": "red"}]:
            with self.assertRaises(ConfigError):
                RunConfig(**fields)

    def test_sweep_temperature(self):
        code, out, _ = self.run_test("sweep-temperature", "--out", self.path("m.csv"))
        self.assertEqual(code, 0)
        summary = json.loads(out)
        self.assertLess(abs(summary["slope"]/LJ_M1 - 1), 2e-2)
        lines = self.read("m.csv").split("\n")
        self.assertEqual(lines[0], "T,m_quadrature,m_laplace,residual")
        self.assertEqual(len(lines), 6)

    def test_sweep_temperature_quadratic(self):
        config = self.config(potential=QUADRATIC)
        code, out, _ = self.run_test("sweep-temperature", "--config", config,
                                     "--out", self.path("m.csv"))
        self.assertEqual(code, 0)
        self.assertLess(abs(json.loads(out)["slope"]), 1e-3)

    def test_empty_grid(self):
        config = self.config(temperatures=[])
        code, _, err = self.run_test("sweep-temperature", "--config", config)
        self.assertEqual(code, 2)
        self.assertIn("ConfigError", err)

    def test_sweep_force(self):
        config = self.config(potential=QUADRATIC, temperature=0.01)
        code, out, _ = self.run_test("sweep-force", "--config", config, "--out", self.path("f.csv"))
        self.assertEqual(code, 0)
        self.assertAlmostEqual(json.loads(out)["slope"], 0.5, delta=1e-4)
        rows = [line.split(",") for line in self.read("f.csv").split("\n")[1:] if line]
        self.assertEqual(len(rows), 5)
        zero = [row for row in rows if float(row[0]) == 0.0][0]
        self.assertEqual(zero[2], "0")

    def test_sweep_force_lennard_jones(self):
        code, out, _ = self.run_test("sweep-force", "--out", self.path("f.csv"), "--jobs", "2")
        self.assertEqual(code, 0)
        summary = json.loads(out)
        self.assertLess(summary["relative_error"], 1e-2)

    def test_sample(self):
        config = self.config(N=1)
        for name in ["a.csv", "b.csv"]:
            code, out, _ = self.run_test("sample", "--config", config, "--seed", "42",
                                         "--out", self.path(name))
            self.assertEqual(code, 0)
        self.assertEqual(self.read("a.csv"), self.read("b.csv"))
        lines = self.read("a.csv").split("\n")
        self.assertEqual(lines[:2], ["k,x_k,u_k", "0,0,"])
        self.assertEqual(len(lines), 4)
        meta = json.loads(self.read("a.json"))
        self.assertEqual(meta["seed"], 42)
        self.assertEqual(meta["N"], 1)
        self.assertEqual(meta["rng_algorithm"], "Philox")

    def test_sample_replicas(self):
        config = self.config(N=10000, replicas=100, temperature=0.01)
        code, out, _ = self.run_test("sample", "--config", config, "--out", self.path("c.csv"))
        self.assertEqual(code, 0)
        summary = json.loads(out)
        self.assertLess(abs(summary["z_score"]), 4)
        self.assertEqual(len(self.read("c.csv.replicas.csv").split("\n")), 102)

    def test_invalid_seed(self):
        for seed in ["abc", "-1", str(2**64)]:
            code, _, _ = self.run_test("sample", "--seed", seed)
            self.assertEqual(code, 2)

    def test_unknown_command(self):
        code, _, _ = self.run_test("anneal")
        self.assertEqual(code, 2)

    def test_missing_potential_file(self):
        config = self.config(potential="missing.json")
        code, _, err = self.run_test("validate", "--config", config)
        self.assertEqual(code, 2)
        self.assertIn(self.path("missing.json"), err)
        self.assertIn("litechain.potentials", err)

    def test_missing_config_file(self):
        code, _, err = self.run_test("validate", "--config", self.path("none.json"))
        self.assertEqual(code, 2)
        self.assertIn(self.path("none.json"), err)

    def test_malformed_config(self):
        for fields in [{"tol": "1e-10"}, {"temperature": "0.01"}, {"temperatures": ["a", "b"]},
                       {"N": 10.0}, {"seed": True}, {"tail_models": "bounded"},
                       {"potential": {"kind": "lennard_jones", "sigma": "1"}},
                       {"potential": {"kind": "polynomial", "a": 1, "coeffs": 5}},
                       {"potential": {"kind": "lennard_jones", "sigma": -1}},
                       {"potential": {"kind": "polynomial", "a": 1.0, "coeffs": [1.0, 10.0]}},
                       {"potential": 5}]:
            code, _, err = self.run_test("sample", "--config", self.config(**fields))
            self.assertEqual(code, 2, fields)
            self.assertIn("ConfigError", err)

    def test_malformed_tail_model(self):
        config = self.config(tail_models=[{"kind": "gaussian", "s": "wide"}])
        code, _, err = self.run_test("harmonic-demo", "--config", config)
        self.assertEqual(code, 2)
        self.assertIn("ConfigError", err)

    def test_sample_json_out(self):
        code, _, err = self.run_test("sample", "--out", self.path("chain.json"))
        self.assertEqual(code, 2)
        self.assertIn("sidecar", err)
        self.assertFalse(os.path.exists(self.path("chain.json")))

    def test_compute_error(self):
        config = self.config(force=0.05)
        code, _, err = self.run_test("sample", "--config", config)
        self.assertEqual(code, 1)
        self.assertIn("DomainError", err)

    def test_harmonic_demo(self):
        config = self.config(sizes=[10, 100], seeds=5)
        code, out, _ = self.run_test("harmonic-demo", "--config", config,
                                     "--out", self.path("h.csv"))
        self.assertEqual(code, 0)
        lines = self.read("h.csv").split("\n")
        self.assertEqual(lines[0], "N,tail_model,ratio")
        self.assertEqual(len(lines), 2 + 3*2*5)
        groups = json.loads(out)["groups"]
        self.assertEqual(len(groups), 6)
        bounded = [g for g in groups if g["tail_model"] == "bounded(M=1)"]
        self.assertTrue(all(abs(g["max_ratio"] - 1) <= 2/g["N"] for g in bounded))

    def test_harmonic_demo_bad_tail(self):
        config = self.config(tail_models=[{"kind": "cauchy", "gamma": 1}])
        code, _, _ = self.run_test("harmonic-demo", "--config", config)
        self.assertEqual(code, 2)

    def test_validate(self):
        reports = []
        for name in ["r1.json", "r2.json"]:
            code, _, _ = self.run_test("validate", "--out", self.path(name), "--jobs", "2")
            self.assertEqual(code, 0)
            reports.append(self.read(name))
        self.assertEqual(reports[0], reports[1])
        report = json.loads(reports[0])
        self.assertTrue(report["passed"])
        for check in report["checks"]:
            self.assertEqual(set(check), {"name", "measured", "tolerance", "passed"})
            self.assertTrue(check["passed"], check["name"])

    def test_validate_tampered(self):
        config = self.config(check_tolerance_scale=0)
        code, out, _ = self.run_test("validate", "--config", config)
        self.assertEqual(code, 1)
        report = json.loads(out)
        self.assertFalse(report["passed"])


if __name__ == "__main__":
    unittest.main()
