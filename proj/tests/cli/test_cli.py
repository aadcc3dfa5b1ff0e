"""End-to-end checks of the blochtomo tool: artifacts, schemas, determinism, errors.

usage: test_cli.py BLOCHTOMO_BINARY SCHEMA_DIR CONFIG_DIR
"""
import csv
import filecmp
import json
import math
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

BINARY, SCHEMAS, CONFIGS = (Path(p).resolve() for p in sys.argv[1:4])
del sys.argv[1:4]


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def validate(path, name):
    doc = json.loads(Path(path).read_text())
    jsonschema.validate(doc, schema(name))
    return doc


def run(*args, env=None, check=True):
    proc = subprocess.run([str(BINARY), *map(str, args)], capture_output=True, text=True, env=env)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} failed: {proc.stderr}")
    return proc


def write_config(directory, body):
    path = Path(directory) / "config.json"
    path.write_text(json.dumps(body))
    return path


class Cli(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_shipped_configs_match_schema(self):
        for cfg in sorted(CONFIGS.glob("*.json")):
            with self.subTest(cfg=cfg.name):
                validate(cfg, "run_config")

    def test_pipeline_topological_band(self):
        out = self.tmp / "p"
        run("pipeline", "--config", CONFIGS / "pipeline_topological.json", "--out", out)
        validate(out / "dataset.json", "dataset")
        validate(out / "reconstruction.json", "reconstruction")
        a = validate(out / "analysis.json", "analysis")
        validate(out / "pt_scan.json", "pt_scan")
        ep = validate(out / "exceptional_points.json", "exceptional_points")
        self.assertAlmostEqual(a["winding"]["re"], 1.0, delta=0.02)
        self.assertEqual(len(a["ep_suspect"]), 2)
        self.assertEqual(a["converged_pixels"], 90)
        self.assertEqual(a["pt"]["phase"], "Broken")
        qs = sorted(r["q_c"] for r in ep["records"])
        self.assertEqual(len(qs), 2)
        self.assertAlmostEqual(qs[0] + qs[1], 2 * math.pi, delta=1e-9)
        for r in ep["records"]:
            self.assertAlmostEqual(r["eta_c"], 0.99, delta=0.01)
            self.assertLessEqual(r["residual"], 1e-8)
        self.assertEqual(a["provenance"]["seed"], 7)

    def test_pipeline_is_byte_identical_for_a_seed(self):
        a, b = self.tmp / "a", self.tmp / "b"
        for out in (a, b):
            run("pipeline", "--config", CONFIGS / "pt_sweep.json", "--out", out)
        cmp = filecmp.dircmp(a, b)
        files = [p.relative_to(a) for p in a.rglob("*") if p.is_file()]
        self.assertGreater(len(files), 10)
        for rel in files:
            self.assertTrue(filecmp.cmp(a / rel, b / rel, shallow=False), rel)
        self.assertFalse(cmp.left_only or cmp.right_only)

    def test_simulate_seed_controls_noise(self):
        outs = []
        for seed, name in ((11, "s1"), (11, "s2"), (12, "s3")):
            out = self.tmp / name
            run("simulate", "--config", CONFIGS / "noisy_simulate.json", "--seed", seed, "--out", out)
            outs.append(out / "dataset.json")
        validate(outs[0], "dataset")
        self.assertTrue(filecmp.cmp(outs[0], outs[1], shallow=False))
        self.assertFalse(filecmp.cmp(outs[0], outs[2], shallow=False))
        self.assertNotEqual(json.loads(outs[0].read_text())["provenance"]["config_hash"],
                            json.loads(outs[2].read_text())["provenance"]["config_hash"])

    def test_pt_sweep_order_parameter_step(self):
        out = self.tmp / "sweep"
        run("pipeline", "--config", CONFIGS / "pt_sweep.json", "--out", out)
        scan = validate(out / "pt_scan.json", "pt_scan")
        self.assertAlmostEqual(scan["delta"], 1.3, places=12)
        order = [e["order_parameter"] for e in scan["entries"]]
        phases = [e["phase"] for e in scan["entries"]]
        self.assertEqual([e["eta"] for e in scan["entries"]], [0.3, 0.6, 1.4])
        self.assertLessEqual(order[0], 1e-6)
        self.assertLessEqual(order[1], 1e-6)
        self.assertGreater(order[2], 0.1)
        self.assertEqual(phases, ["Unbroken", "Unbroken", "Broken"])
        for eta in ("0.3", "0.6", "1.4"):
            validate(out / f"eta_{eta}" / "analysis.json", "analysis")

    def test_split_commands_and_image_route(self):
        sim = write_config(self.tmp, {
            "model": {"delta": 1.3, "eta": 0.6}, "seed": 5,
            "simulate": {"dataset": True, "images": True,
                         "geometry": {"width": 90, "height": 90, "bz_width_px": 90}}})
        run("simulate", "--config", sim, "--out", self.tmp / "sim")
        meta = json.loads((self.tmp / "sim" / "images" / "meta.json").read_text())
        self.assertEqual(meta["seed"], 5)
        self.assertEqual(len(meta["config_hash"]), 16)
        for source in ("sim/dataset.json", "sim/images"):
            tag = source.replace("/", "_")
            rec = write_config(self.tmp, {"reconstruct": {"input": source}})
            run("reconstruct", "--config", rec, "--out", self.tmp / f"rec_{tag}")
            validate(self.tmp / f"rec_{tag}" / "reconstruction.json", "reconstruction")
            ana = write_config(self.tmp, {"analyze": {"input": f"rec_{tag}/reconstruction.json", "eta": 0.6}})
            run("analyze", "--config", ana, "--out", self.tmp / f"ana_{tag}")
            a = validate(self.tmp / f"ana_{tag}" / "analysis.json", "analysis")
            self.assertAlmostEqual(a["winding"]["re"], 0.0, delta=0.02)
            self.assertEqual(a["pt"]["phase"], "Unbroken")
            with open(self.tmp / f"ana_{tag}" / "band.csv") as f:
                rows = list(csv.reader(line for line in f if not line.startswith("#")))
            self.assertEqual(rows[0][:3], ["q", "re_E", "im_E"])
            self.assertEqual(len(rows), 91)

    def test_phase_diagram(self):
        out = self.tmp / "pd"
        cfg = write_config(self.tmp, {"phase_diagram": {"delta": [0.7853981633974483, 3.141592653589793],
                                                        "eta": [0.0, 0.0], "resolution": 8, "n_q": 90,
                                                        "ep_deltas": [1.3]}})
        run("phase-diagram", "--config", cfg, "--out", out)
        lines = (out / "phase_diagram.csv").read_text().splitlines()
        self.assertTrue(lines[0].startswith("# config_hash="))
        self.assertEqual(lines[1], "delta,eta,nu_re,nu_im")
        rows = [list(map(float, line.split(","))) for line in lines[2:]]
        self.assertEqual(len(rows), 64)
        self.assertAlmostEqual(rows[0][2], 0.0, delta=0.02)
        self.assertAlmostEqual(rows[-1][2], 1.0, delta=0.02)
        validate(out / "exceptional_points.json", "exceptional_points")

    def test_calibrate(self):
        out = self.tmp / "cal"
        run("calibrate", "--config", CONFIGS / "calibrate.json", "--out", out)
        cal = validate(out / "calibration.json", "calibration")
        self.assertAlmostEqual(cal["plates"][0]["delta_plain"], 2 * math.atan(math.sqrt(0.854 / 0.146)), places=12)
        self.assertAlmostEqual(cal["plates"][1]["eta"], 1.4, places=12)
        self.assertAlmostEqual(cal["total"]["eta"], 1.4, places=12)

    def test_errors_are_json_with_nonzero_exit(self):
        cases = [
            ({"model": {"delta": 1.0, "eta": 0.0, "colour": 1}}, "simulate", "ConfigError"),
            ({"grid": {"n_q": 4}, "model": {"delta": 1.0, "eta": 0.0}}, "simulate", "ConfigError"),
            ({"calibrate": {"plates": [{"i_ll": 0.95, "i_lr": 0.05, "i_ord": 8.0, "i_ext": 1.0}]}}, "calibrate",
             "OutOfDomain"),
            ({"calibrate": {"plates": [{"i_ll": 0.0, "i_lr": 1.0, "i_ord": 1.0, "i_ext": 1.0}]}}, "calibrate",
             "InvalidReading"),
            ({"reconstruct": {"input": "missing.json"}}, "reconstruct", "IoError"),
        ]
        for i, (body, command, code) in enumerate(cases):
            with self.subTest(code=code, i=i):
                cfg = write_config(self.tmp, body)
                out = self.tmp / f"err{i}"
                proc = run(command, "--config", cfg, "--out", out, check=False)
                self.assertNotEqual(proc.returncode, 0)
                err = json.loads(proc.stderr.strip().splitlines()[-1])
                jsonschema.validate(err, schema("error"))
                self.assertEqual(err["error"]["code"], code)
                validate(out / "error.json", "error")

    def test_output_root_from_environment(self):
        env = dict(os.environ, BLOCHTOMO_OUTPUT_ROOT=str(self.tmp / "root"))
        cfg = CONFIGS / "calibrate.json"
        subprocess.run([str(BINARY), "calibrate", "--config", str(cfg)], check=True, env=env,
                       capture_output=True, cwd=self.tmp)
        self.assertTrue((self.tmp / "root" / "calibrate" / "calibration.json").is_file())

    def test_golden_paper_settings(self):
        golden = json.loads((Path(__file__).resolve().parent.parent / "golden" / "oracles.json").read_text())
        minima = {(r["delta"], r["eta"]): r for r in golden["infidelity"]}
        for w in golden["winding_90"]:
            if w["eta"] == 0.0:
                continue
            with self.subTest(delta=w["delta"], eta=w["eta"]):
                out = self.tmp / f"g_{w['delta']:.4f}_{w['eta']}"
                cfg = write_config(self.tmp, {"model": {"delta": w["delta"], "eta": w["eta"]}, "seed": 1})
                run("pipeline", "--config", cfg, "--out", out)
                a = validate(out / "analysis.json", "analysis")
                self.assertAlmostEqual(a["winding"]["re"], w["nu"][0], delta=1e-8)
                self.assertAlmostEqual(a["winding"]["im"], w["nu"][1], delta=1e-8)
                m = minima[(w["delta"], w["eta"])]
                self.assertAlmostEqual(a["critical_momentum"]["min_infidelity"], m["min"], delta=1e-8)
                if not a["critical_momentum"]["shallow"]:
                    ks = [a["critical_momentum"]["k_first"], a["critical_momentum"]["k_second"]]
                    self.assertEqual(ks, m["minima"])

    def test_help_documents_units(self):
        proc = run("--help")
        self.assertIn("radians", proc.stdout)


if __name__ == "__main__":
    unittest.main(verbosity=2)
