"""
Tests for configuration loading and flag merging
"""
import json
import os
import tempfile
import unittest
from unittest import mock

from pydantic import ValidationError

from sketch_mlc.src import config as config_module
from sketch_mlc.src.config import ExperimentConfig, build_experiment_config, load_config

SAMPLE_PATH = os.path.join(os.path.dirname(__file__), "..", "config-sample.json")


class TestLoadConfig(unittest.TestCase):

    def test_sample_file_validates(self):
        config = load_config(SAMPLE_PATH)
        experiment = ExperimentConfig.model_validate(config["experiment"])
        self.assertEqual(experiment.m_grid, [64, 128, 256, 512, 1024])
        self.assertEqual(experiment.k, 10)
        self.assertEqual(config["environment"]["log_level"], "INFO")

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            load_config("/nonexistent/config.json")

    def _write(self, tmp: str, text: str) -> str:
        path = os.path.join(tmp, "cfg.json")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def test_malformed_json_names_file_and_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write(tmp, '{\n  "experiment": {"k": 3,}\n}\n')
            with self.assertRaisesRegex(ValueError, r"cfg\.json: invalid JSON at line 2"):
                load_config(path)

    def test_unknown_section(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write(tmp, '{"experiment": {}, "postgresql": {}}')
            with self.assertRaisesRegex(ValueError, r"unknown sections \['postgresql'\]"):
                load_config(path)

    def test_section_must_be_object(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = self._write(tmp, '{"experiment": [1, 2]}')
            with self.assertRaises(ValueError):
                load_config(path)

    def test_get_config_reads_env_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "cfg.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"experiment": {"k": 3}}, f)
            with mock.patch.dict(os.environ, {"SKETCH_MLC_CONFIG": path}):
                config = config_module.reload_config()
                self.assertEqual(config["experiment"]["k"], 3)
                self.assertIs(config_module.get_config(), config)
        config_module._config = None


class TestExperimentConfig(unittest.TestCase):

    def test_defaults(self):
        config = ExperimentConfig(synthetic={"n": 100})
        self.assertEqual(config.theta, 0.5)
        self.assertEqual(config.wh_mode, "full")
        self.assertEqual(config.dataset_label, "planted_linear")
        self.assertEqual(config.f1_empty_score, 1.0)

    def test_f1_empty_score_range(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig(data="x.txt", f1_empty_score=1.5)

    def test_requires_source(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig()

    def test_unknown_method(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig(data="x.txt", methods=["lasso"])

    def test_empty_methods(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig(data="x.txt", methods=[])

    def test_bad_wh_mode(self):
        with self.assertRaises(ValidationError):
            ExperimentConfig(data="x.txt", wh_mode="fast")

    def test_dataset_label_from_path(self):
        self.assertEqual(ExperimentConfig(data="/data/corel5k.txt").dataset_label, "corel5k")


class TestMerge(unittest.TestCase):

    def test_flags_override_file(self):
        file_section = {"data": "a.txt", "k": 5, "seeds": [1, 2]}
        config = build_experiment_config(file_section, {"k": 7, "seeds": None})
        self.assertEqual(config.k, 7)
        self.assertEqual(config.seeds, [1, 2])

    def test_synthetic_fields_merge(self):
        file_section = {"synthetic": {"n": 300, "p": 5, "seed": 1}}
        config = build_experiment_config(file_section, {"synthetic": {"n": 50}})
        self.assertEqual((config.synthetic.n, config.synthetic.p), (50, 5))

    def test_cli_synthetic_replaces_file_data(self):
        config = build_experiment_config({"data": "a.txt"}, {"synthetic": {"n": 40}})
        self.assertIsNone(config.data)
        self.assertEqual(config.synthetic.n, 40)

    def test_cli_data_replaces_file_synthetic(self):
        config = build_experiment_config({"synthetic": {"n": 40}}, {"data": "b.txt"})
        self.assertIsNone(config.synthetic)
        self.assertEqual(config.data, "b.txt")

    def test_no_file(self):
        config = build_experiment_config(None, {"data": "c.txt"})
        self.assertEqual(config.data, "c.txt")


if __name__ == "__main__":
    unittest.main()
