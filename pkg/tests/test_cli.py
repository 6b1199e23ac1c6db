"""CLI contract tests: exit codes, report schemas, byte-identical reruns,
and serialization round trips."""

import json

import numpy as np
import pytest

from narrowops import cli
from narrowops.serialize import (
    matrix_from_csv,
    matrix_to_csv,
    operator_from_json,
    operator_to_json,
)
from narrowops.instances import random_finite_rank


def _run(tmp_path, command, config, extra=()):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(config))
    argv = [command, "--config", str(cfg), "--out", str(tmp_path), *extra]
    return cli.main(argv)


def _pipeline_config():
    return {
        "t1": {"instance": {"kind": "random_narrow", "seed": 1, "atoms": 16,
                            "target_dim": 3, "decay": 0.5}},
        "t2": {"instance": {"kind": "random_finite_rank", "seed": 2, "rank": 1,
                            "atoms": 16, "target_dim": 4, "scale": 1e-3}},
    }


class TestExitCodes:
    def test_round_success(self, tmp_path):
        code = _run(tmp_path, "round", {
            "vectors": [[1.0, 0.0], [0.0, 1.0]],
            "coefficients": [0.5, 0.25],
            "norm": {"kind": "sup", "weights": [1.0, 1.0]},
        })
        assert code == 0
        report = json.loads((tmp_path / "round.json").read_text())
        assert report["discrepancy"] <= report["certificate"] + 1e-9

    def test_missing_key_is_usage_error(self, tmp_path):
        assert _run(tmp_path, "round", {"vectors": [[1.0]]}) == 1

    def test_missing_config_file(self, tmp_path):
        argv = ["round", "--config", str(tmp_path / "absent.json")]
        assert cli.main(argv) == 1

    def test_unknown_command(self):
        assert cli.main(["frobnicate"]) == 1

    def test_certified_failure_is_exit_2(self, tmp_path):
        # pairing precondition violated: T2 mass not absolutely continuous
        config = {
            "t1": {"matrix": [[0.0, 0.0, 0.0, 0.0]],
                   "space": {"numerators": [1, 1, 1, 1], "denominator_log2": 2},
                   "norm": {"kind": "sup", "weights": [1.0]}},
            "t2": {"matrix": [[10.0, 10.0, 10.0, 10.0]],
                   "space": {"numerators": [1, 1, 1, 1], "denominator_log2": 2},
                   "norm": {"kind": "sup", "weights": [1.0]}},
            "delta": 0.5,
        }
        assert _run(tmp_path, "pairing", config) == 2

    def test_find_sign_failure_is_exit_2(self, tmp_path):
        config = {
            "operator": {"matrix": [[1.0, 0.0]],
                         "space": {"numerators": [1, 1], "denominator_log2": 1},
                         "norm": {"kind": "sup", "weights": [1.0]}},
            "epsilon": 1e-3,
            "refine_budget": 2,
        }
        assert _run(tmp_path, "find-sign", config) == 2


class TestReports:
    def test_partition_schema(self, tmp_path):
        config = {
            "operator": {"instance": {"kind": "l1_example", "levels": 4}},
            "epsilon": 0.25,
        }
        assert _run(tmp_path, "partition", config, ("--format", "both")) == 0
        report = json.loads((tmp_path / "partition.json").read_text())
        assert {"n_cells", "bounds", "cells"} <= set(report)
        csv = (tmp_path / "partition.csv").read_text().splitlines()
        assert csv[0] == "cell,size,bound,exact"
        assert len(csv) == report["n_cells"] + 1

    def test_sum_finite_rank_schema(self, tmp_path):
        config = {**_pipeline_config(), "sigma": 0.1, "epsilon": 0.1}
        assert _run(tmp_path, "sum-finite-rank", config) == 0
        report = json.loads((tmp_path / "sum-finite-rank.json").read_text())
        assert report["status"] == "success"
        assert report["achieved"]["t1"] <= 0.1 + 1e-9
        assert report["achieved"]["t2"] <= 0.1 + 1e-9
        assert report["sign"]  # non-empty sign values

    def test_sum_compact_truncation(self, tmp_path):
        config = {
            "t1": {"instance": {"kind": "random_narrow", "seed": 3, "atoms": 32,
                                "target_dim": 3, "decay": 0.5}},
            "t2": {"instance": {"kind": "l1_example", "levels": 5}},
            "mode": "truncation",
            "tail": "l1_example",
            "sigma": 0.1,
            "epsilon": 0.25,
        }
        # l1_example has 32 atoms at 5 levels, matching t1
        assert _run(tmp_path, "sum-compact", config) == 0
        report = json.loads((tmp_path / "sum-compact.json").read_text())
        assert report["extras"]["truncation_level"] == 3

    def test_example_l1_check(self, tmp_path):
        code = cli.main([
            "example-l1", "--levels", "6", "--check", "strict-narrow",
            "--out", str(tmp_path),
        ])
        assert code == 0
        report = json.loads((tmp_path / "example-l1.json").read_text())
        assert report["strict_narrow"]["all_cells_zero"] is True

    def test_example_condexp_witness(self, tmp_path):
        assert cli.main(["example-condexp", "--grid", "4",
                         "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "example-condexp.json").read_text())
        assert report["witness_image_norm"] == 0.0


class TestDeterminism:
    @pytest.mark.parametrize("command,config,extra", [
        ("pairing", {
            "t1": {"instance": {"kind": "random_narrow", "seed": 4, "atoms": 16,
                                "target_dim": 3, "decay": 0.5}},
            "t2": {"instance": {"kind": "l1_example", "levels": 4}},
            "sigma": 0.1, "epsilon": 0.2, "gamma": 0.15, "delta": 0.0625,
        }, ()),
        ("sum-finite-rank",
         {**_pipeline_config(), "sigma": 0.1, "epsilon": 0.1}, ()),
        ("sum-compact",
         {**_pipeline_config(), "epsilon": 0.2}, ()),
        ("bench", {}, ("--format", "both")),
    ])
    def test_reruns_byte_identical(self, tmp_path, command, config, extra):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config))
        for out in (out_a, out_b):
            argv = [command, "--config", str(cfg), "--seed", "0",
                    "--out", str(out), *extra]
            assert cli.main(argv) == 0
        for path_a in sorted(out_a.iterdir()):
            path_b = out_b / path_a.name
            assert path_a.read_bytes() == path_b.read_bytes()


class TestSerialization:
    def test_matrix_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((3, 7))
        path = tmp_path / "m.csv"
        matrix_to_csv(m, path)
        np.testing.assert_array_equal(matrix_from_csv(path), m)

    def test_operator_bundle_round_trip(self):
        T = random_finite_rank(0, 2, 8, 3)
        back = operator_from_json(operator_to_json(T))
        np.testing.assert_array_equal(back.matrix, T.matrix)
        assert back.space == T.space
        assert back.target.to_json() == T.target.to_json()
