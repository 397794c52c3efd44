import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from credaltrace.bayesnet import forward_sample, mle, random_parameters
from credaltrace.cli import main
from credaltrace.credalnet import CredalNet, contaminate, idm_from_data, vacuous
from credaltrace.formats import read_model, read_population, write_model, write_population
from credaltrace.graph import random_dag


def run(*argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:
        return exc.code


def summary(path):
    with open(path / "summary.csv") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def generated(tmp_path):
    out = tmp_path / "gen"
    assert run("generate", "--nodes", 6, "--density", 1, "--pop", 2000, "--seed", 3, "--out", out) == 0
    return out


class TestFormats:
    def test_bn_round_trip(self, tmp_path):
        bn = random_parameters(random_dag(6, 2, 3, seed=1), seed=1)
        write_model(bn, tmp_path / "bn.json")
        got = read_model(tmp_path / "bn.json")
        assert got.dag == bn.dag and got.allclose(bn, atol=0)

    def test_cn_round_trip(self, tmp_path):
        bn = random_parameters(random_dag(5, 1, 2, seed=2), seed=2)
        cn = contaminate(bn, 0.25)
        write_model(cn, tmp_path / "cn.json")
        got = read_model(tmp_path / "cn.json")
        assert isinstance(got, CredalNet)
        for a, b in zip(got.lower + got.upper, cn.lower + cn.upper):
            np.testing.assert_array_equal(a, b)

    def test_kind_tag(self, tmp_path):
        write_model(vacuous(random_dag(3, 1, 2, seed=0)), tmp_path / "v.json")
        d = json.loads((tmp_path / "v.json").read_text())
        assert d["kind"] == "cn" and "s" not in d and "eps" not in d

    def test_population_round_trip(self, tmp_path):
        g = random_dag(4, 1, 3, seed=5)
        data = forward_sample(random_parameters(g, seed=5), 50, seed=0)
        write_population(data, tmp_path / "p.csv")
        np.testing.assert_array_equal(read_population(tmp_path / "p.csv", g), data)

    def test_population_schema_mismatch(self, tmp_path):
        g = random_dag(4, 1, 2, seed=5)
        write_population(np.zeros((3, 3), dtype=int), tmp_path / "p.csv")
        with pytest.raises(ValueError):
            read_population(tmp_path / "p.csv", g)


class TestGenerate:
    def test_files(self, tmp_path):
        out = tmp_path / "g"
        assert run("generate", "--nodes", 10, "--density", 1, "--pop", 10000, "--out", out) == 0
        assert read_population(out / "population.csv").shape == (10000, 10)
        assert len(read_model(out / "model.json").dag.edges) == 10

    def test_pigeonhole(self, tmp_path):
        assert run("generate", "--nodes", 3, "--density", 3, "--pop", 10, "--out", tmp_path) == 2

    def test_deterministic(self, tmp_path, generated):
        again = tmp_path / "again"
        run("generate", "--nodes", 6, "--density", 1, "--pop", 2000, "--seed", 3, "--out", again)
        for name in ("model.json", "population.csv"):
            assert (again / name).read_bytes() == (generated / name).read_bytes()

    def test_env_seed(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CREDALTRACE_SEED", "3")
        run("generate", "--nodes", 4, "--density", 1, "--pop", 20, "--out", tmp_path / "a")
        run("generate", "--nodes", 4, "--density", 1, "--pop", 20, "--seed", 3, "--out", tmp_path / "b")
        assert (tmp_path / "a/model.json").read_bytes() == (tmp_path / "b/model.json").read_bytes()


class TestLearnMask:
    def test_learn(self, generated, tmp_path):
        assert run("learn", "--model", generated / "model.json", "--data", generated / "population.csv",
                   "--out", tmp_path / "mle.json") == 0
        g = read_model(generated / "model.json").dag
        assert read_model(tmp_path / "mle.json").allclose(mle(g, read_population(generated / "population.csv", g)), atol=0)
        assert run("learn", "--model", generated / "model.json", "--data", generated / "population.csv",
                   "--method", "dirichlet", "--s", 2, "--out", tmp_path / "dir.json") == 0

    def test_contaminate(self, generated, tmp_path):
        assert run("mask", "--model", generated / "model.json", "--method", "contaminate", "--eps", 0.2,
                   "--out", tmp_path / "cn.json") == 0
        cn = read_model(tmp_path / "cn.json")
        for w in cn.widths:
            np.testing.assert_allclose(w, 0.2, atol=1e-12)

    def test_idm(self, generated, tmp_path):
        assert run("mask", "--model", generated / "model.json", "--method", "idm", "--s", 1,
                   "--data", generated / "population.csv", "--out", tmp_path / "cn.json") == 0
        cn = read_model(tmp_path / "cn.json")
        data = read_population(generated / "population.csv", cn.dag)
        ref = idm_from_data(cn.dag, data, 1.0)
        for a, b in zip(cn.widths, ref.widths):
            np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("flags", [["--method", "idm", "--s", "1"], ["--method", "contaminate"]])
    def test_missing_flags(self, generated, tmp_path, flags):
        assert run("mask", "--model", generated / "model.json", *flags, "--out", tmp_path / "x.json") == 2

    def test_missing_file(self, tmp_path):
        assert run("learn", "--model", tmp_path / "none.json", "--data", tmp_path / "none.csv",
                   "--out", tmp_path / "x.json") == 1


class TestAttackCommand:
    def test_reference_trained_bn(self, generated, tmp_path):
        run("learn", "--model", generated / "model.json", "--data", generated / "population.csv",
            "--out", tmp_path / "mle.json")
        pop = generated / "population.csv"
        assert run("attack", "--released", tmp_path / "mle.json", "--reference", pop, "--probe", pop,
                   "--alpha", "0.001,0.01,0.1", "--out", tmp_path / "a") == 0
        for row in summary(tmp_path / "a"):
            assert float(row["flag_rate"]) <= float(row["alpha"]) + 1 / 2000
        with open(tmp_path / "a/decisions.csv") as fh:
            assert sum(1 for _ in fh) == 2001

    def test_vacuous_cn(self, generated, tmp_path):
        g = read_model(generated / "model.json").dag
        write_model(vacuous(g), tmp_path / "vac.json")
        pop = generated / "population.csv"
        assert run("attack", "--released", tmp_path / "vac.json", "--reference", pop, "--probe", pop,
                   "--alpha", "0.01,0.5,0.9", "--credal-points", 20, "--out", tmp_path / "a") == 0
        assert all(float(r["flag_rate"]) == 0.0 and r["kind"] == "CN" for r in summary(tmp_path / "a"))

    @pytest.mark.parametrize("alpha", ["0", "1", "1.5", "x"])
    def test_alpha_domain(self, generated, tmp_path, alpha):
        pop = generated / "population.csv"
        assert run("attack", "--released", generated / "model.json", "--reference", pop, "--probe", pop,
                   "--alpha", alpha, "--out", tmp_path / "a") == 2

    def test_schema_mismatch(self, generated, tmp_path):
        other = tmp_path / "other"
        run("generate", "--nodes", 4, "--density", 1, "--pop", 10, "--out", other)
        assert run("attack", "--released", generated / "model.json", "--reference", other / "population.csv",
                   "--probe", other / "population.csv", "--alpha", "0.1", "--out", tmp_path / "a") == 1

    def test_deterministic(self, generated, tmp_path):
        run("mask", "--model", generated / "model.json", "--method", "contaminate", "--eps", 0.1,
            "--out", tmp_path / "cn.json")
        pop = generated / "population.csv"
        for name in ("a", "b"):
            run("attack", "--released", tmp_path / "cn.json", "--reference", pop, "--probe", pop,
                "--alpha", "0.05", "--credal-points", 30, "--seed", 4, "--out", tmp_path / name)
        for f in ("decisions.csv", "summary.csv"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


class TestAudit:
    def test_contamination(self, tmp_path, capsys):
        bn = random_parameters(random_dag(5, 1, 2, seed=7), seed=7)
        write_model(contaminate(bn, 0.3), tmp_path / "cn.json")
        assert run("audit", "--model", tmp_path / "cn.json", "--out", tmp_path / "au") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["classification"]["kind"] == "contamination_like"
        assert report["recovery"]["eps"] == pytest.approx(0.3, abs=1e-12)
        assert read_model(tmp_path / "au/recovered_bn.json").allclose(bn, atol=1e-12)

    def test_idm_with_s(self, generated, tmp_path, capsys):
        run("mask", "--model", generated / "model.json", "--method", "idm", "--s", 1,
            "--data", generated / "population.csv", "--out", tmp_path / "cn.json")
        capsys.readouterr()
        assert run("audit", "--model", tmp_path / "cn.json", "--s", 1) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["recovery"]["sample_size"] == 2000
        assert report["recovery"]["counts_integral"]

    def test_bn_rejected(self, generated):
        assert run("audit", "--model", generated / "model.json") == 2


class TestExperimentCommand:
    CFG = {"m_values": [3], "e_values": [1], "pop_size": 500, "ref_size": 200, "target_size": 50,
           "repetitions": 2, "n_credal_points": 20, "alpha_grid": [0.05, 0.2]}

    def test_runs_and_reports(self, tmp_path):
        (tmp_path / "cfg.json").write_text(json.dumps(self.CFG))
        assert run("experiment", "--config", tmp_path / "cfg.json", "--out", tmp_path / "out") == 0
        for name in ("raw.csv", "aggregate.csv", "report.md"):
            assert (tmp_path / "out" / name).exists()
        assert run("report", "--raw", tmp_path / "out/raw.csv", "--diagnostics", tmp_path / "out/diagnostics.csv",
                   "--out", tmp_path / "rep") == 0
        assert (tmp_path / "rep/aggregate.csv").read_bytes() == (tmp_path / "out/aggregate.csv").read_bytes()
        assert (tmp_path / "rep/report.md").read_bytes() == (tmp_path / "out/report.md").read_bytes()

    def test_malformed_config(self, tmp_path, capsys):
        (tmp_path / "cfg.json").write_text(json.dumps({**self.CFG, "pop_size": -1, "bogus": 1}))
        assert run("experiment", "--config", tmp_path / "cfg.json", "--out", tmp_path / "out") == 1
        assert "bogus" in capsys.readouterr().err

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "credaltrace", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0 and "audit" in proc.stdout
        proc = subprocess.run([sys.executable, "-m", "credaltrace", "frobnicate"], capture_output=True, text=True)
        assert proc.returncode == 2
