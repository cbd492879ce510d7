import csv
import io
import json
from dataclasses import replace

import numpy as np
import pytest

from glmsel.cli import main, read_csv_dataset
from glmsel.harness import (
    ROW_FIELDS,
    AsymptoticsConfig,
    ExperimentConfig,
    TableRow,
    config_from_mapping,
    config_to_text,
    generate,
    parse_kv,
    preset,
    rows_to_csv,
    run_asymptotics,
    run_experiment,
    seed_from_env,
)
from glmsel.selection import CriterionSpec
from glmsel.simulate import CovariateLaw


@pytest.fixture
def small_nbr():
    return preset("nbr", n=60, reps=6)


class TestPresets:
    @pytest.mark.parametrize("name", ["nbr", "probit", "dep-lm-mr2", "dep-lm-mr3"])
    def test_common_fields(self, name):
        cfg = preset(name)
        assert cfg.beta0 == (0.5, 0.5, 0.5, 0.0, 0.0, 0.0)
        assert cfg.alpha0 == 0b111
        assert cfg.reps == 500

    def test_nbr(self):
        cfg = preset("nbr")
        assert cfg.fam.kind.value == "negbin" and cfg.fam.theta == 10.0
        assert cfg.error is None

    def test_dependent(self):
        assert preset("dep-lm-mr2").error.ma_coeffs == (0.5, 0.3)
        assert preset("dep-lm-mr3").error.ma_coeffs == (0.5, 0.3, 0.2)
        assert preset("dep-lm-mr3").fam.kind.value == "gaussian"

    def test_unknown(self):
        with pytest.raises(ValueError):
            preset("lasso")

    @pytest.mark.parametrize(
        "kw",
        [dict(reps=0), dict(n=0), dict(workers=0), dict(beta0=(0.0, 0.0)), dict(criteria=()), dict(base_seed=-1)],
    )
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            preset("nbr", **kw)

    def test_design_bounded(self):
        for law, bound in ((CovariateLaw.BOUNDED, np.sqrt(3)), (CovariateLaw.UNIFORM01, 1.0)):
            cfg = preset("probit", n=500, covariate_law=law, bound=bound)
            ds = generate(cfg, 0)
            assert ds.X.shape == (500, 6)
            assert ds.design_bound <= bound


class TestRun:
    def test_rows(self, small_nbr):
        rows = run_experiment(small_nbr)
        assert [r.method for r in rows] == ["BIC", "AIC"]
        for r in rows:
            assert abs(r.correct_rate + r.overfit_rate + r.underfit_rate - 1) < 1e-12
            assert r.mse >= 0 and r.sample_size == 60

    def test_single_rep_rates_are_binary(self):
        for name in ("nbr", "dep-lm-mr2"):
            for r in run_experiment(preset(name, n=50, reps=1)):
                assert {r.correct_rate, r.overfit_rate, r.underfit_rate} <= {0.0, 1.0}

    def test_worker_count_invariance(self, small_nbr):
        assert run_experiment(small_nbr) == run_experiment(replace(small_nbr, workers=3))

    def test_rep_streams_independent_of_reps(self, small_nbr):
        a = generate(small_nbr, 3)
        b = generate(replace(small_nbr, reps=100), 3)
        assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)

    def test_csv_format(self, small_nbr):
        text = rows_to_csv(run_experiment(small_nbr))
        rows = list(csv.reader(io.StringIO(text)))
        assert tuple(rows[0]) == ROW_FIELDS
        for row in rows[1:]:
            for v in row[3:7]:
                assert len(v.split(".")[1]) == 6

    def test_row_invariant(self):
        with pytest.raises(ValueError):
            TableRow("nbr", "BIC", 100, 0.5, 0.5, 0.5, 0.0)

    def test_per_observation_criteria(self):
        cfg = preset("probit", n=80, reps=3, criteria=(CriterionSpec("bic", "per-observation"),))
        assert run_experiment(cfg)[0].method == "BIC/n"


class TestConfig:
    def test_round_trip(self):
        cfg = preset("dep-lm-mr3", n=100, reps=20, workers=2)
        assert config_from_mapping(parse_kv(config_to_text(cfg))) == cfg

    def test_parse_comments_and_blanks(self):
        kv = parse_kv("# header\nmodel = probit\n\nn = 100  # trailing\n")
        assert kv == {"model": "probit", "n": "100"}

    def test_bad_line(self):
        with pytest.raises(ValueError):
            parse_kv("model probit")

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            config_from_mapping({"model": "nbr", "colour": "red"})

    def test_custom_model(self):
        cfg = config_from_mapping(
            {"model": "custom", "family": "poisson", "beta0": "1,0", "criteria": "bic,aic:per-observation", "n": "40"}
        )
        assert cfg.fam.kind.value == "poisson"
        assert [c.name for c in cfg.criteria] == ["BIC", "AIC/n"]

    def test_env_seed_override(self, monkeypatch):
        monkeypatch.setenv("GLMSEL_SEED", "77")
        assert seed_from_env(5) == 77
        assert config_from_mapping({"model": "nbr", "base_seed": "5"}).base_seed == 77
        monkeypatch.setenv("GLMSEL_SEED", "abc")
        with pytest.raises(ValueError):
            seed_from_env(5)

    def test_env_seed_absent(self, monkeypatch):
        monkeypatch.delenv("GLMSEL_SEED", raising=False)
        assert seed_from_env(5) == 5


class TestAsymptoticsRun:
    def test_artifacts(self, tmp_path):
        cfg = AsymptoticsConfig("gaussian-iid", (200, 500, 1000), reps=5)
        s = run_asymptotics(cfg, tmp_path / "a.csv", tmp_path / "a.json")
        first = (tmp_path / "a.csv").read_bytes()
        run_asymptotics(cfg, tmp_path / "a.csv", tmp_path / "b.json")
        assert (tmp_path / "a.csv").read_bytes() == first
        assert json.loads((tmp_path / "a.json").read_text()) == s
        lines = first.decode().splitlines()
        assert lines[0] == "rep_id,n,ratio,gap_correct,gap_wrong_per_n"
        assert len(lines) == 1 + 5 * 3

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            AsymptoticsConfig("gaussian-iid", ())

    def test_unknown_scenario(self):
        with pytest.raises(ValueError):
            AsymptoticsConfig("cauchy")

    def test_io_error_has_path(self, tmp_path):
        with pytest.raises(OSError, match="nope"):
            run_asymptotics(AsymptoticsConfig(n_grid=(200,), reps=1), tmp_path / "nope" / "x.csv")


class TestCli:
    def test_table1(self, tmp_path, capsys):
        out = tmp_path / "rows.csv"
        assert main(["table1", "--model", "nbr", "--n", "50,80", "--reps", "3", "--seed", "42", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 5
        assert lines[1].startswith("nbr,BIC,50,")

    def test_table1_config(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(config_to_text(preset("dep-lm-mr2", n=60, reps=2, criteria=(CriterionSpec("bic"),))))
        assert main(["table1", "--config", str(cfg)]) == 0
        assert "dep-lm-mr2,BIC,60," in capsys.readouterr().out

    def test_asymptotics(self, tmp_path):
        code = main(["asymptotics", "--scenario", "gaussian-strong", "--grid", "500,1000", "--reps", "3", "--out", str(tmp_path / "r.csv"), "--summary", str(tmp_path / "s.json")])
        s = json.loads((tmp_path / "s.json").read_text())
        assert code == (0 if s["pass"] else 1)
        assert s["scenario"] == "gaussian-strong"

    def test_asymptotics_bad_grid(self, capsys):
        assert main(["asymptotics", "--grid", "500,200"]) == 2
        assert "strictly increasing" in capsys.readouterr().err

    def test_fit(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        X = rng.uniform(-1, 1, size=(300, 2))
        y = (rng.random(300) < 1 / (1 + np.exp(-X @ [1.0, 0.0]))).astype(int)
        path = tmp_path / "d.csv"
        path.write_text("y,x1,x2\n" + "".join(f"{a},{b},{c}\n" for a, (b, c) in zip(y, X)))
        assert main(["fit", "--family", "logit", "--data", str(path)]) == 0
        out = capsys.readouterr().out
        assert "converged: True" in out and "x2" in out
        assert main(["fit", "--family", "logit", "--data", str(path), "--select", "bic"]) == 0
        assert "selected by BIC: x1" in capsys.readouterr().out

    def test_read_csv_weights(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x1,y,w\n1,2,0.5\n3,4,2\n")
        ds, names = read_csv_dataset(path)
        assert names == ["x1"]
        np.testing.assert_array_equal(ds.y, [2, 4])
        np.testing.assert_array_equal(ds.w, [0.5, 2])

    def test_fit_missing_y(self, tmp_path, capsys):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n")
        assert main(["fit", "--family", "gaussian", "--data", str(path)]) == 2
        assert "'y'" in capsys.readouterr().err

    def test_fit_support_error(self, tmp_path, capsys):
        path = tmp_path / "d.csv"
        path.write_text("y,x1\n0.5,1\n1,2\n")
        assert main(["fit", "--family", "probit", "--data", str(path)]) == 2
