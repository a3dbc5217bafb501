"""End-to-end command-line behaviour: outputs, sidecars, seeds, exit codes."""

import csv
import json
import shutil
import subprocess

import numpy as np
import pytest
from numpy.testing import assert_allclose

from shapx import amortized, cli, models
from shapx.core import RandomSource


def run_cli(argv):
    """main() but tolerant of argparse's SystemExit, for uniform exit codes."""
    try:
        return cli.main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_attribution(path, phi):
    with open(path, "w") as fh:
        json.dump({"phi": list(phi), "method": "file", "seed": 0}, fh)


# ---------------------------------------------------------------------------
# exact


def test_exact_glove_with_sidecars(tmp_path):
    out = str(tmp_path / "glove.json")
    assert run_cli(["exact", "--game", "glove", "--players", "3", "--out", out]) == 0
    doc = read_json(out)
    assert_allclose(doc["phi"], [2 / 3, 1 / 6, 1 / 6], atol=1e-12)
    assert doc["d"] == 3
    assert doc["v_empty"] == 0.0 and doc["v_full"] == 1.0
    config = (tmp_path / "glove.json.config.toml").read_text()
    assert config.startswith("[exact]\n")
    assert 'game = "glove"' in config
    timing = read_json(out + ".timing.json")
    assert timing["elapsed_ms"] >= 0.0


def test_exact_solvers_agree_on_additive(tmp_path):
    outs = {}
    for solver in ("enumeration", "random_order", "least_squares"):
        out = str(tmp_path / f"{solver}.json")
        code = run_cli(
            [
                "exact",
                "--game",
                "additive",
                "--players",
                "3",
                "--coefficients",
                "1,2,3",
                "--solver",
                solver,
                "--out",
                out,
            ]
        )
        assert code == 0
        outs[solver] = read_json(out)["phi"]
    for phi in outs.values():
        assert_allclose(phi, [1.0, 2.0, 3.0], atol=1e-8)


def test_exact_unanimity_coalition_flag(tmp_path):
    out = str(tmp_path / "u.json")
    args = ["exact", "--game", "unanimity", "--players", "4", "--coalition", "1,3", "--out", out]
    assert run_cli(args) == 0
    assert_allclose(read_json(out)["phi"], [0.0, 0.5, 0.0, 0.5], atol=1e-12)


# ---------------------------------------------------------------------------
# estimate


def test_estimate_reports_estimator_and_efficiency(tmp_path):
    out = str(tmp_path / "est.json")
    args = [
        "estimate",
        "--game",
        "glove",
        "--players",
        "6",
        "--method",
        "kernelshap",
        "--samples",
        "256",
        "--seed",
        "3",
        "--out",
        out,
    ]
    assert run_cli(args) == 0
    doc = read_json(out)
    assert doc["estimator"] == {"method": "kernelshap", "samples": 256, "paired": False}
    assert doc["samples_used"] >= 1
    # the constrained solve pins the efficiency gap to zero
    assert sum(doc["phi"]) == pytest.approx(doc["v_full"] - doc["v_empty"], abs=1e-8)


@pytest.mark.parametrize("method", cli.ESTIMATE_METHODS)
def test_every_estimate_method_runs(tmp_path, method):
    out = str(tmp_path / "m.json")
    args = [
        "estimate",
        "--game",
        "additive",
        "--players",
        "5",
        "--method",
        method,
        "--samples",
        "64",
        "--seed",
        "1",
        "--out",
        out,
    ]
    assert run_cli(args) == 0
    doc = read_json(out)
    assert len(doc["phi"]) == 5
    assert all(np.isfinite(doc["phi"]))


def test_same_seed_is_byte_identical(tmp_path):
    def run(name, seed):
        out = str(tmp_path / name)
        args = [
            "estimate",
            "--game",
            "random_uniform",
            "--players",
            "8",
            "--method",
            "simshap-sample",
            "--samples",
            "128",
            "--seed",
            str(seed),
            "--out",
            out,
        ]
        assert run_cli(args) == 0
        return (tmp_path / name).read_bytes()

    assert run("a.json", 7) == run("b.json", 7)
    assert run("c.json", 8) != run("a.json", 7)


def test_seed_falls_back_to_environment(tmp_path, monkeypatch):
    out_env = str(tmp_path / "env.json")
    out_flag = str(tmp_path / "flag.json")
    common = [
        "estimate", "--game", "glove", "--players", "5",
        "--method", "kernelshap", "--samples", "64",
    ]
    monkeypatch.setenv("SHAPX_SEED", "123")
    assert run_cli(common + ["--out", out_env]) == 0
    monkeypatch.delenv("SHAPX_SEED")
    assert run_cli(common + ["--seed", "123", "--out", out_flag]) == 0
    assert (tmp_path / "env.json").read_bytes() == (tmp_path / "flag.json").read_bytes()
    assert "seed = 123" in (tmp_path / "env.json.config.toml").read_text()


def test_config_file_roundtrip_reproduces_output(tmp_path):
    first = str(tmp_path / "first.json")
    args = [
        "estimate",
        "--game",
        "additive",
        "--players",
        "6",
        "--game-seed",
        "4",
        "--method",
        "unified:simshap",
        "--samples",
        "96",
        "--seed",
        "11",
        "--out",
        first,
    ]
    assert run_cli(args) == 0
    second = str(tmp_path / "second.json")
    rerun = ["estimate", "--config", first + ".config.toml", "--out", second]
    assert run_cli(rerun) == 0
    assert (tmp_path / "first.json").read_bytes() == (tmp_path / "second.json").read_bytes()


def test_flags_override_config_file(tmp_path):
    config = tmp_path / "cfg.toml"
    config.write_text('[estimate]\ngame = "glove"\nplayers = 4\nsamples = 32\nseed = 5\n')
    out = str(tmp_path / "o.json")
    args = ["estimate", "--config", str(config), "--players", "6", "--out", out]
    assert run_cli(args) == 0
    assert read_json(out)["d"] == 6
    assert "players = 6" in (tmp_path / "o.json.config.toml").read_text()


# ---------------------------------------------------------------------------
# error paths


def test_unknown_config_key_exits_two(tmp_path, capsys):
    config = tmp_path / "bad.toml"
    config.write_text("[estimate]\nbogus = 1\n")
    out = str(tmp_path / "o.json")
    assert run_cli(["estimate", "--config", str(config), "--out", out]) == 2
    err = capsys.readouterr().err
    assert "bogus" in err and "shapx: error:" in err


def test_missing_out_exits_two(tmp_path, capsys):
    assert run_cli(["exact", "--game", "glove", "--players", "3"]) == 2
    assert "output path" in capsys.readouterr().err


def test_zero_samples_rejected(tmp_path, capsys):
    out = str(tmp_path / "o.json")
    assert run_cli(["estimate", "--samples", "0", "--out", out]) == 2
    config = tmp_path / "cfg.toml"
    config.write_text("[estimate]\nsamples = 0\n")
    assert run_cli(["estimate", "--config", str(config), "--out", out]) == 2
    assert "samples" in capsys.readouterr().err


def test_missing_model_file_exits_two_naming_path(tmp_path, capsys):
    out = str(tmp_path / "o.json")
    missing = str(tmp_path / "nope_model.json")
    args = ["exact", "--model", missing, "--data", "also_missing.csv", "--out", out]
    assert run_cli(args) == 2
    assert "nope_model.json" in capsys.readouterr().err


def test_bad_row_index_exits_two(tmp_path, capsys):
    model = models.TabularModel(
        "linear", [np.ones((2, 1))], [np.zeros(1)], 2, 1, feature_means=np.zeros(2)
    )
    model_path = tmp_path / "model.json"
    models.save_model(model_path, model)
    data = tmp_path / "data.csv"
    data.write_text("a,b,label\n1,2,0\n")
    out = str(tmp_path / "o.json")
    args = ["exact", "--model", str(model_path), "--data", str(data), "--row", "9", "--out", out]
    assert run_cli(args) == 2
    assert "row 9" in capsys.readouterr().err


def test_no_command_prints_help(capsys):
    assert run_cli([]) == 2


# ---------------------------------------------------------------------------
# train


def train_args(tmp_path, out_name, **overrides):
    base = {
        "method": "simshap",
        "features": "3",
        "rows": "40",
        "epochs": "2",
        "batch-size": "16",
        "samples": "4",
        "seed": "0",
        "hidden": "8",
        "depth": "2",
    }
    base.update(overrides)
    args = ["train", "--out", str(tmp_path / out_name)]
    for key, value in base.items():
        args += [f"--{key}", value]
    return args


def test_train_writes_checkpoint_and_history(tmp_path):
    assert run_cli(train_args(tmp_path, "net.json")) == 0
    net = amortized.load_explainer(tmp_path / "net.json")
    assert net.d == 3
    with open(tmp_path / "net.json.history.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["epoch"] for r in rows] == ["0", "1"]
    assert all(np.isfinite(float(r["train_loss"])) for r in rows)
    assert all(np.isfinite(float(r["val_loss"])) for r in rows)


def test_train_epochs_zero_saves_untouched_initialization(tmp_path):
    assert run_cli(train_args(tmp_path, "init.json", epochs="0")) == 0
    net = amortized.load_explainer(tmp_path / "init.json")
    fresh = amortized.build_explainer(3, 3, n_classes=1, rng=0, hidden=8, depth=2)
    for a, b in zip(net.weights + net.biases, fresh.weights + fresh.biases):
        assert a.tobytes() == b.tobytes()
    history = (tmp_path / "init.json.history.csv").read_text()
    assert history == "epoch,train_loss,val_loss\n"


def test_train_fastshap_checkpoint_normalizes(tmp_path):
    assert run_cli(train_args(tmp_path, "fast.json", method="fastshap")) == 0
    net = amortized.load_explainer(tmp_path / "fast.json")
    assert net.normalize_inference
    att = amortized.amortized_inference(net, np.zeros(3), v_all=5.0)[0]
    assert att.total() == pytest.approx(5.0, abs=1e-8)


def test_train_divergence_exits_one(tmp_path, capsys):
    code = run_cli(train_args(tmp_path, "div.json", **{"learning-rate": "60.0", "epochs": "30"}))
    assert code == 1
    assert "training aborted" in capsys.readouterr().err


def test_train_determinism(tmp_path):
    assert run_cli(train_args(tmp_path, "t1.json")) == 0
    assert run_cli(train_args(tmp_path, "t2.json")) == 0
    a = amortized.load_explainer(tmp_path / "t1.json")
    b = amortized.load_explainer(tmp_path / "t2.json")
    for wa, wb in zip(a.weights, b.weights):
        assert wa.tobytes() == wb.tobytes()


# ---------------------------------------------------------------------------
# eval


def test_eval_l1l2_distance(tmp_path):
    est = tmp_path / "est.json"
    ref = tmp_path / "ref.json"
    write_attribution(est, [3.0, 4.0])
    write_attribution(ref, [0.0, 0.0])
    out = str(tmp_path / "dist.json")
    args = [
        "eval", "--metric", "l1l2",
        "--attribution", str(est), "--reference", str(ref), "--out", out,
    ]
    assert run_cli(args) == 0
    doc = read_json(out)
    assert doc["l1"] == 7.0 and doc["l2"] == 5.0


def test_eval_l1l2_requires_both_files(tmp_path, capsys):
    out = str(tmp_path / "d.json")
    assert run_cli(["eval", "--metric", "l1l2", "--out", out]) == 2
    assert "attribution" in capsys.readouterr().err


def insertion_fixture(tmp_path):
    w = np.array([2.0, -1.0, 0.5])
    model = models.TabularModel(
        "linear", [w[:, None]], [np.zeros(1)], 3, 1, feature_means=np.zeros(3)
    )
    model_path = tmp_path / "model.json"
    models.save_model(model_path, model)
    data = tmp_path / "data.csv"
    data.write_text("a,b,c,label\n1.0,-1.0,2.0,0\n")
    att_path = tmp_path / "att.json"
    write_attribution(att_path, w * np.array([1.0, -1.0, 2.0]))
    return model_path, data, att_path


@pytest.mark.parametrize("mode", ["insertion", "deletion"])
def test_eval_curves_write_json_and_csv(tmp_path, mode):
    model_path, data, att_path = insertion_fixture(tmp_path)
    out = str(tmp_path / f"{mode}.json")
    args = [
        "eval", "--metric", mode,
        "--model", str(model_path), "--data", str(data), "--row", "0",
        "--attribution", str(att_path), "--out", out,
    ]
    assert run_cli(args) == 0
    doc = read_json(out)
    assert doc["mode"] == mode
    assert doc["normalized"] is True
    expected_ends = (0.0, 1.0) if mode == "insertion" else (1.0, 0.0)
    assert (doc["scores"][0], doc["scores"][-1]) == expected_ends
    with open(tmp_path / f"{mode}.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["fraction", "score"]
    assert len(rows) == 1 + 4  # d+1 grid points


def test_eval_convergence_outputs(tmp_path):
    out = str(tmp_path / "conv.json")
    args = [
        "eval", "--metric", "convergence",
        "--game", "glove", "--players", "5",
        "--estimator", "simshap", "--grid", "16,64", "--seeds", "3",
        "--seed", "0", "--out", out,
    ]
    assert run_cli(args) == 0
    doc = read_json(out)
    assert doc["samples"] == [16, 64]
    assert doc["n_seeds"] == 3
    with open(tmp_path / "conv.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["samples"]) for r in rows] == [16, 64]


def test_bench_reports_ratio(tmp_path):
    out = str(tmp_path / "bench.json")
    args = [
        "bench", "--features", "8", "--samples", "16",
        "--repeats", "10", "--warmup", "3", "--seed", "0", "--out", out,
    ]
    assert run_cli(args) == 0
    doc = read_json(out)
    assert doc["features"] == 8 and doc["samples"] == 16
    assert doc["ratio"] > 0
    assert "kernelshap_m16" in doc["labels"]
    assert doc["environment"]["numpy"] == np.__version__


def test_eval_bench_routes_to_benchmark(tmp_path):
    out = str(tmp_path / "eb.json")
    args = [
        "eval", "--metric", "bench", "--features", "8", "--samples", "16",
        "--repeats", "10", "--warmup", "3", "--seed", "0", "--out", out,
    ]
    assert run_cli(args) == 0
    assert "ratio" in read_json(out)


# ---------------------------------------------------------------------------
# installed entry point


def test_console_script_is_installed(tmp_path):
    exe = shutil.which("shapx")
    assert exe, "shapx console script not on PATH"
    out = str(tmp_path / "cli.json")
    proc = subprocess.run(
        [exe, "exact", "--game", "glove", "--players", "3", "--out", out],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert_allclose(read_json(out)["phi"], [2 / 3, 1 / 6, 1 / 6], atol=1e-12)


def test_console_script_error_exit_code(tmp_path):
    exe = shutil.which("shapx")
    assert exe
    proc = subprocess.run(
        [exe, "exact", "--game", "glove", "--players", "3"], capture_output=True, text=True
    )
    assert proc.returncode == 2
    assert "shapx: error:" in proc.stderr
