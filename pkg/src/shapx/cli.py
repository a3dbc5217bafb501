"""Command-line surface: ``shapx exact | estimate | train | eval | bench``.

Every run resolves its configuration from defaults, an optional TOML file
(one flat table per command), and command-line flags, in increasing
precedence; the fully resolved config is written next to the outputs as
``<out>.config.toml`` so any run can be replayed from its artifacts.  Wall
time goes to a ``<out>.timing.json`` sidecar, keeping the primary outputs
byte-stable for a fixed seed.  Exit codes: 0 success, 1 internal error,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as _toml

from shapx import amortized, evaluation, exact, models, stochastic
from shapx.core import Attribution, CapacityError, ConfigError, RandomSource
from shapx.models import DataError

PROG = "shapx"

ESTIMATE_METHODS = (
    "semivalue",
    "permutation",
    "antithetical",
    "kernelshap",
    "kernelshap-unbiased",
    "simshap-sample",
    "unified:semivalue",
    "unified:least-squares",
    "unified:simshap",
)

# ---------------------------------------------------------------------------
# defaults (None = "not set": fall back to SHAPX_SEED / auto detection)

_GAME_DEFAULTS = {
    "game": "glove",
    "players": 3,
    "game_seed": 0,
    "coalition": "0,1",
    "coefficients": "",
}
_MODEL_DEFAULTS = {
    "model": "",
    "data": "",
    "row": 0,
    "label_column": "label",
    "class_index": -1,
    "baseline": "zeros",
}
_COMMON_DEFAULTS = {"seed": None, "out": "", "workers": 0}

DEFAULTS = {
    "exact": {**_GAME_DEFAULTS, **_MODEL_DEFAULTS, **_COMMON_DEFAULTS, "solver": "enumeration"},
    "estimate": {
        **_GAME_DEFAULTS,
        **_MODEL_DEFAULTS,
        **_COMMON_DEFAULTS,
        "method": "simshap-sample",
        "samples": 1024,
        "paired": False,
    },
    "train": {
        **_COMMON_DEFAULTS,
        "method": "simshap",
        "data": "",
        "label_column": "label",
        "features": 8,
        "rows": 2000,
        "data_seed": 0,
        "model": "",
        "model_kind": "linear",
        "mask_augment": False,
        "baseline": "zeros",
        "epochs": 100,
        "batch_size": 128,
        "learning_rate": 2e-3,
        "samples": 64,
        "paired": True,
        "metric": "identity",
        "normalize": True,
        "validation_fraction": 0.1,
        "hidden": 0,
        "depth": 3,
        "activation": "relu",
        "optimizer": "adamw",
        "schedule": "constant",
        "weight_decay": 0.0,
    },
    "eval": {
        **_GAME_DEFAULTS,
        **_MODEL_DEFAULTS,
        **_COMMON_DEFAULTS,
        "metric": "l1l2",
        "attribution": "",
        "reference": "",
        "estimator": "kernelshap",
        "grid": "256,1024,4096",
        "seeds": 20,
        "mode_normalize": True,
        "features": 64,
        "samples": 2048,
        "repeats": 10,
        "warmup": 3,
        "explainer": "",
    },
    "bench": {
        **_COMMON_DEFAULTS,
        "features": 64,
        "samples": 2048,
        "repeats": 10,
        "warmup": 3,
        "explainer": "",
    },
}


# ---------------------------------------------------------------------------
# config plumbing


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults < config-file table < explicit flags; fill seed/workers."""
    defaults = DEFAULTS[command]
    cfg = dict(defaults)
    path = getattr(args, "config", None)
    if path:
        with open(path, "rb") as fh:
            doc = _toml.load(fh)
        table = doc.get(command, {})
        unknown = sorted(set(table) - set(defaults))
        if unknown:
            raise ConfigError(f"unknown [{command}] config keys: {', '.join(unknown)}")
        cfg.update(table)
    for key in defaults:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            cfg[key] = flag_value
    if cfg.get("seed") is None:
        cfg["seed"] = int(os.environ.get("SHAPX_SEED", "0"))
    if not cfg.get("workers"):
        cfg["workers"] = os.cpu_count() or 1
    if not cfg.get("out"):
        raise ConfigError("an output path is required (--out)")
    if "samples" in cfg and int(cfg["samples"]) < 1:
        raise ConfigError(f"samples must be >= 1, got {cfg['samples']}")
    return cfg


def _toml_literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise ConfigError(f"cannot serialize config value {value!r}")


def write_resolved_config(path, command: str, cfg: dict) -> None:
    lines = [f"[{command}]"]
    lines += [f"{key} = {_toml_literal(cfg[key])}" for key in sorted(cfg)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_ints(text: str) -> list:
    return [int(t) for t in str(text).split(",") if t.strip()]


def _parse_floats(text: str) -> list:
    return [float(t) for t in str(text).split(",") if t.strip()]


# ---------------------------------------------------------------------------
# shared builders


def _load_row(cfg) -> np.ndarray:
    dataset = models.load_csv_dataset(cfg["data"], cfg["label_column"])
    row = int(cfg["row"])
    if not 0 <= row < dataset.n_rows:
        raise DataError(f"row {row} out of range for {dataset.n_rows}-row dataset {cfg['data']}")
    return dataset.X[row]


def build_game(cfg):
    """Fixture game from --game, or a masked-model game from --model/--data/--row."""
    if cfg.get("model"):
        model = models.load_model(cfg["model"])
        x = _load_row(cfg)
        rule = models.MaskingRule(cfg["baseline"])
        class_index = None if int(cfg["class_index"]) < 0 else int(cfg["class_index"])
        return models.masked_game(model, x, class_index=class_index, rule=rule)
    kind = cfg["game"]
    kwargs = {}
    if kind == "unanimity":
        coalition = _parse_ints(cfg["coalition"])
        if coalition:
            kwargs["coalition"] = coalition
    if kind == "additive" and cfg["coefficients"]:
        kwargs["coefficients"] = np.array(_parse_floats(cfg["coefficients"]))
    return models.synthetic_game(kind, int(cfg["players"]), seed=int(cfg["game_seed"]), **kwargs)


def _attribution_doc(att: Attribution, game) -> dict:
    return {
        "phi": [float(p) for p in att.phi],
        "method": att.method,
        "d": game.d,
        "v_empty": game.v_empty,
        "v_full": game.v_full,
        "seed": att.seed,
    }


def read_attribution(path) -> Attribution:
    with open(path) as fh:
        doc = json.load(fh)
    return Attribution(
        phi=np.array(doc["phi"], dtype=np.float64),
        method=doc.get("method", "file"),
        samples_used=int(doc.get("samples_used", 0)),
        seed=int(doc.get("seed", 0)),
    )


# ---------------------------------------------------------------------------
# command handlers (take the resolved config, write the primary outputs)

EXACT_SOLVERS = {
    "enumeration": exact.exact_shapley,
    "random_order": exact.exact_random_order,
    "least_squares": exact.exact_least_squares,
}


def cmd_exact(cfg: dict) -> None:
    solver = cfg["solver"]
    if solver not in EXACT_SOLVERS:
        raise ConfigError(f"unknown solver {solver!r}; choose from {sorted(EXACT_SOLVERS)}")
    game = build_game(cfg)
    att = EXACT_SOLVERS[solver](game)
    _write_json(cfg["out"], _attribution_doc(att, game))


def run_estimator(method: str, game, m: int, rng: RandomSource, paired: bool) -> Attribution:
    if method == "semivalue":
        return stochastic.estimate_unified(stochastic.semivalue_config(game.d), game, m, rng)
    if method == "permutation":
        return stochastic.estimate_permutation(game, m, rng)
    if method == "antithetical":
        return stochastic.estimate_permutation(game, m, rng, antithetical=True)
    if method == "kernelshap":
        return stochastic.estimate_kernelshap(game, m, rng, paired=paired)
    if method == "kernelshap-unbiased":
        return stochastic.estimate_kernelshap_unbiased(game, m, rng, paired=paired)
    if method == "simshap-sample":
        return stochastic.simshap_target(game, m, rng, paired=paired)
    if method.startswith("unified:"):
        factories = {
            "semivalue": stochastic.semivalue_config,
            "least-squares": stochastic.least_squares_config,
            "simshap": stochastic.simshap_config,
        }
        row = method.split(":", 1)[1]
        if row not in factories:
            raise ConfigError(f"unknown unified row {row!r}; choose from {sorted(factories)}")
        return stochastic.estimate_unified(factories[row](game.d), game, m, rng, paired=paired)
    raise ConfigError(f"unknown method {method!r}; choose from {ESTIMATE_METHODS}")


def cmd_estimate(cfg: dict) -> None:
    game = build_game(cfg)
    m = int(cfg["samples"])
    rng = RandomSource(int(cfg["seed"]))
    att = run_estimator(cfg["method"], game, m, rng, bool(cfg["paired"]))
    doc = _attribution_doc(att, game)
    doc["samples_used"] = att.samples_used
    doc["estimator"] = {"method": cfg["method"], "samples": m, "paired": bool(cfg["paired"])}
    _write_json(cfg["out"], doc)


def _train_dataset(cfg):
    if cfg["data"]:
        return models.load_csv_dataset(cfg["data"], cfg["label_column"])
    dataset, _, _ = models.make_linear_dataset(
        int(cfg["features"]), int(cfg["rows"]), seed=int(cfg["data_seed"])
    )
    return dataset


def _train_surrogate(cfg, dataset):
    if cfg["model"]:
        return models.load_model(cfg["model"])
    classifier_cfg = models.ClassifierConfig(
        seed=int(cfg["seed"]), mask_augment=bool(cfg["mask_augment"])
    )
    return models.train_tabular_classifier(dataset, kind=cfg["model_kind"], config=classifier_cfg)


def _write_history_csv(path, history: dict) -> None:
    train = history.get("train_loss", [])
    val = history.get("val_loss", [])
    lines = ["epoch,train_loss,val_loss"]
    for epoch, loss in enumerate(train):
        val_cell = repr(val[epoch]) if epoch < len(val) else ""
        lines.append(f"{epoch},{repr(loss)},{val_cell}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_train(cfg: dict) -> None:
    if cfg["method"] not in ("simshap", "fastshap"):
        raise ConfigError(f"unknown training method {cfg['method']!r}")
    dataset = _train_dataset(cfg)
    model = _train_surrogate(cfg, dataset)
    if dataset.n_features != model.n_features:
        raise ConfigError(
            f"dataset has {dataset.n_features} features but model expects {model.n_features}"
        )
    rule = models.MaskingRule(cfg["baseline"])

    def game_factory(x, label):
        class_index = int(label) if model.n_classes > 1 else 0
        return models.masked_game(model, x, class_index=class_index, rule=rule)

    net = amortized.build_explainer(
        model.n_features,
        model.n_features,
        n_classes=model.n_classes,
        rng=int(cfg["seed"]),
        hidden=int(cfg["hidden"]) or None,
        depth=int(cfg["depth"]),
        activation=cfg["activation"],
    )
    epochs = int(cfg["epochs"])
    if epochs == 0:
        # initialization checkpoint, no optimization, empty history
        if cfg["method"] == "fastshap":
            net.normalize_inference = bool(cfg["normalize"])
        amortized.save_explainer(cfg["out"], net)
        _write_history_csv(cfg["out"] + ".history.csv", {})
        return
    train_cfg = amortized.TrainConfig(
        learning_rate=float(cfg["learning_rate"]),
        batch_size=int(cfg["batch_size"]),
        epochs=epochs,
        samples_per_input=int(cfg["samples"]),
        paired=bool(cfg["paired"]),
        optimizer=cfg["optimizer"],
        seed=int(cfg["seed"]),
        weight_decay=float(cfg["weight_decay"]),
        schedule=cfg["schedule"],
        validation_fraction=float(cfg["validation_fraction"]),
    )
    if cfg["method"] == "simshap":
        metric = amortized.MetricMatrix(cfg["metric"], model.n_features)
        history = amortized.train_simshap(net, dataset, game_factory, train_cfg, metric=metric)
    else:
        history = amortized.train_fastshap(
            net, dataset, game_factory, train_cfg, normalize=bool(cfg["normalize"])
        )
    amortized.save_explainer(cfg["out"], net, cfg=train_cfg)
    _write_history_csv(cfg["out"] + ".history.csv", history)


def _csv_sibling(out: str) -> str:
    stem, ext = os.path.splitext(out)
    return stem + ".csv" if ext.lower() == ".json" else out + ".csv"


def cmd_eval(cfg: dict) -> None:
    metric = cfg["metric"]
    if metric == "l1l2":
        if not cfg["attribution"] or not cfg["reference"]:
            raise ConfigError("--metric l1l2 needs --attribution and --reference files")
        report = evaluation.attribution_distance(
            read_attribution(cfg["attribution"]), read_attribution(cfg["reference"])
        )
        _write_json(cfg["out"], report.to_dict())
        return
    if metric in ("insertion", "deletion"):
        if not (cfg["model"] and cfg["data"] and cfg["attribution"]):
            raise ConfigError(f"--metric {metric} needs --model, --data/--row and --attribution")
        model = models.load_model(cfg["model"])
        x = _load_row(cfg)
        att = read_attribution(cfg["attribution"])
        class_index = None if int(cfg["class_index"]) < 0 else int(cfg["class_index"])
        report = evaluation.insertion_deletion(
            model,
            x,
            att,
            class_index=class_index,
            rule=models.MaskingRule(cfg["baseline"]),
            mode=metric,
            normalize=bool(cfg["mode_normalize"]),
        )
        _write_json(cfg["out"], report.to_dict())
        evaluation.write_curve_csv(_csv_sibling(cfg["out"]), report)
        return
    if metric == "convergence":
        game = build_game(cfg)
        grid = _parse_ints(cfg["grid"])
        table = evaluation.convergence_probe(
            cfg["estimator"], game, grid, n_seeds=int(cfg["seeds"]), base_seed=int(cfg["seed"])
        )
        _write_json(cfg["out"], table.to_dict())
        evaluation.write_convergence_csv(_csv_sibling(cfg["out"]), table)
        return
    if metric == "bench":
        run_bench(cfg)
        return
    raise ConfigError(
        f"unknown metric {metric!r}; choose from l1l2, insertion, deletion, convergence, bench"
    )


def _bench_surrogate(d: int, gen: np.random.Generator) -> models.TabularModel:
    """Feature-wise masked surrogate at realistic width: three 512-unit hidden
    layers for wide inputs, 128 for narrow ones."""
    hidden = 512 if d > 16 else 128
    widths = (d, hidden, hidden, hidden, 1)
    weights = [
        gen.uniform(-1 / np.sqrt(a), 1 / np.sqrt(a), size=(a, b))
        for a, b in zip(widths[:-1], widths[1:])
    ]
    biases = [np.zeros(b) for b in widths[1:]]
    return models.TabularModel("mlp", weights, biases, d, 1)


def run_bench(cfg: dict) -> None:
    """Time one amortized forward pass against sampled KernelSHAP on a wide
    synthetic surrogate model; the report carries the speedup ratio.

    Each KernelSHAP run gets a fresh game so every run pays the full m model
    evaluations — memoization across repeats would otherwise time only the
    least-squares solve."""
    d = int(cfg["features"])
    m = int(cfg["samples"])
    seed = int(cfg["seed"])
    gen = RandomSource(seed).generator()
    model = _bench_surrogate(d, gen)
    x = gen.normal(size=d)
    if cfg["explainer"]:
        net = amortized.load_explainer(cfg["explainer"])
        if net.d != d:
            raise ConfigError(f"explainer handles d={net.d}, benchmark uses d={d}")
    else:
        net = amortized.build_explainer(d, d, n_classes=1, rng=seed)
    v_all = models.masked_game(model, x, class_index=0).v_all if net.normalize_inference else None

    def kernelshap_run():
        game = models.masked_game(model, x, class_index=0)
        return stochastic.estimate_kernelshap(game, m, RandomSource(seed, stream=1))

    workloads = {
        "amortized_inference": lambda: amortized.amortized_inference(net, x, v_all=v_all),
        f"kernelshap_m{m}": kernelshap_run,
    }
    report = evaluation.benchmark_timing(
        workloads, repeats=int(cfg["repeats"]), warmup=int(cfg["warmup"]), workers=cfg["workers"]
    )
    doc = report.to_dict()
    doc["ratio"] = report.median_for(f"kernelshap_m{m}") / report.median_for("amortized_inference")
    doc["features"] = d
    doc["samples"] = m
    _write_json(cfg["out"], doc)


# ---------------------------------------------------------------------------
# parser


def _add_common(p):
    p.add_argument("--config", help="TOML file with a flat [command] table")
    p.add_argument("--seed", type=int, help="root seed (fallback: SHAPX_SEED, then 0)")
    p.add_argument("--out", help="primary output path")
    p.add_argument("--workers", type=int, help="worker count recorded for the run (default: cores)")


def _add_game(p):
    p.add_argument("--game", choices=models.SYNTHETIC_KINDS, help="built-in fixture game")
    p.add_argument("--players", type=int, help="fixture game size")
    p.add_argument("--game-seed", type=int, dest="game_seed")
    p.add_argument("--coalition", help="unanimity coalition, e.g. 0,1")
    p.add_argument("--coefficients", help="additive coefficients, e.g. 1,2,3")


def _add_model_input(p):
    p.add_argument("--model", help="tabular model checkpoint (overrides --game)")
    p.add_argument("--data", help="CSV dataset path")
    p.add_argument("--row", type=int, help="row of --data to explain")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--class-index", type=int, dest="class_index", help="-1 = predicted class")
    p.add_argument("--baseline", choices=["zeros", "training_mean"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG, description="Exact, sampled, and amortized Shapley attribution."
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("exact", help="enumerate exact Shapley values")
    _add_common(p)
    _add_game(p)
    _add_model_input(p)
    p.add_argument("--solver", choices=sorted(EXACT_SOLVERS))
    p.set_defaults(handler=cmd_exact)

    p = sub.add_parser("estimate", help="stochastic Shapley estimation")
    _add_common(p)
    _add_game(p)
    _add_model_input(p)
    p.add_argument("--method", choices=ESTIMATE_METHODS)
    p.add_argument("--samples", type=_positive_int)
    p.add_argument("--paired", action=argparse.BooleanOptionalAction)
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("train", help="train an amortized explainer")
    _add_common(p)
    p.add_argument("--method", choices=["simshap", "fastshap"])
    p.add_argument("--data", help="CSV dataset; omitted = synthetic linear data")
    p.add_argument("--label-column", dest="label_column")
    p.add_argument("--features", type=int, help="synthetic dataset width")
    p.add_argument("--rows", type=int, help="synthetic dataset size")
    p.add_argument("--data-seed", type=int, dest="data_seed")
    p.add_argument("--model", help="surrogate checkpoint; omitted = fit in-run")
    p.add_argument("--model-kind", choices=["linear", "logistic", "mlp"], dest="model_kind")
    p.add_argument("--mask-augment", action=argparse.BooleanOptionalAction, dest="mask_augment")
    p.add_argument("--baseline", choices=["zeros", "training_mean"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--samples", type=_positive_int, help="target samples per item visit")
    p.add_argument("--paired", action=argparse.BooleanOptionalAction)
    p.add_argument("--metric", choices=["identity", "shapley_lsv"])
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction)
    p.add_argument("--validation-fraction", type=float, dest="validation_fraction")
    p.add_argument("--hidden", type=int, help="hidden width (0 = auto by input size)")
    p.add_argument("--depth", type=int)
    p.add_argument("--activation", choices=["relu", "elu"])
    p.add_argument("--optimizer", choices=["sgd", "adamw"])
    p.add_argument("--schedule", choices=["constant", "cosine"])
    p.add_argument("--weight-decay", type=float, dest="weight_decay")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="distances, curves, convergence, benchmarks")
    _add_common(p)
    _add_game(p)
    _add_model_input(p)
    p.add_argument("--metric", choices=["l1l2", "insertion", "deletion", "convergence", "bench"])
    p.add_argument("--attribution", help="attribution JSON to evaluate")
    p.add_argument("--reference", help="ground-truth attribution JSON")
    p.add_argument("--estimator", choices=sorted(stochastic.ESTIMATORS))
    p.add_argument("--grid", help="sample budgets, e.g. 256,1024,4096")
    p.add_argument("--seeds", type=_positive_int, help="seeds per budget")
    p.add_argument(
        "--mode-normalize", action=argparse.BooleanOptionalAction, dest="mode_normalize",
        help="normalize curve endpoints",
    )
    p.add_argument("--features", type=int, help="bench fixture width")
    p.add_argument("--samples", type=_positive_int, help="bench KernelSHAP budget")
    p.add_argument("--repeats", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--explainer", help="bench explainer checkpoint (omitted = fresh net)")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("bench", help="amortized vs sampled inference timing")
    _add_common(p)
    p.add_argument("--features", type=int)
    p.add_argument("--samples", type=_positive_int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--explainer")
    p.set_defaults(handler=run_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "handler", None):
        parser.print_help()
        return 2
    start = time.perf_counter()
    try:
        cfg = resolve_config(args.command, args)
        args.handler(cfg)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        write_resolved_config(cfg["out"] + ".config.toml", args.command, cfg)
        _write_json(cfg["out"] + ".timing.json", {"elapsed_ms": elapsed_ms})
    except (ConfigError, DataError, CapacityError, OSError, ValueError, KeyError) as err:
        print(f"{PROG}: error: {err}", file=sys.stderr)
        return 2
    except amortized.TrainingError as err:
        print(f"{PROG}: training aborted: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # pragma: no cover - last-resort diagnostics
        print(f"{PROG}: internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
