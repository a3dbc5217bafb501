#!/usr/bin/env python3
"""Time one amortized forward pass against sampled KernelSHAP on a wide MLP.

Builds a random three-layer surrogate (512 hidden units beyond 16 features),
then times KernelSHAP at a fixed sample budget against a single explainer
forward pass.  Each KernelSHAP run constructs a fresh game so every repeat
pays the full model-evaluation cost instead of replaying memoized values.

Example:
    python3 scripts/speed_benchmark.py --dim 64 --samples 2048
"""

import argparse
import json

import numpy as np

from shapx.amortized import amortized_inference, build_explainer
from shapx.core import RandomSource
from shapx.evaluation import benchmark_timing
from shapx.models import TabularModel, masked_game
from shapx.stochastic import ESTIMATORS


def random_surrogate(d: int, gen: np.random.Generator) -> TabularModel:
    hidden = 512 if d > 16 else 128
    widths = (d, hidden, hidden, hidden, 1)
    weights = [
        gen.uniform(-1 / np.sqrt(a), 1 / np.sqrt(a), size=(a, b))
        for a, b in zip(widths[:-1], widths[1:])
    ]
    biases = [np.zeros(b) for b in widths[1:]]
    return TabularModel("mlp", weights, biases, d, 1)


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--samples", type=int, default=2048,
                   help="KernelSHAP coalition budget")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--warmup", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional JSON report path")
    return p.parse_args()


def main():
    args = parse_args()
    gen = RandomSource(args.seed).generator()
    model = random_surrogate(args.dim, gen)
    x = gen.normal(size=args.dim)
    net = build_explainer(args.dim, args.dim, rng=args.seed)
    kernelshap = ESTIMATORS["kernelshap"]

    def kernelshap_run():
        game = masked_game(model, x, class_index=0)
        return kernelshap(game, args.samples, RandomSource(args.seed, stream=1))

    report = benchmark_timing(
        {
            "amortized": lambda: amortized_inference(net, x),
            f"kernelshap_m{args.samples}": kernelshap_run,
        },
        repeats=args.repeats,
        warmup=args.warmup,
    )
    slow = report.median_for(f"kernelshap_m{args.samples}")
    fast = report.median_for("amortized")
    for label, median, p95 in zip(report.labels, report.median_s, report.p95_s):
        print(f"{label:<20} median {median * 1e3:10.3f} ms"
              f"   p95 {p95 * 1e3:10.3f} ms")
    print(f"{'speedup':<20} {slow / fast:10.1f}x")

    if args.out:
        payload = report.to_dict()
        payload["speedup"] = slow / fast
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
