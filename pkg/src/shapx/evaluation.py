"""Accuracy, faithfulness, convergence, and timing measurement.

Distances compare attributions against ground truth.  Insertion/deletion
curves track the model score as features are added to a baseline or removed
from the input in attribution order; the area under the normalized curve is
the faithfulness score.  Convergence probes sweep sample budgets against the
exact oracle, and the timing harness reports medians over repeated runs.
"""

from __future__ import annotations

import csv
import json
import os
import platform
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from shapx.core import Attribution, CapacityError, RandomSource
from shapx.exact import exact_shapley
from shapx.models import MaskingRule, TabularModel, masked_game
from shapx.stochastic import ESTIMATORS


# ---------------------------------------------------------------------------
# distances


@dataclass(frozen=True)
class DistanceReport:
    """l1/l2 distances to ground truth, with the per-instance breakdown.

    The headline numbers are means over instances; each instance satisfies
    l2 <= l1 <= sqrt(d) * l2.
    """

    l1: float
    l2: float
    per_instance_l1: tuple
    per_instance_l2: tuple

    def __post_init__(self):
        if len(self.per_instance_l1) != len(self.per_instance_l2):
            raise ValueError("per-instance breakdowns must align")
        if self.l1 < 0 or self.l2 < 0:
            raise ValueError("distances must be nonnegative")

    @property
    def n_instances(self) -> int:
        return len(self.per_instance_l1)

    def to_dict(self) -> dict:
        return {
            "l1": self.l1,
            "l2": self.l2,
            "per_instance_l1": list(self.per_instance_l1),
            "per_instance_l2": list(self.per_instance_l2),
        }


def attribution_distance(est, truth) -> DistanceReport:
    """Distance between estimates and ground truth, singly or in batches.

    Accepts a single Attribution pair or two equal-length sequences; the
    aggregate l1/l2 are means over instances.
    """
    est_list = [est] if isinstance(est, Attribution) else list(est)
    truth_list = [truth] if isinstance(truth, Attribution) else list(truth)
    if len(est_list) != len(truth_list):
        raise ValueError(f"{len(est_list)} estimates vs {len(truth_list)} references")
    if not est_list:
        raise ValueError("need at least one attribution pair")
    l1s, l2s = [], []
    for a, b in zip(est_list, truth_list):
        if a.phi.shape != b.phi.shape:
            raise ValueError(f"dimension mismatch: {a.phi.shape} vs {b.phi.shape}")
        delta = a.phi - b.phi
        l1s.append(float(np.abs(delta).sum()))
        l2s.append(float(np.sqrt((delta * delta).sum())))
    return DistanceReport(
        l1=float(np.mean(l1s)),
        l2=float(np.mean(l2s)),
        per_instance_l1=tuple(l1s),
        per_instance_l2=tuple(l2s),
    )


# ---------------------------------------------------------------------------
# insertion / deletion curves


@dataclass(frozen=True)
class CurveReport:
    """One insertion or deletion curve on the integer mask grid.

    ``fractions`` runs 0..1 in d+1 steps.  Normalized curves are affinely
    mapped so the endpoints are exactly 0 -> 1 (insertion) or 1 -> 0
    (deletion); intermediate points keep their relative positions.
    """

    fractions: np.ndarray
    scores: np.ndarray
    auc: float
    normalized: bool
    mode: str

    def __post_init__(self):
        object.__setattr__(self, "fractions", np.asarray(self.fractions, dtype=np.float64))
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=np.float64))
        if self.mode not in ("insertion", "deletion"):
            raise ValueError(f"mode must be insertion or deletion, got {self.mode!r}")
        if self.fractions.shape != self.scores.shape or self.fractions.ndim != 1:
            raise ValueError("fractions and scores must be matching vectors")
        if self.fractions[0] != 0.0 or self.fractions[-1] != 1.0:
            raise ValueError("fractions must span [0, 1]")
        if np.any(np.diff(self.fractions) <= 0):
            raise ValueError("fractions must be strictly increasing")
        if self.normalized:
            first, last = self.scores[0], self.scores[-1]
            expected = (0.0, 1.0) if self.mode == "insertion" else (1.0, 0.0)
            if (first, last) != expected:
                raise ValueError(
                    f"normalized {self.mode} curve must run {expected[0]} -> {expected[1]}, "
                    f"got {first} -> {last}"
                )

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "fractions": self.fractions.tolist(),
            "scores": self.scores.tolist(),
            "auc": self.auc,
            "normalized": self.normalized,
        }


def attribution_order(phi: np.ndarray) -> np.ndarray:
    """Feature indices in descending attribution order, ties by ascending index."""
    phi = np.asarray(phi, dtype=np.float64)
    return np.lexsort((np.arange(phi.size), -phi))


def normalize_curve(scores: np.ndarray, mode: str) -> np.ndarray:
    """Affine map sending (first, last) to (0, 1) for insertion, (1, 0) for deletion."""
    scores = np.asarray(scores, dtype=np.float64)
    first, last = scores[0], scores[-1]
    if first == last:
        raise ValueError("curve has zero dynamic range; cannot normalize endpoints")
    if mode == "insertion":
        return (scores - first) / (last - first)
    return (scores - last) / (first - last)


def insertion_deletion(
    model: TabularModel,
    x: np.ndarray,
    attribution,
    class_index: Optional[int] = None,
    rule: Optional[MaskingRule] = None,
    mode: str = "deletion",
    normalize: bool = True,
) -> CurveReport:
    """Score curve as features are removed from x (deletion) or added to the
    baseline (insertion), both in descending attribution order.

    The grid has one point per integer feature count (d+1 points); the AUC is
    the trapezoid rule over the fraction axis.
    """
    if mode not in ("insertion", "deletion"):
        raise ValueError(f"mode must be insertion or deletion, got {mode!r}")
    phi = attribution.phi if isinstance(attribution, Attribution) else np.asarray(attribution)
    x = np.asarray(x, dtype=np.float64)
    d = model.n_features
    if phi.shape != (d,):
        raise ValueError(f"attribution has shape {phi.shape}, model expects ({d},)")
    if x.shape != (d,):
        raise ValueError(f"x has shape {x.shape}, model expects ({d},)")
    rule = rule or MaskingRule()
    baseline = rule.baseline_for(model)
    if class_index is None:
        class_index = int(model.predict_class(x[None, :])[0])

    order = attribution_order(phi)
    # keep[k] marks the features still present after k steps of the sweep
    steps = np.arange(d + 1)
    rank = np.empty(d, dtype=np.int64)
    rank[order] = np.arange(d)
    if mode == "deletion":
        keep = rank[None, :] >= steps[:, None]  # step k: top-k features removed
    else:
        keep = rank[None, :] < steps[:, None]  # step k: top-k features inserted
    inputs = np.where(keep, x[None, :], baseline[None, :])
    scores = model.predict(inputs)[:, class_index]
    fractions = steps / d
    if normalize:
        scores = normalize_curve(scores, mode)
    auc = float(np.trapezoid(scores, fractions))
    return CurveReport(fractions, scores, auc, normalize, mode)


# ---------------------------------------------------------------------------
# convergence


@dataclass(frozen=True)
class ConvergenceTable:
    """Mean and std of l1/l2 error per sample budget, against exact Shapley."""

    estimator: str
    samples: tuple
    mean_l1: tuple
    std_l1: tuple
    mean_l2: tuple
    std_l2: tuple
    n_seeds: int

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "samples": list(self.samples),
            "mean_l1": list(self.mean_l1),
            "std_l1": list(self.std_l1),
            "mean_l2": list(self.mean_l2),
            "std_l2": list(self.std_l2),
            "n_seeds": self.n_seeds,
        }

    def rows(self):
        for k, m in enumerate(self.samples):
            yield {
                "samples": m,
                "mean_l1": self.mean_l1[k],
                "std_l1": self.std_l1[k],
                "mean_l2": self.mean_l2[k],
                "std_l2": self.std_l2[k],
            }


CONVERGENCE_LIMIT = 16  # exact reference must stay cheap


def convergence_probe(
    estimator: str,
    game,
    sample_grid: Sequence[int],
    n_seeds: int = 20,
    base_seed: int = 0,
    truth: Optional[Attribution] = None,
) -> ConvergenceTable:
    """Sweep sample budgets for one estimator, reporting error vs exact Shapley.

    Each (budget, seed) cell gets an independent child stream of ``base_seed``,
    so the table is reproducible and cells are uncorrelated.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; choose from {sorted(ESTIMATORS)}")
    if game.d > CONVERGENCE_LIMIT:
        raise CapacityError(f"convergence probe needs d <= {CONVERGENCE_LIMIT}, got {game.d}")
    grid = [int(m) for m in sample_grid]
    if not grid or any(m < 1 for m in grid):
        raise ValueError(f"sample grid must be positive, got {sample_grid}")
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    reference = truth if truth is not None else exact_shapley(game)
    run = ESTIMATORS[estimator]
    root = RandomSource(base_seed)
    mean_l1, std_l1, mean_l2, std_l2 = [], [], [], []
    for mi, m in enumerate(grid):
        l1s, l2s = [], []
        for si in range(n_seeds):
            rng = root.child(mi * n_seeds + si)
            att = run(game, m, rng)
            rep = attribution_distance(att, reference)
            l1s.append(rep.l1)
            l2s.append(rep.l2)
        mean_l1.append(float(np.mean(l1s)))
        std_l1.append(float(np.std(l1s)))
        mean_l2.append(float(np.mean(l2s)))
        std_l2.append(float(np.std(l2s)))
    return ConvergenceTable(
        estimator=estimator,
        samples=tuple(grid),
        mean_l1=tuple(mean_l1),
        std_l1=tuple(std_l1),
        mean_l2=tuple(mean_l2),
        std_l2=tuple(std_l2),
        n_seeds=n_seeds,
    )


# ---------------------------------------------------------------------------
# timing


@dataclass(frozen=True)
class TimingReport:
    """Median and p95 wall time per labelled workload, plus the host fingerprint."""

    labels: tuple
    median_s: tuple
    p95_s: tuple
    repeats: int
    warmup: int
    environment: dict

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "median_s": list(self.median_s),
            "p95_s": list(self.p95_s),
            "repeats": self.repeats,
            "warmup": self.warmup,
            "environment": dict(self.environment),
        }

    def median_for(self, label: str) -> float:
        return self.median_s[self.labels.index(label)]


def environment_fingerprint(workers: Optional[int] = None) -> dict:
    return {
        "machine": platform.machine(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": os.cpu_count(),
        "workers": workers if workers is not None else os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def benchmark_timing(
    workloads: Mapping[str, Callable[[], object]],
    repeats: int = 10,
    warmup: int = 3,
    workers: Optional[int] = None,
) -> TimingReport:
    """Time each zero-argument workload: >= 3 discarded warmups, median of
    >= 10 measured runs, p95 alongside."""
    if warmup < 3:
        raise ValueError(f"need >= 3 warmup runs, got {warmup}")
    if repeats < 10:
        raise ValueError(f"need >= 10 measured runs, got {repeats}")
    if not workloads:
        raise ValueError("need at least one workload")
    labels, medians, p95s = [], [], []
    for label, fn in workloads.items():
        for _ in range(warmup):
            fn()
        times = np.empty(repeats)
        for k in range(repeats):
            start = time.perf_counter()
            fn()
            times[k] = time.perf_counter() - start
        labels.append(label)
        medians.append(float(np.median(times)))
        p95s.append(float(np.percentile(times, 95)))
    return TimingReport(
        labels=tuple(labels),
        median_s=tuple(medians),
        p95_s=tuple(p95s),
        repeats=repeats,
        warmup=warmup,
        environment=environment_fingerprint(workers),
    )


# ---------------------------------------------------------------------------
# faithfulness baselines and serialization


def random_ordering_auc(
    model: TabularModel,
    x: np.ndarray,
    n_orderings: int,
    mode: str,
    class_index: Optional[int] = None,
    rule: Optional[MaskingRule] = None,
    seed: int = 0,
) -> np.ndarray:
    """AUCs of uniformly random feature orderings — the chance baseline that a
    faithful attribution should beat (insertion above, deletion below)."""
    gen = RandomSource(seed).generator()
    d = model.n_features
    aucs = np.empty(n_orderings)
    for k in range(n_orderings):
        fake_phi = gen.permutation(d).astype(np.float64)
        aucs[k] = insertion_deletion(
            model, x, fake_phi, class_index=class_index, rule=rule, mode=mode
        ).auc
    return aucs


def write_report_json(path, report) -> None:
    doc = report.to_dict() if hasattr(report, "to_dict") else dict(report)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_curve_csv(path, report: CurveReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fraction", "score"])
        for frac, score in zip(report.fractions, report.scores):
            writer.writerow([repr(float(frac)), repr(float(score))])


def write_convergence_csv(path, table: ConvergenceTable) -> None:
    fields = ["samples", "mean_l1", "std_l1", "mean_l2", "std_l2"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in table.rows():
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
