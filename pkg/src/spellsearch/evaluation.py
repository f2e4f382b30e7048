"""Accuracy evaluation: experiment matrix, fusion grid search, sample sweeps.

Every experiment row follows the same recipe: build statistics, generate a
synthetic training set, train, build the embedding index, score top-1
accuracy on a shared held-out validation set.  Reports split into a
deterministic part (strategies, seeds, accuracies) and a timing sidecar, so
re-runs under fixed seeds are byte-identical where it matters.
"""

from __future__ import annotations

import math
import platform
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, TextIO, Union

import numpy as np

from .baseline import CachedCorrector
from .corpus import Alphabet, DEFAULT_ALPHABET
from .index import EmbeddingIndex, build_index
from .model import ModelConfig, ModelParams, embed_batch, train
from .stats import FusionSelector, FusionSpec, StatsModel, fuse
from .syngen import GenerationConfig, build_training_set, validate_catalog


class EvaluationError(Exception):
    pass


@dataclass
class ValidationSet:
    items: list[tuple[str, int]]
    provenance: str = "manual-file"

    def __post_init__(self):
        if not self.items:
            raise EvaluationError("validation set is empty")

    def queries(self) -> list[str]:
        return [q for q, _ in self.items]

    def labels(self) -> np.ndarray:
        return np.array([c for _, c in self.items], dtype=np.int64)


def make_validation(
    catalog: Sequence[str],
    stats: Union[StatsModel, FusionSelector],
    n_per_class: int,
    seed: int,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> ValidationSet:
    """Held-out synthetic typos; keep the seed disjoint from every training seed."""
    config = GenerationConfig(
        samples_per_class=n_per_class, rng_seed=seed, strategy="validation"
    )
    samples = build_training_set(catalog, config, stats, alphabet)
    return ValidationSet(
        items=[(s.text, s.label) for s in samples],
        provenance=f"held-out-synthetic<{seed}>",
    )


def save_validation(validation: ValidationSet, stream: TextIO) -> None:
    stream.write(f"# provenance: {validation.provenance}\n")
    for query, label in validation.items:
        stream.write(f"{query}\t{label}\n")


def load_validation(stream: TextIO) -> ValidationSet:
    items: list[tuple[str, int]] = []
    provenance = "manual-file"
    for line in stream:
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            if "provenance:" in line:
                provenance = line.split("provenance:", 1)[1].strip()
            continue
        query, label = line.split("\t")[:2]
        items.append((query, int(label)))
    return ValidationSet(items=items, provenance=provenance)


# ---------------------------------------------------------------------------
# Scoring

def evaluate(
    index: EmbeddingIndex,
    params: ModelParams,
    config: ModelConfig,
    validation: ValidationSet,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> float:
    """Fraction of queries whose top-1 match is the true class.

    Batched equivalent of running ``index.query`` per item with k=1 (ties
    break toward the lower class index in both paths).
    """
    labels = validation.labels()
    if labels.max() >= len(index):
        raise EvaluationError("validation labels exceed the catalog size")
    emb = embed_batch(params, validation.queries(), config, alphabet)
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    np.divide(emb, norms, out=emb, where=norms > 0)
    sims = emb @ index.matrix.T
    predicted = sims.argmax(axis=1)  # first maximum = lowest class index
    return float((predicted == labels).mean())


def evaluate_predictor(
    predict: Callable[[str], Optional[int]], validation: ValidationSet
) -> float:
    """Score any query->class predictor on the same divisor (|validation|)."""
    hits = sum(
        1 for query, label in validation.items if predict(query) == label
    )
    return hits / len(validation.items)


def baseline_predictor(
    corrector: CachedCorrector,
    catalog: Sequence[str],
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> Callable[[str], Optional[int]]:
    """Spellcheck the query, then look the result up as an exact catalog name."""
    canonical = validate_catalog(catalog, alphabet)
    class_of = {name: i for i, name in enumerate(canonical)}

    def predict(query: str) -> Optional[int]:
        return class_of.get(corrector.correct(query, alphabet))

    return predict


# ---------------------------------------------------------------------------
# Experiment matrix

@dataclass
class RowSpec:
    strategy: str
    stats: Union[StatsModel, FusionSelector]
    keep_duplicate: bool = True


@dataclass
class ExperimentRow:
    strategy: str
    dataset_id: str
    keep_duplicate: bool
    n_per_class: int
    seed: int
    accuracy: Optional[float]
    wall_clock: float
    error: str = ""


@dataclass
class ExperimentReport:
    rows: list[ExperimentRow]
    environment: dict = field(default_factory=dict)


def environment_info() -> dict:
    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
    }


def _run_one(
    catalog: Sequence[str],
    spec: RowSpec,
    seed: int,
    n_per_class: int,
    model_config: ModelConfig,
    validation: ValidationSet,
    alphabet: Alphabet,
) -> float:
    gen = GenerationConfig(
        samples_per_class=n_per_class,
        keep_duplicate=spec.keep_duplicate,
        rng_seed=seed,
        strategy=spec.strategy,
    )
    dataset = build_training_set(catalog, gen, spec.stats, alphabet)
    config = ModelConfig(
        **{
            **vars(model_config),
            "num_classes": len(catalog),
            "init_seed": seed,
        }
    )
    result = train(dataset, config, alphabet)
    idx = build_index(result.params, config, catalog, alphabet=alphabet)
    return evaluate(idx, result.params, config, validation, alphabet)


def run_matrix(
    catalog: Sequence[str],
    specs: Sequence[RowSpec],
    validation: ValidationSet,
    model_config: ModelConfig,
    n_per_class: int = 20,
    seeds: Sequence[int] = (0, 1, 2),
    alphabet: Alphabet = DEFAULT_ALPHABET,
    log: Optional[Callable[[str], None]] = None,
) -> ExperimentReport:
    """Train/evaluate every (strategy, seed) cell; failures don't stop the run."""
    rows: list[ExperimentRow] = []
    for spec in specs:
        dataset_id = (
            spec.stats.strategy_id
            if isinstance(spec.stats, FusionSelector)
            else spec.stats.dataset_id
        )
        for seed in seeds:
            start = time.perf_counter()
            try:
                acc = _run_one(
                    catalog, spec, seed, n_per_class, model_config,
                    validation, alphabet,
                )
                error = ""
            except Exception as exc:  # row-level isolation
                acc, error = None, f"{type(exc).__name__}: {exc}"
            elapsed = time.perf_counter() - start
            rows.append(
                ExperimentRow(
                    strategy=spec.strategy,
                    dataset_id=dataset_id,
                    keep_duplicate=spec.keep_duplicate,
                    n_per_class=n_per_class,
                    seed=seed,
                    accuracy=acc,
                    wall_clock=elapsed,
                    error=error,
                )
            )
            if log is not None:
                shown = "failed" if acc is None else f"{acc:.4f}"
                log(f"{spec.strategy} seed={seed}: {shown} ({elapsed:.1f}s)")
    return ExperimentReport(rows=rows, environment=environment_info())


def mean_accuracy(report: ExperimentReport, strategy: str) -> float:
    accs = [
        r.accuracy for r in report.rows
        if r.strategy == strategy and r.accuracy is not None
    ]
    if not accs:
        raise EvaluationError(f"no successful rows for strategy {strategy!r}")
    return float(np.mean(accs))


def soft_ordering_warnings(report: ExperimentReport) -> list[str]:
    """Warning-level checks on expected orderings (duplicates kept >= dropped)."""
    warnings = []
    by_key: dict[tuple[str, bool], list[float]] = {}
    for r in report.rows:
        if r.accuracy is not None:
            by_key.setdefault((r.dataset_id, r.keep_duplicate), []).append(r.accuracy)
    for (dataset_id, keep), accs in sorted(by_key.items()):
        if keep:
            dropped = by_key.get((dataset_id, False))
            if dropped and np.mean(accs) < np.mean(dropped):
                warnings.append(
                    f"{dataset_id}: dropping duplicates scored higher "
                    f"({np.mean(dropped):.4f} > {np.mean(accs):.4f}); "
                    "desk-scale variance can invert this ordering"
                )
    return warnings


# ---------------------------------------------------------------------------
# Fusion grid search

def simplex_grid(n_datasets: int, step: float) -> list[tuple[float, ...]]:
    """All weight vectors on the simplex at the given step, lexicographic."""
    m = round(1.0 / step)
    if abs(m * step - 1.0) > 1e-9 or m < 1:
        raise EvaluationError(f"grid step {step} does not divide 1")

    points: list[tuple[float, ...]] = []

    def rec(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 1:
            points.append(tuple((k * step) for k in prefix + [remaining]))
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], m, n_datasets)
    return points


def fusion_grid_search(
    catalog: Sequence[str],
    stats_models: Sequence[StatsModel],
    step: float,
    validation: ValidationSet,
    model_config: ModelConfig,
    n_per_class: int = 20,
    seeds: Sequence[int] = (0,),
    budget: int = 256,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    log: Optional[Callable[[str], None]] = None,
) -> tuple[dict[str, float], list[tuple[tuple[float, ...], float]]]:
    """Evaluate every mixture on the simplex grid; argmax ties go to the
    first point in enumeration order."""
    if len(stats_models) < 2:
        raise EvaluationError("fusion grid search needs at least 2 datasets")
    points = simplex_grid(len(stats_models), step)
    if len(points) > budget:
        raise EvaluationError(
            f"grid step {step} yields {len(points)} cells, over budget {budget}"
        )
    surface: list[tuple[tuple[float, ...], float]] = []
    best_point, best_acc = None, -math.inf
    for point in points:
        selector = fuse(
            FusionSpec(list(zip(stats_models, point)))
        )
        spec = RowSpec(strategy=f"fusion<{','.join(f'{w:g}' for w in point)}>",
                       stats=selector)
        report = run_matrix(
            catalog, [spec], validation, model_config,
            n_per_class=n_per_class, seeds=seeds, alphabet=alphabet, log=log,
        )
        acc = mean_accuracy(report, spec.strategy)
        surface.append((point, acc))
        if acc > best_acc:
            best_point, best_acc = point, acc
    best = {
        m.dataset_id: w for m, w in zip(stats_models, best_point)
    }
    return best, surface


# ---------------------------------------------------------------------------
# Sample-size sweep

@dataclass
class SweepPoint:
    n_per_class: int
    mean_accuracy: float
    per_seed: list[float]


def sample_size_sweep(
    catalog: Sequence[str],
    stats: Union[StatsModel, FusionSelector],
    n_values: Sequence[int],
    validation: ValidationSet,
    model_config: ModelConfig,
    seeds: Sequence[int] = (0, 1, 2),
    alphabet: Alphabet = DEFAULT_ALPHABET,
    log: Optional[Callable[[str], None]] = None,
    equalize_steps: bool = True,
) -> list[SweepPoint]:
    """Accuracy as a function of synthetic samples per class.

    With ``equalize_steps`` (default) the epoch count scales inversely with
    N so every cell gets the same total optimizer work; otherwise small-N
    cells see fewer gradient steps and data-efficiency is confounded with
    undertraining.  ``model_config.epochs`` applies to the largest N.
    """
    if not n_values:
        raise EvaluationError("no sample counts given")
    if any(n < 1 for n in n_values):
        raise EvaluationError("sample counts must be >= 1")
    if list(n_values) != sorted(n_values):
        raise EvaluationError("sample counts must be ascending")
    points = []
    for n in n_values:
        spec = RowSpec(strategy=f"n={n}", stats=stats)
        config = model_config
        if equalize_steps:
            scaled = max(1, round(model_config.epochs * max(n_values) / n))
            config = ModelConfig(**{**vars(model_config), "epochs": scaled})
        report = run_matrix(
            catalog, [spec], validation, config,
            n_per_class=n, seeds=seeds, alphabet=alphabet, log=log,
        )
        accs = [r.accuracy for r in report.rows if r.accuracy is not None]
        if not accs:
            raise EvaluationError(f"all seeds failed at n={n}")
        points.append(
            SweepPoint(
                n_per_class=n,
                mean_accuracy=float(np.mean(accs)),
                per_seed=accs,
            )
        )
    return points


# ---------------------------------------------------------------------------
# Report files

def report_to_tsv(report: ExperimentReport) -> str:
    """Deterministic report: no wall-clock or environment columns."""
    lines = ["strategy\tdataset\tkeep_duplicate\tn_per_class\tseed\taccuracy\terror"]
    for r in report.rows:
        acc = "" if r.accuracy is None else repr(r.accuracy)
        lines.append(
            f"{r.strategy}\t{r.dataset_id}\t{int(r.keep_duplicate)}"
            f"\t{r.n_per_class}\t{r.seed}\t{acc}\t{r.error}"
        )
    return "\n".join(lines) + "\n"


def timings_to_tsv(report: ExperimentReport) -> str:
    """Wall-clock sidecar; intentionally separate so reports stay reproducible."""
    lines = [f"# environment: {report.environment}"]
    lines.append("strategy\tseed\twall_clock_s")
    for r in report.rows:
        lines.append(f"{r.strategy}\t{r.seed}\t{r.wall_clock:.3f}")
    return "\n".join(lines) + "\n"


def summary_table(report: ExperimentReport) -> str:
    """Human-readable accuracy summary, one line per strategy."""
    by_strategy: dict[str, list[float]] = {}
    order: list[str] = []
    for r in report.rows:
        if r.strategy not in by_strategy:
            order.append(r.strategy)
        if r.accuracy is not None:
            by_strategy.setdefault(r.strategy, []).append(r.accuracy)
    width = max(len(s) for s in order)
    lines = [f"{'strategy'.ljust(width)}  accuracy%  seeds"]
    for s in order:
        accs = by_strategy.get(s, [])
        if accs:
            lines.append(
                f"{s.ljust(width)}  {100 * np.mean(accs):8.2f}  {len(accs)}"
            )
        else:
            lines.append(f"{s.ljust(width)}  {'failed':>8}  0")
    return "\n".join(lines)
