"""Command-line front door: corpus ingestion through serving.

Subcommands mirror the pipeline: ingest -> stats -> (fuse) -> gen -> train
-> index -> eval/matrix/sweep -> serve/bench.  Report-producing commands
write TSV files plus rendered figures into the output directory.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path

import click
import numpy as np

from . import baseline as baseline_mod
from . import evaluation as ev
from . import fixtures, plots
from .corpus import classify_pairs, parse_corpus
from .index import build_index, load_index, save_index
from .model import ModelConfig, load_checkpoint, save_checkpoint, train
from .service import CorrectionService, ServiceConfig, make_server, measure_latency, serve
from .stats import (
    FusionSpec,
    StatsModel,
    build_stats,
    fuse,
    load_stats,
    qwerty_stats,
    save_stats,
    stats_digest,
    uniform_stats,
)
from .syngen import GenerationConfig, build_training_set, load_dataset, save_dataset

PORT_ENV = "SPELLSEARCH_PORT"


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


@click.group()
@click.option("--seed", type=int, default=0, show_default=True,
              help="Master seed for generation and training.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON file with default option values.")
@click.pass_context
def main(ctx, seed, config_path):
    """Typo-tolerant catalog search correction."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed
    ctx.obj["config"] = _load_config_file(config_path)


def _cfg(ctx, key, fallback):
    return ctx.obj["config"].get(key, fallback)


def _read_catalog(catalog_path: str | None, demo: int | None) -> list[str]:
    if catalog_path:
        lines = Path(catalog_path).read_text(encoding="utf-8").splitlines()
        return [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]
    return fixtures.demo_catalog(demo or 200)


def _load_stats_arg(spec: str) -> StatsModel:
    if spec == "uniform":
        return uniform_stats()
    if spec == "qwerty":
        return qwerty_stats()
    return load_stats(Path(spec).read_bytes())


# ---------------------------------------------------------------------------


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="tsv", show_default=True,
              type=click.Choice(["tsv", "github-jsonl", "twitter-tsv"]))
@click.option("--output", "output_path", required=True, type=click.Path())
def ingest(input_path, fmt, output_path):
    """Parse a raw corpus into the canonical wrong/correct/weight TSV."""
    result = parse_corpus(Path(input_path).read_bytes(), fmt)
    with open(output_path, "w", encoding="utf-8") as f:
        f.write("# canonical typo corpus: wrong<TAB>correct<TAB>weight\n")
        for p in result.pairs:
            f.write(f"{p.wrong}\t{p.correct}\t{p.weight}\n")
    click.echo(f"parsed {len(result.pairs)} pairs, skipped {result.skipped}")


@main.command("stats")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="tsv", show_default=True,
              type=click.Choice(["tsv", "github-jsonl", "twitter-tsv"]))
@click.option("--dataset-id", required=True)
@click.option("--bins", type=int, default=10, show_default=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--figures", "figures_dir", type=click.Path(), default=None,
              help="Also render distribution figures into this directory.")
def stats_cmd(input_path, fmt, dataset_id, bins, output_path, figures_dir):
    """Build typo statistics from a corpus and write the stats file."""
    result = parse_corpus(Path(input_path).read_bytes(), fmt)
    events = classify_pairs(result.pairs, source=dataset_id)
    model = build_stats(events, bins=bins)
    Path(output_path).write_bytes(save_stats(model))
    click.echo(
        f"{len(result.pairs)} pairs -> {len(events)} single-edit events "
        f"(digest {stats_digest(model)[:12]})"
    )
    if figures_dir:
        out = Path(figures_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, fn in (
            ("error_types.png", plots.error_type_pie),
            ("substitution_heatmap.png", plots.substitution_heatmap),
            ("position_histograms.png", plots.position_histograms),
        ):
            click.echo(f"wrote {fn(model, out / name)}")


@main.command("fuse")
@click.option("--component", "components", multiple=True, required=True,
              help="stats_file:weight, repeatable; weights must sum to 1.")
@click.option("--output", "output_path", required=True, type=click.Path())
def fuse_cmd(components, output_path):
    """Write a fusion spec combining several stats files."""
    parsed = []
    for comp in components:
        path, _, weight = comp.rpartition(":")
        parsed.append({"stats": path, "weight": float(weight)})
    # validate now so a bad spec fails here, not at generation time
    FusionSpec([
        (load_stats(Path(c["stats"]).read_bytes()), c["weight"]) for c in parsed
    ])
    Path(output_path).write_text(
        json.dumps({"format": "spellsearch-fusion", "version": 1,
                    "components": parsed}, indent=1),
        encoding="utf-8",
    )
    click.echo(f"wrote fusion spec with {len(parsed)} components")


def _selector_from_fusion_file(path: str):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    comps = [
        (load_stats(Path(c["stats"]).read_bytes()), float(c["weight"]))
        for c in doc["components"]
    ]
    return fuse(FusionSpec(comps))


@main.command()
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
@click.option("--demo", type=int, default=None, help="Use the built-in demo catalog.")
@click.option("--stats", "stats_spec", default="uniform", show_default=True,
              help="'uniform', 'qwerty', or a stats file path.")
@click.option("--fusion", "fusion_path", type=click.Path(exists=True), default=None,
              help="Fusion spec file (overrides --stats).")
@click.option("--n", "n_per_class", type=int, default=20, show_default=True)
@click.option("--keep-duplicate/--no-keep-duplicate", default=True, show_default=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@click.pass_context
def gen(ctx, catalog_path, demo, stats_spec, fusion_path, n_per_class,
        keep_duplicate, output_path):
    """Generate a synthetic training dataset over the catalog."""
    catalog = _read_catalog(catalog_path, demo)
    if fusion_path:
        source = _selector_from_fusion_file(fusion_path)
        strategy, digest = f"fusion<{Path(fusion_path).name}>", ""
    else:
        source = _load_stats_arg(stats_spec)
        strategy = stats_spec if stats_spec in ("uniform", "qwerty") else f"real<{source.dataset_id}>"
        digest = stats_digest(source)
    config = GenerationConfig(
        samples_per_class=n_per_class,
        keep_duplicate=keep_duplicate,
        rng_seed=ctx.obj["seed"],
        strategy=strategy,
    )
    samples = build_training_set(catalog, config, source)
    with open(output_path, "w", encoding="utf-8") as f:
        save_dataset(samples, config, digest, f)
    click.echo(f"wrote {len(samples)} samples for {len(catalog)} classes")


@main.command("train")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--epochs", type=int, default=None)
@click.option("--hidden-size", type=int, default=None)
@click.option("--dense-size", type=int, default=None)
@click.option("--seq-len", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.pass_context
def train_cmd(ctx, dataset_path, output_path, epochs, hidden_size, dense_size,
              seq_len, batch_size, lr):
    """Train the recurrent classifier on a generated dataset."""
    with open(dataset_path, "r", encoding="utf-8") as f:
        samples, _ = load_dataset(f)
    num_classes = max(s.label for s in samples) + 1
    config = ModelConfig(
        num_classes=num_classes,
        max_seq_len=seq_len or _cfg(ctx, "max_seq_len", 32),
        hidden_size=hidden_size or _cfg(ctx, "hidden_size", 64),
        dense_size=dense_size or _cfg(ctx, "dense_size", 128),
        batch_size=batch_size or _cfg(ctx, "batch_size", 128),
        learning_rate=lr or _cfg(ctx, "learning_rate", 1e-3),
        epochs=epochs or _cfg(ctx, "epochs", 20),
        init_seed=ctx.obj["seed"],
    )
    start = time.perf_counter()
    result = train(
        samples, config,
        log=lambda e, l: click.echo(f"epoch {e}: loss {l:.4f}"),
    )
    Path(output_path).write_bytes(
        save_checkpoint(result.params, config, result.loss_trace)
    )
    click.echo(
        f"trained {config.epochs} epochs on {len(samples)} samples "
        f"in {time.perf_counter() - start:.1f}s"
    )


@main.command("index")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
@click.option("--demo", type=int, default=None)
@click.option("--output", "output_path", required=True, type=click.Path())
def index_cmd(checkpoint_path, catalog_path, demo, output_path):
    """Embed the catalog under a checkpoint and write the index file."""
    bundle = load_checkpoint(Path(checkpoint_path).read_bytes())
    catalog = _read_catalog(catalog_path, demo)
    idx = build_index(
        bundle.params, bundle.config, catalog, checkpoint_digest=bundle.digest
    )
    Path(output_path).write_bytes(save_index(idx))
    click.echo(f"indexed {len(idx)} entries ({idx.matrix.shape[1]} dims)")


@main.command("eval")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--validation", "validation_path", required=True, type=click.Path(exists=True))
def eval_cmd(checkpoint_path, index_path, validation_path):
    """Score top-1 accuracy of a checkpoint+index on a validation TSV."""
    bundle = load_checkpoint(Path(checkpoint_path).read_bytes())
    idx = load_index(Path(index_path).read_bytes(),
                     expect_checkpoint_digest=bundle.digest)
    with open(validation_path, "r", encoding="utf-8") as f:
        validation = ev.load_validation(f)
    acc = ev.evaluate(idx, bundle.params, bundle.config, validation)
    click.echo(f"accuracy: {acc:.4f} on {len(validation.items)} queries")


def _fixture_stats(dataset_id: str) -> StatsModel:
    raw, fmt = fixtures.fixture_corpus(dataset_id)
    pairs = parse_corpus(raw, fmt).pairs
    return build_stats(classify_pairs(pairs, source=dataset_id))


def _desk_model_config(ctx, epochs_default=12) -> ModelConfig:
    # Desk experiment runs use a deliberately small network: at this catalog
    # size a larger one saturates the task and strategy differences vanish.
    return ModelConfig(
        num_classes=1,  # overwritten per run
        max_seq_len=_cfg(ctx, "max_seq_len", 32),
        hidden_size=_cfg(ctx, "hidden_size", 48),
        dense_size=_cfg(ctx, "dense_size", 96),
        batch_size=_cfg(ctx, "batch_size", 128),
        learning_rate=_cfg(ctx, "learning_rate", 1e-3),
        epochs=_cfg(ctx, "epochs", epochs_default),
    )


@main.command()
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
@click.option("--demo", type=int, default=200, show_default=True)
@click.option("--n", "n_per_class", type=int, default=20, show_default=True)
@click.option("--seeds", default="0,1,2", show_default=True)
@click.option("--val-n", type=int, default=6, show_default=True)
@click.option("--val-seed", type=int, default=9090, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def matrix(ctx, catalog_path, demo, n_per_class, seeds, val_n, val_seed, out_dir):
    """Run the strategy comparison matrix and render the report."""
    catalog = _read_catalog(catalog_path, demo)
    seed_list = [int(s) for s in seeds.split(",")]
    github = _fixture_stats("github-fixture")
    twitter = _fixture_stats("twitter-fixture")
    validation = ev.make_validation(catalog, github, val_n, val_seed)

    specs = [
        ev.RowSpec("random", uniform_stats()),
        ev.RowSpec("qwerty-distance", qwerty_stats()),
        ev.RowSpec("real<github-fixture>", github),
        ev.RowSpec("real<twitter-fixture>", twitter),
        ev.RowSpec("real<github-fixture> w/o duplicates", github, keep_duplicate=False),
        ev.RowSpec(
            "dataset fusion",
            fuse(FusionSpec([(github, 0.7), (twitter, 0.3)])),
        ),
    ]
    report = ev.run_matrix(
        catalog, specs, validation, _desk_model_config(ctx),
        n_per_class=n_per_class, seeds=seed_list, log=click.echo,
    )

    # baselines through the same scoring interface
    english = baseline_mod.load_dictionary(
        fixtures.fixture_bytes("english_words.tsv").decode("utf-8").splitlines()
    )
    for strategy, dictionary in (
        ("basic spellchecker", english),
        ("specialized spellchecker",
         baseline_mod.enhance_with_catalog(english, catalog)),
    ):
        corrector = baseline_mod.CachedCorrector(dictionary)
        start = time.perf_counter()
        acc = ev.evaluate_predictor(
            ev.baseline_predictor(corrector, catalog), validation
        )
        report.rows.append(
            ev.ExperimentRow(
                strategy=strategy, dataset_id=dictionary.source,
                keep_duplicate=True, n_per_class=0, seed=0,
                accuracy=acc, wall_clock=time.perf_counter() - start,
            )
        )
        click.echo(f"{strategy}: {acc:.4f}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.tsv").write_text(ev.report_to_tsv(report), encoding="utf-8")
    (out / "timings.tsv").write_text(ev.timings_to_tsv(report), encoding="utf-8")
    plots.accuracy_bars(report, out / "accuracy.png")
    click.echo(ev.summary_table(report))
    for warning in ev.soft_ordering_warnings(report):
        click.echo(f"warning: {warning}")
    click.echo(f"report in {out}")


@main.command()
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
@click.option("--demo", type=int, default=200, show_default=True)
@click.option("--n-values", default="4,8,16,32", show_default=True)
@click.option("--seeds", default="0,1,2", show_default=True)
@click.option("--val-n", type=int, default=6, show_default=True)
@click.option("--val-seed", type=int, default=9090, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def sweep(ctx, catalog_path, demo, n_values, seeds, val_n, val_seed, out_dir):
    """Sweep synthetic samples per class and render the saturation curve."""
    catalog = _read_catalog(catalog_path, demo)
    github = _fixture_stats("github-fixture")
    validation = ev.make_validation(catalog, github, val_n, val_seed)
    points = ev.sample_size_sweep(
        catalog, github,
        [int(x) for x in n_values.split(",")],
        validation, _desk_model_config(ctx),
        seeds=[int(s) for s in seeds.split(",")], log=click.echo,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["n_per_class\tmean_accuracy\tper_seed"]
    for p in points:
        per_seed = ",".join(repr(a) for a in p.per_seed)
        lines.append(f"{p.n_per_class}\t{p.mean_accuracy!r}\t{per_seed}")
    (out / "sweep.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    plots.sweep_curve(points, out / "sweep.png")
    for p in points:
        click.echo(f"n={p.n_per_class}: {p.mean_accuracy:.4f}")
    click.echo(f"sweep in {out}")


@main.command("serve")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8750, show_default=True,
              help=f"Overridden by ${PORT_ENV} when set.")
@click.option("--k", "default_k", type=int, default=5, show_default=True)
@click.option("--static-dir", type=click.Path(exists=True), default=None,
              help="Optionally serve a built web UI from this directory.")
def serve_cmd(checkpoint_path, index_path, host, port, default_k, static_dir):
    """Run the correction API."""
    port = int(os.environ.get(PORT_ENV, port))
    serve(ServiceConfig(
        checkpoint_path=checkpoint_path,
        index_path=index_path,
        host=host,
        port=port,
        default_k=default_k,
        static_dir=static_dir,
    ))


@main.command()
@click.option("--catalog-size", type=int, default=1000, show_default=True)
@click.option("--queries", "n_queries", type=int, default=10000, show_default=True)
@click.option("--concurrency", type=int, default=8, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def bench(ctx, catalog_size, n_queries, concurrency, out_dir):
    """Measure end-to-end correction latency against a live server."""
    import tempfile

    from .model import init_params
    from .syngen import generate_samples

    catalog = fixtures.demo_catalog(catalog_size)
    config = ModelConfig(num_classes=catalog_size, init_seed=ctx.obj["seed"])
    params = init_params(config)
    ck_bytes = save_checkpoint(params, config)
    bundle = load_checkpoint(ck_bytes)
    idx = build_index(params, config, catalog, checkpoint_digest=bundle.digest)

    with tempfile.TemporaryDirectory() as tmp:
        ck = Path(tmp) / "model.ckpt"
        ix = Path(tmp) / "catalog.index"
        ck.write_bytes(ck_bytes)
        ix.write_bytes(save_index(idx))
        service = CorrectionService(ServiceConfig(str(ck), str(ix), port=0))
        server = make_server(service, port=0)
        import threading

        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        host, port = server.server_address[:2]

        rng = np.random.Generator(np.random.PCG64(ctx.obj["seed"]))
        gen_config = GenerationConfig(samples_per_class=1, rng_seed=ctx.obj["seed"])
        uni = uniform_stats()
        queries = []
        names = list(idx.names)
        while len(queries) < n_queries:
            name = names[int(rng.integers(len(names)))]
            if rng.random() < 0.5:
                queries.append(name)
            else:
                queries.append(
                    generate_samples(name, gen_config, uni, rng=rng)[0].text
                )
        stats_out = measure_latency(host, port, queries, concurrency)
        server.shutdown()
        server.server_close()

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    latencies = stats_out.pop("latencies_ms")
    (out / "latency.tsv").write_text(
        "metric\tvalue\n"
        + "".join(f"{k}\t{v}\n" for k, v in stats_out.items()),
        encoding="utf-8",
    )
    plots.latency_histogram(latencies, out / "latency.png")
    click.echo(json.dumps(stats_out, indent=1))


if __name__ == "__main__":
    main()
