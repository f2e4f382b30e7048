import json

import pytest
from click.testing import CliRunner

from spellsearch.cli import main
from spellsearch.fixtures import fixture_bytes

CATALOG = """alpha analytics
beta billing
gamma guard
delta desk
"""


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def test_pipeline_end_to_end(runner, tmp_path):
    catalog = tmp_path / "catalog.txt"
    catalog.write_text(CATALOG)
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_bytes(fixture_bytes("github_fixture.jsonl"))

    # ingest -> canonical tsv
    canon = tmp_path / "canon.tsv"
    out = invoke(runner, [
        "ingest", "--input", str(corpus), "--format", "github-jsonl",
        "--output", str(canon),
    ])
    assert "parsed" in out.output
    assert canon.read_text().count("\n") > 100

    # stats with figures
    stats_file = tmp_path / "github.stats.json"
    figures = tmp_path / "figs"
    invoke(runner, [
        "stats", "--input", str(canon), "--dataset-id", "github-fixture",
        "--output", str(stats_file), "--figures", str(figures),
    ])
    assert (figures / "error_types.png").exists()
    assert (figures / "substitution_heatmap.png").exists()
    assert (figures / "position_histograms.png").exists()

    # fusion spec
    fusion = tmp_path / "fusion.json"
    invoke(runner, [
        "fuse",
        "--component", f"{stats_file}:0.75",
        "--component", f"{stats_file}:0.25",
        "--output", str(fusion),
    ])
    assert json.loads(fusion.read_text())["components"][0]["weight"] == 0.75

    # generate dataset (fusion strategy)
    dataset = tmp_path / "train.tsv"
    invoke(runner, [
        "--seed", "3", "gen", "--catalog", str(catalog),
        "--fusion", str(fusion), "--n", "6", "--output", str(dataset),
    ])
    lines = [l for l in dataset.read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 24

    # train a tiny model
    checkpoint = tmp_path / "model.ckpt"
    invoke(runner, [
        "--seed", "3", "train", "--dataset", str(dataset),
        "--output", str(checkpoint), "--epochs", "2", "--hidden-size", "8",
        "--dense-size", "12", "--seq-len", "16", "--batch-size", "16",
    ])
    assert checkpoint.stat().st_size > 1000

    # index the catalog
    index_file = tmp_path / "catalog.index"
    invoke(runner, [
        "index", "--checkpoint", str(checkpoint), "--catalog", str(catalog),
        "--output", str(index_file),
    ])

    # validation file: the catalog itself (self-retrieval -> accuracy 1)
    validation = tmp_path / "val.tsv"
    validation.write_text(
        "".join(f"{name}\t{i}\n" for i, name in enumerate(CATALOG.splitlines()))
    )
    out = invoke(runner, [
        "eval", "--checkpoint", str(checkpoint), "--index", str(index_file),
        "--validation", str(validation),
    ])
    assert "accuracy: 1.0000" in out.output


def test_gen_determinism_across_runs(runner, tmp_path):
    catalog = tmp_path / "catalog.txt"
    catalog.write_text(CATALOG)
    outputs = []
    for name in ("a.tsv", "b.tsv"):
        path = tmp_path / name
        invoke(runner, [
            "--seed", "11", "gen", "--catalog", str(catalog),
            "--stats", "uniform", "--n", "5", "--output", str(path),
        ])
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_config_file_defaults(runner, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"epochs": 1, "hidden_size": 8, "dense_size": 8,
                                  "max_seq_len": 12, "batch_size": 8}))
    catalog = tmp_path / "catalog.txt"
    catalog.write_text(CATALOG)
    dataset = tmp_path / "train.tsv"
    invoke(runner, [
        "gen", "--catalog", str(catalog), "--stats", "qwerty", "--n", "3",
        "--output", str(dataset),
    ])
    checkpoint = tmp_path / "model.ckpt"
    out = invoke(runner, [
        "--config", str(config), "train", "--dataset", str(dataset),
        "--output", str(checkpoint),
    ])
    assert "trained 1 epochs" in out.output


def test_matrix_and_sweep_tiny_scale(runner, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "epochs": 1, "hidden_size": 8, "dense_size": 10,
        "max_seq_len": 20, "batch_size": 32,
    }))
    out_dir = tmp_path / "matrix"
    result = invoke(runner, [
        "--config", str(config), "matrix", "--demo", "16", "--n", "2",
        "--seeds", "0", "--val-n", "1", "--out", str(out_dir),
    ])
    report = (out_dir / "report.tsv").read_text()
    assert "random" in report and "dataset fusion" in report
    assert "basic spellchecker" in report
    assert (out_dir / "accuracy.png").exists()
    assert (out_dir / "timings.tsv").exists()
    assert "accuracy%" in result.output

    sweep_dir = tmp_path / "sweep"
    invoke(runner, [
        "--config", str(config), "sweep", "--demo", "16",
        "--n-values", "1,2", "--seeds", "0", "--val-n", "1",
        "--out", str(sweep_dir),
    ])
    sweep_tsv = (sweep_dir / "sweep.tsv").read_text()
    assert sweep_tsv.startswith("n_per_class")
    assert (sweep_dir / "sweep.png").exists()
