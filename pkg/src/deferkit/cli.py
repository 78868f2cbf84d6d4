"""Command-line entry point: fixtures, metrics, guard-rail filtering,
classifier training, deferral simulation, and serving the review console.

The metrics command writes one JSON run report plus delimited reliability
and ARC tables next to it, and (on request) renders the matching matplotlib
figures.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import deferral, fixtures, guardrail, hidden, report, service
from .calibration import CalibrationConfig, DEFAULT_GAMMA
from .core import load_dataset, save_dataset
from .errors import DeferkitError


def _load_config(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@click.group()
def main():
    """Selective-prediction toolkit: calibration, deferral, guarded guidance."""


@main.command("fixtures")
@click.option("--n", default=1000, show_default=True, help="Number of records.")
@click.option("--imbalance", default=0.95, show_default=True,
              help="Fraction of negative labels.")
@click.option("--correlation", default=0.53, show_default=True,
              help="Target correlation between the two prediction sources.")
@click.option("--profile", default="default", show_default=True,
              type=click.Choice(fixtures.PROFILES))
@click.option("--embedding-dim", default=8, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_fixtures(n, imbalance, correlation, profile, embedding_dim, seed, out):
    """Generate a synthetic dataset file."""
    manifest = fixtures.generate_fixture(
        n, imbalance=imbalance, correlation=correlation,
        profile=profile, seed=seed, embedding_dim=embedding_dim,
    )
    save_dataset(manifest, out)
    positives = sum(r.label for r in manifest.records)
    click.echo(f"wrote {len(manifest)} records to {out} "
               f"(positives={positives}, negatives={len(manifest) - positives})")


@main.command("metrics")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", type=click.Path(exists=True, dir_okay=False))
@click.option("--gamma", type=float, default=None, help="Imbalance blend weight.")
@click.option("--alpha", type=float, default=None, help="Fixed blend weight.")
@click.option("--fit-alpha", is_flag=True, help="Fit the blend weight by grid search.")
@click.option("--embedding-dim", default=8, show_default=True)
@click.option("--figures", is_flag=True, help="Render reliability/ARC figures too.")
@click.option("--out", required=True, type=click.Path(file_okay=False))
def cmd_metrics(dataset, config, gamma, alpha, fit_alpha, embedding_dim, figures, out):
    """Compute the run report for a labeled dataset."""
    cfg_doc = _load_config(config)
    manifest = load_dataset(dataset, cfg_doc.get("embedding_dim", embedding_dim))
    cal_cfg = CalibrationConfig(
        bin_count=cfg_doc.get("bin_count", 10),
        gamma=gamma if gamma is not None else cfg_doc.get("gamma", DEFAULT_GAMMA),
    )
    doc = report.compute_run_report(
        manifest, cal_cfg,
        alpha=alpha if alpha is not None else cfg_doc.get("alpha"),
        fit_alpha=fit_alpha or cfg_doc.get("fit_alpha", False),
        grid_step=cfg_doc.get("grid_step", 0.01),
    )

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    for source, entry in doc["calibration"].items():
        if entry is None:
            continue
        with open(out_dir / f"reliability_{source}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lower", "upper", "count", "mean_confidence",
                             "mean_label", "ece_weight", "gamma_weight"])
            for row in entry["reliability"]:
                writer.writerow([row["lower"], row["upper"], row["count"],
                                 row["mean_confidence"], row["mean_label"],
                                 row["ece_weight"], row["gamma_weight"]])

    for key, points in doc["deferral"]["arc"].items():
        name = key.replace("|", "_")
        with open(out_dir / f"arc_{name}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rejection_rate", "accuracy"])
            writer.writerows(points)

    if figures:
        from . import plots

        for source, entry in doc["calibration"].items():
            if entry is None:
                continue
            plots.render_reliability(
                entry["reliability"], out_dir / f"reliability_{source}.png",
                title=f"Reliability ({source})",
            )
        if doc["deferral"]["arc"]:
            plots.render_arc(
                doc["deferral"]["arc"], out_dir / "arc.png",
                title="Accuracy-rejection curves",
            )
    click.echo(f"report written to {out_dir / 'report.json'}")


@main.command("guardrail")
@click.option("--candidates", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSONL file of {id, text} candidates.")
@click.option("--annotations", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSONL file of {id, label} annotations.")
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Accepted instruction pairs, JSONL of {report_text, guidance_text}.")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False),
              help="Optional dataset file supplying report_text per id.")
@click.option("--embedding-dim", default=8, show_default=True)
def cmd_guardrail(candidates, annotations, out, dataset, embedding_dim):
    """Filter candidate guidance texts against their annotations."""
    cand = []
    with open(candidates, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                cand.append((obj["id"], obj["text"]))
    annot = {}
    with open(annotations, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                annot[obj["id"]] = obj["label"]
    reports = {}
    if dataset:
        manifest = load_dataset(dataset, embedding_dim)
        reports = {r.id: r.report_text for r in manifest.records}

    accepted, stats = guardrail.filter_candidates(cand, annot)
    with open(out, "w", encoding="utf-8") as fh:
        for case_id, text in accepted:
            fh.write(json.dumps({
                "id": case_id,
                "report_text": reports.get(case_id, ""),
                "guidance_text": text,
            }) + "\n")
    click.echo(f"accepted {len(accepted)} / {len(cand)} candidates")
    for reason, count in sorted(stats.as_dict().items()):
        if count:
            click.echo(f"  rejected {reason}: {count}")


@main.command("train")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--embedding-dim", default=8, show_default=True)
@click.option("--hidden-width", default=64, show_default=True)
@click.option("--learning-rate", default=0.1, show_default=True)
@click.option("--epochs", default=200, show_default=True)
@click.option("--l2", default=0.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_train(dataset, embedding_dim, hidden_width, learning_rate, epochs, l2, seed, out):
    """Train the pooled-embedding classifier on labeled records."""
    manifest = load_dataset(dataset, embedding_dim)
    examples = [
        (list(r.embedding), r.label)
        for r in manifest.records
        if r.embedding is not None and r.label is not None
        and (r.split is None or r.split == "classifier_train")
    ]
    cfg = hidden.TrainConfig(learning_rate=learning_rate, epochs=epochs,
                             seed=seed, l2=l2)
    clf = hidden.train(examples, cfg, hidden_width)
    hidden.save_classifier(clf, out)
    click.echo(f"trained on {len(examples)} examples; saved to {out}")


@main.command("defer")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rank-source", default=deferral.HIDDEN_STATE, show_default=True,
              type=click.Choice(deferral.SOURCES))
@click.option("--budget", type=int, default=None, help="Defer the k most uncertain cases.")
@click.option("--theta", type=float, default=None, help="Explicit uncertainty threshold.")
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--embedding-dim", default=8, show_default=True)
def cmd_defer(dataset, rank_source, budget, theta, alpha, embedding_dim):
    """Print the threshold and partition sizes for a deferral budget."""
    from .fusion import attach_combined

    if (budget is None) == (theta is None):
        raise click.UsageError("set exactly one of --budget / --theta")
    manifest = attach_combined(load_dataset(dataset, embedding_dim), alpha)
    ranking = deferral.rank_for_deferral(manifest.records, rank_source)
    if budget is not None:
        if budget == 0:
            click.echo(f"theta=0.0 deferred=0 autonomous={len(ranking)}")
            return
        result = deferral.threshold_for_budget(ranking, budget)
        theta = result.theta
        if result.boundary_tie:
            click.echo("warning: ties at the threshold boundary; "
                       f"deferring {result.deferred_count} instead of {budget}", err=True)
    deferred, autonomous = deferral.partition(ranking, theta)
    click.echo(f"theta={theta} deferred={len(deferred)} autonomous={len(autonomous)}")


@main.command("serve")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--log", "log_path", required=True, type=click.Path(dir_okay=False))
@click.option("--budget", type=int, default=None)
@click.option("--theta", type=float, default=None)
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True)
@click.option("--rank-source", default=deferral.HIDDEN_STATE, show_default=True,
              type=click.Choice(deferral.SOURCES))
@click.option("--clf-source", default=deferral.COMBINED, show_default=True,
              type=click.Choice(deferral.SOURCES))
@click.option("--embedding-dim", default=8, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def cmd_serve(dataset, log_path, budget, theta, alpha, gamma, rank_source,
              clf_source, embedding_dim, host, port):
    """Run the review service."""
    import uvicorn

    if (budget is None) == (theta is None):
        raise click.UsageError("set exactly one of --budget / --theta")
    manifest = load_dataset(dataset, embedding_dim)
    state = service.build_state(
        manifest, log_path, alpha=alpha,
        calibration_cfg=CalibrationConfig(gamma=gamma),
        rank_source=rank_source, classification_source=clf_source,
        theta=theta, budget=budget,
    )
    uvicorn.run(service.build_app(state), host=host, port=port)


def entry():
    try:
        main(standalone_mode=True)
    except DeferkitError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entry()
