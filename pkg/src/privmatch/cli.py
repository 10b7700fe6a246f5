"""Command-line entry points for dataset handling and experiment runs."""
from __future__ import annotations

import csv
import sys
from pathlib import Path

import click
import numpy as np

from . import harness
from .geo import perturb_instance
from .grouping import greedy_grouping
from .harness import DataError, ExperimentConfig
from .matching import match_max_cardinality
from .protocol import audit_transcript, run_group_exchange

EXIT_DATA_ERROR = 3


@click.group()
def main():
    """Privacy-preserving batch task assignment experiments."""


def _write_instance_csv(instance, out: Path) -> None:
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["role", "x", "y"])
        for w in instance.workers:
            writer.writerow(["w", f"{w.true_loc.x:.3f}", f"{w.true_loc.y:.3f}"])
        for t in instance.tasks:
            writer.writerow(["t", f"{t.true_loc.x:.3f}", f"{t.true_loc.y:.3f}"])


@main.command()
@click.option("--workers", default=100, show_default=True)
@click.option("--tasks", default=100, show_default=True)
@click.option("--reach", default=harness.DEFAULT_REACH, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def gen(workers, tasks, reach, seed, out):
    """Generate a synthetic instance and write it as a role,x,y CSV."""
    rng = np.random.default_rng(seed)
    instance = harness.gen_synthetic(workers, tasks, reach, rng)
    _write_instance_csv(instance, out)
    click.echo(f"wrote {workers} workers + {tasks} tasks to {out}")


@main.command()
@click.argument("path", type=click.Path(exists=True, path_type=Path))
@click.option("--reach", default=harness.DEFAULT_REACH, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the projected instance as a role,x,y CSV.")
def ingest(path, reach, out):
    """Project a role,lat,lon CSV to planar meters and report its extent."""
    try:
        instance = harness.ingest_latlon(path, reach)
    except DataError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_DATA_ERROR)
    xs = [e.true_loc.x for e in list(instance.workers) + list(instance.tasks)]
    ys = [e.true_loc.y for e in list(instance.workers) + list(instance.tasks)]
    if xs:
        click.echo(f"{len(instance.workers)} workers, {len(instance.tasks)} tasks, "
                   f"extent [0, {max(xs):.0f}] x [0, {max(ys):.0f}] m")
    else:
        click.echo("empty instance")
    if out is not None:
        _write_instance_csv(instance, out)


def _common_run_options(fn):
    options = [
        click.option("--method", type=click.Choice(harness.METHODS), default="OM",
                     show_default=True),
        click.option("--workers", default=100, show_default=True),
        click.option("--tasks", default=100, show_default=True),
        click.option("--epsilon", default=0.4, show_default=True),
        click.option("--r", default=harness.DEFAULT_R, show_default=True),
        click.option("--reach", default=harness.DEFAULT_REACH, show_default=True),
        click.option("--k", default=2, show_default=True),
        click.option("--lambda", "lam", default=20, show_default=True),
        click.option("--trials", default=1, show_default=True),
        click.option("--seed", default=0, show_default=True),
        click.option("--dataset", default="synthetic", show_default=True),
        click.option("--key-bits", default=512, show_default=True),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


def _config(method, workers, tasks, epsilon, r, reach, k, lam, trials, seed,
            dataset, key_bits) -> ExperimentConfig:
    return ExperimentConfig(method=method, n_workers=workers, n_tasks=tasks,
                            epsilon=epsilon, r=r, reach_default=reach, k=k,
                            lam=lam, trials=trials, rng_seed=seed,
                            dataset=dataset, key_bits=key_bits)


@main.command()
@_common_run_options
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="CSV output path; a .json summary is written alongside.")
def run(out, **kwargs):
    """Run one method over the configured trials."""
    cfg = _config(**kwargs)
    try:
        results = harness.run_experiment(cfg)
    except DataError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_DATA_ERROR)
    harness.write_csv(results, out)
    harness.write_summary(results, out.with_suffix(".json"))
    summary = harness.summarize(results)
    click.echo(f"{cfg.method}: mean utility {summary['utility']['mean']:.1f} "
               f"over {cfg.trials} trial(s) -> {out}")


@main.command()
@_common_run_options
@click.option("--methods", default="OM,KS,OPT", show_default=True,
              help="Comma-separated subset of OM,ORR,KS,OPT.")
@click.option("--epsilons", default="0.4,1.25,2.5", show_default=True)
@click.option("--ks", default="2", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def sweep(methods, epsilons, ks, out, **kwargs):
    """Sweep methods over privacy levels and group sizes."""
    kwargs.pop("method")
    try:
        method_list = [m.strip() for m in methods.split(",") if m.strip()]
        epsilon_list = [float(e) for e in epsilons.split(",")]
        k_list = [int(k) for k in ks.split(",")]
    except ValueError:
        raise click.UsageError("bad --methods/--epsilons/--ks value")
    all_results = []
    for method in method_list:
        for epsilon in epsilon_list:
            for k in (k_list if method == "KS" else k_list[:1]):
                cfg = _config(method=method, **{**kwargs, "epsilon": epsilon, "k": k})
                results = harness.run_experiment(cfg)
                summary = harness.summarize(results)
                click.echo(f"{method} eps={epsilon} k={k}: "
                           f"mean utility {summary['utility']['mean']:.1f}")
                all_results.extend(results)
    harness.write_csv(all_results, out)
    click.echo(f"wrote {len(all_results)} rows to {out}")


@main.command("calibrate-reach")
@click.option("--target", default=0.9, show_default=True)
@click.option("--workers", default=100, show_default=True)
@click.option("--trials", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
def calibrate_reach(target, workers, trials, seed):
    """Binary-search the worker reach hitting a ground-truth match target."""
    reach = harness.calibrate_reach(target, workers, trials, seed)
    click.echo(f"calibrated reach: {reach:.0f} m "
               f"(target {target:.0%} of tasks matched by the optimum)")


@main.command()
@click.option("--groups", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--key-bits", default=512, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Optional transcript export (round,group,sender,receiver,kind,hex).")
def audit(groups, seed, key_bits, out):
    """Run secure group exchanges and audit every transcript for leaks."""
    rng = np.random.default_rng(seed)
    instance = perturb_instance(
        harness.gen_synthetic(2 * groups, 2 * groups, harness.DEFAULT_REACH, rng),
        rng)
    m = match_max_cardinality(instance)
    division = greedy_grouping(m, 2, instance, rng)
    lines = []
    failures = 0
    audited = 0
    for gi, group in enumerate(division.groups[:groups]):
        if len(group.pairs) < 2:
            continue
        result = run_group_exchange(group, instance, rng, key_bits=key_bits)
        audited += 1
        ok = audit_transcript(result.transcript, instance)
        if not ok:
            failures += 1
        lines.extend(result.transcript.export_lines(0, gi))
        click.echo(f"group {gi}: {'PASS' if ok else 'FAIL'}")
    if out is not None:
        Path(out).write_text("\n".join(lines) + "\n")
    click.echo(f"{audited - failures}/{audited} transcripts clean")
    if failures:
        sys.exit(1)


if __name__ == "__main__":
    main()
