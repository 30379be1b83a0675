"""Command-line surface: gen, evolve, detect, metrics, bench, respond, ingest, report.

Config files are YAML documents mirroring ExperimentSpec:

    lfr:        {n: 250, mu: 0.2, avg_degree: 10, ...}
    transform:  {kind: merge, n_snapshots: 150, start: 25, end: 125, tau: 0.01, ...}
    algorithms: [{algorithm: gma}, {algorithm: alpha_gma, alpha: 0.8}]
    n_graphs: 20
    n_runs: 5
    master_seed: 0
    metrics_window: transform
"""

from __future__ import annotations

import csv
import dataclasses
import sys

import click
import yaml

from . import __version__
from .detectors import ALGORITHMS, AlgoConfig, make_detector
from .graph import DynamicGraph, Partition, load_json, save_json
from .harness import (
    ExperimentSpec,
    aggregate,
    profile_transform,
    run_experiment_detailed,
    export_results,
    import_records,
    profile_spec,
    responsiveness_experiment,
    run_experiment,
    score_run,
    timing_report,
)
from .ingest import ingest_contacts
from .lfr import LfrParams, generate
from .transforms import TransformConfig, TransformKind, evolve


def _spec_from_dict(doc: dict) -> ExperimentSpec:
    transform = doc.get("transform", {})
    if isinstance(transform.get("phi_rem"), list):
        transform = {**transform, "phi_rem": tuple(transform["phi_rem"])}
    return ExperimentSpec(
        lfr=LfrParams(**doc.get("lfr", {})),
        transform=TransformConfig(**transform),
        algorithms=[AlgoConfig(**a) for a in doc.get("algorithms", [{"algorithm": "gma"}])],
        n_graphs=int(doc.get("n_graphs", 20)),
        n_runs=int(doc.get("n_runs", 5)),
        master_seed=int(doc.get("master_seed", 0)),
        metrics_window=doc.get("metrics_window", "transform"),
    )


def load_spec(path) -> ExperimentSpec:
    with open(path) as fh:
        return _spec_from_dict(yaml.safe_load(fh) or {})


def _write_partitions(path, series) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "node", "community"])
        for t, part in series:
            for node in sorted(part.assignment):
                writer.writerow([t, node, part.assignment[node]])


def _read_partitions(path) -> list[tuple[int, Partition]]:
    by_t: dict[int, dict[int, int]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            by_t.setdefault(int(row["t"]), {})[int(row["node"])] = int(row["community"])
    return [(t, Partition.build(assign)) for t, assign in sorted(by_t.items())]


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Evolutionary community detection benchmark."""


@main.command()
@click.option("--n", default=250, show_default=True, help="Node count.")
@click.option("--mu", default=0.2, show_default=True, help="Mixing parameter.")
@click.option("--avg-degree", default=10.0, show_default=True)
@click.option("--max-degree", default=50, show_default=True)
@click.option("--min-comm", default=10, show_default=True)
@click.option("--max-comm", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(writable=True))
def gen(n, mu, avg_degree, max_degree, min_comm, max_comm, seed, out) -> None:
    """Generate a community-structured weighted graph with ground truth."""
    params = LfrParams(
        n=n, mu=mu, avg_degree=avg_degree, max_degree=max_degree,
        min_comm=min_comm, max_comm=max_comm, seed=seed,
    )
    snapshot, gt = generate(params)
    g = DynamicGraph(snapshots=(snapshot,), ground_truth=(gt,),
                     meta={"generator": "lfr", "params": dataclasses.asdict(params)})
    save_json(g, out)
    click.echo(f"wrote {out}: {snapshot.n_nodes} nodes, {snapshot.n_edges} edges, "
               f"{gt.n_communities()} communities")


@main.command(name="evolve")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True),
              help="Base DynamicGraph JSON (snapshot 0 + ground truth), e.g. from `gen`.")
@click.option("--kind", type=click.Choice([k.value for k in TransformKind]), required=False)
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="YAML with TransformConfig fields (flags override).")
@click.option("--n-snapshots", type=int, default=None)
@click.option("--start", type=int, default=None)
@click.option("--end", type=int, default=None)
@click.option("--tau", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path(writable=True))
def evolve_cmd(graph_path, kind, config_path, n_snapshots, start, end, tau, seed, out) -> None:
    """Evolve a base snapshot through one scripted transformation."""
    doc = {}
    if config_path:
        with open(config_path) as fh:
            doc = yaml.safe_load(fh) or {}
        if isinstance(doc.get("phi_rem"), list):
            doc["phi_rem"] = tuple(doc["phi_rem"])
    for key, val in (("kind", kind), ("n_snapshots", n_snapshots), ("start", start),
                     ("end", end), ("tau", tau), ("seed", seed)):
        if val is not None:
            doc[key] = val
    if "kind" not in doc:
        raise click.UsageError("transformation kind missing (flag --kind or config file)")
    cfg = TransformConfig(**doc)
    g = load_json(graph_path)
    if g.ground_truth is None:
        raise click.UsageError("input graph carries no ground truth")
    evolved = evolve(g.snapshots[0], g.ground_truth[0], cfg)
    save_json(evolved, out)
    click.echo(f"wrote {out}: {len(evolved)} snapshots ({cfg.kind.value}, "
               f"window [{cfg.start}, {cfg.end}], tau={cfg.tau})")


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--algo", type=click.Choice(ALGORITHMS), default="gma", show_default=True)
@click.option("--alpha", default=0.8, show_default=True)
@click.option("--theta-q", default=0.0, show_default=True)
@click.option("--evict/--no-evict", default=True, show_default=True,
              help="Evict faded edges from the alpha-GMA memory graph.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(writable=True))
def detect(graph_path, algo, alpha, theta_q, evict, seed, out) -> None:
    """Run one detection algorithm over a dynamic graph; write t,node,community CSV."""
    g = load_json(graph_path)
    cfg = AlgoConfig(algorithm=algo, alpha=alpha, theta_q=theta_q, seed=seed, alpha_evict=evict)
    det = make_detector(cfg)
    det.fit(g)
    _write_partitions(out, det.series_)
    click.echo(f"wrote {out}: {len(det.series_)} snapshots, algorithm={algo}")


@main.command(name="metrics")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True),
              help="DynamicGraph JSON with ground truth.")
@click.option("--partitions", required=True, type=click.Path(exists=True),
              help="Partition CSV from `detect`.")
@click.option("--algo", default="unknown", help="Algorithm name stamped into the row.")
@click.option("--graph-id", default=0, show_default=True)
@click.option("--run-id", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(writable=True))
def metrics_cmd(graph_path, partitions, algo, graph_id, run_id, out) -> None:
    """Score one detection run: stability, correctness, delay, crossing point."""
    g = load_json(graph_path)
    series = _read_partitions(partitions)
    score = score_run(g, series)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["graph_id", "run_id", "algorithm", "transform", "S", "K", "D", "CP"])
        writer.writerow([
            graph_id, run_id, algo, g.meta.get("kind", "static"),
            repr(score.S),
            repr(score.K) if score.K is not None else "",
            repr(score.D) if score.D is not None else "",
            score.CP if score.CP is not None else "",
        ])
    click.echo(f"wrote {out}: S={score.S:.4f}"
               + (f" K={score.K:.4f}" if score.K is not None else "")
               + (f" D={score.D:g}" if score.D is not None else ""))


def _bench_spec(config_path, profile, transform, seed, algo) -> ExperimentSpec:
    if config_path:
        spec = load_spec(config_path)
        if seed is not None:
            spec = dataclasses.replace(spec, master_seed=seed)
        return spec
    if transform is None:
        raise click.UsageError("need --config or --transform")
    algorithms = (
        [AlgoConfig(algorithm=a) for a in algo]
        if algo
        else [AlgoConfig(algorithm=a) for a in ALGORITHMS]
    )
    return profile_spec(profile, profile_transform(transform), algorithms,
                        master_seed=seed if seed is not None else 0)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--profile", type=click.Choice(["desk", "paper"]), default="desk", show_default=True)
@click.option("--transform", type=click.Choice([k.value for k in TransformKind]), default=None)
@click.option("--algo", multiple=True, type=click.Choice(ALGORITHMS),
              help="Algorithms to run (default: all four).")
@click.option("--seed", type=int, default=None, help="Master seed override.")
@click.option("--serial", is_flag=True, help="Force serial execution.")
@click.option("--series", "with_series", is_flag=True,
              help="Also export per-snapshot metric series (series.csv).")
@click.option("--out", required=True, type=click.Path())
def bench(config_path, profile, transform, algo, seed, serial, with_series, out) -> None:
    """Run the full experiment protocol and export runs/aggregate/meta."""
    spec = _bench_spec(config_path, profile, transform, seed, algo)
    if with_series:
        spec = dataclasses.replace(spec, collect_series=True)
    result = run_experiment_detailed(spec, serial=serial)
    agg = aggregate(result.records, seed=spec.master_seed)
    export_results(result.records, agg, out, spec=spec, series=result.series)
    click.echo(f"wrote {out}/runs.csv ({len(result.records)} records), aggregate.csv, meta.json")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--profile", type=click.Choice(["desk", "paper"]), default="desk", show_default=True)
@click.option("--transform", type=click.Choice([k.value for k in TransformKind]), default=None)
@click.option("--algo", multiple=True, type=click.Choice(ALGORITHMS))
@click.option("--seed", type=int, default=None)
@click.option("--serial", is_flag=True)
@click.option("--out", required=True, type=click.Path())
def respond(config_path, profile, transform, algo, seed, serial, out) -> None:
    """Responsiveness protocol: instantaneous (tau=1) transformation at t=10, N=20."""
    spec = _bench_spec(config_path, profile, transform, seed, algo)
    records = responsiveness_experiment(spec, serial=serial)
    agg = aggregate(records, seed=spec.master_seed)
    export_results(records, agg, out, spec=spec, extra_meta={"protocol": "responsiveness"})
    click.echo(f"wrote {out}/runs.csv ({len(records)} records), aggregate.csv, meta.json")


@main.command(name="ingest")
@click.option("--contacts", required=True, type=click.Path(exists=True),
              help="CSV of timestamp,node_a,node_b contact rows.")
@click.option("--window-seconds", default=1800.0, show_default=True)
@click.option("--out", required=True, type=click.Path(writable=True))
def ingest_cmd(contacts, window_seconds, out) -> None:
    """Bucket a contact log into a dynamic graph (one snapshot per window)."""
    g = ingest_contacts(contacts, window_seconds)
    save_json(g, out)
    click.echo(f"wrote {out}: {len(g)} snapshots "
               f"({g.meta['rejected_rows']} rejected rows)")


@main.command()
@click.option("--runs", "runs_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, help="Bootstrap seed.")
def report(runs_path, out, seed) -> None:
    """Aggregate an existing runs.csv: medians, CIs, gains and timing ratios."""
    records = import_records(runs_path)
    agg = aggregate(records, seed=seed)
    export_results(records, agg, out, extra_meta={"source_runs": str(runs_path)})
    try:
        ratios = timing_report(records)
    except ValueError:
        ratios = {}
    if ratios:
        import os

        with open(os.path.join(out, "timing.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["algorithm", "relative_runtime"])
            for alg, ratio in ratios.items():
                writer.writerow([alg, repr(ratio)])
        click.echo("timing (GMA=1.0): " + ", ".join(f"{a}={r:.2f}" for a, r in ratios.items()))
    click.echo(f"wrote {out}/aggregate.csv")


if __name__ == "__main__":
    sys.exit(main())
