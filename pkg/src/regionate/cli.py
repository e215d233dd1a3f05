"""Command line interface.

Subcommands: ``delineate`` (one partition), ``hierarchy`` (merge tree +
per-level labels), ``sweep`` (metrics across a delta grid), ``synth``
(planted lattice datasets), ``eval`` (metric report for stored labels),
``render`` (SVG map of a labeling).

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
malformed inputs, disconnected graphs where connectivity is required),
3 numerical failure (degenerate affinity, eigensolver breakdown).

Every subcommand takes ``--config PATH`` with ``key=value`` lines (and
``#`` comments); explicit flags beat config values, config values beat
defaults. ``--delta-unit fraction`` interprets ``--delta`` (or the sweep
grid) as a fraction of the graph diameter and converts it to hops via
``max(1, round(fraction * diameter))``.
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np
from click.core import ParameterSource

from . import __version__
from .data import (SyntheticSpec, generate_synthetic, load_dataset,
                   read_labels, save_dataset, write_labels)
from .errors import DataFormatError, NumericalError, RegionateError
from .hierarchy import LINKAGES, KERNEL_UPDATE_MODES, agglomerative, hssc
from .metrics import evaluate
from .partitional import METHODS, MethodConfig, delineate
from .preprocess import preprocess as preprocess_dataset

_PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#1f77b4", "#d62728",
    "#2ca02c", "#9467bd", "#8c564b", "#17becf",
)
_CELL = 20  # px per lattice cell in rendered SVGs


class SigmaType(click.ParamType):
    """A positive float or the literal 'median'."""

    name = "sigma"

    def convert(self, value, param, ctx):
        if value in ("median", None):
            return "median"
        if isinstance(value, (int, float)):
            return float(value)
        try:
            out = float(value)
        except ValueError:
            self.fail(f"{value!r} is not a number or 'median'", param, ctx)
        if out <= 0:
            self.fail("sigma must be positive", param, ctx)
        return out


SIGMA = SigmaType()


@click.group()
@click.version_option(__version__, prog_name="regionate")
def cli():
    """Delineate landscapes into contiguous, homogeneous regions."""


def _config_pairs(path):
    pairs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        pairs.append((key.strip(), value.strip()))
    return pairs


def _with_config(ctx, params: dict, aliases: dict | None = None) -> dict:
    """Fill defaulted params from the --config file, if one was given.

    ``aliases`` maps extra accepted config keys to parameter names, for
    commands whose flag spelling differs from the documented field name.
    """
    config_path = params.pop("config_path", None)
    if config_path is None:
        return params
    by_name = {p.name: p for p in ctx.command.params}
    for key, value in _config_pairs(config_path):
        name = key.replace("-", "_")
        name = (aliases or {}).get(name, name)
        if name not in by_name or name == "config_path":
            raise click.UsageError(f"unknown config key {key!r}")
        if ctx.get_parameter_source(name) == ParameterSource.COMMANDLINE:
            continue  # explicit flag wins
        params[name] = by_name[name].type.convert(value, by_name[name], ctx)
    return params


def _require(params: dict, *names):
    for name in names:
        if params.get(name) is None:
            raise click.UsageError(f"missing required option --{name.replace('_', '-')}")


def _config_option(fn):
    return click.option("--config", "config_path",
                        type=click.Path(exists=True, dir_okay=False),
                        default=None, help="key=value option file")(fn)


def _dataset_options(fn):
    fn = click.option("--adjacency", type=click.Path(), default=None,
                      help="edge list CSV (src,dst)")(fn)
    fn = click.option("--features", type=click.Path(), default=None,
                      help="feature CSV (unit_id,<names...>)")(fn)
    return fn


def _resolve_delta(delta, unit, method, graph):
    """Turn a CLI delta into the value MethodConfig/hierarchy expects."""
    if method == "scm":
        if unit == "fraction":
            raise click.UsageError("--delta-unit fraction does not apply to scm")
        return delta
    if unit == "fraction":
        if not 0.0 <= delta <= 1.0:
            raise click.UsageError("fractional delta must lie in [0, 1]")
        return max(1, round(delta * graph.diameter()))
    return delta


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


@cli.command("delineate")
@click.option("--method", type=click.Choice(METHODS), default="ssc",
              show_default=True)
@click.option("--k", type=int, default=None, help="number of regions")
@click.option("--delta", type=float, default=None,
              help="hop radius (ssc/bssc) or mixing weight (scm)")
@click.option("--delta-unit", type=click.Choice(["hops", "fraction"]),
              default="hops", show_default=True)
@click.option("--sigma", type=SIGMA, default="median", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--variance-target", type=float, default=0.85, show_default=True)
@_dataset_options
@click.option("--out", type=click.Path(), default=None, help="output directory")
@_config_option
@click.pass_context
def delineate_cmd(ctx, **params):
    """Partition a dataset into k regions with one method."""
    p = _with_config(ctx, params)
    _require(p, "features", "adjacency", "out", "k", "delta")
    dataset = load_dataset(p["features"], p["adjacency"])
    delta = _resolve_delta(p["delta"], p["delta_unit"], p["method"], dataset.graph)
    config = MethodConfig(method=p["method"], k=p["k"], delta=delta,
                          sigma=p["sigma"], seed=p["seed"],
                          n_restarts=p["restarts"],
                          variance_target=p["variance_target"])
    reduced = preprocess_dataset(dataset, p["variance_target"])
    result = delineate(reduced, config)

    out = Path(p["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_labels(out / "labels.csv", dataset.unit_ids, result.labels)
    report = evaluate(reduced, result.labels)
    (out / "metrics.json").write_text(report.to_json(), encoding="utf-8")
    _write_json(out / "params.json", {
        "method": config.method, "k": config.k, "delta": config.delta,
        "delta_unit": p["delta_unit"], "sigma": result.sigma,
        "seed": config.seed, "restarts": config.n_restarts,
        "variance_target": config.variance_target,
        "inertia": result.inertia,
    })
    click.echo(f"wrote {out / 'labels.csv'}")
    click.echo(f"wrote {out / 'metrics.json'}")


@cli.command("hierarchy")
@click.option("--method", type=click.Choice(("hssc",) + LINKAGES),
              default="hssc", show_default=True)
@click.option("--kmax", type=int, default=None, help="deepest level to cut")
@click.option("--delta", type=float, default=None, help="hop radius")
@click.option("--delta-unit", type=click.Choice(["hops", "fraction"]),
              default="hops", show_default=True)
@click.option("--sigma", type=SIGMA, default="median", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="hssc bisection seed (agglomerative runs are deterministic)")
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--variance-target", type=float, default=0.85, show_default=True)
@click.option("--kernel-update", type=click.Choice(KERNEL_UPDATE_MODES),
              default="recompute", show_default=True,
              help="agglomerative eligibility rule")
@_dataset_options
@click.option("--out", type=click.Path(), default=None, help="output directory")
@_config_option
@click.pass_context
def hierarchy_cmd(ctx, **params):
    """Build a merge tree and write labels for every level up to kmax."""
    p = _with_config(ctx, params)
    _require(p, "features", "adjacency", "out", "kmax", "delta")
    dataset = load_dataset(p["features"], p["adjacency"])
    delta = _resolve_delta(p["delta"], p["delta_unit"], p["method"], dataset.graph)
    reduced = preprocess_dataset(dataset, p["variance_target"])
    if p["method"] == "hssc":
        tree = hssc(reduced, p["kmax"], delta=delta, sigma=p["sigma"],
                    seed=p["seed"], n_restarts=p["restarts"])
    else:
        tree = agglomerative(reduced, p["kmax"], linkage=p["method"],
                             delta=delta, sigma=p["sigma"],
                             kernel_update=p["kernel_update"])

    out = Path(p["out"])
    out.mkdir(parents=True, exist_ok=True)
    tree.write(out / "tree.csv")
    for k in sorted(tree.levels):
        write_labels(out / f"labels_k{k}.csv", dataset.unit_ids,
                     tree.labels_at(k))
    report = evaluate(reduced, tree.labels_at(tree.k_max))
    (out / "metrics.json").write_text(report.to_json(), encoding="utf-8")
    click.echo(f"wrote {out / 'tree.csv'} and {len(tree.levels)} label files")


def _parse_grid(spec):
    try:
        a_s, b_s, step_s = spec.split(":")
        a, b, step = float(a_s), float(b_s), float(step_s)
    except ValueError:
        raise click.UsageError(
            f"--delta-grid must look like start:stop:step, got {spec!r}"
        ) from None
    if step <= 0 or b < a:
        raise click.UsageError("--delta-grid needs step > 0 and stop >= start")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return [round(a + i * step, 12) for i in range(count)]


@cli.command("sweep")
@click.option("--method", type=click.Choice(METHODS), default="ssc",
              show_default=True)
@click.option("--k", type=int, default=None)
@click.option("--delta-grid", type=str, default=None,
              help="start:stop:step, inclusive")
@click.option("--delta-unit", type=click.Choice(["hops", "fraction"]),
              default="hops", show_default=True)
@click.option("--sigma", type=SIGMA, default="median", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--variance-target", type=float, default=0.85, show_default=True)
@_dataset_options
@click.option("--out", type=click.Path(), default=None, help="output directory")
@_config_option
@click.pass_context
def sweep_cmd(ctx, **params):
    """Re-run one method across a delta grid and tabulate the metrics."""
    p = _with_config(ctx, params)
    _require(p, "features", "adjacency", "out", "k", "delta_grid")
    dataset = load_dataset(p["features"], p["adjacency"])
    reduced = preprocess_dataset(dataset, p["variance_target"])
    grid = _parse_grid(p["delta_grid"])

    rows = ["delta,pct_ml,c,ssw,cbalance"]
    for delta in grid:
        resolved = _resolve_delta(delta, p["delta_unit"], p["method"],
                                  dataset.graph)
        config = MethodConfig(method=p["method"], k=p["k"], delta=resolved,
                              sigma=p["sigma"], seed=p["seed"],
                              n_restarts=p["restarts"])
        result = delineate(reduced, config)
        report = evaluate(reduced, result.labels)
        rows.append(",".join([
            repr(float(delta)), repr(report.pct_ml), repr(report.contiguity_c),
            repr(report.ssw), repr(report.cbalance),
        ]))

    out = Path(p["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    click.echo(f"wrote {out / 'sweep.csv'} ({len(grid)} settings)")


@cli.command("synth")
@click.option("--rows", type=int, default=None)
@click.option("--cols", type=int, default=None)
@click.option("--blocks", type=str, default="1x1", show_default=True,
              help="planted region grid, e.g. 2x3")
@click.option("--sigma", type=float, default=0.0, show_default=True,
              help="feature noise standard deviation")
@click.option("--feature-dim", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="output directory")
@_config_option
@click.pass_context
def synth_cmd(ctx, **params):
    """Generate a planted lattice dataset plus ground-truth labels."""
    # config files may use the SyntheticSpec field names for these flags
    p = _with_config(ctx, params,
                     aliases={"planted_regions": "blocks", "noise_sigma": "sigma"})
    _require(p, "rows", "cols", "out")
    try:
        spec = SyntheticSpec(rows=p["rows"], cols=p["cols"],
                             planted_regions=p["blocks"],
                             feature_dim=p["feature_dim"],
                             noise_sigma=p["sigma"], seed=p["seed"])
        dataset, truth = generate_synthetic(spec)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    out = Path(p["out"])
    save_dataset(dataset, out)
    write_labels(out / "truth.csv", dataset.unit_ids, truth)
    _write_json(out / "meta.json", {
        "rows": spec.rows, "cols": spec.cols, "blocks": p["blocks"],
        "noise_sigma": spec.noise_sigma, "feature_dim": spec.feature_dim,
        "seed": spec.seed, "n_regions": int(truth.max()) + 1,
    })
    click.echo(f"wrote {out / 'features.csv'}")


@cli.command("eval")
@click.option("--labels", "labels_path", type=click.Path(), default=None)
@click.option("--labels2", "labels2_path", type=click.Path(), default=None,
              help="reference labels for the adjusted Rand index")
@click.option("--gamma", type=float, default=1.0, show_default=True)
@click.option("--variance-target", type=float, default=0.85, show_default=True)
@_dataset_options
@click.option("--out", type=click.Path(), default=None,
              help="also write the JSON report here")
@_config_option
@click.pass_context
def eval_cmd(ctx, **params):
    """Print a metric report for stored labels."""
    p = _with_config(ctx, params)
    _require(p, "features", "adjacency", "labels_path")
    dataset = load_dataset(p["features"], p["adjacency"])
    labels = read_labels(p["labels_path"], dataset.unit_ids)
    reference = None
    if p["labels2_path"] is not None:
        reference = read_labels(p["labels2_path"], dataset.unit_ids)
    report = evaluate(dataset, labels, gamma=p["gamma"],
                      reference_labels=reference,
                      variance_target=p["variance_target"])
    click.echo(report.to_json(), nl=False)
    if p["out"] is not None:
        Path(p["out"]).write_text(report.to_json(), encoding="utf-8")


def _read_coordinates(path, unit_ids):
    import csv as _csv

    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in _csv.reader(fh) if row]
    if not rows or rows[0] != ["unit_id", "x", "y"]:
        raise DataFormatError(f"{path}: coordinates header must be 'unit_id,x,y'")
    index = {u: i for i, u in enumerate(unit_ids)}
    coords = np.full((len(unit_ids), 2), np.nan)
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3 or row[0] not in index:
            raise DataFormatError(f"{path}:{lineno}: bad coordinate row")
        coords[index[row[0]]] = (float(row[1]), float(row[2]))
    if np.isnan(coords).any():
        raise DataFormatError(f"{path}: missing coordinates for some units")
    return coords


def render_svg(coords, labels) -> str:
    """Deterministic SVG of a labeled lattice; one cell per unit."""
    xs = coords[:, 0].astype(int)
    ys = coords[:, 1].astype(int)
    width = (xs.max() + 1) * _CELL
    height = (ys.max() + 1) * _CELL
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    ]
    for x, y, lab in zip(xs, ys, labels):
        color = _PALETTE[int(lab) % len(_PALETTE)]
        parts.append(
            f'<rect x="{x * _CELL}" y="{y * _CELL}" width="{_CELL}" '
            f'height="{_CELL}" fill="{color}" stroke="#ffffff" stroke-width="1"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@cli.command("render")
@click.option("--labels", "labels_path", type=click.Path(), default=None)
@click.option("--dataset", "dataset_dir", type=click.Path(), default=None,
              help="directory holding features/adjacency/coordinates CSVs")
@click.option("--out", type=click.Path(), default=None, help="SVG file")
@_config_option
@click.pass_context
def render_cmd(ctx, **params):
    """Draw stored labels as a colored SVG map."""
    p = _with_config(ctx, params)
    _require(p, "labels_path", "dataset_dir", "out")
    root = Path(p["dataset_dir"])
    dataset = load_dataset(root / "features.csv", root / "adjacency.csv")
    coords_path = root / "coordinates.csv"
    if not coords_path.exists():
        raise DataFormatError(f"{coords_path}: rendering needs unit coordinates")
    coords = _read_coordinates(coords_path, dataset.unit_ids)
    labels = read_labels(p["labels_path"], dataset.unit_ids)
    Path(p["out"]).write_text(render_svg(coords, labels), encoding="utf-8")
    click.echo(f"wrote {p['out']}")


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        rv = cli.main(args=argv, prog_name="regionate", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except DataFormatError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return 3
    except RegionateError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return rv if isinstance(rv, int) else 0
