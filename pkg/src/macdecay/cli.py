"""Command line front end.

Subcommands: ``gen`` writes a seeded random lattice specification,
``verify-lemmas`` runs the randomized identity and coefficient-bound suites,
``decay`` computes exact decay samples, ``witness`` constructs bound
witnesses, and ``report`` joins both into a feasibility report.

All randomness is seeded from the command line, never from ambient entropy,
so identical invocations produce byte-identical output files.

Exit codes: 0 success, 1 a check failed, 2 usage or schema violation,
3 enumeration budget refused, 4 I/O failure.
"""

import sys
from pathlib import Path

import click

from . import decay as decay_mod
from . import lattices, pigeonhole, projected_basis, row_reduction

EXIT_CHECK_FAILED = 1
EXIT_SCHEMA = 2
EXIT_BUDGET = 3
EXIT_IO = 4


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(body):
    try:
        return body()
    except lattices.SchemaError as exc:
        _fail(EXIT_SCHEMA, exc)
    except lattices.EnumerationBudgetError as exc:
        _fail(EXIT_BUDGET, exc)
    except OSError as exc:
        _fail(EXIT_IO, exc)


def _parse_grid(_ctx, _param, value):
    if value is None:
        return None
    try:
        grid = tuple(int(part) for part in value.split(","))
    except ValueError:
        raise click.UsageError(f"--N expects a comma list of integers, got {value!r}")
    if not grid or any(nv < 1 for nv in grid):
        raise click.UsageError("--N entries must be positive integers")
    return grid


def _resolve_ensemble(spec, users, n, k, seed):
    gen_params = (users, n, k)
    if spec is not None and any(p is not None for p in gen_params):
        raise click.UsageError("give either --spec or --U/--n/--k, not both")
    if spec is not None:
        return lattices.load_ensemble(spec)
    if any(p is None for p in gen_params):
        raise click.UsageError("need --spec, or all of --U, --n and --k")
    return lattices.random_ensemble(U=users, n=n, k=k, seed=seed)


def _write_json(path, doc):
    Path(path).write_text(lattices.dumps_canonical(doc))


_input_options = [
    click.option("--spec", type=click.Path(), default=None,
                 help="Lattice specification JSON (alternative to --U/--n/--k)."),
    click.option("--U", "users", type=int, default=None, help="Number of users."),
    click.option("--n", "n", type=int, default=None, help="Transmit rows per user."),
    click.option("--k", "k", type=int, default=None, help="Code length (columns)."),
    click.option("--seed", type=int, default=0, show_default=True,
                 help="Seed for generation and searches."),
]


def _with_input_options(cmd):
    for option in reversed(_input_options):
        cmd = option(cmd)
    return cmd


@click.group()
def main():
    """Decay curves and constructive bound witnesses for stacked lattice codes."""


@main.command()
@click.option("--U", "users", type=int, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--k", "k", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--N", "window", callback=_parse_grid, default="1", show_default=True,
              help="Window bound(s): one value for all users, or one per user.")
@click.option("--out", type=click.Path(), required=True)
def gen(users, n, k, seed, window, out):
    """Write a seeded random lattice specification file."""

    def body():
        ensemble = lattices.random_ensemble(U=users, n=n, k=k, seed=seed, N=window)
        lattices.save_ensemble(ensemble, out)
        click.echo(f"wrote {out}: U={ensemble.U} n={ensemble.n} k={ensemble.k}")

    try:
        _guarded(body)
    except ValueError as exc:
        _fail(EXIT_SCHEMA, exc)


@main.command("verify-lemmas")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True,
              help="Tolerance of the determinant identity check.")
def verify_lemmas(trials, seed, tol):
    """Run the randomized identity and coefficient-bound suites."""
    reduction = row_reduction.run_reduction_suite(trials=trials, seed=seed, tol=tol)
    projection = projected_basis.run_projection_suite(trials=trials, seed=seed)
    click.echo(
        f"row-reduction identity: {reduction.passed}/{reduction.trials} passed "
        f"(worst relative gap {reduction.worst_gap:.3e})"
    )
    click.echo(
        f"projected-basis coefficient bound: {projection.passed}/"
        f"{projection.trials} passed (worst bound ratio "
        f"{projection.worst_ratio:.3f}, swaps {projection.swaps})"
    )
    if not (reduction.ok and projection.ok):
        sys.exit(EXIT_CHECK_FAILED)


@main.command()
@_with_input_options
@click.option("--N", "grid", callback=_parse_grid, required=True,
              help="Comma list of window bounds to evaluate.")
@click.option("--budget", type=int, default=lattices.DEFAULT_ENUM_BUDGET,
              show_default=True, help="Maximum number of tuples to enumerate.")
@click.option("--out", type=click.Path(), required=True, help="CSV output path.")
@click.option("--json-out", type=click.Path(), default=None,
              help="Optional JSON mirror of the CSV.")
def decay(spec, users, n, k, seed, grid, budget, out, json_out):
    """Exact decay samples over an N grid (brute force)."""

    def body():
        ensemble = _resolve_ensemble(spec, users, n, k, seed)
        samples = [
            decay_mod.brute_force_decay(ensemble.with_windows(nv), budget=budget)
            for nv in grid
        ]
        Path(out).write_text(decay_mod.decay_samples_to_csv(samples))
        if json_out:
            _write_json(json_out, decay_mod.decay_samples_to_json(samples))
        for sample in samples:
            click.echo(
                f"N={sample.windows}: value={sample.value!r} "
                f"({sample.evaluations} tuples)"
            )

    _guarded(body)


@main.command()
@_with_input_options
@click.option("--N", "grid", callback=_parse_grid, required=True,
              help="Comma list of window bounds to construct witnesses at.")
@click.option("--budget", type=int, default=pigeonhole.DEFAULT_SEARCH_BUDGET,
              show_default=True, help="Points drawn per search level.")
@click.option("--out", type=click.Path(), required=True, help="JSON output path.")
def witness(spec, users, n, k, seed, grid, budget, out):
    """Construct bound witnesses over an N grid."""

    def body():
        ensemble = _resolve_ensemble(spec, users, n, k, seed)
        entries = []
        ok = True
        for nv in grid:
            w = pigeonhole.construct_witness(
                ensemble.with_windows(nv), budget=budget, seed=seed
            )
            entries.append({"N": nv, **w.to_json_dict()})
            ok = ok and w.identity_ok
            click.echo(
                f"N={nv}: det={w.det_value!r} effective windows="
                f"{w.coeff_windows} identity_ok={w.identity_ok}"
            )
        doc = {
            "U": ensemble.U,
            "n": ensemble.n,
            "k": ensemble.k,
            "witnesses": entries,
        }
        _write_json(out, doc)
        return ok

    if not _guarded(body):
        sys.exit(EXIT_CHECK_FAILED)


@main.command()
@_with_input_options
@click.option("--N", "grid", callback=_parse_grid, required=True,
              help="Comma list of window bounds to report on.")
@click.option("--budget", type=int, default=pigeonhole.DEFAULT_SEARCH_BUDGET,
              show_default=True, help="Points drawn per search level.")
@click.option("--oracle-budget", type=int, default=lattices.DEFAULT_ENUM_BUDGET,
              show_default=True, help="Tuple budget of the exact oracle.")
@click.option("--out", type=click.Path(), required=True, help="JSON output path.")
def report(spec, users, n, k, seed, grid, budget, oracle_budget, out):
    """Witness construction plus exact-oracle feasibility check per N.

    The oracle runs at each witness's effective windows, which is exactly the
    domain the witness certifies.
    """

    def body():
        ensemble = _resolve_ensemble(spec, users, n, k, seed)
        alpha = pigeonhole.exponent_alpha(ensemble.U, ensemble.n, ensemble.k)
        witness_pairs = []
        oracle_pairs = []
        details = []
        ok = True
        for nv in grid:
            w = pigeonhole.construct_witness(
                ensemble.with_windows(nv), budget=budget, seed=seed
            )
            sample = decay_mod.brute_force_decay(
                ensemble.with_windows(w.coeff_windows), budget=oracle_budget
            )
            witness_pairs.append((nv, w.det_value))
            oracle_pairs.append((nv, sample.value))
            ok = ok and w.identity_ok
            details.append(
                {
                    "N": nv,
                    "oracle_windows": [int(b) for b in sample.windows],
                    "oracle_evaluations": int(sample.evaluations),
                    **w.to_json_dict(),
                }
            )
        rep = decay_mod.bound_report(
            decay_mod.DecayCurve.from_samples(oracle_pairs),
            decay_mod.DecayCurve.from_samples(witness_pairs),
            alpha,
        )
        doc = rep.to_json_dict()
        doc["witnesses"] = details
        _write_json(out, doc)
        click.echo(rep.to_table())
        return ok and rep.all_feasible

    if not _guarded(body):
        sys.exit(EXIT_CHECK_FAILED)


if __name__ == "__main__":
    main()
