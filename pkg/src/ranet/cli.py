"""Command-line interface.

Exit codes: 0 success, 1 usage or verification failure, 2 I/O failure,
3 capacity exceeded.
"""
from __future__ import annotations

import json
import os
import sys

import click

from . import acceptance, expectations, formats, montecarlo, oracle
from .core import degree_histogram, generate as generate_state
from .errors import CapacityError, DomainError

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_CAPACITY = 3

Count = click.IntRange(min=0)
Positive = click.IntRange(min=1)
Seed = click.IntRange(min=0, max=2**64 - 1)
OutPath = click.Path(dir_okay=False, writable=True)


class VerificationFailed(click.ClickException):
    exit_code = EXIT_USAGE


def _write(path, text: str) -> None:
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(text)


def _check_writable(*paths) -> None:
    """Fail before any work if an output path cannot be created."""
    for path in paths:
        if not path:
            continue
        parent = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(parent):
            raise FileNotFoundError(f"output directory does not exist: {parent}")
        if not os.access(parent, os.W_OK) or (os.path.exists(path) and not os.access(path, os.W_OK)):
            raise PermissionError(f"cannot write to {path}")


def _emit(text: str, path) -> None:
    if path:
        _write(path, text)
    else:
        click.echo(text, nl=False)


@click.group()
def cli():
    """Random Apollonian Network generator and degree-sequence checks."""


@cli.command()
@click.option("--t", "t", type=Count, required=True, help="Number of insertions.")
@click.option("--seed", type=Seed, required=True)
@click.option("--out", type=OutPath, help="Edge list output.")
@click.option("--hist", type=OutPath, help="Degree histogram CSV output.")
@click.option("--trace", "trace_path", type=OutPath, help="Choice trace output.")
def generate(t, seed, out, hist, trace_path):
    """Grow one network and print V, E, F and the max degree."""
    _check_writable(out, hist, trace_path)
    state = generate_state(t, seed, edges=out is not None, record_trace=trace_path is not None)
    h = degree_histogram(state)
    if out:
        formats.write_edge_list(state, out)
    if hist:
        formats.write_histogram(h, hist)
    if trace_path:
        formats.write_trace(state.trace, trace_path)
    click.echo(f"V={state.num_vertices} E={state.num_edges} F={state.num_faces} "
               f"max_degree={h.max_degree}")


@cli.command()
@click.option("--t", "t", type=Positive, required=True)
@click.option("--kmax", type=click.IntRange(min=3), required=True)
@click.option("--exact", is_flag=True, help="Exact rationals instead of floats.")
@click.option("--out", type=OutPath)
def expect(t, kmax, exact, out):
    """Recurrence values N_k(t), b_k t and e_k(t) as CSV."""
    _check_writable(out)
    if exact and t > expectations.DEFAULT_EXACT_CAP:
        raise CapacityError(f"--exact is capped at t={expectations.DEFAULT_EXACT_CAP}")
    table = expectations.recurrence_table(t, kmax, exact_t=t if exact else 0)
    _emit(table.to_csv(t, exact=exact), out)


@cli.command()
@click.option("--kmax", type=click.IntRange(min=3), required=True)
def limits(kmax):
    """Limit coefficients b_k as exact rationals."""
    for k in range(3, kmax + 1):
        click.echo(f"{k},{expectations.limit_coefficient(k)}")


@cli.command()
@click.option("--t", "t", type=Positive, required=True)
@click.option("--replicates", type=Positive, required=True)
@click.option("--seed", type=Seed, required=True)
@click.option("--workers", type=Positive, default=1, show_default=True)
@click.option("--out", type=OutPath)
def simulate(t, replicates, seed, workers, out):
    """Run replicates and write the summary JSON."""
    _check_writable(out)
    cfg = montecarlo.SimulationConfig(t, replicates, seed, workers)
    summary = montecarlo.simulation_summary(montecarlo.run_replicates(cfg))
    _emit(json.dumps(summary, indent=2) + "\n", out)


@cli.command("oracle")
@click.option("--t", "t", type=Positive, required=True)
@click.option("--out", type=OutPath)
def oracle_cmd(t, out):
    """Exact E[Z_k(t)] by enumeration, against the recurrence."""
    _check_writable(out)
    if t > oracle.ORACLE_T_CAP:
        raise CapacityError(f"oracle is capped at t={oracle.ORACLE_T_CAP} "
                            f"({oracle.trace_count(t)} traces requested)")
    _emit(oracle.oracle_csv(t), out)


@cli.command()
@click.option("--t", "t", type=Positive, required=True)
@click.option("--exhaustive", is_flag=True)
@click.option("--samples", type=Count)
@click.option("--seed", type=Seed)
@click.option("--out", type=OutPath)
def couple(t, exhaustive, samples, seed, out):
    """Check the bounded-difference coupling; prints JSON."""
    _check_writable(out)
    if exhaustive == (samples is not None):
        raise click.UsageError("give exactly one of --exhaustive or --samples")
    if exhaustive:
        if t > oracle.EXHAUSTIVE_COUPLING_T_CAP:
            raise CapacityError(
                f"exhaustive coupling is capped at t={oracle.EXHAUSTIVE_COUPLING_T_CAP}")
        report = oracle.exhaustive_coupling_check(t)
    else:
        if seed is None:
            raise click.UsageError("--samples needs --seed")
        report = oracle.sampled_coupling_check(t, samples, seed)
    _emit(report.to_json(), out)


@cli.command()
@click.option("--quick", is_flag=True, help="Shrink problem sizes by 10x.")
@click.option("--only", type=click.IntRange(1, len(acceptance.CRITERIA)), multiple=True,
              help="Run only these criterion numbers.")
def verify(quick, only):
    """Run the acceptance criteria; exit 0 iff all pass."""
    results = acceptance.run_all(quick, set(only), echo=click.echo)
    failed = [r.number for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if failed:
        raise VerificationFailed(f"failed criteria: {failed}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="ranet", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except CapacityError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_CAPACITY
    except DomainError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
