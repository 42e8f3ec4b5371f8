"""Command-line interface.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
parse errors.  All subcommands accept ``-`` for stdin and print JSON or a
table to stdout, so they compose in pipelines.
"""

from __future__ import annotations

import json
import sys
from typing import Optional

import click

from .channels import transfer_from_kraus
from .deconvolution import GuessPair, correctable_family, evaluate, guess_sweep, verify_family
from .errors import QdeconvError, SpecParseError, UnknownScenarioError
from .quorum import deconvolved_estimate, quorum_basis, tensor_product_quorum
from .scenarios import emit_report, run_scenario, scenario_names
from .serialization import (
    emit_family,
    parse_channel_spec,
    parse_family,
    parse_hermitian_matrix,
)

DEFAULT_SEED = 1234


def _read_source(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise click.UsageError(f"cannot read {path}: {exc}")


def _load_transfer(path: str):
    try:
        spec = parse_channel_spec(_read_source(path))
    except SpecParseError as exc:
        raise click.UsageError(f"{path}: {exc}")
    return transfer_from_kraus(spec.to_kraus_channel())


def _guess_pair(true_path: str, guess_path: str, sv_cutoff: float) -> GuessPair:
    phi = _load_transfer(true_path)
    phi_g = _load_transfer(guess_path)
    try:
        return GuessPair.from_transfers(phi, phi_g, sv_cutoff)
    except QdeconvError as exc:
        raise click.UsageError(str(exc))


@click.group()
@click.option("--tol", type=float, default=1e-9, show_default=True, help="Tolerance for verification checks.")
@click.option("--kernel-tol", type=float, default=1e-8, show_default=True, help="Relative singular-value threshold for kernel extraction.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, envvar="QDECONV_SEED", help="Random seed (flag beats the QDECONV_SEED environment variable).")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table", show_default=True, help="Report format.")
@click.pass_context
def main(ctx: click.Context, tol: float, kernel_tol: float, seed: int, fmt: str) -> None:
    """Recover expectation values under partially known quantum noise."""
    ctx.ensure_object(dict)
    ctx.obj.update(tol=tol, kernel_tol=kernel_tol, seed=seed, fmt=fmt)


@main.command()
@click.argument("true_spec")
@click.argument("guess_spec")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Write the family JSON here instead of stdout.")
@click.pass_context
def deconvolve(ctx: click.Context, true_spec: str, guess_spec: str, output: Optional[str]) -> None:
    """Extract the correctable observable family for TRUE_SPEC under GUESS_SPEC."""
    gp = _guess_pair(true_spec, guess_spec, sv_cutoff=ctx.obj["kernel_tol"])
    try:
        fam = correctable_family(gp, ctx.obj["kernel_tol"])
    except QdeconvError as exc:
        raise click.ClickException(str(exc))
    text = emit_family(fam)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


@main.command()
@click.argument("family")
@click.argument("true_spec")
@click.argument("guess_spec")
@click.option("--states", type=int, default=100, show_default=True, help="Number of random states to draw.")
@click.pass_context
def verify(ctx: click.Context, family: str, true_spec: str, guess_spec: str, states: int) -> None:
    """Monte-Carlo check that FAMILY is exactly recovered for TRUE/GUESS."""
    try:
        fam = parse_family(_read_source(family))
    except SpecParseError as exc:
        raise click.UsageError(f"{family}: {exc}")
    gp = _guess_pair(true_spec, guess_spec, sv_cutoff=ctx.obj["kernel_tol"])
    max_delta = verify_family(gp, fam, states, ctx.obj["seed"])
    passed = max_delta <= ctx.obj["tol"]
    doc = {
        "max_delta_nd": max_delta,
        "states": states,
        "seed": ctx.obj["seed"],
        "tolerance": ctx.obj["tol"],
        "passed": passed,
    }
    if ctx.obj["fmt"] == "json":
        click.echo(json.dumps(doc, indent=2))
    else:
        marker = "PASS" if passed else "FAIL"
        click.echo(
            f"[{marker}] max recovery deviation {max_delta:.3e} over {states} states "
            f"(tol {ctx.obj['tol']:.1e}, seed {ctx.obj['seed']})"
        )
    if not passed:
        ctx.exit(1)


@main.command()
@click.argument("observable")
@click.argument("state")
@click.argument("true_spec")
@click.argument("guess_spec")
@click.option("--shots", type=int, default=10000, show_default=True, help="Shots per quorum element; 0 uses exact traces.")
@click.option("--quorum-dim", type=int, default=None, help="Tensor-factor dimension for the quorum (must divide the system dimension as a power; defaults to the full dimension).")
@click.pass_context
def estimate(ctx: click.Context, observable: str, state: str, true_spec: str, guess_spec: str, shots: int, quorum_dim: Optional[int]) -> None:
    """Estimate the deconvolved expectation of OBSERVABLE on STATE from shots."""
    try:
        A = parse_hermitian_matrix(_read_source(observable), "observable")
        rho = parse_hermitian_matrix(_read_source(state), "state")
    except SpecParseError as exc:
        raise click.UsageError(str(exc))
    gp = _guess_pair(true_spec, guess_spec, sv_cutoff=ctx.obj["kernel_tol"])
    d = gp.dim

    if quorum_dim is None or quorum_dim == d:
        qb = quorum_basis(d)
    else:
        factors = 0
        size = 1
        while size < d:
            size *= quorum_dim
            factors += 1
        if size != d or factors < 1:
            raise click.UsageError(f"--quorum-dim {quorum_dim} is not a tensor root of dimension {d}")
        qb = tensor_product_quorum(quorum_basis(quorum_dim), factors)

    try:
        est = deconvolved_estimate(gp, A, rho, qb, shots, ctx.obj["seed"])
        exact = evaluate(gp, A, rho)
    except (QdeconvError, ValueError) as exc:
        raise click.UsageError(str(exc))
    doc = {
        "mean": est.mean,
        "std_error": est.std_error,
        "shots_per_element": est.shots,
        "seed": est.seed,
        "exact_deconvolved": exact.deconvolved,
        "exact_ideal": exact.ideal,
    }
    if ctx.obj["fmt"] == "json":
        click.echo(json.dumps(doc, indent=2))
    else:
        click.echo(
            f"estimate {est.mean:.6f} +- {est.std_error:.6f} "
            f"(exact deconvolved {exact.deconvolved:.6f}, ideal {exact.ideal:.6f})"
        )


@main.command()
@click.argument("true_spec")
@click.argument("candidates", nargs=-1, required=True)
@click.pass_context
def sweep(ctx: click.Context, true_spec: str, candidates: tuple[str, ...]) -> None:
    """Rank candidate guess channels by correctable-family size."""
    phi = _load_transfer(true_spec)
    cand_transfers = [_load_transfer(path) for path in candidates]
    ranking = guess_sweep(phi, cand_transfers, ctx.obj["kernel_tol"])
    rows = [
        {"rank": i, "candidate": candidates[idx], "index": idx, "n_params": n}
        for i, (idx, n) in enumerate(ranking)
    ]
    if ctx.obj["fmt"] == "json":
        click.echo(json.dumps(rows, indent=2))
    else:
        for row in rows:
            note = "singular guess" if row["n_params"] < 0 else f"{row['n_params']} parameters"
            click.echo(f"{row['rank']:>3}  {row['candidate']}  {note}")


@main.group()
def examples() -> None:
    """Run or list the built-in reference scenarios."""


@examples.command("list")
@click.pass_context
def examples_list(ctx: click.Context) -> None:
    """List registered scenario names."""
    names = scenario_names()
    if ctx.obj["fmt"] == "json":
        click.echo(json.dumps(names, indent=2))
    else:
        for name in names:
            click.echo(name)


def _parse_override(kv: str) -> tuple[str, object]:
    if "=" not in kv:
        raise click.UsageError(f"override {kv!r} is not KEY=VALUE")
    key, raw = kv.split("=", 1)
    for cast in (int, float):
        try:
            return key, cast(raw)
        except ValueError:
            continue
    raise click.UsageError(f"override {kv!r} has a non-numeric value")


@examples.command("run")
@click.argument("name")
@click.option("--set", "assignments", multiple=True, metavar="KEY=VALUE", help="Override a scenario parameter (repeatable).")
@click.pass_context
def examples_run(ctx: click.Context, name: str, assignments: tuple[str, ...]) -> None:
    """Run scenario NAME and report its checks."""
    overrides = dict(_parse_override(kv) for kv in assignments)
    if "seed" not in overrides and ctx.obj["seed"] != DEFAULT_SEED:
        overrides["seed"] = ctx.obj["seed"]
    try:
        result = run_scenario(name, overrides, kernel_tol=ctx.obj["kernel_tol"])
    except UnknownScenarioError as exc:
        raise click.UsageError(str(exc))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(emit_report(result, ctx.obj["fmt"]))
    if not result.passed:
        ctx.exit(1)


if __name__ == "__main__":
    main()
