"""Command-line client for the simulation service.

By default every command talks to the service in-process over an ASGI
transport, so no server needs to be running; pass ``--server URL`` to target
a live instance instead.  Options resolve as: built-in defaults, then the
``--config`` key=value file, then explicit flags.

Exit codes: 0 success, 2 configuration/validation failure, 3 numeric failure.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path
from typing import Optional

import click
import httpx

from . import __version__

CONFIG_KEYS = {
    "pool_m1": int,
    "pool_m2": int,
    "base_mass1": float,
    "p1": float,
    "beta": float,
    "delta": float,
    "set_size": int,
    "num_data": int,
    "seeds": int,
    "master_seed": int,
    "data_grid": str,
    "m2_grid": str,
    "set_sizes": str,
}


def _post_request(server: Optional[str], path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)

    # In-process mode: drive the ASGI app directly, no server required.
    from . import service

    async def call() -> httpx.Response:
        transport = httpx.ASGITransport(app=service.app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://prefsim.internal", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(call())


def _parse_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}:{lineno}: expected key = value")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in CONFIG_KEYS:
            raise click.UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise click.UsageError(f"{path}:{lineno}: bad value for {key!r}: {value!r}")
    return values


def _parse_grid(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.UsageError(f"grids must be comma-separated integers, got {text!r}")


def _resolve(defaults: dict, config_path: Optional[str], flags: dict) -> dict:
    resolved = dict(defaults)
    if config_path:
        file_values = _parse_config_file(config_path)
        resolved.update({k: v for k, v in file_values.items() if k in resolved})
    resolved.update({k: v for k, v in flags.items() if v is not None})
    return resolved


def _post(server: Optional[str], path: str, payload: dict) -> dict:
    response = _post_request(server, path, payload)
    if response.status_code in (400, 422):
        click.echo(f"invalid configuration: {response.json().get('detail')}", err=True)
        sys.exit(2)
    if response.status_code >= 500:
        click.echo(f"numeric failure: {response.text}", err=True)
        sys.exit(3)
    return response.json()


def _write_or_print(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _write_metadata(out: str, metadata: dict) -> None:
    Path(out + ".meta.json").write_text(json.dumps(metadata, sort_keys=True, indent=2) + "\n")


def shared_options(fn):
    options = [
        click.option("--pool-m1", "pool_m1", type=int, default=None, help="Category-1 pool size."),
        click.option("--pool-m2", "pool_m2", type=int, default=None, help="Category-2 pool size."),
        click.option("--base-mass1", "base_mass1", type=float, default=None, help="Base-policy mass on category 1."),
        click.option("--p1", type=float, default=None, help="Probability of individual type 1."),
        click.option("--beta", type=float, default=None, help="KL regularization weight."),
        click.option("--delta", type=float, default=None, help="Calibration hinge margin."),
        click.option("--set-size", "set_size", type=int, default=None, help="Alternatives per query."),
        click.option("--num-data", "num_data", type=int, default=None, help="Records per dataset."),
        click.option("--seeds", type=int, default=None, help="Replicates per sweep point."),
        click.option("--master-seed", "master_seed", type=int, default=None, help="Root of all random streams."),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (stdout if omitted)."),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="key = value defaults file."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


_DEFAULTS = {
    "pool_m1": 10,
    "pool_m2": 100,
    "base_mass1": 0.8,
    "p1": 0.6,
    "beta": 1.0,
    "delta": 1.0,
    "set_size": 2,
    "num_data": 100000,
    "seeds": 100,
    "master_seed": 0,
    "data_grid": "100,316,1000,3162,10000",
    "m2_grid": "10,100,1000,10000",
    "set_sizes": "2,3,4,5",
}


@click.group()
@click.version_option(version=__version__)
@click.option("--server", default=None, envvar="PREFSIM_SERVER", help="Remote service URL; in-process if omitted.")
@click.pass_context
def main(ctx: click.Context, server: Optional[str]) -> None:
    """Preference-simulation sweeps, fits, and theory checks."""
    ctx.obj = server


def _sweep_command(ctx, algorithm: str, grid_key: str, grid_flag: Optional[str], config_path, out, **flags):
    resolved = _resolve(_DEFAULTS, config_path, flags)
    if grid_flag is not None:
        resolved[grid_key] = grid_flag
    payload = {
        "pool_m1": resolved["pool_m1"],
        "pool_m2": resolved["pool_m2"],
        "base_mass1": resolved["base_mass1"],
        "p1": resolved["p1"],
        "beta": resolved["beta"],
        "delta": resolved["delta"],
        "set_size": resolved["set_size"],
        "num_data": resolved["num_data"],
        "num_seeds": resolved["seeds"],
        "master_seed": resolved["master_seed"],
        grid_key: _parse_grid(resolved[grid_key]),
    }
    body = _post(ctx.obj, f"/sweeps/{algorithm}", payload)
    _write_or_print(body["csv_text"], out)
    if out:
        _write_metadata(out, body["metadata"])
        click.echo(f"wrote {out} ({len(body['rows'])} points, config {body['config_hash']})")


@main.command("sweep-rlpo")
@shared_options
@click.option("--data-grid", "data_grid", default=None, help="Comma-separated dataset sizes.")
@click.pass_context
def sweep_rlpo(ctx, config_path, out, data_grid, **flags):
    """Sweep dataset size with the reward-then-policy fit."""
    _sweep_command(ctx, "rlpo", "data_grid", data_grid, config_path, out, **flags)


@main.command("sweep-dpo")
@shared_options
@click.option("--data-grid", "data_grid", default=None, help="Comma-separated dataset sizes.")
@click.pass_context
def sweep_dpo(ctx, config_path, out, data_grid, **flags):
    """Sweep dataset size with the direct-preference fit."""
    _sweep_command(ctx, "dpo", "data_grid", data_grid, config_path, out, **flags)


@main.command("sweep-il")
@shared_options
@click.option("--m2-grid", "m2_grid", default=None, help="Comma-separated category-2 pool sizes.")
@click.pass_context
def sweep_il(ctx, config_path, out, m2_grid, **flags):
    """Sweep the category-2 pool size with the inclusive fit."""
    _sweep_command(ctx, "il", "m2_grid", m2_grid, config_path, out, **flags)


@main.command("sweep-slic")
@shared_options
@click.option("--m2-grid", "m2_grid", default=None, help="Comma-separated category-2 pool sizes.")
@click.pass_context
def sweep_slic(ctx, config_path, out, m2_grid, **flags):
    """Sweep the category-2 pool size with the calibration fit."""
    _sweep_command(ctx, "slic", "m2_grid", m2_grid, config_path, out, **flags)


@main.command("gen-data")
@shared_options
@click.pass_context
def gen_data(ctx, config_path, out, **flags):
    """Sample one preference dataset and emit its sufficient statistics."""
    resolved = _resolve(_DEFAULTS, config_path, flags)
    payload = {
        "pool_m1": resolved["pool_m1"],
        "pool_m2": resolved["pool_m2"],
        "base_mass1": resolved["base_mass1"],
        "p1": resolved["p1"],
        "set_size": resolved["set_size"],
        "num_data": resolved["num_data"],
        "master_seed": resolved["master_seed"],
    }
    body = _post(ctx.obj, "/datasets/generate", payload)
    _write_or_print(body["stats_text"], out)
    if out:
        click.echo(
            f"wrote {out}: {body['num_data']} records, set size {body['set_size']}, "
            f"rho_chosen={body['rho_chosen']:.6f}, rho_data={body['rho_data']:.6f}"
        )


@main.command("fit")
@click.argument("algorithm", type=click.Choice(["rlpo", "dpo", "il", "slic"]))
@click.argument("stats_file", type=click.Path(exists=True, dir_okay=False))
@shared_options
@click.pass_context
def fit_command(ctx, algorithm, stats_file, config_path, out, **flags):
    """Fit one algorithm on a sufficient-statistics file."""
    resolved = _resolve(_DEFAULTS, config_path, flags)
    payload = {
        "algorithm": algorithm,
        "stats_text": Path(stats_file).read_text(),
        "pool_m1": resolved["pool_m1"],
        "pool_m2": resolved["pool_m2"],
        "base_mass1": resolved["base_mass1"],
        "p1": resolved["p1"],
        "beta": resolved["beta"],
        "delta": resolved["delta"],
    }
    body = _post(ctx.obj, "/fit", payload)
    lines = [
        f"algorithm: {body['algorithm']}",
        f"p_m1: {body['p_m1']!r}",
        f"policy_gap: {body['param_gap']!r}",
        f"loss: {body['loss']!r}",
        f"converged: {body['converged']}",
        f"minimizer_exists: {body['minimizer_exists']}",
    ]
    if body.get("reward_gap") is not None:
        lines.insert(2, f"reward_gap: {body['reward_gap']!r}")
    text = "\n".join(lines) + "\n"
    click.echo(text, nl=False)
    if out:
        Path(out).write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")


@main.command("theory-check")
@shared_options
@click.option("--set-sizes", "set_sizes", default=None, help="Comma-separated set sizes to evaluate.")
@click.option("--data-grid", "data_grid", default=None, help="Comma-separated dataset sizes for event rates.")
@click.pass_context
def theory_check(ctx, config_path, out, set_sizes, data_grid, **flags):
    """Print failure predictions and observed event frequencies."""
    resolved = _resolve(_DEFAULTS, config_path, flags)
    if set_sizes is not None:
        resolved["set_sizes"] = set_sizes
    if data_grid is not None:
        resolved["data_grid"] = data_grid
    payload = {
        "pool_m1": resolved["pool_m1"],
        "pool_m2": resolved["pool_m2"],
        "base_mass1": resolved["base_mass1"],
        "p1": resolved["p1"],
        "beta": resolved["beta"],
        "set_size": resolved["set_size"],
        "set_sizes": _parse_grid(resolved["set_sizes"]),
        "data_grid": _parse_grid(resolved["data_grid"]),
        "num_seeds": resolved["seeds"],
        "master_seed": resolved["master_seed"],
    }
    body = _post(ctx.obj, "/theory/check", payload)
    click.echo(body["report_text"], nl=False)
    if out:
        Path(out).write_text(body["report_text"])


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the service under uvicorn."""
    import uvicorn

    from . import service

    uvicorn.run(service.app, host=host, port=port)


if __name__ == "__main__":
    main()
