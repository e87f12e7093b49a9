"""Command line client for the alignment service.

All subcommands talk HTTP to the service; by default an in-process instance
is used, so no server needs to be running. Pass --server to target a remote
deployment instead.
"""

from __future__ import annotations

import json
import sys
from typing import Optional

import click
import httpx


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # In-process transport: drive the ASGI app directly, no server needed.
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(ctx: click.Context, path: str, payload: dict) -> dict:
    with _client(ctx.obj.get("server")) as client:
        response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(f"{path} failed ({response.status_code}): {detail}")
    return response.json()


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.readlines()


def _load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _alignment_payload(path: str) -> list[dict]:
    pairs = []
    for raw in _read_lines(path):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3):
            raise click.ClickException(f"malformed alignment line {raw!r}")
        entry = {"foreign": parts[0], "own": parts[1]}
        if len(parts) == 3:
            entry["confidence"] = int(parts[2])
        pairs.append(entry)
    return pairs


def _write_json(path: str, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; in-process by default.")
@click.pass_context
def main(ctx: click.Context, server: Optional[str]) -> None:
    """Generate, check and run interaction protocols for vocabulary alignment."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--vocab-size", type=int, required=True)
@click.option("--constraints", "n_constraints", type=int, required=True)
@click.option("--bound", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Protocol JSON output; stdout if omitted.")
@click.option("--pair-out", type=click.Path(dir_okay=False), default=None, help="Also generate a compatible partner protocol here.")
@click.option("--alignment-out", type=click.Path(dir_okay=False), default=None, help="Write the pair's ground-truth alignment CSV here.")
@click.pass_context
def gen(
    ctx: click.Context,
    vocab_size: int,
    n_constraints: int,
    bound: int,
    seed: int,
    out: Optional[str],
    pair_out: Optional[str],
    alignment_out: Optional[str],
) -> None:
    """Generate a random satisfiable protocol (optionally a compatible pair)."""
    payload = {
        "vocab_size": vocab_size,
        "n_constraints": n_constraints,
        "bound": bound,
        "seed": seed,
    }
    if pair_out or alignment_out:
        if not (pair_out and alignment_out):
            raise click.ClickException("--pair-out and --alignment-out must be given together")
        data = _post(ctx, "/pairs/generate", payload)
        protocol = data["protocol_a"]
        _write_json(pair_out, data["protocol_b"])
        with open(alignment_out, "w", encoding="utf-8") as fh:
            for pair in data["alignment"]:
                fh.write(f"{pair['foreign']},{pair['own']},{pair['confidence']}\n")
    else:
        protocol = _post(ctx, "/protocols/generate", payload)["protocol"]
    if out:
        _write_json(out, protocol)
    else:
        click.echo(json.dumps(protocol, indent=2))


@main.command()
@click.option("--protocol", "protocol_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--trace", default="", help="Comma-separated messages, e.g. 'A1:hello,A2:world'.")
@click.pass_context
def check(ctx: click.Context, protocol_path: str, trace: str) -> None:
    """Check a trace against a protocol; exits non-zero if not a partial model."""
    messages = [part.strip() for part in trace.split(",") if part.strip()]
    data = _post(
        ctx,
        "/protocols/check",
        {"protocol": _load_json(protocol_path), "trace": messages},
    )
    click.echo(json.dumps(data, indent=2))
    if not data["is_partial_model"]:
        sys.exit(1)


@main.command()
@click.option("--protocol-a", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--protocol-b", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--alignment", type=click.Path(exists=True, dir_okay=False), required=True, help="Ground truth used only for scoring.")
@click.option("--strategy", type=click.Choice(["simple", "reasoning"]), default="simple", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None, help="Write a per-message JSON log here.")
@click.pass_context
def run(
    ctx: click.Context,
    protocol_a: str,
    protocol_b: str,
    alignment: str,
    strategy: str,
    seed: int,
    log_path: Optional[str],
) -> None:
    """Run one interaction between two fresh agents and report the outcome."""
    data = _post(
        ctx,
        "/interactions/run",
        {
            "protocol_a": _load_json(protocol_a),
            "protocol_b": _load_json(protocol_b),
            "alignment": _alignment_payload(alignment),
            "strategy": strategy,
            "seed": seed,
            "collect_log": log_path is not None,
        },
    )
    if log_path:
        _write_json(log_path, {"log": data["log"]})
    click.echo(json.dumps({k: v for k, v in data.items() if k != "log"}, indent=2))
    if data["status"].startswith("failure"):
        sys.exit(1)


@main.group()
def exp() -> None:
    """Multi-repetition alignment experiments."""


def _experiment_options(fn):
    fn = click.option("--vocab-size", type=int, default=10, show_default=True)(fn)
    fn = click.option("--constraints", "n_constraints", type=int, default=10, show_default=True)(fn)
    fn = click.option("--interactions", type=int, default=200, show_default=True)(fn)
    fn = click.option("--repetitions", type=int, default=10, show_default=True)(fn)
    fn = click.option("--strategy", type=click.Choice(["simple", "reasoning"]), default="reasoning", show_default=True)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--bound", type=int, default=None, help="Defaults to the vocabulary size.")(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV output path; stdout if omitted.")(fn)
    return fn


def _run_experiment(ctx: click.Context, path: str, payload: dict, out: Optional[str]) -> None:
    data = _post(ctx, path, payload)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(data["csv"])
    else:
        click.echo(data["csv"], nl=False)
    summary = {
        "reached_08_at": data["reached_08_at"],
        "final_mean_f_score": data["final_mean_f_score"],
    }
    click.echo(json.dumps(summary), err=True)


@exp.command()
@_experiment_options
@click.pass_context
def convergence(
    ctx: click.Context,
    vocab_size: int,
    n_constraints: int,
    interactions: int,
    repetitions: int,
    strategy: str,
    seed: int,
    bound: Optional[int],
    out: Optional[str],
) -> None:
    """Learn an alignment from scratch over repeated random tasks."""
    _run_experiment(
        ctx,
        "/experiments/convergence",
        {
            "vocab_size": vocab_size,
            "n_constraints": n_constraints,
            "n_interactions": interactions,
            "n_repetitions": repetitions,
            "strategy": strategy,
            "seed": seed,
            "bound": bound,
        },
        out,
    )


@exp.command()
@_experiment_options
@click.option("--quality", type=float, required=True, help="Precision/recall of the prior alignment to repair.")
@click.pass_context
def repair(
    ctx: click.Context,
    vocab_size: int,
    n_constraints: int,
    interactions: int,
    repetitions: int,
    strategy: str,
    seed: int,
    bound: Optional[int],
    out: Optional[str],
    quality: float,
) -> None:
    """Repair a prior alignment of the given quality."""
    _run_experiment(
        ctx,
        "/experiments/repair",
        {
            "vocab_size": vocab_size,
            "n_constraints": n_constraints,
            "n_interactions": interactions,
            "n_repetitions": repetitions,
            "strategy": strategy,
            "seed": seed,
            "bound": bound,
            "quality": quality,
        },
        out,
    )


if __name__ == "__main__":
    main()
