"""Command-line client for the oqslab experiment service.

Every subcommand builds a request model, dispatches it (in-process by
default, or to a running server via --server), and renders the response as
CSV: comma-separated, LF line endings, header row, floats with 17
significant digits.  A --json-meta sidecar records the resolved request and
the response metadata.  Exit codes: 0 ok, 2 configuration error, 3 numeric
failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
from pydantic import ValidationError

from .experiments import NumericFailure
from .ode import StepRefinementError
from .service import HANDLERS
from .service import schemas as sch

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def render_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(c) for c in row) for row in rows)
    return "\n".join(lines) + "\n"


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"config line without '=': {line!r}")
        key, _, raw = line.partition("=")
        raw = raw.strip()
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        out[key.strip()] = val
    return out


def _resolve(config_path, flags: dict) -> dict:
    params = _load_config(config_path)
    params.update({k: v for k, v in flags.items() if v is not None})
    return params


def _dispatch(route: str, params: dict, server: str | None):
    model_cls, handler = HANDLERS[route]
    try:
        req = model_cls(**params)
    except ValidationError as exc:
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "request"
            click.echo(f"config error: {loc}: {err['msg']}", err=True)
        sys.exit(EXIT_CONFIG)
    if server:
        import httpx

        resp = httpx.post(f"{server.rstrip('/')}/{route}", json=req.model_dump(),
                          timeout=600.0)
        if resp.status_code == 422:
            click.echo(f"config error: {resp.text}", err=True)
            sys.exit(EXIT_CONFIG)
        if resp.status_code >= 500:
            click.echo(f"numeric failure: {resp.text}", err=True)
            sys.exit(EXIT_NUMERIC)
        resp.raise_for_status()
        body = sch.TableResponse(**resp.json())
        return req, body
    try:
        return req, handler(req)
    except (NumericFailure, StepRefinementError) as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    except ValueError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _emit(req, resp: sch.TableResponse, output: str | None, json_meta: bool):
    text = render_csv(resp.header, resp.rows)
    if output:
        Path(output).write_text(text, encoding="utf-8", newline="")
        if json_meta:
            sidecar = Path(output).with_suffix(Path(output).suffix + ".meta.json")
            payload = {"request": req.model_dump(), "meta": resp.meta}
            sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                               encoding="utf-8")
    else:
        click.echo(text, nl=False)
        if json_meta:
            click.echo(json.dumps({"request": req.model_dump(), "meta": resp.meta},
                                  sort_keys=True), err=True)


def _common(fn):
    fn = click.option("--output", "-o", default=None, help="CSV output path (stdout default)")(fn)
    fn = click.option("--json-meta", is_flag=True, help="write resolved-config sidecar")(fn)
    fn = click.option("--server", default=None, help="dispatch to a running service URL")(fn)
    fn = click.option("--config", "config_path", default=None,
                      help="key=value config file; flags override")(fn)
    return fn


@click.group()
def main():
    """oqslab: open-quantum-system numerical laboratory."""


# -- weakmeas ---------------------------------------------------------------


@main.group()
def weakmeas():
    """Weak-measurement random walks."""


@weakmeas.command("walk")
@click.option("--p1", type=float, default=None, help="outcome-1 probability of the state")
@click.option("--eps", type=float, default=None, help="walk step size")
@click.option("--xcut", type=float, default=None, help="absorbing boundary X")
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--x0", type=float, default=None,
              help="interior starting coordinate; the walk then starts from "
                   "the matching curve state instead of diag(p1, 1-p1)")
@_common
def weakmeas_walk(config_path, server, json_meta, output, **flags):
    """Ensemble of walks; CSV: trial, outcome, steps, final_x."""
    req, resp = _dispatch("weakmeas/walk", _resolve(config_path, flags), server)
    _emit(req, resp, output, json_meta)


# -- monotone ---------------------------------------------------------------


@main.group()
def monotone():
    """Entanglement-monotone condition sweeps."""


@monotone.command("check")
@click.option("--name", type=click.Choice(["trace", "purity", "entropy", "phi_abc"]),
              default=None, required=False)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--h", type=float, default=None, help="probe scale")
@_common
def monotone_check(config_path, server, json_meta, output, **flags):
    """CSV: trial, condition, value, pass."""
    req, resp = _dispatch("monotone/check", _resolve(config_path, flags), server)
    _emit(req, resp, output, json_meta)


# -- spinbath ---------------------------------------------------------------


@main.group()
def spinbath():
    """Spin-bath dephasing: exact vs approximation methods."""


@spinbath.command("compare")
@click.option("--model", type=click.Choice(
    ["exact", "nz2", "nz3", "nz4", "tcl2", "tcl3", "tcl4", "pm", "cg"]), default=None)
@click.option("--n", type=int, default=None, help="bath spins")
@click.option("--beta", type=float, default=None, help="inverse temperature")
@click.option("--tmax", type=float, default=None, help="horizon in alpha*t")
@click.option("--steps", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--random", is_flag=True, default=None, help="random g_n, Omega_n in [-1,1]")
@click.option("--ensemble", type=int, default=None, help="ensemble size for --random")
@click.option("--g", type=float, default=None)
@click.option("--omega", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--tau", type=float, default=None, help="coarse-graining time (cg model)")
@_common
def spinbath_compare(config_path, server, json_meta, output, **flags):
    """CSV: alpha_t, vx_exact, vx_model, trace_distance."""
    req, resp = _dispatch("spinbath/compare", _resolve(config_path, flags), server)
    _emit(req, resp, output, json_meta)


# -- cqec --------------------------------------------------------------------


@main.group()
def cqec():
    """Continuous quantum error correction."""


@cqec.command("markov")
@click.option("--r", type=float, default=None, help="kappa / lambda")
@click.option("--tmax", type=float, default=None, help="horizon in lambda*t")
@click.option("--steps", type=int, default=None)
@_common
def cqec_markov(config_path, server, json_meta, output, **flags):
    """Three-qubit code under Markovian bit flips; CSV of mixture weights."""
    req, resp = _dispatch("cqec/markov", _resolve(config_path, flags), server)
    _emit(req, resp, output, json_meta)


@cqec.command("nonmarkov")
@click.option("--R", "r_big", type=float, default=None, help="kappa / gamma")
@click.option("--tmax", type=float, default=None, help="horizon in gamma*t")
@click.option("--steps", type=int, default=None)
@click.option("--log-grid", is_flag=True, default=None)
@_common
def cqec_nonmarkov(config_path, server, json_meta, output, r_big, **flags):
    """Codeword fidelity of the non-Markovian three-qubit model."""
    flags["R"] = r_big
    req, resp = _dispatch("cqec/nonmarkov", _resolve(config_path, flags), server)
    _emit(req, resp, output, json_meta)


@cqec.command("single")
@click.option("--kind", type=click.Choice(["markov", "nonmarkov"]), default=None)
@click.option("--ratio", type=float, default=None, help="r or R")
@click.option("--tmax", type=float, default=None)
@click.option("--steps", type=int, default=None)
@_common
def cqec_single(config_path, server, json_meta, output, **flags):
    """Single-qubit code fidelity trajectory."""
    req, resp = _dispatch("cqec/single", _resolve(config_path, flags), server)
    _emit(req, resp, output, json_meta)


@cqec.command("eigen")
@click.option("--R", "r_big", type=float, default=None, help="kappa / gamma")
@_common
def cqec_eigen(config_path, server, json_meta, output, r_big):
    """13 generator eigenvalues sorted by magnitude; CSV: re, im."""
    flags = {"R": r_big}
    req, resp = _dispatch("cqec/eigen", _resolve(config_path, flags), server)
    _emit(req, resp, output, json_meta)


# -- subsys -------------------------------------------------------------------


@main.group()
def subsys():
    """Subsystem-code fidelity F^A."""


@subsys.command("fa")
@click.option("--dims", default=None, help="d_A,d_B,d_K  (e.g. 2,2,2)")
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@_common
def subsys_fa(config_path, server, json_meta, output, dims, **flags):
    """Blocked-noise monotonicity sampling; CSV: trial, fa_before, fa_after, pass."""
    if dims is not None:
        try:
            d_a, d_b, d_k = (int(x) for x in dims.split(","))
        except ValueError:
            click.echo("config error: --dims expects three comma-separated ints", err=True)
            sys.exit(EXIT_CONFIG)
        flags.update({"d_a": d_a, "d_b": d_b, "d_k": d_k})
    req, resp = _dispatch("subsys/fa", _resolve(config_path, flags), server)
    _emit(req, resp, output, json_meta)


# -- holonomy ------------------------------------------------------------------


@main.group()
def holonomy():
    """Holonomic gate constructions."""


@holonomy.command("run")
@click.option("--gate", type=click.Choice(["z", "x", "hadamard", "phase", "cnot"]),
              default=None)
@click.option("--T", "t_factor", type=float, default=None,
              help="segment duration in units of T_d")
@click.option("--schedule", type=click.Choice(["linear", "trig", "smooth"]), default=None)
@click.option("--steps", type=int, default=None, help="integration steps per segment")
@_common
def holonomy_run(config_path, server, json_meta, output, t_factor, **flags):
    """CSV: T, leakage, gate_fidelity, phase0, phase1."""
    flags["T"] = t_factor
    req, resp = _dispatch("holonomy/run", _resolve(config_path, flags), server)
    _emit(req, resp, output, json_meta)


# -- figure bundles -------------------------------------------------------------


@main.command("reproduce")
@click.argument("figure_id")
@click.option("--outdir", "-o", default=".", help="directory for the CSV bundle")
@click.option("--server", default=None)
def reproduce_cmd(figure_id, outdir, server):
    """Emit the data series needed to re-plot a named figure."""
    if server:
        import httpx

        resp = httpx.post(f"{server.rstrip('/')}/reproduce/{figure_id}", timeout=600.0)
        if resp.status_code == 404:
            click.echo(f"config error: {resp.json().get('detail')}", err=True)
            sys.exit(EXIT_CONFIG)
        resp.raise_for_status()
        bundle = sch.BundleResponse(**resp.json())
    else:
        from .service.app import run_reproduce

        try:
            bundle = run_reproduce(figure_id)
        except ValueError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for series in bundle.series:
        path = out / f"{figure_id}__{series.name}.csv"
        path.write_text(render_csv(series.header, series.rows), encoding="utf-8", newline="")
        click.echo(str(path))


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the experiment service with uvicorn."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
