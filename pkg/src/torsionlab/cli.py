"""Command-line front end: a thin client over the HTTP service.

By default the commands talk to an in-process application instance, so no
server needs to be running; ``--server URL`` redirects every request to a
remote deployment instead.  Exit codes: 0 success, 1 the analysis found a
violation, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import json
import sys

import click

from . import jsonio

EXIT_VIOLATION = 1
EXIT_NUMERICAL = 3


class ServiceClient:
    """POSTs JSON either in-process or to a remote server."""

    def __init__(self, server=None):
        self.server = server
        self._client = None

    def post(self, path, payload):
        if self._client is None:
            if self.server is None:
                import warnings

                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    from starlette.testclient import TestClient

                from .service import create_app

                self._client = TestClient(
                    create_app(), raise_server_exceptions=False
                )
                self._base = ""
            else:
                import httpx

                self._client = httpx.Client(timeout=600.0)
                self._base = self.server.rstrip("/")
        try:
            resp = self._client.post(self._base + path, json=payload)
        except Exception as exc:
            click.echo(f"error: cannot reach service: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        return resp.status_code, resp.json()


def _handle_errors(status, body):
    if status == 200:
        return
    detail = body.get("detail", body)
    if isinstance(detail, dict) and detail.get("kind") == "numerical":
        click.echo(f"error: {detail.get('message', detail)}", err=True)
        sys.exit(EXIT_NUMERICAL)
    raise click.UsageError(f"service rejected the request: {detail}")


def _parse_floats(text, name):
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError:
        raise click.UsageError(f"--{name} expects comma-separated numbers")


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(doc, dict):
        raise click.UsageError("config file must hold a JSON object")
    return doc


def _payload(config_path, **overrides):
    """Config-file values overridden by explicitly given CLI flags."""
    payload = _load_config(config_path)
    payload.update({k: v for k, v in overrides.items() if v is not None})
    return payload


def _emit(doc, out):
    text = jsonio.dumps(doc)
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def problem_options(fn):
    fn = click.option("--preset", type=str, default=None, help="disk | ellipse | square | paper-triangle")(fn)
    fn = click.option("--a", "a_text", type=str, default=None, help="ellipse coefficients, e.g. 1.5,0.5")(fn)
    fn = click.option("--domain", "domain_text", type=str, default=None, help="domain JSON document")(fn)
    fn = click.option("--h", type=float, default=None, help="grid spacing")(fn)
    fn = click.option("--solver-tol", type=float, default=None)(fn)
    fn = click.option("--source", type=click.Choice(["auto", "analytic", "solved"]), default=None)(fn)
    fn = click.option("--config", "config_path", type=click.Path(), default=None, help="JSON file with request defaults")(fn)
    fn = click.option("--out", type=click.Path(), default=None, help="output JSON path (default: stdout)")(fn)
    return fn


def _problem_fields(preset, a_text, domain_text, h, solver_tol, source):
    fields = {
        "preset": preset,
        "h": h,
        "solver_tol": solver_tol,
        "source": source,
    }
    if a_text is not None:
        fields["a"] = _parse_floats(a_text, "a")
    if domain_text is not None:
        try:
            fields["domain"] = json.loads(domain_text)
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"--domain is not valid JSON: {exc}")
    return fields


@click.group()
@click.option("--server", default=None, help="base URL of a running service")
@click.pass_context
def main(ctx, server):
    """Torsion functions of convex domains: solve, analyze, decompose."""
    ctx.obj = ServiceClient(server)


@main.command()
@problem_options
@click.option("--field-csv", type=click.Path(), default=None, help="write the field as x,y,value CSV")
@click.pass_obj
def solve(client, preset, a_text, domain_text, h, solver_tol, source, config_path, out, field_csv):
    """Solve the torsion problem and write a summary."""
    payload = _payload(
        config_path,
        **_problem_fields(preset, a_text, domain_text, h, solver_tol, source),
        include_field=bool(field_csv) or None,
    )
    status, body = client.post("/solve", payload)
    _handle_errors(status, body)
    if field_csv:
        with open(field_csv, "w") as fh:
            fh.write(body["field_csv"])
    _emit({"summary": body["summary"], "config": body["config"]}, out)


@main.command()
@problem_options
@click.option(
    "--check",
    type=click.Choice(
        ["alpha-star", "property-a", "local-property-a", "power-concave", "serrin", "level-set-bound"]
    ),
    default=None,
)
@click.option("--alpha", type=float, default=None)
@click.option("--eps", type=float, default=None)
@click.option("--x0", "x0_text", type=str, default=None, help="ball center, e.g. 0.2,0.1")
@click.option("--radius", "ball_radius", type=float, default=None, help="ball radius for local checks")
@click.option("--seed", type=int, default=None)
@click.option("--margin", type=float, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--bisection-tol", type=float, default=None)
@click.pass_obj
def analyze(client, preset, a_text, domain_text, h, solver_tol, source, config_path, out,
            check, alpha, eps, x0_text, ball_radius, seed, margin, tol, bisection_tol):
    """Run a concavity / boundary diagnostic and write its report."""
    payload = _payload(
        config_path,
        **_problem_fields(preset, a_text, domain_text, h, solver_tol, source),
        check=check,
        alpha=alpha,
        eps=eps,
        ball_radius=ball_radius,
        seed=seed,
        margin=margin,
        tol=tol,
        bisection_tol=bisection_tol,
    )
    if x0_text is not None:
        payload["x0"] = _parse_floats(x0_text, "x0")
    if "check" not in payload:
        raise click.UsageError("--check is required (or set it in --config)")
    status, body = client.post("/analyze", payload)
    _handle_errors(status, body)
    _emit(body, out)
    if body["violation_found"]:
        sys.exit(EXIT_VIOLATION)


@main.command()
@problem_options
@click.option("--n-radii", type=int, default=None)
@click.option("--n-angles", type=int, default=None)
@click.option("--max-mode", type=int, default=None)
@click.pass_obj
def harmonic(client, preset, a_text, domain_text, h, solver_tol, source, config_path, out,
             n_radii, n_angles, max_mode):
    """Decompose the deviation from the osculating quadratic into circular modes."""
    payload = _payload(
        config_path,
        **_problem_fields(preset, a_text, domain_text, h, solver_tol, source),
        n_radii=n_radii,
        n_angles=n_angles,
        max_mode=max_mode,
    )
    status, body = client.post("/harmonic", payload)
    _handle_errors(status, body)
    _emit(body, out)
    if body["violation_found"]:
        sys.exit(EXIT_VIOLATION)


if __name__ == "__main__":
    main()
