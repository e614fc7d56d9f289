"""Command-line harness: ``bergtilde <command> [options]``.

Every output starts with a header naming the command, its full configuration
and the units of each column: the first CSV line is ``# {json}``, JSON output
carries a ``header`` object.  Outputs are deterministic for a fixed
configuration and seed.

Exit status: 0 success, 1 a failed acceptance check (``report``), 2 usage
error, 3 numerical failure (diagnostics as JSON on stderr).
"""
from __future__ import annotations

import csv
import functools
import io
import json
import math
import sys

import click
import numpy as np

from . import __version__, acceptance, criterion, geodesy, green, metrics, rkhs, wedge
from .domains import (DomainSpec, approach_sequence, as_point, as_points, default_anchor, parse_complex_point,
                      parse_domain, points_text, sample_interior)
from .errors import NumericalFailure, OptimizerError

EXIT_CHECK_FAILED = 1
EXIT_NUMERICAL = 3


class DomainParam(click.ParamType):
    name = "domain"

    def convert(self, value, param, ctx):
        if isinstance(value, DomainSpec):
            return value
        try:
            return parse_domain(value)
        except (ValueError, OSError) as exc:
            self.fail(str(exc), param, ctx)


class PointParam(click.ParamType):
    name = "point"

    def convert(self, value, param, ctx):
        if isinstance(value, np.ndarray):
            return value
        try:
            return parse_complex_point(value)
        except ValueError as exc:
            self.fail(str(exc), param, ctx)


DOMAIN, POINT = DomainParam(), PointParam()


def _clean(x):
    """JSON-safe, deterministic rendering of numbers, arrays and points."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return points_text([x]) if x.ndim == 1 else [_clean(v) for v in x]
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return points_text([np.array([x])])
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def _cell(x):
    x = _clean(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, dict):
        return json.dumps(x, sort_keys=True)
    if isinstance(x, list):
        return " ".join(str(_cell(v)) for v in x)
    return x


def _emit(ctx, columns, rows, units, fmt, out, extra=None):
    header = dict(command=ctx.info_name, config=_clean(ctx.obj["config"]), units=units,
                  version=__version__)
    if fmt == "json":
        body = dict(header=header, rows=[dict(zip(columns, map(_clean, r))) for r in rows])
        if extra:
            body.update(_clean(extra))
        text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _guard(fn):
    """Map input errors to exit 2 and numerical failures to exit 3 with JSON diagnostics."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NumericalFailure as exc:
            diag = dict(error=type(exc).__name__, message=str(exc))
            if isinstance(exc, OptimizerError):
                diag["diagnostics"] = _clean(exc.diagnostics)
            click.echo(json.dumps(diag, sort_keys=True), err=True)
            sys.exit(EXIT_NUMERICAL)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from None
    return wrapper


def _common(fmt_default):
    def deco(fn):
        options = [
            click.option("--domain", type=DOMAIN, default="disc", show_default=True,
                         help="disc | polydisc:n | ball:n | annulus:r | punctured-disc | custom-series:file.json"),
            click.option("--basis-size", type=click.IntRange(min=1), default=None,
                         help="Truncate to the first m basis functions (default: exact kernel where available)."),
            click.option("--fd-step", type=click.FloatRange(0.0, 0.1, min_open=True),
                         default=metrics.DEFAULT_STEP, show_default=True,
                         help="Largest finite-difference step for the Ricci tensor."),
            click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True),
            click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=fmt_default,
                         show_default=True),
            click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
                         help="Write here instead of stdout."),
        ]
        for opt in reversed(options):
            fn = opt(fn)
        return click.pass_context(_guard(fn))
    return deco


def _record(ctx, **config):
    ctx.obj = dict(config={k: v for k, v in sorted(config.items()) if k not in ("fmt", "out")})


def _source(d: DomainSpec, m):
    """Exact kernel when no basis size is given (all terms for the custom domain)."""
    if m is None:
        return rkhs.build_basis(d, len(d.custom_terms)) if d.kind == "custom-series" else d
    return rkhs.build_basis(d, m)


def _functions_basis(d: DomainSpec, m):
    return rkhs.build_basis(d, m if m is not None else d.dimension + 1)


KMAX = click.option("--kmax", type=click.IntRange(1, 12), default=6, show_default=True)
METRIC = click.option("--metric", type=click.Choice(["bergman", "tilde"]), default="tilde",
                      show_default=True)


@click.group()
@click.version_option(__version__, prog_name="bergtilde")
def main():
    """Bergman and Ricci-modified metrics of model domains."""


@main.command()
@_common("json")
@click.option("--at", "points", type=POINT, multiple=True,
              help="Evaluation point, e.g. 0.3+0.1j,0.2 (repeatable; default: the origin or the anchor).")
def tensors(ctx, domain, basis_size, fd_step, seed, fmt, out, points):
    """T, Ric and the modified tensor (n+1)T - Ric at points, with eigenvalues."""
    _record(ctx, domain=domain.label, basis_size=basis_size, fd_step=fd_step, seed=seed,
            points=[points_text([p]) for p in points])
    src = _source(domain, basis_size)
    Z = as_points(domain, list(points) if points else [default_anchor(domain)])
    T = metrics.bergman_tensors(src, Z)
    R = metrics.ricci_tensors(src, Z, fd_step)
    Tt = metrics.tilde_tensors(src, Z, fd_step)
    rows = [(points_text([z]), T[p], R[p], Tt[p], np.linalg.eigvalsh(T[p]), np.linalg.eigvalsh(Tt[p]))
            for p, z in enumerate(Z)]
    _emit(ctx, ["point", "T", "Ric", "Ttilde", "T_eigenvalues", "Ttilde_eigenvalues"], rows,
          dict(T="d^2 log K / dz_i dzbar_j, rows of complex entries",
               Ric="-d^2 log det T / dz_i dzbar_j", Ttilde="(n+1) T - Ric",
               T_eigenvalues="ascending", Ttilde_eigenvalues="ascending"), fmt, out)


@main.command()
@_common("csv")
@click.option("--points", "count", type=click.IntRange(min=1), default=100, show_default=True)
def identity(ctx, domain, basis_size, fd_step, seed, fmt, out, count):
    """Residuals of det B = K^(n+1) det T at seeded interior points."""
    _record(ctx, domain=domain.label, basis_size=basis_size, fd_step=fd_step, seed=seed, points=count)
    src = _source(domain, basis_size)
    Z = sample_interior(domain, count, np.random.default_rng(seed))
    res = criterion.norm_identity_residuals(src, Z)
    rows = [(k, points_text([z]), r) for k, (z, r) in enumerate(zip(Z, res))]
    _emit(ctx, ["index", "point", "relative_residual"], rows,
          dict(relative_residual="|det B - K^(n+1) det T| / det B"), fmt, out)


@main.command("criterion")
@_common("csv")
@click.option("--target", type=POINT, required=True, help="Boundary point approached.")
@KMAX
@click.option("--direction", type=complex, default=None, help="Ray into the puncture.")
def criterion_cmd(ctx, domain, basis_size, fd_step, seed, fmt, out, target, kmax, direction):
    """Ratio |jet det|^2 / (K^(n+1) det T) for (phi_0..phi_n) along an approach sequence."""
    _record(ctx, domain=domain.label, basis_size=basis_size, fd_step=fd_step, seed=seed,
            target=points_text([target]), kmax=kmax, direction=direction)
    src = _source(domain, basis_size)
    fs = criterion.leading_tuple(_functions_basis(domain, basis_size))
    rows = criterion.criterion_sweep(src, fs, target, kmax, direction)
    cols = ["k", "boundary_distance", "numerator", "gram", "denominator", "ratio", "normalized"]
    _emit(ctx, cols, [[r[c] for c in cols] for r in rows],
          dict(boundary_distance="euclidean", ratio="dimensionless (length^(2n) normalization)"),
          fmt, out)


@main.command("sup-probe")
@_common("json")
@click.option("--at", "point", type=POINT, default=None)
@click.option("--iters", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--restarts", type=click.IntRange(min=0), default=8, show_default=True)
def sup_probe(ctx, domain, basis_size, fd_step, seed, fmt, out, point, iters, restarts):
    """Maximize |jet det|^2 / Gramian over tuples in the span of the first m basis functions."""
    m = basis_size if basis_size is not None else 12
    z = as_point(domain, point if point is not None else default_anchor(domain))
    _record(ctx, domain=domain.label, basis_size=m, fd_step=fd_step, seed=seed,
            point=points_text([z]), iters=iters, restarts=restarts)
    probe = criterion.fraction_sup_probe(rkhs.build_basis(domain, m), z, restarts, seed, iters)
    rows = [(k, v, v / probe.target, it) for k, (v, it) in enumerate(zip(probe.values, probe.iterations))]
    _emit(ctx, ["restart", "value", "relative", "iterations"], rows,
          dict(value="|det|^2 / Gramian", relative="value / (K^(n+1) det T)"), fmt, out,
          extra=dict(best=probe.best, target=probe.target, relative=probe.relative,
                     best_index=probe.best_index))


@main.command()
@_common("json")
@METRIC
@click.option("--at", "start", type=POINT, required=True, help="Start point.")
@click.option("--to", "end", type=POINT, required=True, help="End point.")
@click.option("--segments", type=click.IntRange(min=1), default=16, show_default=True)
@click.option("--iters", type=click.IntRange(min=0), default=200, show_default=True)
def distance(ctx, domain, basis_size, fd_step, seed, fmt, out, metric, start, end, segments, iters):
    """Upper bound on the distance between two points by path optimization."""
    _record(ctx, domain=domain.label, basis_size=basis_size, fd_step=fd_step, seed=seed, metric=metric,
            start=points_text([start]), end=points_text([end]), segments=segments, iters=iters)
    res = geodesy.optimize_path(_source(domain, basis_size), metric, start, end, segments, iters,
                                seed, fd_step)
    rows = [(k, points_text([p])) for k, p in enumerate(res.nodes)]
    _emit(ctx, ["node", "point"], rows, dict(length="metric length"), fmt, out,
          extra=dict(length=res.length, straight_length=res.straight_length,
                     iterations=res.iterations))


@main.command()
@_common("csv")
@METRIC
@click.option("--target", type=POINT, required=True)
@KMAX
@click.option("--anchor", type=POINT, default=None)
@click.option("--direction", type=complex, default=None, help="Ray into the puncture.")
@click.option("--segments", type=click.IntRange(min=1), default=16, show_default=True)
@click.option("--iters", type=click.IntRange(min=0), default=200, show_default=True)
def probe(ctx, domain, basis_size, fd_step, seed, fmt, out, metric, target, kmax, anchor, direction,
          segments, iters):
    """Distances from an anchor to points approaching a boundary point."""
    _record(ctx, domain=domain.label, basis_size=basis_size, fd_step=fd_step, seed=seed, metric=metric,
            target=points_text([target]), kmax=kmax,
            anchor=None if anchor is None else points_text([anchor]),
            direction=direction, segments=segments, iters=iters)
    res = geodesy.completeness_probe(_source(domain, basis_size), metric, target, kmax, anchor,
                                     segments, iters, seed, fd_step, direction)
    rows = [(r.k, points_text([r.point]), r.boundary_distance, r.distance_estimate, s)
            for r, s in zip(res.rows, res.running_slopes())]
    _emit(ctx, ["k", "point", "boundary_distance", "distance", "running_slope"], rows,
          dict(boundary_distance="euclidean", distance=f"{metric} metric length",
               running_slope="distance per decade of boundary distance"), fmt, out)


@main.command("green")
@_common("csv")
@click.option("--target", type=POINT, required=True, help="Boundary point the poles approach.")
@KMAX
@click.option("--samples", type=click.IntRange(min=green.MIN_SAMPLES), default=200_000, show_default=True)
@click.option("--level", type=float, default=-1.0, show_default=True)
@click.option("--region", type=click.Choice(["local", "ambient"]), default="local", show_default=True)
def green_cmd(ctx, domain, basis_size, fd_step, seed, fmt, out, target, kmax, samples, level, region):
    """Sublevel volumes, the Hadamard-chain bound and the criterion ratio at poles near the boundary."""
    _record(ctx, domain=domain.label, basis_size=basis_size, fd_step=fd_step, seed=seed,
            target=points_text([target]), kmax=kmax, samples=samples, level=level, region=region)
    poles = approach_sequence(domain, target, kmax)
    fs = criterion.leading_tuple(_functions_basis(domain, basis_size))
    rows = green.hyperconvexity_bound(_source(domain, None), fs, poles, level, samples, seed, region)
    out_rows = [(float(np.linalg.norm(r.pole)), r.volume, r.volume_stderr, r.bound, r.ratio)
                for r in rows]
    _emit(ctx, ["pole_modulus", "volume", "stderr", "bound", "ratio"], out_rows,
          dict(volume="Lebesgue measure (R^2n)", bound="C^(n+1) prod of sublevel masses"), fmt, out)


@main.command()
@click.pass_context
@click.option("--input", "path", type=click.Path(exists=True, dir_okay=False), default=None,
              help='JSON: {"ambient": m, "coords": {"0,1": re or [re, im], ...}}')
@click.option("--coords", default=None, help='Inline JSON of the same form.')
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@_guard
def plucker(ctx, path, coords, tol, fmt, out):
    """Plücker residual and decomposability of a wedge vector."""
    if (path is None) == (coords is None):
        raise click.UsageError("give exactly one of --input and --coords")
    try:
        data = json.loads(coords) if coords is not None else json.load(open(path, encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"bad JSON: {exc}") from None
    u = wedge.from_json(data)
    ctx.obj = dict(config=dict(ambient=u.ambient, degree=u.degree, tol=tol,
                               coords={",".join(map(str, J)): v for J, v in sorted(u.coords.items())}))
    res = wedge.plucker_residual(u)
    rel = res / u.norm_sq()
    _emit(ctx, ["residual", "relative", "norm_sq", "decomposable"], [(res, rel, u.norm_sq(), rel <= tol)],
          dict(residual="max |Plücker relation|", relative="residual / ||u||^2"), fmt, out)


@main.command()
@_common("csv")
def basis(ctx, domain, basis_size, fd_step, seed, fmt, out):
    """Dump the basis terms (index, exponents, normalization)."""
    m = basis_size if basis_size is not None else 10
    _record(ctx, domain=domain.label, basis_size=m)
    _emit(ctx, ["index", "exponents", "normalization"], rkhs.basis_rows(rkhs.build_basis(domain, m)),
          dict(normalization="1 / L2 norm of the monomial"), fmt, out)


@main.command()
@click.pass_context
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
def report(ctx, seed, fmt, out):
    """Run the acceptance suite; exit 1 if any check fails."""
    ctx.obj = dict(config=dict(seed=seed))
    results = acceptance.run_all(seed)
    for r in results:
        click.echo(r.line(), err=True)
    rows = [(r.number, r.name, r.passed, r.residual, r.tolerance,
             r.detail) for r in results]
    _emit(ctx, ["check", "name", "passed", "residual", "tolerance", "detail"], rows,
          dict(residual="check-specific, compared against tolerance"), fmt, out,
          extra=dict(passed=all(r.passed for r in results)))
    if not all(r.passed for r in results):
        sys.exit(EXIT_CHECK_FAILED)


if __name__ == "__main__":
    main()
