"""Command-line interface.

Usage:
    diracnodes solve spec.json --n1 0 --out state.csv      # + state.json summary
    diracnodes spectrum spec.json --max-states 10          # JSON list of {E, n1, n2}
    diracnodes verify spec.json --sweep "d=2..6,n1=0..4"   # clause table
    diracnodes orbit spec.json --n1 5 --out orbit.csv      # + orbit.json verdict

Exit codes: 0 ok, 1 theorem violation, 2 state not found, 3 input or
validation error, 4 numerical failure.
"""

from __future__ import annotations

import functools
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from .document import ProblemDocument, load_config, load_document
from .errors import DiracError, NumericalError, StateNotFoundError, ValidationError
from .nodal import Verdict, orbit_trace, verify_structure
from .potentials import validate
from .radial_ode import Parity, w2
from .shooting import RadialSolution, solve_spectrum, solve_state
from .sweep import DEFAULT_SWEEP, SweepResult, parse_sweep, run_sweep

__all__ = ["main", "cli", "EXIT_OK", "EXIT_THEOREM", "EXIT_NOT_FOUND", "EXIT_INPUT", "EXIT_NUMERICAL"]

EXIT_OK = 0
EXIT_THEOREM = 1
EXIT_NOT_FOUND = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4

log = logging.getLogger("diracnodes")


class Settings:
    def __init__(self, config: dict, jobs: int, quiet: bool):
        self.config = config
        self.jobs = jobs
        self.quiet = quiet

    def echo(self, text: str = "") -> None:
        if not self.quiet:
            click.echo(text)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    """Map library exceptions to exit codes with a one-line message."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StateNotFoundError as exc:
            _fail(EXIT_NOT_FOUND, str(exc))
        except ValidationError as exc:
            where = f" [{exc.field}]" if getattr(exc, "field", None) else ""
            _fail(EXIT_INPUT, f"{exc}{where}")
        except NumericalError as exc:
            _fail(EXIT_NUMERICAL, f"{type(exc).__name__}: {exc}")
        except DiracError as exc:
            _fail(EXIT_INPUT, str(exc))

    return wrapper


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _finite(x):
    return None if x is None or not math.isfinite(x) else x


def solution_csv(sol: RadialSolution, psi2_scale: float | None = None) -> str:
    """r, psi1, psi2, W2 (and a scaled psi2 column for plotting) at 17 digits."""
    cols = [sol.radii, sol.psi1, sol.psi2, w2(sol.problem, sol.energy, sol.radii)]
    names = ["r", "psi1", "psi2", "W2"]
    if psi2_scale is not None:
        cols.append(psi2_scale * sol.psi2)
        names.append("psi2_scaled")
    rows = np.column_stack(cols)
    lines = [",".join(names)]
    lines.extend(",".join("%.17g" % x for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def solution_summary(sol: RadialSolution, psi2_scale: float | None = None) -> dict:
    report = verify_structure(sol)
    return {
        "E": sol.energy,
        "n1": sol.n1,
        "n2": sol.n2,
        "k_d": sol.k_d,
        "beta": sol.beta,
        "r_c": _finite(sol.r_c),
        "r_match": sol.r_match,
        "r_max": sol.r_max,
        "norm": sol.norm(),
        "psi2_scale": psi2_scale,
        "problem": sol.problem.to_dict(),
        "nodal_report": report.to_dict(),
    }


def _load(doc: ProblemDocument, settings: Settings, parity=None):
    prob = doc.problem(parity)
    cfg = doc.shooting_config(settings.config)
    rep = validate(prob.potential, m=prob.mass)
    for failure in rep.failures():
        click.echo(f"warning: potential check failed: {failure}", err=True)
    return prob, cfg


def _parity_for(doc: ProblemDocument, n1: int, parity: str | None) -> str | None:
    """d=1 sector: explicit flag, then the document, then the parity of n1."""
    if doc.dimension > 1 or parity is not None or doc.parity is not None:
        return parity
    return "even" if n1 % 2 == 0 else "odd"


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON file of shooting overrides (same keys as the document's 'config').")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True,
              help="Parallel states for 'verify'.")
@click.option("--quiet", is_flag=True, help="Only errors on stderr; files are still written.")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None, jobs: int, quiet: bool) -> None:
    """Dirac radial bound states and their nodal structure."""
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    config = {}
    if config_path:
        try:
            config = load_config(config_path)
        except ValidationError as exc:
            _fail(EXIT_INPUT, f"{exc} [{exc.field}]")
    ctx.obj = Settings(config, jobs, quiet)


@cli.command()
@click.argument("spec", type=click.Path(dir_okay=False))
@click.option("--n1", type=click.IntRange(min=0), required=True, help="Nodes of the upper component.")
@click.option("--parity", type=click.Choice(["even", "odd"]), default=None,
              help="d=1 sector of u1 (default: from the document or n1).")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Solution CSV; the JSON summary goes next to it with a .json suffix.")
@click.pass_obj
@guarded
def solve(settings: Settings, spec: str, n1: int, parity: str | None, out: str | None) -> None:
    """Solve one bound state."""
    doc = load_document(spec)
    prob, cfg = _load(doc, settings, _parity_for(doc, n1, parity))
    sol = solve_state(prob, n1, cfg)
    summary = solution_summary(sol, doc.output.psi2_scale)
    if out:
        path = Path(out)
        _write_text(path, solution_csv(sol, doc.output.psi2_scale))
        _write_text(path.with_suffix(".json"), _json(summary))
    else:
        settings.echo(_json(summary).rstrip())
    report = summary["nodal_report"]
    settings.echo(f"E = {sol.energy:.12f}  n1 = {sol.n1}  n2 = {sol.n2}  "
                  f"theorem: {report['clauses']['theorem']}")
    if report["clauses"]["theorem"] == Verdict.FAIL.value:
        _fail(EXIT_THEOREM, f"theorem violated: {report['details']['theorem']}")


@cli.command()
@click.argument("spec", type=click.Path(dir_okay=False))
@click.option("--max-states", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the list here.")
@click.pass_obj
@guarded
def spectrum(settings: Settings, spec: str, max_states: int, out: str | None) -> None:
    """List bound states, ascending in E.  In d=1 without a parity both sectors are merged."""
    doc = load_document(spec)
    sectors = [None]
    if doc.dimension == 1 and doc.parity is None:
        sectors = [Parity.U1_EVEN, Parity.U1_ODD]
    entries = []
    for sector in sectors:
        prob, cfg = _load(doc, settings, sector)
        cfg = replace(cfg, max_states=max_states)
        for sol in solve_spectrum(prob, cfg):
            item = {"E": sol.energy, "n1": sol.n1, "n2": sol.n2}
            if prob.dimension == 1:
                item["parity"] = prob.parity.value
            entries.append(item)
    entries.sort(key=lambda e: e["E"])
    entries = entries[:max_states]
    text = _json(entries)
    if out:
        _write_text(Path(out), text)
    settings.echo(text.rstrip())


def _reproduction(doc: ProblemDocument, res: SweepResult, config: dict) -> dict:
    p = res.point
    data = doc.model_dump(mode="json", exclude_none=True)
    data["config"] = {**data.get("config", {}), **config}
    data["dimension"] = p.dimension
    for key in ("j", "tau", "parity"):
        data.pop(key, None)
    if p.dimension == 1:
        data["parity"] = "even" if p.parity is Parity.U1_EVEN else "odd"
    else:
        data["j"] = p.j
        data["tau"] = p.tau
    return {"document": data, "n1": p.n1}


def _table(results: list[SweepResult]) -> str:
    clauses = ("theorem", "node_region", "alternation", "origin_signs", "infinity_signs",
               "orbit_rotation", "riccati")
    short = {"pass": "ok", "fail": "FAIL", "not_applicable": "n/a"}
    head = f"{'state':<34} {'E':>16} {'n2':>3}  " + " ".join(f"{c:>14}" for c in clauses)
    lines = [head, "-" * len(head)]
    for r in results:
        label = r.point.label()
        if r.status != "solved":
            lines.append(f"{label:<34} {r.status:>16}      {r.message}")
            continue
        verdicts = {k: v.value for k, v in r.report.clauses.items()}
        verdicts["riccati"] = r.riccati_verdict.value
        cells = []
        for c in clauses:
            cell = short[verdicts[c]]
            if c in r.report.informational:
                cell += "*"
            cells.append(f"{cell:>14}")
        lines.append(f"{label:<34} {r.energy:>16.12f} {r.n2:>3}  " + " ".join(cells))
    return "\n".join(lines)


@cli.command()
@click.argument("spec", type=click.Path(dir_okay=False))
@click.option("--sweep", "sweep_text", default=DEFAULT_SWEEP, show_default=True,
              help="Grid of states, e.g. 'd=2..6,j=0.5..2.5,tau=±1,n1=0..4'.")
@click.option("--json-out", type=click.Path(dir_okay=False), default=None,
              help="Also write every result as JSON.")
@click.pass_obj
@guarded
def verify(settings: Settings, spec: str, sweep_text: str, json_out: str | None) -> None:
    """Solve every state of a sweep and check each nodal clause.

    The document supplies the potential and mass; its j, tau and parity are
    replaced by the sweep.  Exit 1 if any clause fails on a solved state.
    """
    points = parse_sweep(sweep_text)
    doc = load_document(spec)
    pot = doc.potential.build()
    cfg = doc.shooting_config(settings.config)
    results = run_sweep(points, pot, doc.mass, cfg, jobs=settings.jobs)
    settings.echo(_table(results))

    solved = [r for r in results if r.status == "solved"]
    failed = [r for r in results if r.failed]
    errors = [r for r in results if r.status == "error"]
    settings.echo(f"\n{len(solved)} solved, {len(failed)} failing, {len(errors)} numerical errors, "
                  f"{sum(r.status == 'absent' for r in results)} absent, "
                  f"{sum(r.status == 'unsupported' for r in results)} unsupported")
    if json_out:
        rows = []
        for r in results:
            row = {"state": r.point.label(), "status": r.status, "energy": r.energy, "n2": r.n2,
                   "message": r.message}
            if r.report is not None:
                row["nodal_report"] = r.report.to_dict()
            if r.riccati is not None:
                row["riccati"] = {"coarse": r.riccati.coarse, "fine": r.riccati.fine,
                                  "order": _finite(r.riccati.order), "verdict": r.riccati_verdict.value}
            rows.append(row)
        _write_text(Path(json_out), _json(rows))
    for r in failed:
        bad = [k for k, v in r.report.clauses.items() if v is Verdict.FAIL and k not in r.report.informational]
        if r.riccati_verdict is Verdict.FAIL:
            bad.append("riccati")
        click.echo(f"FAIL {r.point.label()}: {', '.join(bad)}; reproduce with "
                   f"{json.dumps(_reproduction(doc, r, settings.config))}", err=True)
    for r in errors:
        click.echo(f"ERROR {r.point.label()}: {r.message}", err=True)
    if failed:
        sys.exit(EXIT_THEOREM)
    if errors:
        sys.exit(EXIT_NUMERICAL)


@cli.command()
@click.argument("spec", type=click.Path(dir_okay=False))
@click.option("--n1", type=click.IntRange(min=0), required=True)
@click.option("--parity", type=click.Choice(["even", "odd"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Orbit CSV; the rotation verdict goes next to it with a .json suffix.")
@click.pass_obj
@guarded
def orbit(settings: Settings, spec: str, n1: int, parity: str | None, out: str) -> None:
    """Write the spinor orbit (psi1, psi2) of one state with its rotation verdict."""
    doc = load_document(spec)
    prob, cfg = _load(doc, settings, _parity_for(doc, n1, parity))
    sol = solve_state(prob, n1, cfg)
    trace, verdict = orbit_trace(sol)
    path = Path(out)
    _write_text(path, trace.to_csv())
    side = {"E": sol.energy, "n1": sol.n1, "n2": sol.n2, "problem": prob.to_dict(),
            "rotation": verdict.to_dict(), "verdict": verdict.describe()}
    _write_text(path.with_suffix(".json"), _json(side))
    settings.echo(f"E = {sol.energy:.12f}  n1 = {sol.n1}  n2 = {sol.n2}  orbit: {verdict.describe()}")
    if verdict.status is Verdict.FAIL and not verdict.informational:
        _fail(EXIT_THEOREM, f"orbit rotation violated: {verdict.describe()}")


def main(argv: list[str] | None = None) -> None:
    cli.main(args=argv, prog_name="diracnodes")


if __name__ == "__main__":
    main()
