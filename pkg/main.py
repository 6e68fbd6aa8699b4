# main.py

import logging
from typing import Optional

import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from core.config import settings
from core.exceptions import ScenarioError, SurgeryKitError
from core.signs import SignManifest
from modules.chain_algebra import homology_z
from modules.cli import (ReportDoc, form_signature, intersection_signature, load_scenario, run_verification,
                         underlying_chain)
from modules.structured_forms import manifest_entries, search_thickening_signs

# Configure logging
logging.basicConfig(
    level=logging.DEBUG if settings.debug else getattr(logging, settings.logging.level.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

app = typer.Typer(help="Exact verification of algebraic L-theory identities.", add_completion=False)
console = Console()

SEED = typer.Option(None, "--seed", help="Seed for randomized suites (default from config.yaml)")
COUNT = typer.Option(None, "--count", help="Instances per randomized suite (default from config.yaml)")
MANIFEST = typer.Option(False, "--manifest", help="Print the sign-convention manifest")
FORMAT = typer.Option(None, "--format", help="Machine report format, yaml or json (default from config.yaml)")


def _print_manifest():
    table = Table(title=f"Sign conventions (manifest {SignManifest.version()})")
    table.add_column("name", style="cyan")
    table.add_column("value", justify="right")
    table.add_column("formula")
    for name, entry in SignManifest.entries().items():
        table.add_row(name, str(entry["value"]), entry.get("formula", ""))
    console.print(table)


def _load(path: str):
    try:
        return load_scenario(path)
    except ScenarioError as e:
        console.print(f"[red]scenario error:[/red] {e}")
        raise typer.Exit(code=2)


def _print_report(report: ReportDoc):
    table = Table(title=f"seed {report.seed}, count {report.count}, manifest {report.manifest_version}")
    table.add_column("#", justify="right")
    table.add_column("command")
    table.add_column("target")
    table.add_column("status")
    table.add_column("first failure")
    for c in report.commands:
        status = "[green]pass[/green]" if c.passed else "[red]fail[/red]"
        table.add_row(str(c.index), c.kind, c.target or "", status, str(c.failures[0]) if c.failures else "")
    console.print(table)


@app.callback(invoke_without_command=True)
def main(ctx: typer.Context, manifest: bool = MANIFEST):
    if manifest:
        _print_manifest()
    elif ctx.invoked_subcommand is None:
        console.print(ctx.get_help())


@app.command()
def verify(scenario: str = typer.Argument(..., help="Scenario file or name under data/scenarios"),
           seed: Optional[int] = SEED, count: Optional[int] = COUNT,
           machine: bool = typer.Option(False, "--machine", help="Print only the machine-readable report"),
           output: Optional[str] = typer.Option(None, "--output", "-o", help="Also write the report to this file"),
           fmt: Optional[str] = FORMAT, manifest: bool = MANIFEST):
    """Run every command of a scenario; exit code 0 iff all pass."""
    if manifest:
        _print_manifest()
    report = run_verification(_load(scenario), seed, count)
    text = report.render(fmt)
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text)
    if machine:
        typer.echo(text, nl=False)
    else:
        _print_report(report)
        verdict = "[green]all commands pass[/green]" if report.passed else "[red]some commands fail[/red]"
        console.print(Panel.fit(verdict))
    raise typer.Exit(code=0 if report.passed else 1)


@app.command()
def homology(scenario: str = typer.Argument(..., help="Scenario file or name under data/scenarios"),
             name: Optional[str] = typer.Option(None, "--name", help="Only this complex")):
    """Integral homology of the complexes and chain complexes of a scenario."""
    doc = _load(scenario)
    table = Table(title="Integral homology")
    table.add_column("object")
    table.add_column("degree", justify="right")
    table.add_column("H")
    for key, defn in doc.definitions.items():
        if defn.kind not in ("complex", "chain", "kbased") or name not in (None, key):
            continue
        for r, group in homology_z(underlying_chain(doc.objects[key])).items():
            table.add_row(key, str(r), group.describe())
    console.print(table)


@app.command()
def signature(scenario: str = typer.Argument(..., help="Scenario file or name under data/scenarios"),
              name: Optional[str] = typer.Option(None, "--name", help="Only this complex or form"),
              reverse: bool = typer.Option(False, "--reverse", help="Reverse the orientation")):
    """Intersection-form signatures of the 4k-dimensional complexes and the forms of a scenario."""
    doc = _load(scenario)
    table = Table(title="Signatures")
    for column in ("object", "signature", "positive", "negative", "middle rank", "degenerate"):
        table.add_column(column)
    failed = False
    for key, defn in doc.definitions.items():
        if defn.kind not in ("complex", "form") or name not in (None, key):
            continue
        obj = doc.objects[key]
        try:
            if defn.kind == "complex":
                if obj.dimension % 4:
                    continue
                report = intersection_signature(obj, reverse=reverse)
            else:
                psi = obj.block(0, obj.n // 2)
                report = form_signature((psi + psi.transpose()).to_int_list())
                report = report.negated() if reverse else report
        except SurgeryKitError as e:
            console.print(f"[red]{key}:[/red] {e}")
            failed = True
            continue
        table.add_row(key, str(report.signature), str(report.positive), str(report.negative),
                      str(report.middle_betti), "yes" if report.degenerate else "no")
    console.print(table)
    raise typer.Exit(code=1 if failed else 0)


@app.command()
def report(scenario: Optional[str] = typer.Argument(None, help="Scenario whose machine-readable report to print"),
           seed: Optional[int] = SEED, count: Optional[int] = COUNT, fmt: Optional[str] = FORMAT,
           manifest: bool = MANIFEST,
           search: bool = typer.Option(False, "--search", help="Rerun the thickening sign search")):
    """Machine-readable report of a scenario, the sign manifest, or the sign search."""
    code = 0
    if manifest:
        _print_manifest()
    if search:
        result = search_thickening_signs(size=settings.manifest.battery_size)
        if not result.unique:
            console.print(f"[red]{len(result.survivors)} sign assignments survive the battery[/red]")
            code = 1
        else:
            shipped = SignManifest.list()
            table = Table(title=f"Sign search over {result.battery_size} instances")
            for column in ("name", "found", "shipped"):
                table.add_column(column)
            for key, value in manifest_entries(result.survivors[0]).items():
                ok = shipped.get(key) == value
                code = code if ok else 1
                table.add_row(key, str(value), str(shipped.get(key)), style=None if ok else "red")
            console.print(table)
    if scenario:
        result = run_verification(_load(scenario), seed, count)
        typer.echo(result.render(fmt), nl=False)
        code = code or (0 if result.passed else 1)
    raise typer.Exit(code=code)


if __name__ == "__main__":
    app()
