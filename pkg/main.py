"""
main.py
Entry point for the ssmi command: compile a model into a structured
workbook, audit workbooks, evaluate scenarios, decompose mixed formulas and
draw the Formula Diagram.

Exit codes: 0 ok, 1 validation or audit errors, 2 usage or parse errors,
3 I/O errors.
"""

import functools
import logging
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import click

import config
from audit.auditor import audit
from core.graph import validate
from core.model import SsmiError, VariableKind
from dsl.emitter import emit_model
from dsl.parser import ParseError, parse_file
from engine.evaluator import InputShapeError, UnknownVariable, evaluate
from tools.dot import to_dot
from tools.files import atomic_write, atomic_write_all
from transform.decompose import complexity_check, decompose
from workbook.cells import SchemaError
from workbook.generator import generate
from workbook.jsonio import read_json, write_json
from workbook.recompute import precedents, recompute
from workbook.view import display_number, formula_view, value_view
from workbook.xlsx import xlsx_bytes

logger = logging.getLogger("ssmi")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(SsmiError):
    pass


def _fail(exc: Exception) -> int:
    """Report an exception on stderr and pick its exit code."""
    if isinstance(exc, OSError):
        click.echo(f"error: {exc.filename or ''}: {exc.strerror or exc}", err=True)
        return EXIT_IO
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, (ParseError, SchemaError, UsageError, UnknownVariable, InputShapeError, config.ConfigError)):
        return EXIT_USAGE
    return EXIT_FAILED


def guarded(command):
    """Map every SsmiError/OSError raised by a command onto the exit-code table."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            code = command(*args, **kwargs)
        except (SsmiError, OSError) as exc:
            code = _fail(exc)
        ctx.exit(code or EXIT_OK)
    return wrapper


def _emit(text: str, output):
    if output:
        atomic_write(output, text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _load_workbook(path: str):
    """A .ssmi model is compiled on the fly; anything else is read as .wbjson."""
    if path.endswith(".ssmi"):
        settings = click.get_current_context().obj
        return generate(parse_file(path), first_block_row=settings.first_block_row)
    with open(path, "rb") as fh:
        return read_json(fh.read())


# ── Command group ─────────────────────────────────────────────────────────────

@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log progress to stderr.")
@click.option("--config", "config_path", default=None, help="Settings file (default: $SSMI_CONFIG or ssmi.toml).")
@click.pass_context
def cli(ctx, verbose, config_path):
    """Structured spreadsheet compiler and auditor."""
    level = logging.INFO if verbose else getattr(logging, config.SSMI_LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(
        stream=sys.stderr, level=level, force=True,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        ctx.obj = config.load_settings(config_path)
    except (config.ConfigError, OSError) as exc:
        ctx.exit(_fail(exc))


@cli.command("compile")
@click.argument("model_path")
@click.option("--xlsx", "xlsx_path", default=None, help="Write the workbook as .xlsx.")
@click.option("--json", "json_path", default=None, help="Write the workbook as .wbjson.")
@click.option("--strict/--no-strict", default=None, help="Treat mixed-operator formulas as errors.")
@click.pass_obj
@guarded
def cmd_compile(settings, model_path, xlsx_path, json_path, strict):
    """Parse, validate and lay out MODEL_PATH as a 3-tier workbook."""
    strict = settings.compile_strict if strict is None else strict
    xlsx_path = xlsx_path or settings.compile_xlsx
    json_path = json_path or settings.compile_json

    model = parse_file(model_path)
    validate(model)
    findings = complexity_check(model, strict=strict)
    for finding in findings:
        click.echo(f"{finding.severity.value}: {finding}", err=True)
    if strict and findings:
        return EXIT_FAILED

    wb = generate(model, first_block_row=settings.first_block_row)
    outputs = []
    if json_path:
        outputs.append((json_path, write_json(wb)))
    if xlsx_path:
        outputs.append((xlsx_path, xlsx_bytes(wb)))
    if outputs:
        atomic_write_all(outputs)
        logger.info("compiled %s into %d file(s)", model_path, len(outputs))
    else:
        click.echo(write_json(wb).decode("utf-8"), nl=False)
    return EXIT_OK


@cli.command("audit")
@click.argument("workbook_path")
@click.option("--model", "model_path", default=None, help="Model the workbook was built from (enables A9).")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default=None)
@click.option("--strict/--no-strict", default=None, help="Mixed-operator formulas are errors.")
@click.pass_obj
@guarded
def cmd_audit(settings, workbook_path, model_path, fmt, strict):
    """Check WORKBOOK_PATH against the structuring rules."""
    fmt = fmt or settings.audit_format
    strict = settings.audit_strict if strict is None else strict
    wb = _load_workbook(workbook_path)
    model = parse_file(model_path) if model_path else None
    report = audit(wb, model, strict=strict)
    click.echo(report.to_json() if fmt == "json" else report.to_text())
    return EXIT_OK if report.passed else EXIT_FAILED


def _parse_assignment(model, text: str) -> tuple:
    name, sep, raw = text.partition("=")
    name = name.strip()
    if not sep or not name:
        raise UsageError(f"--set expects Name=value, got '{text}'")
    if name not in model:
        raise UnknownVariable(name)
    if model.get(name).kind is not VariableKind.INPUT:
        raise UsageError(f"--set {name}: only inputs can be set")
    try:
        values = [float(part) for part in raw.replace(";", " ").split()]
    except ValueError as exc:
        raise UsageError(f"--set {name}: '{raw}' is not a number") from exc
    if not values:
        raise UsageError(f"--set {name}: missing value")
    var = model.get(name)
    allowed = (1, model.dimension.size) if var.repeating else (1,)
    if len(values) not in allowed:
        expected = " or ".join(str(n) for n in allowed)
        raise UsageError(f"--set {name}: expected {expected} value(s), got {len(values)}")
    return name, values[0] if len(values) == 1 else tuple(values)


@cli.command("eval")
@click.argument("model_path")
@click.option("--set", "assignments", multiple=True, help="Input value, Name=value (Name=1;2;3 per instance).")
@click.option("--report", "reports", multiple=True, help="Variable to print (default: every Output).")
@click.pass_obj
@guarded
def cmd_eval(settings, model_path, assignments, reports):
    """Evaluate MODEL_PATH and print variables at full precision and rounded."""
    model = parse_file(model_path)
    validate(model)
    inputs = dict(_parse_assignment(model, a) for a in assignments)
    for name in reports:
        if name not in model:
            raise UnknownVariable(name)

    values = evaluate(model, inputs)
    names = list(reports) or [v.canonical_name for v in model.calculated if v.kind is VariableKind.OUTPUT]
    for name in names:
        var = model.get(name)
        if var.repeating:
            for instance, value in zip(model.dimension.instances, values[name]):
                click.echo(f"{name}[{instance}]\t{value!r}\t{display_number(value, whole=True)}")
        else:
            click.echo(f"{name}\t{values[name]!r}\t{display_number(values[name], whole=True)}")
    return EXIT_OK


@cli.command("decompose")
@click.argument("model_path")
@click.option("-o", "--output", default=None, help="Output .ssmi (default: stdout).")
@guarded
def cmd_decompose(model_path, output):
    """Rewrite MODEL_PATH so no formula mixes operators."""
    model = parse_file(model_path)
    validate(model)
    _emit(emit_model(decompose(model)), output)
    return EXIT_OK


@cli.command("graph")
@click.argument("model_path")
@click.option("-o", "--output", default=None, help="Output .dot (default: stdout).")
@guarded
def cmd_graph(model_path, output):
    """Draw the Formula Diagram of MODEL_PATH as DOT."""
    model = parse_file(model_path)
    validate(model)
    _emit(to_dot(model), output)
    return EXIT_OK


@cli.command("view")
@click.argument("source")
@click.option("--sheet", "sheet_name", default=None, help="Only this sheet.")
@click.option("--values", "show_values", is_flag=True, help="Show computed values instead of formulas.")
@click.pass_obj
@guarded
def cmd_view(settings, source, sheet_name, show_values):
    """Print the formula view (or value view) of a workbook or model."""
    wb = _load_workbook(source)
    if sheet_name is not None and not wb.has_sheet(sheet_name):
        raise UsageError(f"no sheet named '{sheet_name}'")
    names = [sheet_name] if sheet_name else [s.name for s in wb.sheets]
    if show_values:
        values = recompute(wb)
        blocks = [value_view(wb, n, values) for n in names]
    else:
        blocks = [formula_view(wb, n) for n in names]
    click.echo("\n\n".join(blocks))
    return EXIT_OK


def _split_cell(text: str) -> tuple:
    sheet, sep, addr = text.rpartition("!")
    if not sep or not sheet or not addr:
        raise UsageError(f"expected Sheet!A1, got '{text}'")
    if sheet.startswith("'") and sheet.endswith("'"):
        sheet = sheet[1:-1].replace("''", "'")
    return sheet, addr.upper().replace("$", "")


@cli.command("trace")
@click.argument("source")
@click.argument("cell")
@click.pass_obj
@guarded
def cmd_trace(settings, source, cell):
    """Print the direct precedents of CELL (Sheet!A1)."""
    wb = _load_workbook(source)
    sheet, addr = _split_cell(cell)
    if not wb.has_sheet(sheet):
        raise UsageError(f"no sheet named '{sheet}'")
    content = wb.sheet(sheet).get(addr)
    if content is None:
        raise UsageError(f"{sheet}!{addr} is empty")
    if not content.is_formula:
        click.echo(f"{sheet}!{addr} holds no formula")
        return EXIT_OK
    click.echo(f"{sheet}!{addr} {content.formula}")
    for target_sheet, target in precedents(wb, sheet, addr):
        click.echo(f"  <- {target_sheet}!{target}")
    return EXIT_OK


if __name__ == "__main__":
    cli()
