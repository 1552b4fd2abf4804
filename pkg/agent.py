#!/usr/bin/env python3
"""
Kummer Asymptotics CLI - Main Entry Point

Evaluates the Kummer functions M(a, b, z) and U(a, b+1, z) for large a and b
from uniform asymptotic expansions, inspects their coefficients and checks them
against high-precision reference values.

Version: 1.0
"""

import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, cast

import click
import numpy as np
from pydantic import BaseModel, Field, ValidationError
from rich.console import Console
from rich.table import Table

from modules import __version__
from modules.coeffs import closed_form, coefficient_table
from modules.errors import DomainError, KummerError
from modules.expansion import ExpansionModule
from modules.mapping import transformation_samples
from modules.oracle import OracleModule
from modules.regimes import (
    Function,
    Order,
    ParameterSet,
    Regime,
    make_context,
    steepest_descent_radius,
)


# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler('kummer.log'),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger(__name__)


AgentResult = Dict[str, Any]
OutputFormat = Literal["csv", "json", "plain"]

VERIFY_COLUMNS = [
    "a", "b", "z", "N", "log_expansion", "log_oracle", "relative_error", "estimate", "error",
]
EVAL_COLUMNS = [
    "function", "order", "a", "b", "z", "mu", "terms_used", "value", "log_value", "error_estimate",
]
COEFF_COLUMNS = ["n", "closed_form", "pipeline", "delta"]
PATH_COLUMNS = ["theta", "r", "x", "y"]
MAP_COLUMNS = ["s", "t", "dtds", "amplitude"]

# config keys set by command-line flags
FLAG_KEYS = {
    "precision": "precision_digits",
    "terms": "terms",
    "safety_factor": "safety_factor",
}


class RunConfig(BaseModel):
    """Effective settings of one command invocation."""

    output_format: OutputFormat = "plain"
    precision: int = Field(60, ge=30)
    terms: int = Field(3, ge=1, le=6)
    safety_factor: float = Field(10.0, gt=0)


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Read a configuration overlay.

    JSON when the suffix is .json, otherwise flat key=value lines with
    '#' comments; values are parsed as int, then float, then kept as strings.
    """
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            return cast(Dict[str, Any], json.loads(text))
        except json.JSONDecodeError as e:
            raise DomainError(f"Invalid JSON config {path}: {e}") from e

    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{number}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = _parse_scalar(value)
    return values


def _parse_scalar(value: str) -> Any:
    for kind in (int, float):
        try:
            return kind(value)
        except ValueError:
            continue
    return value


def _error(exc: Exception, **context: Any) -> AgentResult:
    exit_code = exc.exit_code if isinstance(exc, KummerError) else 1
    logger.error(f"[ERROR] {type(exc).__name__}: {exc}")
    return {
        "status": "error",
        **context,
        "timestamp": datetime.now().isoformat(),
        "error": str(exc),
        "kind": type(exc).__name__,
        "exit_code": exit_code,
    }


def _parameters(a: float, b: float, z: float) -> ParameterSet:
    return ParameterSet.build(a, b, z)


class KummerAgent:
    """Main agent class for expansion, coefficient and oracle queries."""

    def __init__(self, config_path: str = "config.json", overrides: Optional[Dict[str, Any]] = None):
        """Initialize the agent with configuration."""
        self.config_path = Path(config_path)
        self.config = self._load_config()
        if overrides:
            self.config.update({k: v for k, v in overrides.items() if v is not None})
        try:
            logging.getLogger().setLevel(str(self.config.get("log_level", "INFO")).upper())
            self.expansion_module = ExpansionModule(self.config)
            self.oracle_module = OracleModule(self.config)
        except KummerError:
            raise
        except (TypeError, ValueError) as e:
            raise DomainError(f"Invalid configuration value: {e}") from e
        logger.info(f"[OK] Agent initialized (v{__version__})")

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from config.json, filling missing keys from the defaults."""
        config = self._default_config()
        if self.config_path.exists():
            try:
                with open(self.config_path, 'r') as f:
                    config.update(cast(Dict[str, Any], json.load(f)))
            except json.JSONDecodeError:
                logger.warning("[WARN] Invalid config file. Using defaults.")
        return config

    @staticmethod
    def _default_config() -> Dict[str, Any]:
        """Return default configuration."""
        return {
            "precision_digits": 60,
            "terms": 3,
            "safety_factor": 10.0,
            "mu_cap": 10.0,
            "quad_max_level": 12,
            "pipeline_mu_floor": 1e-20,
            "max_workers": 4,
            "log_level": "INFO"
        }

    def run_config(self, output_format: str = "plain") -> RunConfig:
        """Validate the effective settings of a command."""
        try:
            return RunConfig(
                output_format=cast(OutputFormat, output_format),
                precision=self.config["precision_digits"],
                terms=self.config["terms"],
                safety_factor=self.config["safety_factor"],
            )
        except ValidationError as e:
            raise DomainError(f"Invalid run configuration: {e.errors()[0]['msg']}") from e

    def evaluate(self, fn: str, a: float, b: float, z: float, terms: Optional[int] = None) -> AgentResult:
        """
        Evaluate M(a, b, z) or U(a, b+1, z) from the asymptotic expansion.

        Args:
            fn: "M" or "U"
            a, b, z: Parameters
            terms: Number of expansion terms

        Returns:
            Dictionary with the EvalResult record
        """
        logger.info(f"[EVAL] {fn}(a={a}, b={b}, z={z})")
        try:
            p = _parameters(a, b, z)
            result = self.expansion_module.evaluate(p, Function(fn), terms)
        except (KummerError, ValueError) as e:
            return _error(e, function=fn, a=a, b=b, z=z)
        return {
            "status": "success",
            "timestamp": datetime.now().isoformat(),
            "result": result.to_record(),
        }

    def _verify_row(self, fn: Function, a: float, b: float, z: float, terms: int, precision: int) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "a": a, "b": b, "z": z, "N": terms,
            "log_expansion": None, "log_oracle": None,
            "relative_error": None, "estimate": None, "error": "",
        }
        try:
            p = _parameters(a, b, z)
            result = self.expansion_module.evaluate(p, fn, terms)
            row["log_expansion"] = result.log_value
            row["estimate"] = result.error_estimate
            log_oracle = self.oracle_module.log_value(fn, a, b, z, precision)
            row["log_oracle"] = log_oracle
            row["relative_error"] = abs(math.expm1(result.log_value - log_oracle))
        except KummerError as e:
            logger.warning(f"[WARN] Verify row a={a:g} b={b:g} failed: {e}")
            row["error"] = f"{type(e).__name__}: {e}"
        return row

    def verify(
        self,
        fn: str,
        a_values: Sequence[float],
        mu_values: Sequence[float],
        z: float,
        order: str = Order.B_GE_A.value,
        terms: Optional[int] = None,
        precision: Optional[int] = None,
    ) -> AgentResult:
        """
        Compare expansion and oracle over a grid of a and mu.

        Rows are computed in parallel and returned in grid order.
        """
        logger.info(f"[VERIFY] {fn}/{order} a={list(a_values)} mu={list(mu_values)} z={z}")
        try:
            function = Function(fn)
            direction = 1.0 if Order(order) is Order.B_GE_A else -1.0
            terms = terms or int(self.config["terms"])
            precision = precision or int(self.config["precision_digits"])
        except ValueError as e:
            return _error(e, function=fn, order=order)

        grid = [(a, a * (1.0 + direction * mu)) for a in a_values for mu in mu_values]
        rows: List[Optional[Dict[str, Any]]] = [None] * len(grid)
        workers = int(self.config.get("max_workers", 4))
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {
                executor.submit(self._verify_row, function, a, b, z, terms, precision): index
                for index, (a, b) in enumerate(grid)
            }
            for future in as_completed(futures):
                rows[futures[future]] = future.result()

        failed = sum(1 for row in rows if row and row["error"])
        logger.info(f"[OK] Verified {len(rows)} rows ({failed} failed)")
        return {
            "status": "success",
            "timestamp": datetime.now().isoformat(),
            "function": function.value,
            "order": order,
            "rows": rows,
        }

    def coefficients(self, fn: str, order: str, mu: float, z: float, terms: Optional[int] = None) -> AgentResult:
        """
        Normalized expansion coefficients from the closed forms and the numeric pipeline.

        Args:
            fn: "M" or "U"
            order: "b_ge_a" or "b_le_a"
            mu: Case parameter
            z: Kummer argument
            terms: Highest coefficient index

        Returns:
            Dictionary with one row per coefficient
        """
        logger.info(f"[COEFFS] {fn}/{order} mu={mu} z={z}")
        try:
            regime = Regime.parse(fn, order)
            ctx = make_context(regime, mu)
            N = terms or int(self.config["terms"])
            table = coefficient_table(ctx, z, N)
            rows = []
            for n, value in enumerate(table.normalized):
                closed = closed_form(regime, n, mu, z) if n <= 2 else None
                rows.append({
                    "n": n,
                    "closed_form": closed,
                    "pipeline": value,
                    "delta": None if closed is None else value - closed,
                })
        except (KummerError, ValueError) as e:
            return _error(e, function=fn, order=order, mu=mu, z=z)
        return {
            "status": "success",
            "timestamp": datetime.now().isoformat(),
            "regime": regime.label,
            "a_m": table.a_m,
            "f_n": table.f_n,
            "rows": rows,
        }

    def oracle(
        self,
        fn: str,
        a: float,
        b: float,
        z: float,
        precision: Optional[int] = None,
        route: Optional[str] = None,
    ) -> AgentResult:
        """High-precision reference value of M(a, b, z) or U(a, b+1, z)."""
        logger.info(f"[ORACLE] {fn}(a={a}, b={b}, z={z})")
        try:
            _parameters(a, b, z)
            result = self.oracle_module.evaluate(Function(fn), a, b, z, precision, route)
        except (KummerError, ValueError) as e:
            return _error(e, function=fn, a=a, b=b, z=z)
        return {
            "status": "success",
            "timestamp": datetime.now().isoformat(),
            "function": fn,
            "a": a,
            "b": b,
            "z": z,
            "result": result.to_record(),
        }

    def path(self, mu: float, samples: int) -> AgentResult:
        """Samples of the steepest descent path r(theta) for theta in [-mu pi, mu pi]."""
        logger.info(f"[PATH] mu={mu} samples={samples}")
        try:
            if samples < 2:
                raise DomainError(f"Need at least 2 samples, got {samples}")
            if not 0.0 < mu < 1.0:
                raise DomainError(f"Steepest descent path requires 0 < mu < 1, got {mu!r}")
            rows = []
            for theta in np.linspace(-mu * math.pi, mu * math.pi, samples):
                r = steepest_descent_radius(mu, float(theta))
                rows.append({
                    "theta": float(theta),
                    "r": r,
                    "x": r * math.cos(theta),
                    "y": r * math.sin(theta),
                })
        except KummerError as e:
            return _error(e, mu=mu, samples=samples)
        return {"status": "success", "timestamp": datetime.now().isoformat(), "mu": mu, "rows": rows}

    def transformation_map(self, fn: str, order: str, mu: float, z: float, samples: int) -> AgentResult:
        """Samples of t(s), dt/ds and the amplitude around s0."""
        logger.info(f"[MAP] {fn}/{order} mu={mu} z={z}")
        try:
            if samples < 2:
                raise DomainError(f"Need at least 2 samples, got {samples}")
            ctx = make_context(Regime.parse(fn, order), mu)
            if mu > 0.0:
                s_values = np.geomspace(mu / 4.0, 4.0 * mu, samples)
            else:
                s_values = np.linspace(0.01, 4.0, samples)
            rows = transformation_samples(ctx, z, [float(s) for s in s_values])
        except (KummerError, ValueError) as e:
            return _error(e, function=fn, order=order, mu=mu, z=z)
        return {
            "status": "success",
            "timestamp": datetime.now().isoformat(),
            "regime": ctx.regime.label,
            "t0": ctx.t0,
            "rows": rows,
        }

    def status(self) -> AgentResult:
        """Version and effective configuration."""
        return {
            "status": "ok",
            "version": __version__,
            "config_file": str(self.config_path),
            "config": dict(self.config),
        }


# CLI Commands
def format_output(data: Dict[str, Any], format_type: str = "text") -> str:
    """
    Format output as JSON.

    Args:
        data: Result dictionary
        format_type: 'json' or 'plain'

    Returns:
        Formatted string
    """
    if format_type == "json":
        return json.dumps(data, indent=2, ensure_ascii=False)
    return ""  # Plain format handled by click.echo and rich


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def format_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    """CSV text with a header row, LF line ends and 17 significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def print_table(title: str, rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> None:
    """Render rows as a rich table on stdout."""
    console = Console()
    table = Table(title=title, show_header=True, header_style="bold cyan")
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*[_plain_cell(row.get(column)) for column in columns])
    console.print(table)


def _plain_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _fail(result: AgentResult) -> None:
    click.echo(format_output(result, "json"), err=True)
    sys.exit(int(result.get("exit_code", 1)))


def _make_agent(config_file: Optional[str], **flags: Any) -> KummerAgent:
    overrides: Dict[str, Any] = {}
    if config_file:
        overrides.update(load_config_file(Path(config_file)))
    for flag, key in FLAG_KEYS.items():
        if flags.get(flag) is not None:
            overrides[key] = flags[flag]
    return KummerAgent(overrides=overrides)


def _run(build: Callable[[], KummerAgent], output_format: str) -> KummerAgent:
    try:
        agent = build()
        agent.run_config(output_format)
    except (KummerError, OSError) as e:
        _fail(_error(e))
    return agent


def _emit_rows(result: AgentResult, columns: List[str], output_format: str, title: str) -> None:
    if result["status"] != "success":
        _fail(result)
    if output_format == "json":
        click.echo(format_output(result, "json"))
    elif output_format == "csv":
        click.echo(format_csv(result["rows"], columns), nl=False)
    else:
        print_table(title, result["rows"], columns)


def config_option(func: Callable[..., Any]) -> Callable[..., Any]:
    return click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False),
                        default=None, help='Config overlay (.json or key=value lines)')(func)


def format_option(func: Callable[..., Any]) -> Callable[..., Any]:
    return click.option('--format', '-f', 'output_format', default='plain',
                        type=click.Choice(['csv', 'json', 'plain']), help='Output format')(func)


def _float_list(value: str) -> List[float]:
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected a comma-separated list of numbers, got {value!r}") from e


@click.group()
@click.version_option(version=__version__)
def cli():
    """
    Kummer Asymptotics CLI v1.0

    Uniform large-parameter expansions of M(a, b, z) and U(a, b+1, z).
    """
    pass


@cli.command(name="eval")
@click.option('--fn', type=click.Choice(['M', 'U']), required=True, help='Function to evaluate')
@click.option('--a', type=float, required=True, help='Parameter a > 0')
@click.option('--b', type=float, required=True, help='Parameter b > 0 (U is evaluated at b+1)')
@click.option('--z', type=float, required=True, help='Argument z > 0')
@click.option('--terms', '-n', type=int, default=None, help='Number of expansion terms (1..6)')
@click.option('--safety-factor', type=float, default=None, help='Multiplier of the first omitted term')
@click.option('--json', 'as_json', is_flag=True, help='Shortcut for --format json')
@format_option
@config_option
def eval_command(fn: str, a: float, b: float, z: float, terms: Optional[int], safety_factor: Optional[float],
                 as_json: bool, output_format: str, config_file: Optional[str]):
    """Evaluate the asymptotic expansion."""
    output_format = "json" if as_json else output_format
    agent = _run(lambda: _make_agent(config_file, terms=terms, safety_factor=safety_factor), output_format)
    result = agent.evaluate(fn, a, b, z, terms)
    if result["status"] != "success":
        _fail(result)

    if output_format == "json":
        click.echo(format_output(result, "json"))
        return
    if output_format == "csv":
        click.echo(format_csv([result["result"]], EVAL_COLUMNS), nl=False)
        return

    record = result["result"]
    click.echo(f"\nOK: {fn} expansion ({record['function']}/{record['order']}, mu={record['mu']:.6g})")
    click.echo(f"  value:          {record['value']!r}")
    click.echo(f"  log_value:      {record['log_value']!r}")
    click.echo(f"  terms_used:     {record['terms_used']}")
    click.echo(f"  error_estimate: {record['error_estimate']:.3e}")
    click.echo()


@cli.command()
@click.option('--fn', type=click.Choice(['M', 'U']), required=True, help='Function to verify')
@click.option('--order', type=click.Choice(['b_ge_a', 'b_le_a']), default='b_ge_a', help='Case: b >= a or b <= a')
@click.option('--a-values', default='50,100,200', help='Comma-separated values of a')
@click.option('--mu-values', '--mu', 'mu_values', default='0.3', help='Comma-separated values of mu')
@click.option('--z', type=float, default=1.0, help='Argument z > 0')
@click.option('--terms', '-n', type=int, default=None, help='Number of expansion terms (1..6)')
@click.option('--precision', '-p', type=int, default=None, help='Oracle digits (>= 30)')
@click.option('--safety-factor', type=float, default=None, help='Multiplier of the first omitted term')
@click.option('--format', '-f', 'output_format', default='csv',
              type=click.Choice(['csv', 'json', 'plain']), help='Output format')
@config_option
def verify(fn: str, order: str, a_values: str, mu_values: str, z: float, terms: Optional[int],
           precision: Optional[int], safety_factor: Optional[float], output_format: str,
           config_file: Optional[str]):
    """Tabulate expansion errors against the oracle."""
    agent = _run(lambda: _make_agent(config_file, terms=terms, precision=precision,
                                     safety_factor=safety_factor), output_format)
    result = agent.verify(fn, _float_list(a_values), _float_list(mu_values), z, order, terms, precision)
    _emit_rows(result, VERIFY_COLUMNS, output_format, f"{fn}/{order} vs oracle")


@cli.command()
@click.option('--fn', type=click.Choice(['M', 'U']), required=True, help='Function')
@click.option('--order', type=click.Choice(['b_ge_a', 'b_le_a']), default='b_ge_a', help='Case: b >= a or b <= a')
@click.option('--mu', type=float, required=True, help='Case parameter mu >= 0')
@click.option('--z', type=float, default=1.0, help='Argument z')
@click.option('--terms', '-n', type=int, default=None, help='Highest coefficient index (1..6)')
@format_option
@config_option
def coeffs(fn: str, order: str, mu: float, z: float, terms: Optional[int], output_format: str,
           config_file: Optional[str]):
    """Compare closed-form and computed expansion coefficients."""
    agent = _run(lambda: _make_agent(config_file, terms=terms), output_format)
    result = agent.coefficients(fn, order, mu, z, terms)
    _emit_rows(result, COEFF_COLUMNS, output_format, f"Coefficients {fn}/{order}")


@cli.command()
@click.option('--fn', type=click.Choice(['M', 'U']), required=True, help='Function')
@click.option('--a', type=float, required=True, help='Parameter a > 0')
@click.option('--b', type=float, required=True, help='Parameter b > 0 (U is evaluated at b+1)')
@click.option('--z', type=float, required=True, help='Argument z > 0')
@click.option('--precision', '-p', type=int, default=None, help='Working digits (>= 30)')
@click.option('--route', type=click.Choice(['quadrature', 'connection']), default=None, help='Force the U route')
@format_option
@config_option
def oracle(fn: str, a: float, b: float, z: float, precision: Optional[int], route: Optional[str],
           output_format: str, config_file: Optional[str]):
    """High-precision reference value."""
    agent = _run(lambda: _make_agent(config_file, precision=precision), output_format)
    result = agent.oracle(fn, a, b, z, precision, route)
    if result["status"] != "success":
        _fail(result)

    record = result["result"]
    if output_format == "json":
        click.echo(format_output(result, "json"))
    elif output_format == "csv":
        row = {"function": fn, "a": a, "b": b, "z": z, **record}
        click.echo(format_csv([row], ["function", "a", "b", "z", "value", "log_value", "digits",
                                      "route", "perturbation"]), nl=False)
    else:
        click.echo(f"\nOK: {fn}({a:g}, {b:g}{' + 1' if fn == 'U' else ''}, {z:g}) [{record['route']}]")
        click.echo(f"  value:     {record['value']}")
        click.echo(f"  log_value: {record['log_value']!r}")
        if record["perturbation"]:
            click.echo(f"  b perturbed by +-{record['perturbation']:.1e}")
        click.echo()


@cli.command()
@click.option('--mu', type=float, required=True, help='Case parameter 0 < mu < 1')
@click.option('--samples', type=int, default=101, help='Number of theta samples')
@click.option('--format', '-f', 'output_format', default='csv',
              type=click.Choice(['csv', 'json', 'plain']), help='Output format')
@config_option
def path(mu: float, samples: int, output_format: str, config_file: Optional[str]):
    """Steepest descent path of the b <= a M-case in polar form."""
    agent = _run(lambda: _make_agent(config_file), output_format)
    _emit_rows(agent.path(mu, samples), PATH_COLUMNS, output_format, f"Steepest descent path, mu={mu:g}")


@cli.command(name="map")
@click.option('--fn', type=click.Choice(['M', 'U']), required=True, help='Function')
@click.option('--order', type=click.Choice(['b_ge_a', 'b_le_a']), default='b_ge_a', help='Case: b >= a or b <= a')
@click.option('--mu', type=float, required=True, help='Case parameter mu >= 0')
@click.option('--z', type=float, default=1.0, help='Argument z')
@click.option('--samples', type=int, default=21, help='Number of s samples')
@click.option('--format', '-f', 'output_format', default='csv',
              type=click.Choice(['csv', 'json', 'plain']), help='Output format')
@config_option
def map_command(fn: str, order: str, mu: float, z: float, samples: int, output_format: str,
                config_file: Optional[str]):
    """Sample the transformation t(s) and the amplitude."""
    agent = _run(lambda: _make_agent(config_file), output_format)
    result = agent.transformation_map(fn, order, mu, z, samples)
    _emit_rows(result, MAP_COLUMNS, output_format, f"Transformation {fn}/{order}, mu={mu:g}")


@cli.command()
@click.option('--format', '-f', 'output_format', default='plain',
              type=click.Choice(['json', 'plain']), help='Output format')
@config_option
def status(output_format: str, config_file: Optional[str]):
    """Check version and effective configuration."""
    agent = _run(lambda: _make_agent(config_file), output_format)
    status_data = agent.status()

    if output_format == "json":
        click.echo(format_output(status_data, "json"))
        return

    click.echo(f"\nOK: Kummer Asymptotics Status")
    click.echo(f"  Version: {__version__}")
    click.echo(f"  Config: {agent.config_path}")
    for key, value in agent.config.items():
        click.echo(f"  {key}: {value}")
    click.echo()


if __name__ == '__main__':
    try:
        cli()
    except Exception as e:
        logger.error(f"[ERROR] Agent error: {str(e)}")
        click.echo(f"ERROR: {str(e)}", err=True)
        exit(1)
