"""Main entry point for the QME toolkit command line."""

from pathlib import Path
from typing import Dict, List, Optional

import click
import numpy as np
import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from agent import QmeToolkit
from config import settings
from models import MeasureTag, OptimizationReport, RunConfig, SweepTable, parse_key_values
from utils.errors import QmeError
from utils.logging_setup import configure_logging

app = typer.Typer(help="Quadratic measure eigenmodes: optimize beam superpositions over a region of interest.")
console = Console()
err_console = Console(stderr=True)

# Options shared by the basis-driven commands
BASIS = typer.Option(None, "--basis", "-b", help="Basis family: lg, bessel, ring")
SIZE = typer.Option(None, "--N", help="Basis size")
CHARGE = typer.Option(None, "--L", help="Azimuthal index / topological charge")
WAIST = typer.Option(None, "--w0", help="LG waist")
THETA_MAX = typer.Option(None, "--theta-max", help="Largest Bessel cone angle in radians")
POLARIZATION = typer.Option(None, "--polarization", help="x, y, circular+, circular-")
SAMPLES = typer.Option(None, "--nx", help="Samples per grid side")
PITCH = typer.Option(None, "--dx", help="Grid pitch")
PLANE = typer.Option(None, "--z", help="Target plane")
ROI = typer.Option(None, "--roi", "-r", help="ROI spec, e.g. disk:R=w0 or volume:R=1,z=-2..2:5")
TAU = typer.Option(None, "--tau", help="Intensity retention fraction")
OUT = typer.Option(None, "--out", "-o", help="Output directory (default: QME_OUTPUT_DIR)")
CONFIG = typer.Option(None, "--config", "-c", help="Run configuration file; overrides flags")
SI = typer.Option(False, "--si", help="Lengths are given in metres")
VERBOSE = typer.Option(False, "--verbose", "-v", help="Debug logging")


def build_config(command: str, flags: Dict[str, object], config_file: Optional[Path] = None) -> RunConfig:
    """
    Effective run configuration.

    Precedence: built-in defaults < settings (environment, .env) < flags < config file.
    """
    base = RunConfig(
        command=command,
        output_dir=settings.output_dir,
        tau=settings.intensity_threshold,
        epsilon=settings.band_fraction,
        ring_count=settings.ring_count,
        ring_outer_radius=settings.ring_outer_radius,
        slm_pixels=settings.slm_pixels,
        focal_length=settings.lens_focal_length,
        quantize=settings.slm_quantize,
        ccd_floor=settings.ccd_floor,
        si=settings.si_units,
    )
    config = base.merged({key: value for key, value in flags.items() if value is not None})
    if config_file is not None:
        overrides = parse_key_values(Path(config_file).read_text(encoding="utf-8"))
        overrides.pop("command", None)
        config = config.merged(overrides)
    return config


def _toolkit(command: str, flags: Dict[str, object], config_file: Optional[Path], verbose: bool) -> QmeToolkit:
    configure_logging("DEBUG" if verbose else settings.log_level, settings.log_rich)
    if config_file is None and settings.config_file:
        config_file = Path(settings.config_file)
    return QmeToolkit(build_config(command, flags, config_file))


def _fail(error: Exception) -> None:
    err_console.print(f"[red]Error: {error}[/red]")
    raise typer.Exit(code=1)


def display_report(report: OptimizationReport, title: str) -> None:
    """Display an optimization report."""
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("measure", str(report.tag))
    table.add_row("eigenvalue", f"{report.eigenvalue:.6g}")
    table.add_row("N / K", f"{report.basis_size} / {report.retained}")
    if report.transmittance is not None:
        table.add_row("T", f"{report.transmittance:.6f}")
    if report.spot_size is not None:
        table.add_row("w", f"{report.spot_size:.6g}")
    if report.strehl is not None:
        table.add_row("Strehl", f"{report.strehl:.4%}")
    for key, value in report.parameters.items():
        table.add_row(key, value)
    console.print(table)


def display_sweep(table: SweepTable) -> None:
    """Display sweep rows, marking K-drop steps."""
    rich_table = Table(title="Sweep", show_header=True, header_style="bold magenta")
    for column in ("R", "N", "K", "w", "T", "Strehl"):
        rich_table.add_column(column, justify="right")
    if table.reference_w:
        rich_table.add_column("w/w_B", justify="right")
    for row in table.rows:
        cells = [
            f"{row.R:.4g}",
            str(row.N),
            f"[yellow]{row.K}[/yellow]" if row.step else str(row.K),
            f"{row.w:.4g}",
            "-" if row.T is None else f"{row.T:.4f}",
            "-" if row.Strehl is None else f"{row.Strehl:.3%}",
        ]
        if table.reference_w:
            cells.append(f"{row.w / table.reference_w:.3f}")
        rich_table.add_row(*cells)
    console.print(rich_table)


@app.command()
def synth(
    basis: Optional[str] = BASIS,
    N: Optional[int] = SIZE,
    L: Optional[int] = CHARGE,
    w0: Optional[float] = WAIST,
    theta_max: Optional[float] = THETA_MAX,
    polarization: Optional[str] = POLARIZATION,
    nx: Optional[int] = SAMPLES,
    dx: Optional[float] = PITCH,
    z: Optional[float] = PLANE,
    roi: Optional[str] = ROI,
    out: Optional[str] = OUT,
    config: Optional[Path] = CONFIG,
    si: bool = SI,
    verbose: bool = VERBOSE,
):
    """Synthesize a basis and write it as a field bundle."""
    try:
        toolkit = _toolkit("synth", dict(basis=basis, N=N, L=L, w0=w0, theta_max=theta_max, polarization=polarization,
                                         nx=nx, dx=dx, z=z, roi=roi, output_dir=out, si=si or None), config, verbose)
        result, path = toolkit.synth()
    except (QmeError, ValueError, OSError) as e:
        _fail(e)
    console.print(f"[green]✓[/green] {result.size}-member {result.kind} basis written to {path}")


@app.command("assemble")
def assemble_command(
    tag: str = typer.Option("IO", "--tag", "-t", help="Measure: IO, SSO, EO, CSO, OFO"),
    bundle: Optional[str] = typer.Option(None, "--bundle", help="Use a stored basis bundle"),
    basis: Optional[str] = BASIS,
    N: Optional[int] = SIZE,
    L: Optional[int] = CHARGE,
    w0: Optional[float] = WAIST,
    theta_max: Optional[float] = THETA_MAX,
    polarization: Optional[str] = POLARIZATION,
    nx: Optional[int] = SAMPLES,
    dx: Optional[float] = PITCH,
    z: Optional[float] = PLANE,
    roi: Optional[str] = ROI,
    tau: Optional[float] = TAU,
    out: Optional[str] = OUT,
    config: Optional[Path] = CONFIG,
    si: bool = SI,
    verbose: bool = VERBOSE,
):
    """Assemble a measure matrix and export it."""
    try:
        name = tag.upper()
        measure = MeasureTag.OFO_X if name.startswith("OFO") else MeasureTag(name)
        toolkit = _toolkit("assemble", dict(basis=basis, N=N, L=L, w0=w0, theta_max=theta_max, polarization=polarization,
                                            nx=nx, dx=dx, z=z, roi=roi, tau=tau, output_dir=out, si=si or None),
                           config, verbose)
        matrices = toolkit.assemble(measure, bundle)
    except (QmeError, ValueError, OSError) as e:
        _fail(e)
    for M in matrices:
        console.print(f"[green]✓[/green] {M.tag} matrix {M.size}x{M.size}, norm {M.norm:.6g}")


@app.command()
def eig(
    matrix: Path = typer.Argument(..., help="Exported measure matrix"),
    out: Optional[str] = OUT,
    verbose: bool = VERBOSE,
):
    """Eigendecompose an exported matrix; eigenvalues descending."""
    try:
        toolkit = _toolkit("eig", dict(output_dir=out), None, verbose)
        solution = toolkit.eig(str(matrix.resolve()))
    except (QmeError, ValueError, OSError) as e:
        _fail(e)

    table = Table(title=f"Eigenvalues ({solution.tag})", show_header=True, header_style="bold magenta")
    table.add_column("k", justify="right", style="dim")
    table.add_column("eigenvalue", justify="right", style="cyan")
    for k, value in enumerate(solution.eigenvalues):
        table.add_row(str(k), f"{value:.10g}")
    console.print(table)


@app.command()
def optimize(
    measure: str = typer.Option("transmission", "--measure", "-m", help="transmission or spotsize"),
    basis: Optional[str] = BASIS,
    N: Optional[int] = SIZE,
    L: Optional[int] = CHARGE,
    w0: Optional[float] = WAIST,
    theta_max: Optional[float] = THETA_MAX,
    polarization: Optional[str] = POLARIZATION,
    nx: Optional[int] = SAMPLES,
    dx: Optional[float] = PITCH,
    z: Optional[float] = PLANE,
    roi: Optional[str] = ROI,
    tau: Optional[float] = TAU,
    out: Optional[str] = OUT,
    config: Optional[Path] = CONFIG,
    si: bool = SI,
    verbose: bool = VERBOSE,
):
    """Optimize a superposition: maximal transmission or minimal spot size in the ROI."""
    try:
        toolkit = _toolkit("optimize", dict(measure=measure, basis=basis, N=N, L=L, w0=w0, theta_max=theta_max,
                                            polarization=polarization, nx=nx, dx=dx, z=z, roi=roi, tau=tau,
                                            output_dir=out, si=si or None), config, verbose)
        report = toolkit.optimize()
    except (QmeError, ValueError, OSError) as e:
        _fail(e)
    display_report(report, f"Optimized {measure}")
    console.print(f"[dim]Artifacts in {toolkit.store.root}[/dim]")


@app.command()
def sweep(
    R: Optional[str] = typer.Option(None, "--R", help="ROI radius range START..STOP[:COUNT]"),
    modes: Optional[str] = typer.Option(None, "--modes", help="Mode count range START..STOP"),
    measure: Optional[str] = typer.Option(None, "--measure", "-m", help="Mode-count sweeps: transmission or spotsize"),
    points: Optional[int] = typer.Option(None, "--points", help="Radii when COUNT is not given"),
    basis: Optional[str] = BASIS,
    N: Optional[int] = SIZE,
    L: Optional[int] = CHARGE,
    w0: Optional[float] = WAIST,
    theta_max: Optional[float] = THETA_MAX,
    polarization: Optional[str] = POLARIZATION,
    nx: Optional[int] = SAMPLES,
    dx: Optional[float] = PITCH,
    z: Optional[float] = PLANE,
    roi: Optional[str] = ROI,
    tau: Optional[float] = TAU,
    out: Optional[str] = OUT,
    config: Optional[Path] = CONFIG,
    si: bool = SI,
    verbose: bool = VERBOSE,
):
    """Sweep the ROI radius or the mode count and write sweep.csv."""
    try:
        if R is not None and modes is not None:
            raise ValueError("Give either --R or --modes, not both")
        sweep_spec = f"R={R}" if R is not None else (f"N={modes}" if modes is not None else None)
        if R is not None and roi is not None and "=" not in roi:
            roi = f"{roi}:R={R.split('..')[0]}"
        toolkit = _toolkit("sweep", dict(sweep=sweep_spec, sweep_points=points, measure=measure, basis=basis, N=N,
                                         L=L, w0=w0, theta_max=theta_max, polarization=polarization, nx=nx, dx=dx,
                                         z=z, roi=roi, tau=tau, output_dir=out, si=si or None), config, verbose)
        table = toolkit.sweep()
    except (QmeError, ValueError, OSError) as e:
        _fail(e)
    display_sweep(table)
    steps = table.step_radii()
    if steps:
        console.print(f"[yellow]K drops at R = {', '.join(f'{r:.4g}' for r in steps)}[/yellow]")


@app.command()
def bench(
    rings: Optional[int] = typer.Option(None, "--rings", help="Number of SLM rings"),
    outer_radius: Optional[float] = typer.Option(None, "--outer-radius", help="Outer ring radius in SLM pixels"),
    slm_pixels: Optional[int] = typer.Option(None, "--slm-pixels", help="SLM pixels per side"),
    focal_length: Optional[float] = typer.Option(None, "--focal-length", "-f", help="Fourier lens focal length"),
    quantize: Optional[bool] = typer.Option(None, "--quantize/--no-quantize", help="8-bit SLM quantization"),
    ccd_floor: Optional[float] = typer.Option(None, "--ccd-floor", help="CCD sensitivity floor in counts"),
    nonlinearity: Optional[float] = typer.Option(None, "--nonlinearity", help="Injected CCD gain nonlinearity"),
    R: Optional[str] = typer.Option(None, "--R", help="Also sweep the ROI radius over START..STOP[:COUNT]"),
    roi: Optional[str] = ROI,
    tau: Optional[float] = TAU,
    out: Optional[str] = OUT,
    config: Optional[Path] = CONFIG,
    verbose: bool = VERBOSE,
):
    """Run the simulated dual-SLM bench: ring measurement, spot-size optimization and linearity check."""
    try:
        toolkit = _toolkit("bench", dict(basis="ring", ring_count=rings, ring_outer_radius=outer_radius,
                                         slm_pixels=slm_pixels, focal_length=focal_length, quantize=quantize,
                                         ccd_floor=ccd_floor, nonlinearity=nonlinearity,
                                         sweep=f"R={R}" if R is not None else None, roi=roi, tau=tau,
                                         output_dir=out), config, verbose)
        summary = toolkit.bench_run()
    except (QmeError, ValueError, OSError) as e:
        _fail(e)

    display_report(summary["report"], "Bench spot-size optimum")
    linearity = summary["linearity"]
    style = "green" if linearity.linear else "red"
    console.print(Panel.fit(
        f"[yellow]Exp-S vs Num-S:[/yellow] {linearity.discrepancy:.3e} (tolerance {linearity.tolerance:.0%})\n"
        f"[yellow]w_B:[/yellow] {summary['w_B']:.4g}",
        title="Linearity",
        border_style=style,
    ))
    if "sweep" in summary:
        display_sweep(summary["sweep"])
    if not linearity.linear:
        err_console.print("[red]System is not linear: Exp-S and Num-S disagree[/red]")
        raise typer.Exit(code=1)


@app.command()
def analyze(
    superoscillation: bool = typer.Option(False, "--superoscillation", help="Map super-oscillating samples"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", help="Spectral band fraction"),
    basis: Optional[str] = BASIS,
    N: Optional[int] = SIZE,
    L: Optional[int] = CHARGE,
    w0: Optional[float] = WAIST,
    nx: Optional[int] = SAMPLES,
    dx: Optional[float] = PITCH,
    roi: Optional[str] = ROI,
    tau: Optional[float] = TAU,
    out: Optional[str] = OUT,
    config: Optional[Path] = CONFIG,
    si: bool = SI,
    verbose: bool = VERBOSE,
):
    """Analyze the spot-size optimum."""
    try:
        if not superoscillation:
            raise ValueError("Select an analysis, e.g. --superoscillation")
        toolkit = _toolkit("analyze", dict(epsilon=epsilon, basis=basis, N=N, L=L, w0=w0, nx=nx, dx=dx, roi=roi,
                                           tau=tau, output_dir=out, si=si or None), config, verbose)
        result = toolkit.analyze_superoscillation()
    except (QmeError, ValueError, OSError) as e:
        _fail(e)

    mask = result["mask"]
    console.print(Panel.fit(
        f"[yellow]Band edge k:[/yellow] {result['k_band']:.4g}\n"
        f"[yellow]Super-oscillating samples:[/yellow] {int(np.sum(mask))}\n"
        f"[yellow]Brightest masked sample:[/yellow] {result['masked_peak']:.3%} of peak",
        title="Super-oscillation",
        border_style="cyan",
    ))


@app.command()
def info():
    """Show the effective settings."""
    table = Table(title="QME settings", show_header=True, header_style="bold magenta")
    table.add_column("Setting", style="cyan")
    table.add_column("Value")
    for key, value in settings.model_dump().items():
        table.add_row(key, str(value))
    table.add_row("k0", f"{settings.k0:.6g}")
    console.print(table)


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return its exit code."""
    try:
        code = app(args=argv, prog_name="qme", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        return 1
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    app()
