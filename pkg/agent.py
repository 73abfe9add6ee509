"""QME toolkit orchestrator: builds bases and regions from a run configuration and runs the pipelines."""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import settings as default_settings
from config.settings import QmeSettings
from database import BundleStore
from models import (
    BasisFamily,
    BasisKind,
    BeamBasis,
    CcdParameters,
    EigenSolution,
    MeasureMatrix,
    MeasureTag,
    OptimizationReport,
    OptimizeMeasure,
    Polarization,
    RegionOfInterest,
    RunConfig,
    SampledField,
    SampledScalarField,
    SweepTable,
)
from services import (
    BenchSimulator,
    assemble,
    bessel_basis,
    capture,
    disk,
    eig_hermitian,
    encode_ring_basis,
    first_dark_radius,
    lg_basis,
    maximize_transmission,
    minimize_spot,
    parse_roi_spec,
    polarization_weights,
    soim,
    square_grid,
    superoscillation_mask,
    superpose,
    sweep_mode_count,
    sweep_roi_radius,
    theta_schedule,
)
from utils.errors import InvalidArgumentError
from utils.helpers import format_float, parse_range
from utils.raster import emit_raster, write_pgm16, write_slm_rgb

logger = logging.getLogger(__name__)


def _scalar_view(field: SampledField) -> SampledScalarField:
    """The field itself, or the strongest transverse E component of a vector field."""
    if isinstance(field, SampledScalarField):
        return field
    powers = [float(np.sum(np.abs(field.E[c]) ** 2)) for c in range(2)]
    component = int(np.argmax(powers))
    return SampledScalarField(grid=field.grid, values=field.E[component], k0=field.k0)


class QmeToolkit:
    """
    Runs the QME pipelines for one run configuration.

    Every command writes its artifacts and the echoed configuration into the
    configured output directory.
    """

    def __init__(self, config: RunConfig, settings: Optional[QmeSettings] = None, store: Optional[BundleStore] = None):
        """Initialize the toolkit for a run."""
        self.config = config
        self.settings = settings or default_settings
        self.store = store or BundleStore(config.output_dir)
        self.k0 = 2 * np.pi / self.settings.wavelength
        self.scale = 1.0 / self.settings.si_wavelength_m if config.si else 1.0
        self._bench: Optional[BenchSimulator] = None

    # Geometry
    def length(self, value: float) -> float:
        """Convert a configured length to wavelength units."""
        return value * self.scale

    @property
    def w0(self) -> float:
        return self.length(self.config.w0)

    def grid(self):
        return square_grid(self.config.nx, self.length(self.config.dx), self.length(self.config.z))

    def bench(self, ccd: Optional[CcdParameters] = None) -> BenchSimulator:
        """Bench simulator with the configured SLM geometry (SLM pixel pitch = 1 wavelength)."""
        if ccd is not None:
            return self._make_bench(ccd)
        if self._bench is None:
            self._bench = self._make_bench(self.ccd())
        return self._bench

    def ccd(self, **overrides) -> CcdParameters:
        """Detector from the run floor and the configured saturation, noise and seed."""
        values = dict(
            floor=self.config.ccd_floor,
            saturation=self.settings.ccd_saturation,
            noise_sigma=self.settings.ccd_noise_sigma,
            seed=self.settings.ccd_seed,
        )
        values.update(overrides)
        return CcdParameters(**values)

    def _make_bench(self, ccd: CcdParameters) -> BenchSimulator:
        slm_grid = square_grid(self.config.slm_pixels, self.settings.slm_pitch)
        return BenchSimulator(
            slm_grid,
            self.k0,
            self.config.focal_length,
            ccd=ccd,
            quantize=self.config.quantize,
            reference_radius=self.config.ring_outer_radius,
            visibility_floor=self.settings.visibility_floor,
        )

    def units(self, basis: Optional[BeamBasis] = None) -> Dict[str, float]:
        """Unit tokens for ROI and range strings."""
        pitch = basis.grid.dx if basis is not None else self.length(self.config.dx)
        return {"w0": self.w0, "px": pitch}

    def roi(self, basis: Optional[BeamBasis] = None, spec: Optional[str] = None) -> RegionOfInterest:
        return parse_roi_spec(spec or self.config.roi, self.units(basis), self.scale)

    # Bases
    def ring_basis(self) -> Tuple[BeamBasis, list]:
        """SLM-plane ring basis and its patterns."""
        bench = self.bench()
        return encode_ring_basis(
            self.config.ring_count,
            None,
            bench.slm_grid,
            self.k0,
            self.config.focal_length,
            outer_radius=self.config.ring_outer_radius,
        )

    def build_basis(self, z_planes: Sequence[float] = ()) -> BeamBasis:
        """
        Synthesize the configured basis on the target plane.

        Args:
            z_planes: Extra planes a volumetric region needs

        Returns:
            BeamBasis
        """
        config = self.config
        grid = self.grid()
        extra = [z for z in z_planes if not np.isclose(z, grid.z, rtol=0.0, atol=1e-9)]
        family = BasisFamily(config.basis)

        if family == BasisFamily.LG:
            return lg_basis(config.N, config.L, self.w0, self.k0, grid, z_planes=extra)
        if family == BasisFamily.BESSEL:
            alpha, beta = polarization_weights(Polarization(config.polarization))
            thetas = theta_schedule(config.theta_max, config.N)
            return bessel_basis(thetas, config.L, alpha, beta, self.k0, grid, z_planes=extra)
        if extra:
            raise InvalidArgumentError("Ring bases live on the lens focal plane only; volume ROIs are not supported")
        slm_basis, _ = self.ring_basis()
        return self.bench().true_basis(slm_basis)

    def basis_and_roi(self) -> Tuple[BeamBasis, RegionOfInterest]:
        """Basis and region consistent with each other (volumes get their planes)."""
        roi = self.roi()
        basis = self.build_basis(roi.z_planes if roi.is_volume else ())
        if BasisFamily(self.config.basis) == BasisFamily.RING:
            roi = self.roi(basis)
        return basis, roi

    def reference_spot(self, basis: BeamBasis) -> Optional[float]:
        """w_B of the highest-NA member's core for Bessel and ring bases."""
        family = BasisFamily(self.config.basis)
        if family == BasisFamily.LG:
            return None
        reference = basis.members[-1]
        R_B = first_dark_radius(reference, (0.0, 0.0))
        return soim(reference, disk(R_B))

    def _circle(self, field: SampledField, roi: RegionOfInterest):
        extent = roi.outer_extent
        if not np.isfinite(extent):
            return None
        grid = field.grid
        cx, cy = roi.planar.center
        return ((cx - grid.x[0]) / grid.dx, (cy - grid.y[0]) / grid.dy, extent / grid.dx)

    def _echo(self) -> Path:
        return self.store.write_run_config(self.config)

    # Commands
    def synth(self) -> Tuple[BeamBasis, Path]:
        """Synthesize the basis and store it as a field bundle."""
        basis, _ = self.basis_and_roi()
        path = self.store.write_bundle(basis, "basis")
        self._echo()
        return basis, path

    def assemble(self, tag: MeasureTag, bundle: Optional[str] = None) -> List[MeasureMatrix]:
        """
        Assemble a measure matrix and export it.

        Args:
            tag: Measure to assemble
            bundle: Optional stored basis instead of a fresh synthesis

        Returns:
            Assembled matrices (three for the force operator)
        """
        if bundle:
            basis = self.store.read_bundle(bundle)
            roi = self.roi(basis)
        else:
            basis, roi = self.basis_and_roi()
        matrices = assemble(basis, roi, tag, self.config.tau)
        for M in matrices:
            self.store.write_matrix(M, f"matrix_{M.tag}.qmm")
        self._echo()
        return matrices

    def eig(self, matrix_path: str) -> EigenSolution:
        """Decompose an exported matrix and write its eigenvalue table."""
        M = self.store.read_matrix(matrix_path)
        solution = eig_hermitian(M, self.settings.degeneracy_tol)
        self.store.write_eigensolution(solution, f"eigenvalues_{M.tag}.txt")
        self._echo()
        return solution

    def optimize(self, measure: Optional[OptimizeMeasure] = None) -> OptimizationReport:
        """Run the transmission or spot-size pipeline and export report, field and raster."""
        measure = OptimizeMeasure(measure or self.config.measure or OptimizeMeasure.TRANSMISSION)
        basis, roi = self.basis_and_roi()
        if measure == OptimizeMeasure.TRANSMISSION:
            report = maximize_transmission(basis, roi)
        else:
            report = minimize_spot(basis, roi, threshold=self.config.tau)
        w_B = self.reference_spot(basis)
        if w_B and report.spot_size is not None:
            report.parameters["w_over_wB"] = format_float(report.spot_size / w_B)

        self.store.write_report(report, "report.txt")
        field = superpose(basis, report.coefficients)
        if self.config.export_bundle:
            optimized = BeamBasis(kind=basis.kind, members=[field])
            self.store.write_bundle(optimized, "optimized")
        if self.config.export_raster:
            self.store.root.mkdir(parents=True, exist_ok=True)
            emit_raster(field.intensity, self.store.path("intensity.ppm"), circle=self._circle(field, roi))
        self._echo()
        logger.info("Optimized %s over %s: eigenvalue %.6g", measure.value, roi.describe(), report.eigenvalue)
        return report

    def sweep(self) -> SweepTable:
        """Sweep ROI radius (R=...) or mode count (N=...) and write sweep.csv."""
        if not self.config.sweep:
            raise InvalidArgumentError("sweep needs a range, e.g. R=1..50 or N=1..25")
        parameter, _, text = self.config.sweep.partition("=")
        parameter = parameter.strip()
        basis, roi = self.basis_and_roi()

        if parameter == "R":
            start, stop, count = parse_range(text, self.units(basis), self.scale)
            radii = np.linspace(start, stop, count or self.config.sweep_points)
            table = sweep_roi_radius(
                basis,
                roi,
                radii,
                self.config.tau,
                reference_w=self.reference_spot(basis),
                max_workers=self.settings.max_workers,
            )
        elif parameter == "N":
            start, stop, _ = parse_range(text)
            counts = list(range(int(start), int(stop) + 1))
            measure = MeasureTag.SSO if self.config.measure == OptimizeMeasure.SPOTSIZE.value else MeasureTag.IO
            table = sweep_mode_count(basis, roi, counts, measure, self.config.tau, self.settings.max_workers)
        else:
            raise InvalidArgumentError(f"Unsupported sweep parameter: {parameter}")

        self.store.write_sweep(table, "sweep.csv")
        self._echo()
        return table

    def bench_run(self) -> Dict[str, object]:
        """
        Simulated bench scenario.

        Measures every ring by three-step interferometry, minimizes the spot
        size on the measured fields, checks Exp-S against Num-S and exports
        the SLM pattern, the CCD frame and the report.
        """
        config = self.config
        basis, _ = self.ring_basis()
        bench = self.bench()
        results = bench.measure_basis(basis)
        measured = bench.measured_basis(basis, results)
        roi = self.roi(measured)

        report = minimize_spot(measured, roi, threshold=config.tau)
        R_B, w_B = bench.reference_spot(basis)
        report.parameters.update(
            {"w_B": format_float(w_B), "R_B": format_float(R_B), "w_over_wB": format_float(report.spot_size / w_B)}
        )

        values = np.tensordot(report.coefficients, np.stack([m.values for m in basis.members]), axes=1)
        exp_bench = bench
        if config.nonlinearity > 0:
            full_well = float(bench.exp_s(basis, report.coefficients).max())
            exp_bench = self.bench(self.ccd(nonlinearity=config.nonlinearity, full_well=full_well))
        linearity = exp_bench.verify_linearity(basis, report.coefficients, results)
        report.parameters["linearity_discrepancy"] = format_float(linearity.discrepancy)

        self.store.write_report(report, "bench_report.txt")
        pattern, _ = bench.display(values)
        self.store.root.mkdir(parents=True, exist_ok=True)
        if pattern is not None:
            write_slm_rgb(pattern.amplitude, pattern.phase, self.store.path("slm_pattern.ppm"))
        frame = capture(exp_bench.propagate(values), exp_bench.ccd)
        write_pgm16(frame.counts, self.store.path("ccd_frame.pgm"))
        if config.export_raster:
            field = superpose(measured, report.coefficients)
            emit_raster(linearity.exp_s, self.store.path("exp_s.ppm"), circle=self._circle(field, roi))

        summary: Dict[str, object] = {"report": report, "linearity": linearity, "w_B": w_B}
        if config.sweep:
            parameter, _, text = config.sweep.partition("=")
            if parameter.strip() != "R":
                raise InvalidArgumentError(f"Bench sweeps run over R only, got {parameter}")
            start, stop, count = parse_range(text, self.units(measured), self.scale)
            radii = np.linspace(start, stop, count or config.sweep_points)
            table = bench.spot_size_sweep(basis, radii, config.tau, results, self.settings.max_workers)
            self.store.write_sweep(table, "sweep.csv")
            summary["sweep"] = table
        self._echo()
        return summary

    def analyze_superoscillation(self) -> Dict[str, object]:
        """Spot-size optimum, its local wavevector map and the super-oscillating samples."""
        basis, roi = self.basis_and_roi()
        report = minimize_spot(basis, roi, threshold=self.config.tau)
        field = _scalar_view(superpose(basis, report.coefficients))
        center = roi.planar.center
        mask, k_band = superoscillation_mask(field, self.config.epsilon, center, self.settings.phase_floor)

        intensity = field.intensity
        peak = float(intensity.max())
        masked_peak = float(intensity[mask].max() / peak) if mask.any() else 0.0
        report.parameters.update(
            {"k_band": format_float(k_band), "superoscillating": str(int(mask.sum())), "masked_peak": format_float(masked_peak)}
        )
        self.store.write_report(report, "superoscillation.txt")
        if self.config.export_raster:
            self.store.root.mkdir(parents=True, exist_ok=True)
            emit_raster(mask.astype(np.float64), self.store.path("superoscillation.ppm"), colormap="hot",
                        circle=self._circle(field, roi))
        self._echo()
        return {"report": report, "mask": mask, "k_band": k_band, "masked_peak": masked_peak}
