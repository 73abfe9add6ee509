"""File store for field bundles, measure matrices, eigenvalue tables, reports and sweep tables."""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from config.settings import settings
from models import (
    BasisKind,
    BeamBasis,
    BesselParameters,
    EigenSolution,
    Grid,
    LgParameters,
    MeasureMatrix,
    OptimizationReport,
    RingParameters,
    RunConfig,
    SampledScalarField,
    SampledVectorField,
    SweepRow,
    SweepTable,
    parse_key_values,
)
from utils.errors import BundleFormatError
from utils.helpers import format_complex, format_float, parse_complex

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

BUNDLE_FORMAT = "qme-bundle"
MATRIX_FORMAT = "qme-matrix"
MATRIX_KIND = "measure"
EIGENVECTORS_KIND = "eigenvectors"
FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.txt"
RUN_CONFIG_NAME = "run_config.txt"
END_HEADER = b"end_header\n"

# Little-endian complex128 is a (re, im) float64 pair
PAYLOAD_DTYPE = np.dtype("<c16")

SWEEP_COLUMNS = ["R", "N", "K", "w", "T", "Strehl"]

_PARAMETER_TYPES = {"lg": LgParameters, "bessel": BesselParameters, "ring": RingParameters}


def _payload(field) -> bytes:
    if isinstance(field, SampledVectorField):
        samples = np.concatenate([field.E, field.H])
    else:
        samples = field.values
    return np.ascontiguousarray(samples, dtype=PAYLOAD_DTYPE).tobytes()


def _read_payload(path: Path, count: int) -> np.ndarray:
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise BundleFormatError(f"Could not read payload {path}: {e}") from e
    if len(raw) != count * PAYLOAD_DTYPE.itemsize:
        raise BundleFormatError(f"Payload {path.name} holds {len(raw)} bytes, expected {count * PAYLOAD_DTYPE.itemsize}")
    return np.frombuffer(raw, dtype=PAYLOAD_DTYPE).astype(np.complex128)


def _format_value(value) -> str:
    if isinstance(value, (complex, np.complexfloating)):
        return format_complex(value)
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def _write_key_values(path: Path, header: str, record: Dict[str, object]) -> Path:
    lines = [f"# {header}"] + [f"{key} = {_format_value(value)}" for key, value in record.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _read_key_values(path: Path) -> Dict[str, str]:
    try:
        return parse_key_values(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise BundleFormatError(f"Could not read {path}: {e}") from e
    except ValueError as e:
        raise BundleFormatError(f"Malformed key/value file {path}: {e}") from e


class BundleStore:
    """
    Reads and writes every artifact of a run under one output directory.

    Relative names resolve against the store root; absolute paths are used
    as given.
    """

    def __init__(self, root: Optional[PathLike] = None):
        """Initialize the store, creating the root directory on first write."""
        self.root = Path(root or settings.output_dir)

    def path(self, name: PathLike) -> Path:
        """Resolve a name against the root."""
        path = Path(name)
        return path if path.is_absolute() else self.root / path

    def _target(self, name: PathLike) -> Path:
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    # Field bundles
    def write_bundle(self, basis: BeamBasis, name: PathLike) -> Path:
        """
        Write a basis as a manifest plus one binary payload per member and plane.

        Args:
            basis: Basis to store
            name: Bundle directory

        Returns:
            Bundle directory path
        """
        directory = self.path(name)
        directory.mkdir(parents=True, exist_ok=True)
        grid = basis.grid
        manifest: Dict[str, object] = {
            "format": BUNDLE_FORMAT,
            "version": FORMAT_VERSION,
            "kind": BasisKind(basis.kind).value,
            "nx": grid.nx,
            "ny": grid.ny,
            "dx": grid.dx,
            "dy": grid.dy,
            "x0": grid.x0,
            "y0": grid.y0,
            "z": grid.z,
            "k0": basis.k0,
            "N": basis.size,
            "layers": len(basis.layers),
        }
        for j, layer in enumerate(basis.layers):
            manifest[f"layer.{j}.z"] = layer[0].grid.z
        if basis.initial_members:
            manifest["initial_z"] = basis.initial_members[0].grid.z
        for i, params in enumerate(basis.parameters):
            for key, value in params.model_dump().items():
                manifest[f"member.{i}.{key}"] = value

        groups = [("member", basis.members)] + [(f"layer{j}", layer) for j, layer in enumerate(basis.layers)]
        if basis.initial_members:
            groups.append(("initial", basis.initial_members))
        for prefix, fields in groups:
            for i, field in enumerate(fields):
                (directory / f"{prefix}_{i:04d}.bin").write_bytes(_payload(field))

        _write_key_values(directory / MANIFEST_NAME, "qme field bundle", manifest)
        logger.info("Wrote bundle %s (N=%d, %s)", directory, basis.size, manifest["kind"])
        return directory

    def read_bundle(self, name: PathLike) -> BeamBasis:
        """Read a bundle written by `write_bundle`; samples round-trip bit-exactly."""
        directory = self.path(name)
        manifest = _read_key_values(directory / MANIFEST_NAME)
        if manifest.get("format") != BUNDLE_FORMAT:
            raise BundleFormatError(f"{directory} is not a field bundle")

        try:
            kind = BasisKind(manifest["kind"])
            grid = Grid(
                nx=int(manifest["nx"]),
                ny=int(manifest["ny"]),
                dx=float(manifest["dx"]),
                dy=float(manifest["dy"]),
                x0=float(manifest.get("x0", 0.0)),
                y0=float(manifest.get("y0", 0.0)),
                z=float(manifest["z"]),
            )
            k0 = float(manifest["k0"])
            N = int(manifest["N"])
            layer_z = [float(manifest[f"layer.{j}.z"]) for j in range(int(manifest.get("layers", 0)))]
        except (KeyError, ValueError) as e:
            raise BundleFormatError(f"Malformed manifest in {directory}: {e}") from e

        def load(prefix: str, plane: Grid) -> list:
            fields = []
            for i in range(N):
                path = directory / f"{prefix}_{i:04d}.bin"
                if kind == BasisKind.VECTOR:
                    samples = _read_payload(path, 6 * plane.nx * plane.ny).reshape((6,) + plane.shape)
                    fields.append(SampledVectorField(grid=plane, E=samples[:3], H=samples[3:], k0=k0))
                else:
                    samples = _read_payload(path, plane.nx * plane.ny).reshape(plane.shape)
                    fields.append(SampledScalarField(grid=plane, values=samples, k0=k0))
            return fields

        initial = load("initial", grid.at_z(float(manifest["initial_z"]))) if "initial_z" in manifest else []
        return BeamBasis(
            kind=kind,
            members=load("member", grid),
            initial_members=initial,
            layers=[load(f"layer{j}", grid.at_z(z)) for j, z in enumerate(layer_z)],
            parameters=self._read_parameters(manifest, N),
        )

    @staticmethod
    def _read_parameters(manifest: Dict[str, str], N: int) -> list:
        parameters = []
        for i in range(N):
            prefix = f"member.{i}."
            raw = {key[len(prefix):]: value for key, value in manifest.items() if key.startswith(prefix)}
            if not raw:
                continue
            family = raw.get("family")
            if family not in _PARAMETER_TYPES:
                raise BundleFormatError(f"Unknown member family {family!r} for member {i}")
            for key in ("alpha", "beta"):
                if key in raw:
                    raw[key] = parse_complex(raw[key])
            parameters.append(_PARAMETER_TYPES[family].model_validate(raw))
        return parameters

    # Measure matrices
    def _write_square(self, entries: np.ndarray, fields: Dict[str, object], name: PathLike) -> Path:
        path = self._target(name)
        header = {"format": MATRIX_FORMAT, "version": FORMAT_VERSION, **fields, "N": entries.shape[0]}
        text = "\n".join(f"{key} = {value}" for key, value in header.items())
        payload = np.ascontiguousarray(entries, dtype=PAYLOAD_DTYPE).tobytes()
        path.write_bytes(text.encode("utf-8") + b"\n" + END_HEADER + payload)
        return path

    def _read_square(self, name: PathLike) -> Tuple[Dict[str, str], np.ndarray]:
        path = self.path(name)
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise BundleFormatError(f"Could not read matrix {path}: {e}") from e
        head, sep, payload = raw.partition(END_HEADER)
        if not sep:
            raise BundleFormatError(f"{path} has no matrix header")
        try:
            header = parse_key_values(head.decode("utf-8"))
            N = int(header["N"])
        except (KeyError, ValueError, UnicodeDecodeError) as e:
            raise BundleFormatError(f"Malformed matrix header in {path}: {e}") from e
        if header.get("format") != MATRIX_FORMAT:
            raise BundleFormatError(f"{path} is not a measure matrix")
        if len(payload) != N * N * PAYLOAD_DTYPE.itemsize:
            raise BundleFormatError(f"Matrix payload of {path} does not hold {N}x{N} entries")
        entries = np.frombuffer(payload, dtype=PAYLOAD_DTYPE).astype(np.complex128).reshape(N, N)
        return header, entries

    def write_matrix(self, M: MeasureMatrix, name: PathLike) -> Path:
        """Text header (tag, N, roi, basis hash) followed by row-major (re, im) float64 pairs."""
        fields = {
            "kind": MATRIX_KIND,
            "tag": M.tag,
            "roi": M.roi,
            "basis_hash": M.basis_hash,
            "normalized": M.normalized,
        }
        path = self._write_square(M.entries, fields, name)
        logger.debug("Wrote %s matrix N=%d to %s", M.tag, M.size, path)
        return path

    def read_matrix(self, name: PathLike) -> MeasureMatrix:
        header, entries = self._read_square(name)
        if header.get("kind", MATRIX_KIND) != MATRIX_KIND:
            raise BundleFormatError(f"{self.path(name)} holds {header['kind']}, not a measure matrix")
        return MeasureMatrix(
            entries=entries,
            tag=header["tag"],
            roi=header.get("roi", ""),
            basis_hash=header.get("basis_hash", ""),
            normalized=header.get("normalized", "False") == "True",
        )

    # Eigensolutions
    def write_eigensolution(self, solution: EigenSolution, name: PathLike) -> Path:
        """
        Ordered eigenvalue table in text, eigenvectors as a matrix payload alongside.

        The eigenvector file carries the tag of the decomposed measure, empty
        for an untagged matrix.

        Returns:
            Path of the eigenvalue table
        """
        path = self._target(name)
        tag = solution.tag or ""
        lines = [
            f"# tag = {tag}",
            f"# roi = {solution.roi}",
            f"# residual_norm = {format_float(solution.residual_norm)}",
            "index eigenvalue",
        ]
        lines += [f"{k} {format_float(value)}" for k, value in enumerate(solution.eigenvalues)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        fields = {"kind": EIGENVECTORS_KIND, "tag": tag, "roi": solution.roi}
        self._write_square(solution.eigenvectors, fields, path.with_suffix(".vectors"))
        return path

    def read_eigensolution(self, name: PathLike) -> EigenSolution:
        """Eigenvalue table and its eigenvector file, written by `write_eigensolution`."""
        path = self.path(name)
        eigenvalues = self.read_eigenvalues(path)
        header, vectors = self._read_square(path.with_suffix(".vectors"))
        if header.get("kind") != EIGENVECTORS_KIND:
            raise BundleFormatError(f"{path.with_suffix('.vectors')} does not hold eigenvectors")
        if vectors.shape[0] != eigenvalues.size:
            raise BundleFormatError(f"{path} lists {eigenvalues.size} eigenvalues for {vectors.shape[0]} vectors")
        comments = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.startswith("#") and "=" in line:
                key, value = line[1:].split("=", 1)
                comments[key.strip()] = value.strip()
        return EigenSolution(
            eigenvalues=eigenvalues,
            eigenvectors=vectors,
            residual_norm=float(comments.get("residual_norm", "nan")),
            tag=header.get("tag") or None,
            roi=header.get("roi", ""),
        )

    def read_eigenvalues(self, name: PathLike) -> np.ndarray:
        path = self.path(name)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise BundleFormatError(f"Could not read eigenvalue table {path}: {e}") from e
        values = []
        for line in lines:
            if not line.strip() or line.startswith("#") or line.startswith("index"):
                continue
            try:
                values.append(float(line.split()[1]))
            except (IndexError, ValueError) as e:
                raise BundleFormatError(f"Could not parse eigenvalue row {line!r}") from e
        return np.array(values)

    # Reports
    def write_report(self, report: OptimizationReport, name: PathLike) -> Path:
        """Structured key/value text of an optimization report."""
        return _write_key_values(self._target(name), "qme optimization report", report.as_record())

    def read_report(self, name: PathLike) -> Dict[str, str]:
        return _read_key_values(self.path(name))

    def write_sweep(self, table: SweepTable, name: PathLike) -> Path:
        """
        CSV with columns R, N, K, w, T, Strehl (plus w_over_wB when a reference spot is set).

        Rows keep sweep order; floats are written with full precision so
        identical runs produce identical files.
        """
        path = self._target(name)
        frame = pd.DataFrame([row.model_dump() for row in table.rows], columns=SWEEP_COLUMNS + ["step"])
        if table.reference_w:
            frame["w_over_wB"] = frame["w"] / table.reference_w
        frame.to_csv(path, index=False, float_format="%.17g")
        logger.info("Wrote sweep table (%d rows) to %s", len(frame), path)
        return path

    def read_sweep(self, name: PathLike, reference_w: Optional[float] = None) -> SweepTable:
        path = self.path(name)
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError) as e:
            raise BundleFormatError(f"Could not read sweep table {path}: {e}") from e
        missing = [column for column in SWEEP_COLUMNS if column not in frame.columns]
        if missing:
            raise BundleFormatError(f"Sweep table {path} lacks columns {missing}")
        rows: List[SweepRow] = []
        for record in frame.to_dict(orient="records"):
            rows.append(
                SweepRow(
                    R=record["R"],
                    N=int(record["N"]),
                    K=int(record["K"]),
                    w=record["w"],
                    T=None if pd.isna(record["T"]) else record["T"],
                    Strehl=None if pd.isna(record["Strehl"]) else record["Strehl"],
                    step=bool(record.get("step", False)),
                )
            )
        return SweepTable(rows=rows, reference_w=reference_w)

    # Run configuration
    def write_run_config(self, config: RunConfig, name: PathLike = RUN_CONFIG_NAME) -> Path:
        """Echo a run configuration so the run can be reproduced from it alone."""
        path = self._target(name)
        path.write_text(config.to_text(), encoding="utf-8")
        return path

    def read_run_config(self, name: PathLike = RUN_CONFIG_NAME) -> RunConfig:
        path = self.path(name)
        try:
            return RunConfig.from_text(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise BundleFormatError(f"Could not read run configuration {path}: {e}") from e
