"""Tests for bundle, matrix, table and run-config persistence."""

import numpy as np
import pytest

from models import MeasureMatrix, OptimizationReport, RunConfig, SweepRow, SweepTable
from services import (
    assemble_io,
    bessel_basis,
    disk,
    eig_hermitian,
    maximize_transmission,
    polarization_weights,
    theta_schedule,
)
from database import BundleStore
from utils.errors import BundleFormatError


@pytest.fixture
def store(tmp_path):
    return BundleStore(tmp_path)


def _assert_same_fields(first, second):
    assert len(first) == len(second)
    for a, b in zip(first, second):
        assert a.grid == b.grid
        if hasattr(a, "values"):
            np.testing.assert_array_equal(a.values, b.values)
        else:
            np.testing.assert_array_equal(a.E, b.E)
            np.testing.assert_array_equal(a.H, b.H)


def test_scalar_bundle_round_trip_is_exact(store, lg4):
    directory = store.write_bundle(lg4, "basis")
    assert (directory / "manifest.txt").exists()
    loaded = store.read_bundle("basis")

    assert loaded.kind == lg4.kind
    assert loaded.k0 == lg4.k0
    assert loaded.parameters == lg4.parameters
    _assert_same_fields(loaded.members, lg4.members)


def test_vector_bundle_keeps_layers_and_polarization(store, k0, bessel_grid):
    alpha, beta = polarization_weights("circular+")
    basis = bessel_basis(theta_schedule(0.1, 3), 1, alpha, beta, k0, bessel_grid, z_planes=[1.0, 2.0], initial_z=-1.0)
    store.write_bundle(basis, "vector")
    loaded = store.read_bundle("vector")

    assert loaded.is_vector
    assert loaded.parameters == basis.parameters
    assert loaded.parameters[0].beta == beta
    _assert_same_fields(loaded.members, basis.members)
    _assert_same_fields(loaded.initial_members, basis.initial_members)
    for loaded_layer, layer in zip(loaded.layers, basis.layers):
        _assert_same_fields(loaded_layer, layer)


def test_reloaded_basis_gives_identical_matrix(store, lg4):
    store.write_bundle(lg4, "basis")
    roi = disk(1.0)
    original = assemble_io(lg4, roi)
    reloaded = assemble_io(store.read_bundle("basis"), roi)
    np.testing.assert_array_equal(reloaded.entries, original.entries)
    assert reloaded.basis_hash == original.basis_hash


def test_truncated_payload_is_rejected(store, lg4):
    directory = store.write_bundle(lg4, "basis")
    payload = directory / "member_0001.bin"
    payload.write_bytes(payload.read_bytes()[:-16])
    with pytest.raises(BundleFormatError):
        store.read_bundle("basis")


def test_missing_manifest_is_rejected(store, lg4):
    directory = store.write_bundle(lg4, "basis")
    (directory / "manifest.txt").unlink()
    with pytest.raises(BundleFormatError):
        store.read_bundle("basis")


def test_foreign_manifest_is_rejected(store, tmp_path):
    (tmp_path / "other").mkdir()
    (tmp_path / "other" / "manifest.txt").write_text("format = something-else\n")
    with pytest.raises(BundleFormatError):
        store.read_bundle("other")


def test_matrix_round_trip(store):
    M = MeasureMatrix(
        entries=np.array([[3.0, 0.5j, 0.0], [-0.5j, 1.0, 0.0], [0.0, 0.0, 2.0]]),
        tag="SSO",
        roi="disk:R=1.0,cx=0.0,cy=0.0",
        basis_hash="abc123",
        normalized=True,
    )
    store.write_matrix(M, "matrix.qmm")
    loaded = store.read_matrix("matrix.qmm")
    np.testing.assert_array_equal(loaded.entries, M.entries)
    assert loaded.tag == "SSO"
    assert loaded.roi == M.roi
    assert loaded.basis_hash == "abc123"
    assert loaded.normalized


def test_matrix_without_header_is_rejected(store, tmp_path):
    (tmp_path / "junk.qmm").write_bytes(b"\x00" * 32)
    with pytest.raises(BundleFormatError):
        store.read_matrix("junk.qmm")


def test_truncated_matrix_is_rejected(store):
    path = store.write_matrix(MeasureMatrix(entries=np.eye(2), tag="IO"), "m.qmm")
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(BundleFormatError):
        store.read_matrix("m.qmm")


def test_eigenvalue_table(store):
    solution = eig_hermitian(MeasureMatrix(entries=np.diag([3.0, 1.0, 2.0]), tag="IO"))
    path = store.write_eigensolution(solution, "eigenvalues_IO.txt")
    np.testing.assert_array_equal(store.read_eigenvalues(path), [3.0, 2.0, 1.0])
    loaded = store.read_eigensolution(path)
    np.testing.assert_array_equal(loaded.eigenvectors, solution.eigenvectors)
    assert loaded.tag == "IO"
    assert loaded.residual_norm == solution.residual_norm


@pytest.mark.parametrize("tag", ["SSO", "CSO", None])
def test_eigenvectors_keep_the_solved_measure(store, tag):
    entries = np.diag([2.0, 1.0])
    solution = eig_hermitian(MeasureMatrix(entries=entries, tag=tag) if tag else entries)
    path = store.write_eigensolution(solution, "eigenvalues.txt")
    assert store.read_eigensolution(path).tag == tag
    with pytest.raises(BundleFormatError):
        store.read_matrix(path.with_suffix(".vectors"))


def test_numpy_scalars_are_written_as_plain_numbers(store):
    solution = eig_hermitian(np.diag(np.array([3.0, 0.1])))
    text = store.write_eigensolution(solution, "eigenvalues.txt").read_text()
    assert "np." not in text
    assert "0 3.0" in text.splitlines()

    report = OptimizationReport(
        coefficients=np.array([np.complex128(0.5 - 0.25j)]),
        tag="IO",
        eigenvalue=np.float64(0.75),
        transmittance=np.float64(0.75),
        retained=1,
        basis_size=1,
    )
    record = store.read_report(store.write_report(report, "report.txt"))
    assert record["T"] == "0.75"
    assert record["a0"] == "0.5,-0.25"


def test_report_round_trip(store, lg4):
    report = maximize_transmission(lg4, disk(1.0))
    store.write_report(report, "report.txt")
    record = store.read_report("report.txt")
    assert record["measure"] == "IO"
    assert float(record["T"]) == report.transmittance
    assert record["N"] == "4"
    re_part, im_part = record["a0"].split(",")
    assert complex(float(re_part), float(im_part)) == report.coefficients[0]


def _table():
    rows = [
        SweepRow(R=2.0, N=5, K=4, w=1.25, Strehl=0.5),
        SweepRow(R=1.0, N=5, K=3, w=0.8, Strehl=0.25, step=True),
    ]
    return SweepTable(rows=rows, reference_w=2.0)


def test_sweep_table_round_trip(store):
    path = store.write_sweep(_table(), "sweep.csv")
    header = path.read_text().splitlines()[0].split(",")
    assert header[:6] == ["R", "N", "K", "w", "T", "Strehl"]
    assert "w_over_wB" in header

    loaded = store.read_sweep("sweep.csv", reference_w=2.0)
    assert [row.R for row in loaded.rows] == [2.0, 1.0]
    assert [row.K for row in loaded.rows] == [4, 3]
    assert loaded.rows[0].T is None
    assert loaded.step_radii() == [1.0]


def test_sweep_table_is_deterministic(store):
    first = store.write_sweep(_table(), "a.csv").read_bytes()
    second = store.write_sweep(_table(), "b.csv").read_bytes()
    assert first == second


def test_sweep_table_needs_columns(store, tmp_path):
    (tmp_path / "bad.csv").write_text("R,w\n1.0,2.0\n")
    with pytest.raises(BundleFormatError):
        store.read_sweep("bad.csv")


def test_run_config_round_trip(store):
    config = RunConfig(command="optimize", N=3, w0=1.5, roi="disk:R=w0", measure="spotsize", polarization="circular-")
    store.write_run_config(config)
    assert store.read_run_config() == config


def test_missing_run_config(store):
    with pytest.raises(BundleFormatError):
        store.read_run_config("absent.txt")
