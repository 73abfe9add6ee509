"""Services module."""

from .beams import (
    EPSILON_0,
    MU_0,
    airy_first_zero,
    bessel_basis,
    embed_scalar_as_vector,
    evaluate_aperture_airy,
    evaluate_bessel_member,
    evaluate_bessel_vector,
    evaluate_lg,
    lg_basis,
    make_grid,
    maxwell_residuals,
    polarization_weights,
    square_grid,
    theta_schedule,
)
from .propagation import (
    angular_spectrum_propagate,
    conjugate_grid,
    fourier_lens,
    matrix_fourier_transform,
    second_moment_radius,
    transfer_function,
)
from .roi import (
    annulus,
    disk,
    full_plane,
    integrate,
    parse_roi_spec,
    plane_pair,
    rectangle,
    roi_center,
    roi_mask,
    volume,
    with_radius,
)
from .operators import (
    assemble,
    assemble_force,
    assemble_io,
    assemble_local_kernel,
    assemble_sso,
    basis_fingerprint,
    measure_value,
    normalized_base,
    pointwise_stress_force,
    raw_asymmetry,
)
from .eigensolver import (
    eig_hermitian,
    maximize_measure,
    minimize_constrained_sso,
    rayleigh_gradient,
    rayleigh_quotient,
)
from .pipelines import (
    first_dark_radius,
    local_wavevector,
    maximize_transmission,
    minimize_spot,
    radial_spectral_density,
    soim,
    strehl,
    superoscillation_mask,
    superpose,
    sweep_mode_count,
    sweep_roi_radius,
)
from .bench import (
    BenchSimulator,
    capture,
    decode_slm,
    default_ring_radii,
    encode_ring_basis,
    encode_slm,
    interference_frames,
    reference_field,
    slm_field,
    three_step_retrieve,
)

__all__ = [
    "EPSILON_0",
    "MU_0",
    "make_grid",
    "square_grid",
    "evaluate_lg",
    "evaluate_bessel_vector",
    "evaluate_bessel_member",
    "polarization_weights",
    "embed_scalar_as_vector",
    "evaluate_aperture_airy",
    "airy_first_zero",
    "theta_schedule",
    "lg_basis",
    "bessel_basis",
    "maxwell_residuals",
    "transfer_function",
    "angular_spectrum_propagate",
    "conjugate_grid",
    "matrix_fourier_transform",
    "fourier_lens",
    "second_moment_radius",
    "disk",
    "annulus",
    "rectangle",
    "full_plane",
    "volume",
    "plane_pair",
    "roi_center",
    "roi_mask",
    "integrate",
    "parse_roi_spec",
    "with_radius",
    "assemble",
    "assemble_io",
    "normalized_base",
    "assemble_sso",
    "assemble_local_kernel",
    "assemble_force",
    "pointwise_stress_force",
    "basis_fingerprint",
    "raw_asymmetry",
    "measure_value",
    "eig_hermitian",
    "maximize_measure",
    "minimize_constrained_sso",
    "rayleigh_quotient",
    "rayleigh_gradient",
    "superpose",
    "soim",
    "strehl",
    "maximize_transmission",
    "minimize_spot",
    "local_wavevector",
    "radial_spectral_density",
    "superoscillation_mask",
    "first_dark_radius",
    "sweep_roi_radius",
    "sweep_mode_count",
    "BenchSimulator",
    "encode_slm",
    "decode_slm",
    "slm_field",
    "default_ring_radii",
    "encode_ring_basis",
    "reference_field",
    "capture",
    "interference_frames",
    "three_step_retrieve",
]
