"""Toolkit configuration and settings."""

import math
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class QmeSettings(BaseSettings):
    """Toolkit settings loaded from environment variables and `.env`."""

    # Units
    wavelength: float = 1.0  # all lengths are expressed in units of lambda
    si_units: bool = False
    si_wavelength_m: float = 633e-9

    # Numerics
    intensity_threshold: float = 1e-3  # tau, fraction of the total IO eigenvalue sum
    band_fraction: float = 1e-3  # epsilon for the spectral band edge
    phase_floor: float = 1e-6  # relative intensity floor for phase evaluation
    degeneracy_tol: float = 1e-12
    visibility_floor: float = 1e-6  # relative fringe visibility floor

    # Sweeps
    max_workers: int = 1

    # Bench simulation (lengths in SLM pixels unless stated otherwise)
    slm_pixels: int = 512
    slm_pitch: float = 1.0
    lens_focal_length: float = 2000.0
    ring_count: int = 11
    ring_outer_radius: float = 22.0  # reference Bessel core zero near 9.3 CCD pixels
    slm_quantize: bool = True
    ccd_floor: float = 0.0
    ccd_saturation: float = float("inf")
    ccd_noise_sigma: float = 0.0
    ccd_seed: int = 0

    # Output
    output_dir: str = "qme_output"
    config_file: Optional[str] = None

    # Logging
    log_level: str = "INFO"
    log_rich: bool = True

    @property
    def k0(self) -> float:
        """Vacuum wavenumber in the configured length unit."""
        return 2 * math.pi / self.wavelength

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", env_prefix="QME_")


# Global settings instance
settings = QmeSettings()
