"""Configuration module."""

from .settings import settings, QmeSettings

__all__ = ["settings", "QmeSettings"]
