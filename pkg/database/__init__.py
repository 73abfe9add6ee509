"""Database module."""

from .bundle_store import BundleStore

__all__ = ["BundleStore"]
