"""HTTP service wrapping the experiment runner and the circuit library."""

from .app import create_app

__all__ = ["create_app"]
