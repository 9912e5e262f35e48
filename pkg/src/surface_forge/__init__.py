"""Discrete surfaces from quaternionic frames: CMC tori, Bonnet families and pairs."""

__version__ = "0.1.0"

from .errors import SurfaceForgeError  # noqa: E402,F401
