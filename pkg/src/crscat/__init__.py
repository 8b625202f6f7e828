"""Scattering-length analysis toolkit for ultracold chromium collisions."""
from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
