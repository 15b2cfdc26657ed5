"""Spectral dispersion analysis, amplitude-equation derivation, and
verification experiments for pattern-forming systems."""

from amplituder._core import *  # noqa: F401,F403

__version__ = "0.1.0"
