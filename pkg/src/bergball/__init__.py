"""Bergman-ball geometry and certification of sharp Lipschitz bounds for Bloch-type densities."""

__version__ = "0.1.0"
