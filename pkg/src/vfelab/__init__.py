"""Vortex-filament dynamics: binormal flow, pair reconnection, and impulse diagnostics."""

__version__ = "0.1.0"
