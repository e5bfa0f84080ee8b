"""Incremental LMS over ring networks: tracking simulation and steady-state theory."""

__version__ = "0.1.0"
