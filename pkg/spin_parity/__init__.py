"""Simulator for quantum-dot spin parity protocols: QND Bell measurement, Bell generation, GHZ growth."""

__version__ = "0.1.0"
