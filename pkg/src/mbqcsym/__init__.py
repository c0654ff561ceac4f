"""Simulator and verifier for teleportation, MPS symmetry and gauging constructions behind MBQC."""

__version__ = "0.1.0"
