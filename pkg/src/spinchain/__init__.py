"""Spin-S Heisenberg chains on qubit/qudit registers: encodings, Trotter
circuits, noisy simulation, and the accompanying error analysis."""

__version__ = "0.1.0"
