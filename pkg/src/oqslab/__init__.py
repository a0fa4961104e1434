"""oqslab: a numerical laboratory for exactly solvable open-quantum-system
models, continuous error correction, weak measurements, entanglement
monotones, subsystem fidelity, and holonomic gates."""

__version__ = "0.1.0"
