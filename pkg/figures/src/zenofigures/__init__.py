"""Figure rendering for the lattice-loss simulator's output files."""

__version__ = "0.1.0"
