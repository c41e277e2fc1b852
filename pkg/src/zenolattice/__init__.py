"""Hard-core lattice bosons with distance-selective two-body loss.

Simulation and analysis tools for the two-stage dynamics of a 1D hard-core
boson gas whose loss removes pairs at a fixed critical distance: the rapid
correlated decay into the pair-free (Zeno) subspace, and the slow
near-coherent dynamics of the dissipatively bound complexes that remain,
including their band structures, flat bands, localized states and
scattering.
"""

__version__ = "0.1.0"
