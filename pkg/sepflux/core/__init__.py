"""
Simulation core: lattice geometry, dynamics, observables, closed-form
limits, duality and replica statistics.

Nothing in this package touches the filesystem or the results store.
"""
