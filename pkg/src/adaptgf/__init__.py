"""Adaptive variational Green's functions for the Hubbard chain.

Submodules, roughly in pipeline order: ``pauli``, ``lattice``, ``state``,
``exact``, ``mclachlan``, ``avqite``, ``avqds``, ``greens``, ``spectral``,
``shots``, ``measure``, ``mitigation``, ``resources``, ``workflow``, ``cli``.
"""

__version__ = "0.1.0"
