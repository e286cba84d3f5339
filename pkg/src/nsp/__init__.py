"""Numerics for Schroedinger-Poisson systems with a doping background.

Subpackages and modules:

* ``grid``, ``quadrature``, ``poisson``: box grids, spectral calculus and free-space Coulomb solves.
* ``doping``: doping profiles, their potentials and ball geometry.
* ``functionals``, ``fibering``: state functionals, the scaling fibre and its decomposition.
* ``algebra_checks``: the finite linear systems behind the constrained set.
* ``solvers``: action, energy, radial and Rayleigh-quotient solvers.
* ``harness``: configuration, corpus, reports and the ``nsp`` command.
"""

__version__ = "0.1.0"
