"""Numerical laboratory for long-time semiclassical expectation values.

Subpackages by role:

* :mod:`ehrenfest.symbols` -- phase-space functions with analytic gradients
  and angle-Fourier data.
* :mod:`ehrenfest.classical` -- Hamiltonian flows, Lagrangian patches,
  transport integrals, shell averages, quasi-periodic predictions, fits.
* :mod:`ehrenfest.quantum` -- periodic grid Hilbert space, Lagrangian-state
  synthesis, Weyl operators, split-step propagation.
* :mod:`ehrenfest.catmap` -- hyperbolic toral automorphism, its exact
  finite-dimensional quantization and character expectation values.
* :mod:`ehrenfest.experiments` / :mod:`ehrenfest.cli` -- config-driven
  experiment harness and command line front end.
"""

__version__ = "0.1.0"
