"""Desk-scale diagnostics for subadditive equilibrium states on subshifts of finite type.

The package is organised around the objects it computes:

* :mod:`subeq.sft` -- adjacency-matrix combinatorics: primitivity, word
  enumeration, periodic and bridging words.
* :mod:`subeq.cocycle` -- finite-range matrix cocycles, products along words,
  exterior powers, and the singular-value function.
* :mod:`subeq.potential` -- submultiplicative word potentials (norm,
  singular-value, custom tables) with distortion and submultiplicativity audits.
* :mod:`subeq.thermo` -- pressure estimation from partition sums, Gibbs
  cylinder weights, quasi-multiplicativity certificates, and the
  local-product-structure ratio check.
* :mod:`subeq.bunching` -- fiber/strong bunching margins, holonomy
  approximants, typicality (pinching + twisting) reports, Burnside
  irreducibility, Lyapunov spectrum estimates.
* :mod:`subeq.mixing` -- partitions, exact d-bar distance by transportation
  optimization, K-property and Very Weak Bernoulli scans.
* :mod:`subeq.cli` -- the ``subeq`` command line front end.
"""

__version__ = "0.1.0"
