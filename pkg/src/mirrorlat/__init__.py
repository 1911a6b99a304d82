"""mirrorlat: a lattice laboratory for mirror-pair interaction inequalities.

Scalar and abelian gauge fields on small hypercubic lattices, with exact
enumeration oracles, Metropolis sampling, probe free energies, and
executable verdicts for the positivity / Schwarz / concavity / torque
inequality chain.
"""

__version__ = "0.1.0"
