"""Physical constants (SI)."""

BOLTZMANN = 1.380649e-23  # J/K
