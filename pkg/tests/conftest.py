"""Shared test constants and helpers.

Tests use mass = Boltzmann constant so the thermal speed sqrt(kT/m) is
exactly 1 m/s at T = 1 K, which keeps hand-computed oracles legible.
"""

import numpy as np

from kinetics.constants import BOLTZMANN

UNIT_MASS = BOLTZMANN


def fit_cooling_exponent(times, temperatures, t0_grid=None):
    """Least-squares exponent p of T = T0 (1 + t/t0)^p over a scan of t0."""
    times = np.asarray(times, dtype=float)
    temps = np.asarray(temperatures, dtype=float)
    if t0_grid is None:
        t_end = times[-1] if times[-1] > 0 else 1.0
        t0_grid = np.geomspace(t_end / 100.0, t_end * 10.0, 200)
    best = None
    log_t = np.log(temps)
    for t0 in t0_grid:
        basis = np.log1p(times / t0)
        design = np.vstack([np.ones_like(basis), basis]).T
        coef, residual, *_ = np.linalg.lstsq(design, log_t, rcond=None)
        sse = (float(residual[0]) if len(residual)
               else float(np.sum((log_t - design @ coef) ** 2)))
        if best is None or sse < best[0]:
            best = (sse, float(t0), float(coef[1]))
    return best[2], best[1]
