"""Brillouin-zone integrals by midpoint rule with grid doubling.

For smooth periodic integrands the midpoint rule converges faster than
any power of 1/n, so doubling the grid until two successive estimates
agree is both simple and cheap.  Integrals are normalised as
int dk/2pi f(k) = mean over the grid.
"""

import numpy as np

from .errors import QuadratureError
from .model import momentum_grid


def zone_average(f, n_points=512):
    """Fixed-grid estimate of int dk/2pi f(k) over [-pi, pi]."""
    k = momentum_grid(n_points)
    return float(np.mean(f(k)))


def zone_integral(f, rel_tol=1e-9, abs_tol=1e-12, n_start=512, n_max=2 ** 20):
    """Adaptive estimate of int dk/2pi f(k); raises QuadratureError on failure.

    Doubles the midpoint grid until successive estimates differ by less
    than abs_tol + rel_tol*|estimate|.  Near-critical integrands (gap
    closing, T -> 0) may need ~1e6 points; n_max bounds the attempt.
    """
    n = int(n_start)
    current = zone_average(f, n)
    err = np.inf
    while n < n_max:
        n *= 2
        previous, current = current, zone_average(f, n)
        err = abs(current - previous)
        if err <= abs_tol + rel_tol * abs(current):
            return current
    raise QuadratureError(
        f"momentum integral did not settle below n_max={n_max} points "
        f"(last change {err:.3e})",
        n_points=n,
        estimate=current,
        error=err,
    )
