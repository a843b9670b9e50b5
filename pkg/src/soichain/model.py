"""Three-orbital chain: bands, occupations, interaction parameters.

One s orbital and two degenerate p orbitals (px, py) per site, filled
s band below an empty p doublet.  The chemical potential sits mid-gap
and is fixed at zero, so the s band disperses downward and the p bands
upward:

    eps_nu(k) = P_nu * (delta/2 + 2 t_nu (1 - cos k)),   P_s = -1, P_p = +1.

All energies are in the same (arbitrary) units as the hoppings; momenta
live on [-pi, pi].
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import DomainError, GapClosedError

### Orbital ordering used for every 3-valued orbital axis in the package.


class Band(IntEnum):
    S = 0
    PX = 1
    PY = 2

    @property
    def parity(self):
        # band curvature sign: s fills downward, p bands upward
        return -1.0 if self is Band.S else 1.0


@dataclass(frozen=True)
class ModelParams:
    """Hoppings, gap, local interactions and temperature of the chain.

    t_s, t_p > 0 are the s and p hopping amplitudes, delta >= 0 the direct
    gap at k = 0.  u, j, jp are the density-density repulsion, Hund
    exchange and pair hopping between s and p orbitals.  temperature >= 0;
    zero is treated as the exact step-function limit.
    """

    t_s: float
    t_p: float
    delta: float = 0.0
    u: float = 0.0
    j: float = 0.0
    jp: float = 0.0
    temperature: float = 0.0

    def __post_init__(self):
        if self.t_s <= 0.0 or self.t_p <= 0.0:
            raise DomainError("hoppings t_s, t_p must be positive")
        if self.delta < 0.0:
            raise DomainError("gap delta must be non-negative")
        if self.temperature < 0.0:
            raise DomainError("temperature must be non-negative")

    @property
    def bandwidth_scale(self):
        # largest single-particle energy scale, used to size cutoffs
        return 4.0 * max(self.t_s, self.t_p) + self.delta

    @property
    def pair_coupling(self):
        # coupling that drives the time-reversal-even triplet channel
        return self.u - self.j - self.jp

    @property
    def rpa_coupling(self):
        return self.u - self.j

    def hopping(self, band):
        return self.t_s if Band(band) is Band.S else self.t_p


def dispersion(params, band, k):
    """Band energy eps_nu(k); `k` may be a scalar or array."""
    band = Band(band)
    t = params.hopping(band)
    k = np.asarray(k, dtype=float)
    return band.parity * (0.5 * params.delta + 2.0 * t * (1.0 - np.cos(k)))


def dispersion_all(params, k):
    """Stacked band energies, shape (3,) + shape(k)."""
    k = np.asarray(k, dtype=float)
    return np.stack([dispersion(params, b, k) for b in Band])


def band_gap(params, k):
    """Direct p-s gap at momentum k."""
    return dispersion(params, Band.PX, k) - dispersion(params, Band.S, k)


def fermi(eps, temperature):
    """Fermi occupation at chemical potential zero.

    Written as (1 - tanh(eps/2T))/2, which is exact and free of overflow.
    At T = 0 this becomes the step function with value 1/2 at eps = 0.
    """
    eps = np.asarray(eps, dtype=float)
    if temperature == 0.0:
        return 0.5 * (1.0 - np.sign(eps))
    return 0.5 * (1.0 - np.tanh(0.5 * eps / temperature))


def fermi_derivative(eps, temperature):
    """d n_f / d eps, which is -1/(4T cosh^2(eps/2T)); zero everywhere at T = 0."""
    eps = np.asarray(eps, dtype=float)
    if temperature == 0.0:
        return np.zeros_like(eps)
    x = np.clip(0.5 * eps / temperature, -300.0, 300.0)
    return -0.25 / (temperature * np.cosh(x) ** 2)


def continuum_chi0(params):
    """Small-gap estimate of the T = 0 inter-band susceptibility.

    Expanding both bands to quadratic order around k = 0 and extending the
    momentum integral to the real line gives sqrt((t_s + t_p)/delta).  The
    1/sqrt(delta) divergence at delta -> 0 is reported as GapClosedError
    rather than an inf so callers cannot silently propagate it.
    """
    if params.delta == 0.0:
        raise GapClosedError("continuum susceptibility diverges at delta = 0")
    return np.sqrt((params.t_s + params.t_p) / params.delta)


def momentum_grid(n_points):
    """Midpoint grid on [-pi, pi); mean(f) approximates int dk/2pi f(k).

    Midpoints avoid k = 0 and k = +-pi exactly, which keeps integrands
    with removable singularities at the zone center finite.
    """
    n_points = int(n_points)
    if n_points < 2:
        raise DomainError("momentum grid needs at least 2 points")
    edges = np.linspace(-np.pi, np.pi, n_points + 1)
    return 0.5 * (edges[1:] + edges[:-1])
