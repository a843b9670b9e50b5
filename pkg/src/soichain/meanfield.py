"""Ordered phase of the spin-orbit channel: free energy, bands, SOI.

Decoupling the time-reversal-even triplet interaction with a complex
triple Phi = (Phi_+1, Phi_0, Phi_-1) gives the Ginzburg-Landau energy

    F = -r |Phi|^2 + c0 |Phi|^4,

with quadratic and quartic coefficients reduced to moments of the
inverse direct gap.  A finite order parameter mixes the s band into the
p doublet with opposite spin, which is exactly a spin-orbit coupling
for the quasiparticles; its strength lambda_so(k) follows from the
2 x 2 block diagonalization and is largest at the zone center.
"""

from dataclasses import dataclass

import numpy as np

from .channels import spin_orbit_combination
from .errors import DomainError, GapClosedError
from .model import Band, band_gap, dispersion
from .quadrature import zone_integral

_SQRT2 = np.sqrt(2.0)


def gap_moment(params, power, rel_tol=1e-9):
    """Moment int dk/2pi (eps_p - eps_s)^(-power) of the direct gap."""
    if params.delta <= 0.0:
        raise GapClosedError(
            "inverse-gap moments need delta > 0; the integrand is singular "
            "at the zone center otherwise"
        )

    def integrand(k):
        return band_gap(params, k) ** (-float(power))

    return zone_integral(integrand, rel_tol=rel_tol)


@dataclass(frozen=True)
class GLCoefficients:
    r: float    # quadratic coefficient; r > 0 is the ordered side
    c0: float   # isotropic quartic coefficient
    c2: float = 0.0  # anisotropic quartic; zero for this model


@dataclass(frozen=True)
class OrderParameter:
    phi: tuple            # (Phi_+1, Phi_0, Phi_-1), complex
    degenerate: bool = False  # set when no Zeeman term picks a direction

    @property
    def amplitude(self):
        return float(np.sqrt(sum(abs(p) ** 2 for p in self.phi)))


def gl_coefficients(params):
    """Quadratic and quartic coefficients of the channel free energy.

    r = -g + g^2 I_1 and c0 = g^4 I_3 / 2 with g = u - j - jp and
    I_n the inverse-gap moments; r > 0 marks the ordered phase and is
    the same criterion as the ladder pole g I_1 > 1.
    """
    if params.delta <= 0.0:
        # the expansion is around the gapped band structure even at g = 0
        raise GapClosedError("Ginzburg-Landau coefficients need delta > 0")
    g = params.pair_coupling
    if g == 0.0:
        return GLCoefficients(r=0.0, c0=0.0)
    i1 = gap_moment(params, 1)
    i3 = gap_moment(params, 3)
    return GLCoefficients(r=-g + g * g * i1, c0=0.5 * g ** 4 * i3)


def free_energy(coeffs, phi):
    """GL energy of a complex triple; depends on Phi only through its norm."""
    norm2 = float(sum(abs(p) ** 2 for p in phi))
    return -coeffs.r * norm2 + coeffs.c0 * norm2 * norm2


def zeeman_shift(phi, delta_zeeman, params):
    """Energy gained from a circular-motion Zeeman splitting delta.

    -delta I_2 sum_ms ms |Phi_ms|^2: positive delta favours all weight
    in Phi_+1, negative delta in Phi_-1.
    """
    weighted = sum(
        m_s * abs(p) ** 2 for m_s, p in zip((+1, 0, -1), phi)
    )
    return -delta_zeeman * gap_moment(params, 2) * weighted


def order_amplitude(coeffs):
    """Minimizer sqrt(r / 2 c0) of the GL energy, 0 on the disordered side."""
    if coeffs.r <= 0.0:
        return 0.0
    if coeffs.c0 <= 0.0:
        raise DomainError(
            "quartic coefficient must be positive for a bounded free energy"
        )
    return float(np.sqrt(coeffs.r / (2.0 * coeffs.c0)))


def small_gap_amplitude(params):
    """Closed-form estimate |phi| = g / (4 (t_s + t_p)), independent of delta."""
    return 0.25 * params.pair_coupling / (params.t_s + params.t_p)


def zeeman_selection(coeffs, delta_zeeman, params):
    """Ordered state picked by the sign of the Zeeman splitting.

    The GL energy alone is degenerate on the whole |Phi| = const shell;
    an arbitrarily small delta tips it onto one spin projection.  At
    delta = 0 a representative direction is returned with the
    degeneracy flagged.
    """
    amp = order_amplitude(coeffs)
    if delta_zeeman > 0.0:
        return OrderParameter(phi=(amp, 0.0, 0.0))
    if delta_zeeman < 0.0:
        return OrderParameter(phi=(0.0, 0.0, amp))
    return OrderParameter(phi=(amp, 0.0, 0.0), degenerate=True)


### --------------------------------------------------- quasiparticle bands


def mean_field_hamiltonian(k, params, phi):
    """6 x 6 Hamiltonian in the angular basis (spin-major, q = +1, 0, -1).

    The condensed channel enters through the same bilinear matrices that
    define it, H = H0 - g sum_ms (conj(Phi_ms) M_ms + h.c.), so a finite
    Phi_+1 couples (up, q=0) to (down, q=+1) and (up, q=-1) to
    (down, q=0).
    """
    if isinstance(phi, OrderParameter):
        phi = phi.phi
    eps_s = float(dispersion(params, Band.S, k))
    eps_p = float(dispersion(params, Band.PX, k))
    h = np.diag([eps_p, eps_s, eps_p, eps_p, eps_s, eps_p]).astype(complex)
    g = params.pair_coupling
    for m_s, amp in zip((+1, 0, -1), phi):
        if amp == 0.0:
            continue
        m = spin_orbit_combination(m_s).matrix_angular()
        h -= g * (np.conj(amp) * m + amp * m.conj().T)
    return h


def mixing_angle(k, params, phi_amp):
    """Rotation angle of the 2 x 2 s-p blocks, atan2(sqrt2 g|phi|, gap)."""
    return float(
        np.arctan2(
            _SQRT2 * abs(params.pair_coupling) * abs(phi_amp),
            band_gap(params, k),
        )
    )


def soi_strength_k(k, params, phi_amp):
    """Momentum-resolved SOI strength, never positive.

    lambda_so(k) = gap/2 - sqrt(gap^2/4 + g^2 |phi|^2 / 2) with the
    direct gap eps_p(k) - eps_s(k); the magnitude peaks at k = 0 and
    dies off once the gap dominates the condensate.
    """
    gap = band_gap(params, k)
    mix = 0.5 * (params.pair_coupling * abs(phi_amp)) ** 2
    return 0.5 * gap - np.sqrt(0.25 * gap * gap + mix)


def soi_band_edge(params, phi_amp):
    """SOI strength at the band edge k = 0, where it is largest."""
    return float(soi_strength_k(0.0, params, phi_amp))


@dataclass(frozen=True)
class QuasiparticleSpectrum:
    k: np.ndarray
    energies: np.ndarray   # (len(k), 6), ascending within each row
    theta: np.ndarray      # s-p mixing angle per k
    phase: float           # arg(-i conj(phi)), the locked relative phase


def quasiparticle_spectrum(params, phi, k):
    """Analytic eigenvalues of the ordered-state Hamiltonian.

    Two p levels stay untouched; the remaining four pair into two 2 x 2
    blocks with energies (eps_p + eps_s)/2 +- h(k),
    h = sqrt(gap^2/4 + g^2 |phi|^2 / 2), each twofold by time reversal.
    """
    phi = complex(phi)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    eps_s = dispersion(params, Band.S, k)
    eps_p = dispersion(params, Band.PX, k)
    mid = 0.5 * (eps_p + eps_s)
    half_gap = 0.5 * (eps_p - eps_s)
    hk = np.sqrt(half_gap ** 2 + 0.5 * (params.pair_coupling * abs(phi)) ** 2)
    energies = np.sort(
        np.stack(
            [eps_p, eps_p, mid - hk, mid - hk, mid + hk, mid + hk], axis=-1
        ),
        axis=-1,
    )
    theta = np.array([mixing_angle(kk, params, abs(phi)) for kk in k])
    return QuasiparticleSpectrum(
        k=k,
        energies=energies,
        theta=theta,
        phase=float(np.angle(-1j * np.conj(phi))) if phi != 0.0 else 0.0,
    )
