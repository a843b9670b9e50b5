"""Static channel susceptibilities from the flowed vertex.

The susceptibility of a local bilinear with coefficient matrix M is
assembled from the band-diagonal particle-hole bubble Pi and the final
interaction vertex: the free part attaches the external legs pairwise,
the vertex part dresses them with the antisymmetrised, spin-restored
interaction.  Spin indices enter through delta functions only, so the
tensor algebra runs in shape (2, 3)^4 and is flattened to the composite
spin-major index used by the channel matrices.

A diverged flow leaves no usable vertex behind, so every channel row of
a diverged parameter point reports the divergence scale l_div instead
of a value; which channel owns the instability is recorded separately
as the overlap of the runaway vertex direction with each channel.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channels import CHANNELS, ChannelCombination, channel_matrix
from .errors import DomainError, NumericsError
from .flow import FlowSettings, bubble_matrix, integrate_flow, lift
from .model import continuum_chi0

_I2 = np.eye(2)

DEFAULT_CHANNELS = ("triplet_even", "triplet_odd", "singlet_odd")


class _Diverged:
    """Sentinel for a susceptibility past its pole; no finite value exists."""

    __slots__ = ()

    def __repr__(self):
        return "diverged"


DIVERGED = _Diverged()


def _pi6(pi3):
    # composite (spin, orbital) legs; the bubble is spin independent
    return np.kron(np.ones((2, 2)), pi3)


def free_tensor(pi3):
    """Leg-paired part of the susceptibility tensor, shape (6, 6, 6, 6)."""
    pi6 = _pi6(pi3)
    return -np.einsum("ac,bd,ab->abcd", np.eye(6), np.eye(6), pi6)


def vertex_tensor(vertex, pi3):
    """Vertex correction to the susceptibility tensor.

    `vertex` is the lifted orbital tensor (3, 3, 3, 3).  The two spin
    contractions restore the antisymmetry lost by tracking only the
    orbital structure during the flow.
    """
    g1 = np.einsum("ijkl,ad,bc->aibjckdl", vertex, _I2, _I2)
    g2 = np.einsum("jikl,ac,bd->aibjckdl", vertex, _I2, _I2)
    gamma = (g1 - g2).reshape(6, 6, 6, 6)
    pi6 = _pi6(pi3)
    return -gamma * pi6[:, None, None, :] * pi6[None, :, :, None]


def susceptibility_tensor(vertex_values, pi3):
    """Full static susceptibility tensor for class couplings (8,)."""
    return free_tensor(pi3) + vertex_tensor(lift(vertex_values), pi3)


def full_susceptibility(vertex_values, params, lambda0=None, rel_tol=1e-9):
    """Susceptibility tensor from class couplings and a fresh bubble.

    lambda0=None evaluates the bubble with the regulator fully open;
    passing the flow's starting scale instead reinstates the soft cutoff
    there, which differs by the regulator tail (below a percent at the
    default 100x bandwidth).
    """
    pi3 = bubble_matrix(params, "ph", lam=lambda0, rel_tol=rel_tol)
    return susceptibility_tensor(vertex_values, pi3)


def _as_combo(channel):
    if isinstance(channel, ChannelCombination):
        return channel
    try:
        return CHANNELS[channel]
    except KeyError:
        raise DomainError(f"unknown channel {channel!r}") from None


def channel_value(tensor, channel_a, channel_b=None, imag_tol=1e-9):
    """Contract the susceptibility tensor with channel combinations.

    The value is accumulated pairwise over the bilinear terms,
    sum_ij w_i conj(w_j) X_ij, rather than by contracting once with the
    summed matrix.  For a two-term self-pairing this makes the cross
    identities X_00 = X_11 and X_01 = X_10 visible; they are what turns
    the normalized sum into X_00 - X_01, and a violation means the
    tensor broke the orbital symmetry upstream, so they are checked on
    every call.
    """
    combo_a = _as_combo(channel_a)
    combo_b = combo_a if channel_b is None else _as_combo(channel_b)
    mats_a = [(w, channel_matrix(lab)) for lab, w in combo_a.terms]
    mats_b = [(w, channel_matrix(lab)) for lab, w in combo_b.terms]
    pairs = np.empty((len(mats_a), len(mats_b)), dtype=complex)
    for i, (_, ma) in enumerate(mats_a):
        for j, (_, mb) in enumerate(mats_b):
            pairs[i, j] = np.einsum("da,bc,abcd->", ma, np.conj(mb), tensor)
    if combo_b is combo_a and len(mats_a) == 2:
        scale = max(1.0, np.max(np.abs(pairs)))
        if (
            abs(pairs[0, 0] - pairs[1, 1]) > imag_tol * scale
            or abs(pairs[0, 1] - pairs[1, 0]) > imag_tol * scale
        ):
            raise NumericsError(
                "term-pair identities X_00 = X_11, X_01 = X_10 violated: "
                f"{pairs.ravel()}"
            )
    weights_a = np.array([w for w, _ in mats_a])
    weights_b = np.array([w for w, _ in mats_b])
    value = weights_a @ pairs @ np.conj(weights_b)
    if abs(value.imag) > imag_tol * max(1.0, abs(value.real)):
        raise NumericsError(
            f"channel susceptibility has imaginary part {value.imag:.3e}"
        )
    return float(value.real)


def chi_free(params, channel="triplet_even", rel_tol=1e-9):
    """Susceptibility of the non-interacting chain."""
    pi3 = bubble_matrix(params, "ph", rel_tol=rel_tol)
    return channel_value(free_tensor(pi3), channel)


def chi_rpa(params, continuum=False, rel_tol=1e-9):
    """Ladder-summed spin-orbit susceptibility chi0 / (1 - (u - j) chi0).

    Pair hopping is dropped here (it only splits the triplet pair from
    its time-reversal-odd partner), leaving the single coupling u - j on
    the inter-band bubble.  continuum=True swaps in the small-gap bubble
    sqrt((t_s + t_p)/delta), which ignores temperature.  Past the pole,
    (u - j) chi0 >= 1, the ladder has no finite value and DIVERGED is
    returned.
    """
    if continuum:
        chi0 = continuum_chi0(params)
    else:
        chi0 = -bubble_matrix(params, "ph", rel_tol=rel_tol)[0, 1]
    g = params.rpa_coupling
    if g * chi0 >= 1.0:
        return DIVERGED
    return chi0 / (1.0 - g * chi0)


@dataclass(frozen=True)
class ChiResult:
    channel: str
    value: float          # None when the point diverged
    diverged: bool
    l_div: float          # flow scale of the divergence, None otherwise
    participation: float  # channel coupling read off the normalized runaway vertex


def flowed_coupling(vertex_values, pi3, channel):
    """Effective coupling combination a channel reads off a vertex.

    The vertex part of the channel susceptibility is this coupling times
    Pi_sp^2 for every s-p channel, so dividing the bubbles back out
    isolates the combination of class couplings the channel feels.
    """
    value = channel_value(vertex_tensor(lift(vertex_values), pi3), channel)
    return value / pi3[0, 1] ** 2


def ray_participation(vertex_values, pi3, channel):
    """Dimensionless weight of a channel in a runaway vertex direction.

    Positive weight means the channel's ladder coupling grows with the
    runaway and its susceptibility diverges alongside the vertex;
    negative weight means the divergence pushes the channel away from
    its own instability.
    """
    scale = np.max(np.abs(vertex_values))
    if scale == 0.0:
        return 0.0
    return flowed_coupling(np.asarray(vertex_values) / scale, pi3, channel)


def channel_susceptibilities(params, channels=DEFAULT_CHANNELS, settings=None, trajectory=None):
    """Flow at fixed parameters, then read off each channel.

    Once the flow diverges the vertex entering the assembly is
    meaningless, so every channel of a diverged point carries the
    divergence scale instead of a value; the participation entry records
    each channel's share of the runaway direction, which is what
    attributes the instability.
    """
    settings = settings or FlowSettings()
    if trajectory is None:
        trajectory = integrate_flow(params, settings)
    pi3 = bubble_matrix(params, "ph")
    results = []
    if trajectory.diverged:
        for name in channels:
            share = ray_participation(trajectory.final, pi3, name)
            results.append(ChiResult(name, None, True, trajectory.l_div, share))
    else:
        tensor = susceptibility_tensor(trajectory.final, pi3)
        for name in channels:
            results.append(
                ChiResult(name, channel_value(tensor, name), False, None, None)
            )
    return results, trajectory


def chi_spin_orbit(params, settings=None):
    """Flowed susceptibility of the spin-orbit channel, or DIVERGED."""
    results, _ = channel_susceptibilities(
        params, channels=("triplet_even",), settings=settings
    )
    result = results[0]
    return DIVERGED if result.diverged else result.value


@dataclass(frozen=True)
class SweepRow:
    temperature: float
    delta: float
    channel: str
    chi: float      # None on a diverged row
    diverged: bool
    l_div: float    # None on a finite row


@dataclass
class SweepResult:
    rows: list
    errors: list    # (temperature, delta, message) for failed points
    params: object
    settings: FlowSettings
    seed: int = None


def default_temperature_grid(params, n_points=16):
    """Log-spaced temperatures covering [1e-3, 1] x t_p."""
    return params.t_p * np.logspace(-3.0, 0.0, int(n_points))


def default_delta_grid(params):
    """Gap values that spread the divergence temperatures, in t_p units."""
    return params.t_p * np.array([0.05, 0.1, 0.2, 0.4])


def temperature_sweep(
    params,
    temperatures,
    deltas=None,
    channels=DEFAULT_CHANNELS,
    settings=None,
    threads=1,
    seed=None,
):
    """Channel susceptibilities over a temperature (and optional gap) grid.

    Grid points are independent flows; `threads` > 1 runs them
    concurrently.  Rows come back sorted by (channel, delta,
    temperature) either way, and a point whose flow fails numerically is
    recorded in `errors` without stopping the sweep.
    """
    settings = settings or FlowSettings()
    deltas = [params.delta] if deltas is None else list(deltas)
    points = [(float(d), float(t)) for d in deltas for t in temperatures]

    def run_point(point):
        delta, temperature = point
        local = replace(params, delta=delta, temperature=temperature)
        try:
            results, _ = channel_susceptibilities(
                local, channels=channels, settings=settings
            )
        except NumericsError as exc:
            return point, None, str(exc)
        return point, results, None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_point, points))
    else:
        outcomes = [run_point(point) for point in points]

    rows = []
    errors = []
    for (delta, temperature), results, message in outcomes:
        if message is not None:
            errors.append((temperature, delta, message))
            continue
        for res in results:
            rows.append(
                SweepRow(
                    temperature=temperature,
                    delta=delta,
                    channel=res.channel,
                    chi=res.value,
                    diverged=res.diverged,
                    l_div=res.l_div,
                )
            )
    rows.sort(key=lambda r: (r.channel, r.delta, r.temperature))
    return SweepResult(
        rows=rows, errors=errors, params=params, settings=settings, seed=seed
    )
