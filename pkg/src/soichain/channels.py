"""Local particle-hole bilinears and their symmetry labels.

The order parameters of the chain are on-site bilinears
psi^dag_{nu sigma} M_{nu sigma, nu' sigma'} psi_{nu' sigma'} built from
the s and p orbitals.  A convenient complete set organises them by spin
rank j_s (singlet or triplet), spin projection m_s, orbital angular
momentum transfer m_l about the chain axis, and the angular momentum q
of the annihilated orbital.  In the angular orbital basis

    psi_{+1} = -(psi_x + i psi_y)/sqrt(2),  psi_0 = psi_s,
    psi_{-1} = +(psi_x - i psi_y)/sqrt(2),

the basis operator with label (j_s, m_s, m_l; q) is

    B = sum_{sigma sigma'} (-1)^(q+1) i^(2 sigma)
        < -sigma, sigma' | j_s, m_s >  psi^dag_{q sigma} psi_{q+m_l sigma'},

which makes the 36 operators orthonormal under Tr(A^dag B).  Composite
single-particle indices are spin-major: a = 3*spin + orbital with
spin 0 = up, 1 = down, and orbital order (q = +1, 0, -1) in the angular
basis or (s, px, py) in the orbital basis.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SQRT2 = np.sqrt(2.0)

### Unitary from (s, px, py) to (q = +1, 0, -1): psi_q = T3[q_index] . psi_orb
T3 = np.array(
    [
        [0.0, -1.0 / SQRT2, -1.0j / SQRT2],
        [1.0, 0.0, 0.0],
        [0.0, 1.0 / SQRT2, -1.0j / SQRT2],
    ]
)
T6 = np.kron(np.eye(2), T3)

### Action of time reversal on the angular-basis field operators,
### Theta psi_a Theta^-1 = sum_b TRS[a, b] psi_b (up, q) <-> (down, -q)
### with the (-1)^q orbital phase and the spin-1/2 sign.
_TRS = np.zeros((6, 6))
_TRS[0, 5] = -1.0
_TRS[1, 4] = +1.0
_TRS[2, 3] = -1.0
_TRS[3, 2] = +1.0
_TRS[4, 1] = -1.0
_TRS[5, 0] = +1.0

### Spatial inversion: p orbitals odd, s even, spin untouched.
_PARITY = np.kron(np.eye(2), np.diag([-1.0, 1.0, -1.0]))

_PAULI = [
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
]
_SPIN6 = [np.kron(0.5 * s, np.eye(3)) for s in _PAULI]

_CG = {
    # (2*m1, 2*m2, j, m) -> <m1 m2 | j m> for 1/2 x 1/2
    (1, 1, 1, 1): 1.0,
    (1, -1, 1, 0): 1.0 / SQRT2,
    (-1, 1, 1, 0): 1.0 / SQRT2,
    (-1, -1, 1, -1): 1.0,
    (1, -1, 0, 0): 1.0 / SQRT2,
    (-1, 1, 0, 0): -1.0 / SQRT2,
}


def clebsch_gordan_half_half(m1, m2, j, m):
    """<m1 m2 | j m> for two spins 1/2; out-of-range arguments give 0."""
    key = (round(2 * m1), round(2 * m2), j, m)
    return _CG.get(key, 0.0)


def _q_index(q):
    # angular orbital axis runs q = +1, 0, -1
    return 1 - q


@dataclass(frozen=True, order=True)
class ChannelLabel:
    """Quantum numbers (j_s, m_s, m_l; q) of one basis bilinear."""

    j_s: int
    m_s: int
    m_l: int
    q: int

    def __post_init__(self):
        if self.j_s not in (0, 1):
            raise DomainError("spin rank j_s must be 0 or 1")
        if abs(self.m_s) > self.j_s:
            raise DomainError("spin projection m_s out of range for j_s")
        if self.q not in (-1, 0, 1):
            raise DomainError("orbital angular momentum q must be -1, 0 or +1")
        if self.q + self.m_l not in (-1, 0, 1):
            raise DomainError("q + m_l must land on a valid orbital")

    def __str__(self):
        return f"B({self.j_s},{self.m_s},{self.m_l};{self.q})"


def all_labels():
    """The 36 basis labels in a fixed deterministic order."""
    labels = []
    for j_s in (0, 1):
        for m_s in range(-j_s, j_s + 1):
            for m_l in range(-2, 3):
                for q in (-1, 0, 1):
                    if q + m_l in (-1, 0, 1):
                        labels.append(ChannelLabel(j_s, m_s, m_l, q))
    return labels


def channel_matrix_angular(label):
    """6x6 coefficient matrix of the bilinear in the angular orbital basis."""
    m = np.zeros((6, 6), dtype=complex)
    row_orb = _q_index(label.q)
    col_orb = _q_index(label.q + label.m_l)
    for two_sigma in (1, -1):
        for two_sigma_p in (1, -1):
            cg = _CG.get((-two_sigma, two_sigma_p, label.j_s, label.m_s), 0.0)
            if cg == 0.0:
                continue
            phase = (-1.0) ** (label.q + 1) * (1.0j) ** two_sigma
            row = 3 * (0 if two_sigma == 1 else 1) + row_orb
            col = 3 * (0 if two_sigma_p == 1 else 1) + col_orb
            m[row, col] = phase * cg
    return m


def channel_matrix(label):
    """Coefficient matrix in the (s, px, py) orbital basis."""
    return T6.conj().T @ channel_matrix_angular(label) @ T6


def conjugate_label(label):
    """Label and phase of the hermitian conjugate basis operator.

    B(j_s, m_s, m_l; q)^dag = phase * B(j_s, -m_s, -m_l; q + m_l)
    with phase = (-1)^(m_l + m_s + 1).
    """
    phase = (-1.0) ** (label.m_l + label.m_s + 1)
    return ChannelLabel(label.j_s, -label.m_s, -label.m_l, label.q + label.m_l), phase


@dataclass(frozen=True)
class ChannelCombination:
    """Normalised weighted sum of basis bilinears, e.g. mirror-even/odd pairs."""

    terms: tuple
    name: str = ""

    def __post_init__(self):
        if not self.terms:
            raise DomainError("combination needs at least one term")
        norm = np.sqrt(sum(abs(w) ** 2 for _, w in self.terms))
        if norm == 0.0:
            raise DomainError("combination has zero weight")
        object.__setattr__(
            self,
            "terms",
            tuple((label, complex(w) / norm) for label, w in self.terms),
        )

    def matrix_angular(self):
        m = np.zeros((6, 6), dtype=complex)
        for label, w in self.terms:
            m += w * channel_matrix_angular(label)
        return m

    def matrix(self):
        return T6.conj().T @ self.matrix_angular() @ T6


def time_reverse(m):
    """Antiunitary action on a coefficient matrix, Theta(M) = U^T conj(M) U."""
    return _TRS.T @ np.conj(m) @ _TRS


def parity_transform(m):
    return _PARITY @ m @ _PARITY


def rotate(m, theta):
    """Coefficient matrix after rotating the plane orbitals by theta."""
    r = np.kron(np.eye(2), np.diag(np.exp(1.0j * theta * np.array([1.0, 0.0, -1.0]))))
    return r.conj().T @ m @ r


def spin_casimir(m):
    """sum_i [S_i, [S_i, M]]; eigenvalue j_s (j_s + 1) on a definite spin rank."""
    out = np.zeros((6, 6), dtype=complex)
    for s in _SPIN6:
        out += s @ (s @ m) - 2.0 * (s @ m @ s) + (m @ s) @ s
    return out


@dataclass(frozen=True)
class SymmetrySignature:
    spin: str      # "singlet" | "triplet" | "mixed"
    parity: str    # "even" | "odd" | "mixed"
    trs: str       # "even" | "odd" | "mixed"
    m_l: int = None  # angular momentum transfer, None if mixed


def _compare(candidate, reference, scale, tol):
    if np.linalg.norm(candidate - reference) <= tol * scale:
        return "even"
    if np.linalg.norm(candidate + reference) <= tol * scale:
        return "odd"
    return "mixed"


def classify(m_angular, tol=1e-10):
    """Symmetry signature of a coefficient matrix in the angular basis.

    Time reversal compares Theta(M) against M^dag: even means the
    hermitian observable built from M + M^dag is invariant, odd means it
    changes sign.  Parity and spin rank are tested the same way; the
    angular transfer m_l is read off from a quarter-turn of the plane.
    """
    m = np.asarray(m_angular, dtype=complex)
    scale = np.linalg.norm(m)
    if scale == 0.0:
        raise DomainError("cannot classify the zero matrix")

    cas = spin_casimir(m)
    if np.linalg.norm(cas) <= tol * scale:
        spin = "singlet"
    elif np.linalg.norm(cas - 2.0 * m) <= tol * scale:
        spin = "triplet"
    else:
        spin = "mixed"

    parity = _compare(parity_transform(m), m, scale, tol)
    trs = _compare(time_reverse(m), m.conj().T, scale, tol)

    m_l = None
    # an eighth turn separates all transfers m_l = -2 .. 2, a quarter turn would not
    eighth = rotate(m, 0.25 * np.pi)
    for candidate in range(-2, 3):
        if np.linalg.norm(eighth - np.exp(0.25j * np.pi * candidate) * m) <= tol * scale:
            m_l = candidate
            break

    return SymmetrySignature(spin=spin, parity=parity, trs=trs, m_l=m_l)


def spin_orbit_combination(m_s):
    """The time-reversal-even triplet bilinear that the induced SOI couples to.

    For m_s = +1 this is (i/sqrt(2)) (psi^dag_{0 dn} psi_{-1 up}
    + psi^dag_{+1 dn} psi_{0 up}), the mirror-odd partner of the
    m_l = -1 spin-triplet pair.
    """
    return ChannelCombination(
        terms=(
            (ChannelLabel(1, m_s, -1, 0), 1.0),
            (ChannelLabel(1, m_s, -1, 1), -1.0),
        ),
        name=f"spin_orbit_{m_s:+d}",
    )


### Channels competing in the flow, keyed by the names used in CSV output.
CHANNELS = {
    "triplet_even": spin_orbit_combination(+1),
    "triplet_odd": ChannelCombination(
        terms=(
            (ChannelLabel(1, 1, -1, 0), 1.0),
            (ChannelLabel(1, 1, -1, 1), 1.0),
        ),
        name="triplet_odd",
    ),
    "singlet_odd": ChannelCombination(
        terms=(
            (ChannelLabel(0, 0, 1, 0), 1.0),
            (ChannelLabel(0, 0, 1, -1), -1.0),
        ),
        name="singlet_odd",
    ),
}


def effective_coupling(channel, params):
    """Bare interaction strength felt by a named channel.

    Within the ladder approximation the three competing channels see
    u - j - jp (time-reversal-even triplet), u - j + jp (time-reversal-odd
    triplet) and u + 3 j + jp (time-reversal-odd singlet).
    """
    if channel == "triplet_even":
        return params.u - params.j - params.jp
    if channel == "triplet_odd":
        return params.u - params.j + params.jp
    if channel == "singlet_odd":
        return params.u + 3.0 * params.j + params.jp
    raise DomainError(f"unknown channel {channel!r}")


@dataclass(frozen=True)
class TableRow:
    """One line of the channel symmetry table."""

    j_s: int
    m_s: int        # representative projection; triplet rows hold for every m_s
    m_l: int
    text: str
    combination: ChannelCombination
    signature: SymmetrySignature


def _row_text(j_s, m_s_text, m_l, terms):
    parts = [f"B({j_s},{m_s_text},{m_l};{q})" for q, _ in terms]
    if len(parts) == 1:
        return parts[0]
    sign = "+" if terms[1][1] > 0 else "-"
    return f"({parts[0]} {sign} {parts[1]})/sqrt(2)"


def table_rows():
    """The twelve symmetry classes of the bilinears, conjugates omitted.

    Rows cover m_l = 0, 1, 2; negative transfers follow from hermitian
    conjugation and are not listed.  Singlet rows use m_s = 0, triplet
    rows use m_s = +1 as representative; the signature is the same for
    every projection because the symmetries commute with total spin.
    """
    rows = []
    for j_s in (0, 1):
        m_s = j_s
        m_s_text = "0" if j_s == 0 else "m_s"
        for m_l, terms in (
            (0, ((0, 1.0),)),
            (0, ((1, 1.0), (-1, 1.0))),
            (0, ((1, 1.0), (-1, -1.0))),
            (1, ((0, 1.0), (-1, 1.0))),
            (1, ((0, 1.0), (-1, -1.0))),
            (2, ((-1, 1.0),)),
        ):
            combo = ChannelCombination(
                terms=tuple((ChannelLabel(j_s, m_s, m_l, q), w) for q, w in terms),
            )
            rows.append(TableRow(
                j_s=j_s, m_s=m_s, m_l=m_l,
                text=_row_text(j_s, m_s_text, m_l, terms),
                combination=combo,
                signature=classify(combo.matrix_angular()),
            ))
    return rows
