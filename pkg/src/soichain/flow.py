"""One-loop vertex flow of the local interactions.

The local interaction vertex V_{nu1 nu2 nu3 nu4} (orbital indices, spin
rotation invariant by construction) is closed under the chain symmetries
on eight coupling classes.  The flow in l = log(Lambda0 / Lambda) sums
the particle-particle ladder and the three particle-hole contractions
at vanishing transfer momentum,

    d V / d l = - t_pp + 2 t_ph1 - (t_ph2 + t_ph3 + t_ph4),

with scale-differentiated bubbles on the internal lines.  Every
propagator carries the soft multiplicative regulator

    Theta(x) = x / (e^x - 1),    x = |eps| / Lambda,

whose scale derivative obeys Lambda dTheta/dLambda =
Theta (Theta + x - 1), so bubbles start at their full static value at
Lambda0 >> bandwidth and are switched off as Lambda -> 0; the vertex
accumulates the ladder (RPA) physics plus all cross-channel feedback
along the way.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, StiffnessError, SymmetryLeakageError
from .model import Band, dispersion, fermi_derivative, momentum_grid
from .quadrature import zone_integral

### Coupling classes closed under the flow; orbital indices (s, px, py) =
### (0, 1, 2).  Naming reads off one representative member, e.g. "xssx"
### stands for V_{x s s x} and its images under x <-> y and s <-> p swaps
### of the bra/ket pairs.
CLASS_NAMES = ("ssss", "xxxx", "ssxx", "sxsx", "xssx", "xxyy", "xyxy", "yxxy")

CLASS_MEMBERS = {
    "ssss": ((0, 0, 0, 0),),
    "xxxx": ((1, 1, 1, 1), (2, 2, 2, 2)),
    "ssxx": ((0, 0, 1, 1), (0, 0, 2, 2), (1, 1, 0, 0), (2, 2, 0, 0)),
    "sxsx": ((0, 1, 0, 1), (0, 2, 0, 2), (1, 0, 1, 0), (2, 0, 2, 0)),
    "xssx": ((1, 0, 0, 1), (2, 0, 0, 2), (0, 1, 1, 0), (0, 2, 2, 0)),
    "xxyy": ((1, 1, 2, 2), (2, 2, 1, 1)),
    "xyxy": ((1, 2, 1, 2), (2, 1, 2, 1)),
    "yxxy": ((2, 1, 1, 2), (1, 2, 2, 1)),
}

_BASIS = np.zeros((8, 3, 3, 3, 3))
for _ci, _name in enumerate(CLASS_NAMES):
    for _m in CLASS_MEMBERS[_name]:
        _BASIS[_ci][_m] = 1.0

_MEMBER_INDEX = {
    name: tuple(np.array(CLASS_MEMBERS[name]).T) for name in CLASS_NAMES
}


def lift(values):
    """Class values (8,) -> full vertex tensor (3, 3, 3, 3)."""
    return np.einsum("c,cijkl->ijkl", np.asarray(values, dtype=float), _BASIS)


def project(tensor):
    """Vertex tensor -> class values plus relative weight outside the classes."""
    values = np.array(
        [np.mean(tensor[_MEMBER_INDEX[name]]) for name in CLASS_NAMES]
    )
    residual = tensor - lift(values)
    scale = np.linalg.norm(tensor)
    leakage = np.linalg.norm(residual) / scale if scale > 0.0 else 0.0
    return values, leakage


def initial_vertex(params):
    """Bare class values: density u, Hund exchange j, pair hopping jp."""
    v = np.zeros(8)
    v[CLASS_NAMES.index("ssxx")] = params.jp
    v[CLASS_NAMES.index("sxsx")] = -2.0 * params.j
    v[CLASS_NAMES.index("xssx")] = params.u - params.j
    return v


### ---------------------------------------------------------------- cutoff


def _theta(x):
    x = np.asarray(x, dtype=float)
    small = x < 1e-5
    big = x > 700.0
    safe = np.clip(x, 1e-5, 700.0)
    out = safe / np.expm1(safe)
    out = np.where(small, 1.0 - 0.5 * x + x * x / 12.0, out)
    return np.where(big, 0.0, out)


def cutoff(energy, lam):
    """Soft regulator Theta(|energy|/lam): 1 deep below the scale, 0 far above."""
    if lam <= 0.0:
        raise DomainError("cutoff scale must be positive")
    return _theta(np.abs(energy) / lam)


def cutoff_scale_derivative(energy, lam):
    """Lambda d/dLambda of the regulator, via Theta (Theta + x - 1)."""
    if lam <= 0.0:
        raise DomainError("cutoff scale must be positive")
    x = np.abs(np.asarray(energy, dtype=float)) / lam
    th = _theta(x)
    return th * (th + x - 1.0)


### ---------------------------------------------------------------- bubbles


def ph_kernel(eps_a, eps_b, temperature):
    """Static particle-hole bubble integrand, never positive.

    -(tanh(a/2T) - tanh(b/2T)) / (2 (a - b)), continued with the thermal
    derivative -1/(4T cosh^2(a/2T)) on the degenerate diagonal a = b.
    """
    a = np.asarray(eps_a, dtype=float)
    b = np.asarray(eps_b, dtype=float)
    den = a - b
    scale = np.abs(a) + np.abs(b) + temperature
    degenerate = np.abs(den) <= 1e-6 * scale
    safe_den = np.where(degenerate, 1.0, den)
    if temperature == 0.0:
        direct = -(np.sign(a) - np.sign(b)) / (2.0 * safe_den)
        return np.where(degenerate, 0.0, direct)
    ta = np.tanh(0.5 * a / temperature)
    tb = np.tanh(0.5 * b / temperature)
    direct = -(ta - tb) / (2.0 * safe_den)
    return np.where(degenerate, fermi_derivative(a, temperature), direct)


def pp_kernel(eps_a, eps_b, temperature):
    """Static particle-particle bubble integrand, never negative.

    (tanh(a/2T) + tanh(b/2T)) / (2 (a + b)); on the degenerate line
    b = -a the limit is sech^2(a/2T)/(4T).  At T = 0 a filled and an
    empty band Pauli-block the pair bubble entirely.
    """
    a = np.asarray(eps_a, dtype=float)
    b = np.asarray(eps_b, dtype=float)
    den = a + b
    scale = np.abs(a) + np.abs(b) + temperature
    degenerate = np.abs(den) <= 1e-6 * scale
    safe_den = np.where(degenerate, 1.0, den)
    if temperature == 0.0:
        direct = (np.sign(a) + np.sign(b)) / (2.0 * safe_den)
        return np.where(degenerate, 0.0, direct)
    ta = np.tanh(0.5 * a / temperature)
    tb = np.tanh(0.5 * b / temperature)
    direct = (ta + tb) / (2.0 * safe_den)
    arg = np.clip(0.5 * a / temperature, -300.0, 300.0)
    limit = 1.0 / (4.0 * temperature * np.cosh(arg) ** 2)
    return np.where(degenerate, limit, direct)


_KERNELS = {"ph": ph_kernel, "pp": pp_kernel}


def static_bubble(params, kind, band_a, band_b, lam=None, rel_tol=1e-9, abs_tol=1e-12):
    """Bubble integral for one band pair, adaptively refined.

    With lam=None the regulator is fully open (the scale -> infinity
    limit); a finite lam multiplies the integrand by both cutoffs.
    """
    kernel = _KERNELS[kind]

    def integrand(k):
        eps_a = dispersion(params, band_a, k)
        eps_b = dispersion(params, band_b, k)
        weight = kernel(eps_a, eps_b, params.temperature)
        if lam is not None:
            weight = weight * cutoff(eps_a, lam) * cutoff(eps_b, lam)
        return weight

    return zone_integral(integrand, rel_tol=rel_tol, abs_tol=abs_tol)


def bubble_scale_derivative(params, kind, band_a, band_b, lam, rel_tol=1e-9, abs_tol=1e-12):
    """Lambda d/dLambda of the regulated bubble for one band pair.

    The cutoff product is differentiated analytically under the
    integral, so this is one quadrature and involves no finite
    differencing.
    """
    kernel = _KERNELS[kind]

    def integrand(k):
        eps_a = dispersion(params, band_a, k)
        eps_b = dispersion(params, band_b, k)
        weight = kernel(eps_a, eps_b, params.temperature)
        return weight * (
            cutoff_scale_derivative(eps_a, lam) * cutoff(eps_b, lam)
            + cutoff(eps_a, lam) * cutoff_scale_derivative(eps_b, lam)
        )

    return zone_integral(integrand, rel_tol=rel_tol, abs_tol=abs_tol)


def bubble_matrix(params, kind="ph", lam=None, rel_tol=1e-9, abs_tol=1e-12):
    """3x3 band-pair bubble matrix; px and py are degenerate."""
    ss = static_bubble(params, kind, Band.S, Band.S, lam, rel_tol, abs_tol)
    sp = static_bubble(params, kind, Band.S, Band.PX, lam, rel_tol, abs_tol)
    pp = static_bubble(params, kind, Band.PX, Band.PX, lam, rel_tol, abs_tol)
    return np.array([[ss, sp, sp], [sp, pp, pp], [sp, pp, pp]])


### ------------------------------------------------------------------ flow


@dataclass(frozen=True)
class FlowSettings:
    """Numerical knobs of the vertex flow."""

    k_points: int = 512
    l_max: float = 30.0
    ode_rtol: float = 1e-6
    ode_atol: float = 1e-9
    max_step: float = 1.0
    lambda0_factor: float = 100.0      # Lambda0 in units of the bandwidth scale
    divergence_factor: float = 1000.0  # stop once max |V| exceeds this x bandwidth
    leakage_abort: float = 1e-8
    reduced: bool = False              # keep only the s-p particle-hole bubble

    def __post_init__(self):
        if self.k_points < 64:
            raise DomainError("flow needs at least 64 momentum points")
        if self.lambda0_factor < 10.0:
            raise DomainError("lambda0_factor below 10 truncates the initial bubble")
        if self.divergence_factor < 100.0:
            raise DomainError("divergence_factor below 100 mislabels strong coupling")
        if self.l_max <= 0.0:
            raise DomainError("l_max must be positive")


class FlowWorkspace:
    """Grids and temperature-dependent kernels reused across RHS calls."""

    def __init__(self, params, settings):
        self.params = params
        self.settings = settings
        k = momentum_grid(settings.k_points)
        self.eps_s = dispersion(params, Band.S, k)
        self.eps_p = dispersion(params, Band.PX, k)
        t = params.temperature
        self.kph = {
            "ss": ph_kernel(self.eps_s, self.eps_s, t),
            "sp": ph_kernel(self.eps_s, self.eps_p, t),
            "pp": ph_kernel(self.eps_p, self.eps_p, t),
        }
        self.kpp = {
            "ss": pp_kernel(self.eps_s, self.eps_s, t),
            "sp": pp_kernel(self.eps_s, self.eps_p, t),
            "pp": pp_kernel(self.eps_p, self.eps_p, t),
        }

    def bubble_derivatives(self, lam):
        """Lambda d/dLambda of the regulated ph and pp bubbles, 3x3 each."""
        xs = np.abs(self.eps_s) / lam
        xp = np.abs(self.eps_p) / lam
        th_s = _theta(xs)
        th_p = _theta(xp)
        thd_s = th_s * (th_s + xs - 1.0)
        thd_p = th_p * (th_p + xp - 1.0)
        w_ss = 2.0 * th_s * thd_s
        w_sp = thd_s * th_p + th_s * thd_p
        w_pp = 2.0 * th_p * thd_p

        def assemble(kern):
            ss = np.mean(kern["ss"] * w_ss)
            sp = np.mean(kern["sp"] * w_sp)
            pp = np.mean(kern["pp"] * w_pp)
            return np.array([[ss, sp, sp], [sp, pp, pp], [sp, pp, pp]])

        pph = assemble(self.kph)
        ppp = assemble(self.kpp)
        if self.settings.reduced:
            sp = pph[0, 1]
            pph = np.zeros((3, 3))
            pph[0, 1] = pph[0, 2] = pph[1, 0] = pph[2, 0] = sp
            ppp = np.zeros((3, 3))
        return pph, ppp


def vertex_rhs(vertex, pph, ppp):
    """Right-hand side tensor of the flow for a lifted vertex."""
    v = vertex
    t_pp = np.einsum("ab,ijab,abkl->ijkl", ppp, v, v)
    t_ph1 = np.einsum("ab,ibal,ajkb->ijkl", pph, v, v)
    t_ph2 = np.einsum("ab,iakb,bjal->ijkl", pph, v, v)
    t_ph3 = np.einsum("ab,ajkb,bial->ijkl", pph, v, v)
    t_ph4 = np.einsum("ab,ibal,jakb->ijkl", pph, v, v)
    return -t_pp + 2.0 * t_ph1 - (t_ph2 + t_ph3 + t_ph4)


@dataclass
class FlowTrajectory:
    """Accepted integrator steps of one flow run."""

    l: np.ndarray          # flow parameter, ascending
    lam: np.ndarray        # cutoff scale Lambda0 exp(-l)
    values: np.ndarray     # class couplings, shape (len(l), 8)
    termination: str       # "converged" | "diverged" | "max_l_reached"
    l_div: float           # event position, None unless diverged
    diverging_component: str   # class coupling largest at the divergence, else None
    max_leakage: float
    params: object
    settings: FlowSettings

    @property
    def final(self):
        return self.values[-1]

    def component(self, name):
        return self.values[:, CLASS_NAMES.index(name)]

    @property
    def diverged(self):
        return self.termination == "diverged"


def integrate_flow(params, settings=None):
    """Run the vertex flow from Lambda0 down to Lambda0 exp(-l_max)."""
    settings = settings or FlowSettings()
    w = params.bandwidth_scale
    lam0 = settings.lambda0_factor * w
    v_stop = settings.divergence_factor * w
    workspace = FlowWorkspace(params, settings)
    peak_leakage = [0.0]

    def rhs(l, v):
        pph, ppp = workspace.bubble_derivatives(lam0 * np.exp(-l))
        full = vertex_rhs(lift(v), pph, ppp)
        dv, leakage = project(full)
        if leakage > peak_leakage[0]:
            peak_leakage[0] = leakage
        return dv

    def blow_up(l, v):
        return v_stop - np.max(np.abs(v))

    blow_up.terminal = True
    blow_up.direction = -1

    sol = solve_ivp(
        rhs,
        (0.0, settings.l_max),
        initial_vertex(params),
        method="RK45",
        rtol=settings.ode_rtol,
        atol=settings.ode_atol,
        max_step=settings.max_step,
        events=blow_up,
    )
    if sol.status == -1:
        raise StiffnessError(f"vertex flow integration failed: {sol.message}")
    if peak_leakage[0] > settings.leakage_abort:
        raise SymmetryLeakageError(
            f"vertex leaked {peak_leakage[0]:.3e} of its weight out of the "
            f"symmetry classes (limit {settings.leakage_abort:.1e})"
        )

    l = sol.t
    values = sol.y.T
    diverging_component = None
    if sol.status == 1:
        termination = "diverged"
        l_div = float(sol.t_events[0][0])
        diverging_component = CLASS_NAMES[int(np.argmax(np.abs(values[-1])))]
    else:
        l_div = None
        final_rate = np.max(np.abs(rhs(l[-1], values[-1])))
        still = final_rate <= 1e-6 * max(w, np.max(np.abs(values[-1])))
        termination = "converged" if still else "max_l_reached"

    return FlowTrajectory(
        l=l,
        lam=lam0 * np.exp(-l),
        values=values,
        termination=termination,
        l_div=l_div,
        diverging_component=diverging_component,
        max_leakage=peak_leakage[0],
        params=params,
        settings=settings,
    )
