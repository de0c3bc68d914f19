"""Exact solutions and profiles used as oracles throughout the package.

* The compact profile Phi_alpha(x) = K(alpha) (1-x^2)_+^(alpha/2), normalized so
  that Lambda^alpha Phi_alpha = 1 on (-1, 1).  Outside the support the operator
  takes the negative value H(x) given in closed hypergeometric form below.
* The odd primitive U(y) = int_{-inf}^y Lambda^alpha Phi_alpha, which equals y
  on [-1, 1] and decays like |y|^{-alpha} far out.
* The exact self-similar family of the zero-G dynamics (density transported by
  u = d_x^{-1} Lambda^alpha rho): from data c*Phi_alpha the solution is
  c*b(t)*Phi_alpha(b(t)x) with b' = -c b^(2+alpha), and every nonnegative
  mass-M solution approaches the corresponding attractor.
* The rarefaction triple (rho_bar, G_bar, u_bar) with u_bar the entropy
  solution of the inviscid Burgers equation.
* Weak-form residual evaluators certifying the closed forms as (weak) solutions.

Closed-form tail note: for |x| > 1 the fractional Laplacian of Phi_alpha is

    H(x) = -A(alpha) (|x|-1)^(-alpha/2) (|x|+1)^(-1-alpha/2)
                 * 2F1(1, 1+alpha/2; 2+alpha; 2/(1+|x|)),
    A(alpha) = 2^(1+alpha) Gamma(1+alpha/2) / (Gamma(2+alpha) |Gamma(-alpha/2)|).

This expression is validated in the test suite against direct adaptive
quadrature of the singular integral; it integrates to exactly -1 over (1, inf)
(so U is continuous at the support edge) and behaves like C_H |x|^(-1-alpha)
with C_H = Gamma(1/2) / (Gamma(-alpha/2) Gamma((3+alpha)/2)) < 0 at infinity.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad
from scipy.special import hyp2f1, roots_jacobi, roots_legendre

from .fracops import FracOrder, singular_kernel_constant

_BETA = lambda a: 1.0 / (1.0 + a)  # noqa: E731  similarity exponent 1/(1+alpha)


def _gamma(z: float) -> float:
    """Gamma function; negative non-integer arguments via the reflection formula."""
    if z > 0:
        return math.gamma(z)
    return math.pi / (math.sin(math.pi * z) * math.gamma(1.0 - z))


def getoor_constant(alpha: float) -> float:
    """Normalizing constant K(alpha) = Gamma(1/2) / (2^alpha Gamma(1+alpha/2) Gamma((1+alpha)/2)).

    With this constant, Lambda^alpha of K(alpha)(1-x^2)_+^(alpha/2) equals 1 on
    the open support.  The limit alpha -> 1 gives exactly 1.
    """
    a = float(FracOrder(alpha))
    return math.gamma(0.5) / (2.0**a * math.gamma(1.0 + a / 2.0) * math.gamma((1.0 + a) / 2.0))


def getoor_profile(alpha: float, x) -> np.ndarray | float:
    """Compact profile K(alpha) (1 - x^2)_+^(alpha/2); even, supported on [-1, 1]."""
    a = float(FracOrder(alpha))
    k = getoor_constant(a)
    xs = np.asarray(x, dtype=float)
    out = k * np.clip(1.0 - xs**2, 0.0, None) ** (a / 2.0)
    return out if out.ndim else float(out)


def profile_mass(alpha: float) -> float:
    """Total mass of the profile: pi / (2^alpha Gamma((1+alpha)/2) Gamma((3+alpha)/2)).

    This is greater than 1 for every alpha in (0, 1) (e.g. 1.97245... at
    alpha = 1/2); unit-mass variants must be rescaled explicitly.
    """
    a = float(FracOrder(alpha))
    return math.pi / (2.0**a * math.gamma((1.0 + a) / 2.0) * math.gamma((3.0 + a) / 2.0))


@dataclass(frozen=True)
class GetoorProfile:
    """Bundled profile constants for one fractional order."""

    alpha: FracOrder

    @property
    def K(self) -> float:
        return getoor_constant(self.alpha.value)

    @property
    def mass(self) -> float:
        return profile_mass(self.alpha.value)

    def __call__(self, x):
        return getoor_profile(self.alpha.value, x)


def tail_farfield_coefficient(alpha: float) -> float:
    """C_H = Gamma(1/2) / (Gamma(-alpha/2) Gamma((3+alpha)/2)); negative.

    H(x) ~ C_H |x|^(-1-alpha) as |x| -> inf; equivalently C_H equals minus the
    singular-kernel constant times the profile mass.
    """
    a = float(FracOrder(alpha))
    return math.gamma(0.5) / (_gamma(-a / 2.0) * math.gamma((3.0 + a) / 2.0))


def _tail_amplitude(alpha: float) -> float:
    a = alpha
    return 2.0 ** (1.0 + a) * math.gamma(1.0 + a / 2.0) / (math.gamma(2.0 + a) * abs(_gamma(-a / 2.0)))


def getoor_fraclap_tail(alpha: float, x) -> np.ndarray | float:
    """Fractional Laplacian of the profile outside its support (negative there).

    Evaluates the closed hypergeometric form quoted in the module docstring.
    Diverges like -(|x|-1)^(-alpha/2) at the support edge and decays like
    C_H |x|^(-1-alpha); its integral over (1, inf) is exactly -1.
    """
    a = float(FracOrder(alpha))
    xs = np.asarray(x, dtype=float)
    s = np.abs(xs)
    if np.any(s <= 1.0):
        raise ValueError("tail formula is defined for |x| > 1 only")
    amp = _tail_amplitude(a)
    out = -amp * (s - 1.0) ** (-a / 2.0) * (s + 1.0) ** (-1.0 - a / 2.0) * hyp2f1(
        1.0, 1.0 + a / 2.0, 2.0 + a, 2.0 / (1.0 + s)
    )
    return out if out.ndim else float(out)


def getoor_fraclap(alpha: float, x) -> np.ndarray | float:
    """Lambda^alpha Phi_alpha: 1 inside (-1,1), tail formula outside, nan at |x|=1."""
    a = float(FracOrder(alpha))
    xs = np.asarray(x, dtype=float)
    s = np.abs(xs)
    out = np.full(s.shape, np.nan)
    out[s < 1.0] = 1.0
    outside = s > 1.0
    if np.any(outside):
        out[outside] = getoor_fraclap_tail(a, s[outside])
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# The odd primitive U(y) = int_{-inf}^y Lambda^alpha Phi_alpha.
# ---------------------------------------------------------------------------

_U_CACHE: dict[float, tuple[np.ndarray, np.ndarray, float, float]] = {}
_U_YMAX = 100.0
_U_MESH = 1 << 16


def _edge_coefficient(alpha: float) -> float:
    """B(alpha) in the edge-side split H(y) = 1 - B (y-1)^(-a/2) (y+1)^(-1-a/2) F.

    Here F = 2F1(1, 1+a/2; 1-a/2; (y-1)/(y+1)).  This is the hypergeometric
    connection formula applied to getoor_fraclap_tail; the constant term comes
    out to exactly 1, matching the interior value of the operator, and the
    remaining factor is smooth up to the edge once the (y-1)^(-a/2) prefactor
    is pulled out.
    """
    a = float(alpha)
    return 2.0 ** (1.0 + a) * math.gamma(a / 2.0) / (abs(_gamma(-a / 2.0)) * math.gamma(1.0 + a))


def _u_cache(alpha: float) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Cached table of T(y) = -int_y^inf H on a singularity-absorbing mesh.

    -H(y) = B (y-1)^(-a/2) (y+1)^(-1-a/2) 2F1(1, 1+a/2; 1-a/2; (y-1)/(y+1)) - 1
    splits the integrand into an algebraically singular part with a smooth
    cofactor plus an exact constant.  Substituting y = 1 + v^q with
    q = 2/(2-alpha) turns (y-1)^(-alpha/2) dy into q dv exactly, so the
    tabulated part is smooth in v; the constant integrates to -(ymax - y).
    T is accumulated by the trapezoid rule from the far end, anchored at the
    adaptive-quadrature value T(ymax), and extended beyond ymax by the
    |y|^(-alpha) power law.  U(1) = T(1) = 1 then holds to ~1e-9.
    """
    key = float(alpha)
    cached = _U_CACHE.get(key)
    if cached is not None:
        return cached
    a = key
    q = 2.0 / (2.0 - a)
    t_far = quad(lambda s: -getoor_fraclap_tail(a, s), _U_YMAX, np.inf)[0]
    v = np.linspace(0.0, (_U_YMAX - 1.0) ** (1.0 / q), _U_MESH)
    s = 1.0 + v**q
    w = _edge_coefficient(a) * (s + 1.0) ** (-1.0 - a / 2.0) * hyp2f1(
        1.0, 1.0 + a / 2.0, 1.0 - a / 2.0, (s - 1.0) / (s + 1.0)
    )
    c = cumulative_trapezoid(w, v, initial=0.0)
    t = t_far + q * (c[-1] - c) - (_U_YMAX - s)
    v.setflags(write=False)
    t.setflags(write=False)
    entry = (v, t, float(t_far), q)
    _U_CACHE[key] = entry
    return entry


def velocity_profile_U(alpha: float, y) -> np.ndarray | float:
    """U(y): equals y on [-1, 1], odd, positive and decaying like |y|^(-alpha) outside.

    U(+-1) = +-1 (the tail integrates to exactly -1), so U is continuous and
    its maximum over the line is U(1) = 1.
    """
    a = float(FracOrder(alpha))
    v_mesh, t_mesh, t_far, q = _u_cache(a)
    ys = np.asarray(y, dtype=float)
    scalar = ys.ndim == 0
    ys = np.atleast_1d(ys)
    s = np.abs(ys)
    out = np.where(s <= 1.0, ys, 0.0)
    mid = (s > 1.0) & (s <= _U_YMAX)
    if np.any(mid):
        out[mid] = np.sign(ys[mid]) * np.interp((s[mid] - 1.0) ** (1.0 / q), v_mesh, t_mesh)
    far = s > _U_YMAX
    if np.any(far):
        out[far] = np.sign(ys[far]) * t_far * (s[far] / _U_YMAX) ** (-a)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Self-similar density/velocity and the exact evolution of profile data.
# ---------------------------------------------------------------------------


def _check_time(t: float) -> float:
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"time must be positive, got {t}")
    return t


def selfsimilar_density(alpha: float, x, t: float) -> np.ndarray | float:
    """Scale-invariant density t^(-beta) Phi_alpha(x t^(-beta)), beta = 1/(1+alpha).

    The spatial mass equals profile_mass(alpha) for every t.  (As a function of
    time this family is a reparametrization of the exact evolution below; see
    attractor_density for the member that solves the continuity system in t.)
    """
    a = float(FracOrder(alpha))
    s = _check_time(t) ** (-_BETA(a))
    return getoor_profile(a, np.asarray(x, dtype=float) * s) * s


def selfsimilar_velocity(alpha: float, x, t: float) -> np.ndarray | float:
    """Velocity profile U evaluated in the similarity variable, U(x t^(-beta))."""
    a = float(FracOrder(alpha))
    s = _check_time(t) ** (-_BETA(a))
    return velocity_profile_U(a, np.asarray(x, dtype=float) * s)


def attractor_density(alpha: float, mass: float, x, t: float) -> np.ndarray | float:
    """Exact self-similar attractor of the zero-G dynamics with total mass `mass`.

    rho(x,t) = c b(t) Phi_alpha(b(t) x) with c = mass / profile_mass(alpha) and
    b(t) = ((1+alpha) c t)^(-1/(1+alpha)); together with attractor_velocity it
    is an exact weak solution of rho_t + (rho u)_x = 0, u = d_x^{-1} Lambda^alpha rho.
    """
    a = float(FracOrder(alpha))
    if not (mass > 0):
        raise ValueError(f"mass must be positive, got {mass}")
    c = mass / profile_mass(a)
    b = ((1.0 + a) * c * _check_time(t)) ** (-_BETA(a))
    return c * b * getoor_profile(a, np.asarray(x, dtype=float) * b)


def attractor_velocity(alpha: float, mass: float, x, t: float) -> np.ndarray | float:
    """Velocity c b(t)^alpha U(b(t) x) accompanying attractor_density."""
    a = float(FracOrder(alpha))
    if not (mass > 0):
        raise ValueError(f"mass must be positive, got {mass}")
    c = mass / profile_mass(a)
    b = ((1.0 + a) * c * _check_time(t)) ** (-_BETA(a))
    return c * b**a * velocity_profile_U(a, np.asarray(x, dtype=float) * b)


def evolved_profile_density(alpha: float, amplitude: float, x, t: float) -> np.ndarray | float:
    """Exact evolution of initial data amplitude * Phi_alpha under the zero-G dynamics.

    rho(x,t) = amplitude * b(t) Phi_alpha(b(t) x), b(t) = (1 + (1+alpha) amplitude t)^(-1/(1+alpha)),
    valid for t >= 0 (b(0) = 1 recovers the data).
    """
    a = float(FracOrder(alpha))
    if not (amplitude > 0):
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    t = float(t)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    b = (1.0 + (1.0 + a) * amplitude * t) ** (-_BETA(a))
    return amplitude * b * getoor_profile(a, np.asarray(x, dtype=float) * b)


def evolved_profile_velocity(alpha: float, amplitude: float, x, t: float) -> np.ndarray | float:
    """Velocity amplitude * b(t)^alpha U(b(t) x) accompanying evolved_profile_density."""
    a = float(FracOrder(alpha))
    if not (amplitude > 0):
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    t = float(t)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    b = (1.0 + (1.0 + a) * amplitude * t) ** (-_BETA(a))
    return amplitude * b**a * velocity_profile_U(a, np.asarray(x, dtype=float) * b)


# ---------------------------------------------------------------------------
# Rarefaction triple.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RarefactionTriple:
    """Long-time limit triple parametrized by the two conserved masses."""

    M_rho: float
    M_G: float

    def __post_init__(self) -> None:
        if not (self.M_rho > 0 and math.isfinite(self.M_rho)):
            raise ValueError(f"M_rho must be positive, got {self.M_rho}")
        if not (self.M_G > 0 and math.isfinite(self.M_G)):
            raise ValueError(f"M_G must be positive, got {self.M_G}")


def rarefaction_velocity(rt: RarefactionTriple, x, t: float) -> np.ndarray | float:
    """Entropy solution of Burgers: 0 for x <= 0, x/t on the fan, M_G beyond it."""
    t = _check_time(t)
    xs = np.asarray(x, dtype=float)
    out = np.clip(xs / t, 0.0, rt.M_G)
    return out if out.ndim else float(out)


def rarefaction_density(rt: RarefactionTriple, x, t: float) -> np.ndarray | float:
    """(M_rho/M_G)/t on (0, M_G t], zero elsewhere; total mass M_rho for every t."""
    t = _check_time(t)
    xs = np.asarray(x, dtype=float)
    on_fan = (xs > 0.0) & (xs <= rt.M_G * t)
    out = np.where(on_fan, rt.M_rho / rt.M_G / t, 0.0)
    return out if out.ndim else float(out)


def rarefaction_G(rt: RarefactionTriple, x, t: float) -> np.ndarray | float:
    """1/t on (0, M_G t], zero elsewhere; the a.e. x-derivative of the velocity."""
    t = _check_time(t)
    xs = np.asarray(x, dtype=float)
    on_fan = (xs > 0.0) & (xs <= rt.M_G * t)
    out = np.where(on_fan, 1.0 / t, 0.0)
    return out if out.ndim else float(out)


def rarefaction_lp_norm(rt: RarefactionTriple, p: float, t: float) -> float:
    """Exact ||rho_bar(t)||_p = M_rho M_G^(1/p-1) t^(-1+1/p) (max value for p = inf)."""
    t = _check_time(t)
    if p == np.inf:
        return rt.M_rho / rt.M_G / t
    if p < 1:
        raise ValueError(f"norm exponent must be >= 1, got {p}")
    return rt.M_rho * rt.M_G ** (1.0 / p - 1.0) * t ** (-1.0 + 1.0 / p)


# ---------------------------------------------------------------------------
# Weak-form residuals.
# ---------------------------------------------------------------------------


def burgers_weak_residual(
    rt: RarefactionTriple,
    phi,
    phi_t,
    phi_x,
    x_max: float,
    t_max: float,
    n_space: int = 48,
    n_time: int = 200,
) -> float:
    """Weak residual of the rarefaction velocity as a Burgers solution.

    Evaluates  integral_0^T integral [u phi_t + (u^2/2) phi_x] dx dt
             + integral u(x, 0+) phi(x, 0) dx
    for a test function phi(x, t) that vanishes for |x| >= x_max and t >= t_max
    (caller's responsibility).  Space integrals are done piecewise-Gauss with
    the fan kinks as panel boundaries, so the result is quadrature-exact and
    the residual measures only the weak-solution property (zero for the
    entropy solution).
    """
    gl_x, gw_x = roots_legendre(n_space)
    gl_t, gw_t = roots_legendre(n_time)

    def space_integral(t: float) -> float:
        total = 0.0
        breaks = [-x_max, 0.0, min(rt.M_G * t, x_max), x_max]
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            if hi <= lo:
                continue
            xq = 0.5 * (hi - lo) * gl_x + 0.5 * (hi + lo)
            u = rarefaction_velocity(rt, xq, t)
            vals = u * phi_t(xq, t) + 0.5 * u**2 * phi_x(xq, t)
            total += 0.5 * (hi - lo) * float(np.dot(gw_x, vals))
        return total

    tq = 0.5 * t_max * gl_t + 0.5 * t_max
    slab = 0.5 * t_max * float(np.dot(gw_t, [space_integral(t) for t in tq]))

    xq = 0.5 * x_max * gl_x + 0.5 * x_max  # u(x, 0+) = M_G for x > 0
    initial = 0.5 * x_max * rt.M_G * float(np.dot(gw_x, phi(xq, 0.0)))
    return slab + initial


def continuity_weak_residual(
    alpha: float,
    mass: float,
    phi,
    phi_t,
    phi_x,
    t_span: tuple[float, float],
    n_space: int = 48,
    n_time: int = 120,
) -> float:
    """Weak residual of the attractor pair under the continuity equation.

    Evaluates  integral_{t0}^{t1} integral [rho phi_t + rho u phi_x] dx dt
             - [ integral rho phi dx ]_{t0}^{t1}
    which vanishes for any weak solution and any smooth phi.  The density is
    supported in |b(t) x| <= 1, so the space integral reduces to one
    Gauss-Jacobi panel with weight (1-y^2)^(alpha/2) absorbing the edge
    behavior exactly.
    """
    a = float(FracOrder(alpha))
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (0 < t0 < t1):
        raise ValueError("t_span must satisfy 0 < t0 < t1")
    c = mass / profile_mass(a)
    k = getoor_constant(a)
    yj, wj = roots_jacobi(n_space, a / 2.0, a / 2.0)
    gl_t, gw_t = roots_legendre(n_time)

    def b_of(t: float) -> float:
        return ((1.0 + a) * c * t) ** (-_BETA(a))

    def space_integral(t: float) -> float:
        b = b_of(t)
        xq = yj / b
        # rho = c b K w(y),  u = c b^alpha y  on the support (w = Jacobi weight)
        rho_fac = c * b * k
        u = c * b**a * yj
        vals = rho_fac * (phi_t(xq, t) + u * phi_x(xq, t))
        return float(np.dot(wj, vals)) / b

    def mass_term(t: float) -> float:
        b = b_of(t)
        return c * b * k * float(np.dot(wj, phi(yj / b, t))) / b

    tq = 0.5 * (t1 - t0) * gl_t + 0.5 * (t1 + t0)
    slab = 0.5 * (t1 - t0) * float(np.dot(gw_t, [space_integral(t) for t in tq]))
    return slab - (mass_term(t1) - mass_term(t0))
