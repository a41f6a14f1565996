"""Trial-state families: cut-off Aubin-Talenti bubbles, product Gaussians and
the large-mass rescaled sequence used to drive the energy level to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from ._validation import ResolutionError, check_positive
from .fibering import FiberCoefficients, dilate
from .functionals import Regime, classify, evaluate


def smoothstep_cutoff(r, r_inner=1.0, r_outer=2.0):
    """C^1 radial cut-off: 1 on ``r <= r_inner``, 0 on ``r >= r_outer``, cubic between."""
    s = np.clip((np.asarray(r, dtype=float) - r_inner) / (r_outer - r_inner), 0.0, 1.0)
    return 1.0 - s * s * (3.0 - 2.0 * s)


def smoothstep_cutoff_derivative(r, r_inner=1.0, r_outer=2.0):
    width = r_outer - r_inner
    s = np.clip((np.asarray(r, dtype=float) - r_inner) / width, 0.0, 1.0)
    return -6.0 * s * (1.0 - s) / width


def bubble_profile(r, epsilon):
    """Uncut Aubin-Talenti profile ``(eps / (eps^2 + r^2))^(1/2)``."""
    r = np.asarray(r, dtype=float)
    return np.sqrt(epsilon / (epsilon * epsilon + r * r))


@dataclass(frozen=True)
class BubbleParams:
    epsilon: float
    mass: float = 1.0
    r_inner: float = 1.0
    r_outer: float = 2.0

    def __post_init__(self):
        check_positive(self.epsilon, "epsilon")
        check_positive(self.mass, "mass")
        if self.epsilon > 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 < self.r_inner < self.r_outer:
            raise ValueError("need 0 < r_inner < r_outer")

    def profile(self, r):
        return smoothstep_cutoff(r, self.r_inner, self.r_outer) * bubble_profile(r, self.epsilon)

    def profile_derivative(self, r):
        r = np.asarray(r, dtype=float)
        eps = self.epsilon
        phi = smoothstep_cutoff(r, self.r_inner, self.r_outer)
        dphi = smoothstep_cutoff_derivative(r, self.r_inner, self.r_outer)
        U = bubble_profile(r, eps)
        dU = -r * math.sqrt(eps) * (eps * eps + r * r) ** -1.5
        return dphi * U + phi * dU


@dataclass(frozen=True)
class GaussianParams:
    widths: tuple
    mass: float = 1.0

    def __post_init__(self):
        w = tuple(float(s) for s in np.broadcast_to(self.widths, (3,)))
        for s in w:
            check_positive(s, "width")
        object.__setattr__(self, "widths", w)
        check_positive(self.mass, "mass")


def _normalize(grid, u, mass):
    m = float(np.sum(np.abs(u) ** 2) * grid.dV)
    return u * math.sqrt(mass / m)


def aubin_talenti_bubble(p, grid, min_samples=4):
    """Cut-off bubble ``phi(x) (eps/(eps^2+|x|^2))^(1/2)`` scaled to mass ``p.mass``.

    The grid must contain the ball of radius ``r_outer`` and put at least
    ``min_samples`` points across the concentration scale ``epsilon``.
    """
    h = max(grid.spacing)
    if p.epsilon < min_samples * h:
        raise ResolutionError(
            f"epsilon={p.epsilon} needs spacing <= {p.epsilon / min_samples:.3g}, grid has {h:.3g}"
        )
    if min(grid.L) < p.r_outer:
        raise ResolutionError(f"box half-length {min(grid.L)} does not contain the cut-off radius {p.r_outer}")
    u = p.profile(np.sqrt(grid.r2))
    return _normalize(grid, u, p.mass).astype(complex)


def bubble_fiber(p, lambda1):
    """Fiber coefficients of the mass-normalised bubble by radial quadrature.

    The bubble is radial, so the dipolar part of ``B`` vanishes and only
    ``lambda1`` enters.  Adaptive quadrature splits the radial axis at the
    scales ``epsilon`` and ``r_inner`` so the result does not depend on any
    grid; this is what makes small ``epsilon`` tractable.
    """
    eps = p.epsilon
    breaks = sorted({0.0, eps, 10.0 * eps, p.r_inner, p.r_outer})
    breaks = [b for b in breaks if b <= p.r_outer]

    def radial(f):
        total = 0.0
        for a, b in zip(breaks[:-1], breaks[1:]):
            if b > a:
                val, _ = integrate.quad(
                    lambda r: 4.0 * np.pi * r * r * f(r), a, b, limit=400, epsabs=0.0, epsrel=1e-13
                )
                total += val
        return total

    prof, dprof = p.profile, p.profile_derivative
    m = radial(lambda r: prof(r) ** 2)
    s = p.mass / m
    A = s * radial(lambda r: dprof(r) ** 2)
    quartic = s * s * radial(lambda r: prof(r) ** 4)
    C = s**3 * radial(lambda r: prof(r) ** 6)
    return FiberCoefficients(A, lambda1 * quartic, C)


def _check_gaussian_resolved(p, grid, min_samples=2.0, tail=1e-10):
    for s, h, L in zip(p.widths, grid.spacing, grid.L):
        if s < min_samples * h:
            raise ResolutionError(f"width {s} is below {min_samples} grid spacings ({h:.3g})")
        if math.exp(-0.5 * (L / s) ** 2) > tail:
            raise ResolutionError(f"width {s} is not contained in the box half-length {L}")


def anisotropic_gaussian(p, grid, check=True):
    """Product Gaussian ``exp(-sum x_i^2 / (2 sigma_i^2))`` with mass ``p.mass`` on the grid."""
    if check:
        _check_gaussian_resolved(p, grid)
    x1, x2, x3 = grid.coords
    s1, s2, s3 = p.widths
    u = np.exp(-0.5 * ((x1 / s1) ** 2 + (x2 / s2) ** 2 + (x3 / s3) ** 2))
    return _normalize(grid, u, p.mass).astype(complex)


def gaussian_dipolar_factor(aspect):
    """``int K^ |rho^|^2 / int |rho^|^2`` for a Gaussian with widths ``(1, 1, aspect)``.

    The ratio is scale free.  ``|rho^|^2`` is a Gaussian in frequency, so
    the radial integral is elementary and what remains is the average of
    ``K^ = (4 pi/3)(3 mu^2 - 1)`` over ``mu = cos(theta)`` with weight
    ``(1 - e mu^2)^(-3/2)``, ``e = 1 - aspect^2``.  That weight integrates
    to ``1/aspect``; the ``mu^2`` moment ``I2`` has the closed forms below.
    """
    k = float(aspect)
    if not k > 0:
        raise ValueError("aspect must be positive")
    e = 1.0 - k * k
    if abs(e) < 1e-4:
        I2 = 1.0 / 3.0 + 0.3 * e + 15.0 / 56.0 * e * e
    elif e > 0:
        I2 = 1.0 / (e * k) - math.asin(math.sqrt(e)) / e**1.5
    else:
        a = -e
        I2 = -1.0 / (a * k) + math.asinh(math.sqrt(a)) / a**1.5
    return 4.0 * math.pi / 3.0 * (3.0 * k * I2 - 1.0)


def negative_B_widths(cp):
    """Widths ``(1, 1, aspect)`` of a Gaussian with ``B < 0`` under an unstable pair.

    The effective coupling ``lambda1 + lambda2 * factor(aspect)`` moves from
    ``lambda1`` (radial) toward the negative discriminant as the Gaussian is
    stretched (``lambda2 > 0``) or flattened (``lambda2 < 0``) along x3.  The
    aspect is chosen so that it reaches half of that discriminant.
    """
    rc = classify(cp)
    if rc.tag is not Regime.UNSTABLE:
        raise ValueError("only unstable pairs admit states with B < 0")
    l1, l2 = cp.lambda1, cp.lambda2
    d = rc.d_plus if l2 > 0 else rc.d_minus if l2 < 0 else l1
    target = 0.5 * d
    if l1 <= target:
        return (1.0, 1.0, 1.0)
    # effective coupling is monotone in log(aspect); positive lambda2 stretches
    sign = 1.0 if l2 > 0 else -1.0
    f = lambda s: l1 + l2 * gaussian_dipolar_factor(math.exp(sign * s)) - target  # noqa: E731
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 200:
            raise ValueError("no Gaussian aspect reaches B < 0")
    s = optimize.brentq(f, 0.0, hi, xtol=1e-12)
    return (1.0, 1.0, math.exp(sign * s))


def large_mass_sequence(n, cp, grid, seed_widths=None, rtol=1e-12, max_iter=20):
    """State ``u_n = q u(s x)`` with mass ``n^2`` and ``B(u_n) = -1``.

    ``u`` is a Gaussian seed with ``B < 0``.  Mass scales as ``q^2 s^-3`` and
    ``B`` as ``q^4 s^-3``, which fixes ``(q, s)``.  The coarse rescaling is
    applied analytically to the Gaussian widths; remaining discretisation
    mismatch is removed by a few near-identity corrections on the grid.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if classify(cp).tag is not Regime.UNSTABLE:
        raise ValueError("large-mass sequence requires an unstable coupling pair")
    widths = np.asarray(seed_widths if seed_widths is not None else negative_B_widths(cp), dtype=float)
    m0, B0 = _gaussian_mass_B(widths, cp)
    if B0 >= 0:
        raise ValueError(f"seed has B = {B0:.3g} >= 0")
    target_mass = float(n) ** 2
    q2 = m0 / (target_mass * -B0)
    s = (q2 * m0 / target_mass) ** (1.0 / 3.0)
    u = anisotropic_gaussian(GaussianParams(tuple(widths / s), target_mass), grid)
    for _ in range(max_iter):
        rep = evaluate(grid, u, cp)
        if rep.B >= 0:
            raise ValueError("rescaled seed lost B < 0 on this grid")
        if abs(rep.mass / target_mass - 1) <= rtol and abs(rep.B + 1) <= rtol:
            break
        q2 = rep.mass / (target_mass * -rep.B)
        s = (q2 * rep.mass / target_mass) ** (1.0 / 3.0)
        # q u(s x) = q s^(-3/2) u^s(x)
        u = math.sqrt(q2) * s**-1.5 * dilate(grid, u, s)
    return u


def large_mass_grid(n, cp, points=64, box=8.0, seed_widths=None):
    """Grid that resolves ``large_mass_sequence(n, cp, ...)``.

    The sequence contracts the seed Gaussian as ``n`` grows, so each member
    gets its own box: half-lengths ``box`` times the member's widths.
    """
    widths = np.asarray(seed_widths if seed_widths is not None else negative_B_widths(cp), dtype=float)
    m0, B0 = _gaussian_mass_B(widths, cp)
    if B0 >= 0:
        raise ValueError(f"seed has B = {B0:.3g} >= 0")
    q2 = m0 / (float(n) ** 2 * -B0)
    s = (q2 * m0 / float(n) ** 2) ** (1.0 / 3.0)
    from .grid import Grid

    return Grid(n=(points,) * 3, L=tuple(float(v) for v in box * widths / s))


def _gaussian_mass_B(widths, cp, n=48):
    """Mass and ``B`` of the unit-amplitude Gaussian with given widths, on a private grid."""
    from .grid import Grid

    L = tuple(9.0 * w for w in widths)
    g = Grid(n=(n, n, n), L=L)
    u = anisotropic_gaussian(GaussianParams(tuple(widths)), g, check=False)
    rep = evaluate(g, u, cp)
    return rep.mass, rep.B


def gn_quotient(report):
    """Nonlocal Gagliardo-Nirenberg quotient ``||u||_2 ||grad u||_2^3 / (-B)``."""
    if report.B >= 0:
        raise ValueError("quotient is defined only for B < 0")
    return math.sqrt(report.mass) * report.A**1.5 / -report.B
