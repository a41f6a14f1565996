"""Mass-preserving dilations ``u^t(x) = t^(3/2) u(t x)`` and the fiber map.

Along the dilation the three functionals scale exactly as ``A t^2``,
``B t^3`` and ``C t^6``, so the critical dilation ``t*`` is found from the
scalars ``(A, B, C)`` alone; fields are only touched to apply the result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import ResolutionError, check_field
from .functionals import evaluate


class ResolutionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FiberCoefficients:
    """Scalars fixing the fiber ``t -> E(u^t) = A t^2/2 + B t^3/4 - C t^6/6``."""

    A: float
    B: float
    C: float

    @classmethod
    def from_report(cls, report):
        return cls(report.A, report.B, report.C)

    def y(self, t):
        """``dE(u^t)/dt = t A + 3/4 t^2 B - t^5 C``."""
        return t * self.A + 0.75 * t * t * self.B - t**5 * self.C

    def energy(self, t):
        return 0.5 * t * t * self.A + 0.25 * t**3 * self.B - t**6 * self.C / 6.0

    def virial(self, t):
        """``Q(u^t) = t * y(t)``."""
        return t * self.y(t)


def _reduced(fc, t):
    # y(t)/t: same sign as y on t > 0, no spurious root at 0.
    return fc.A + 0.75 * t * fc.B - t**4 * fc.C


def find_tstar(fc, rtol=1e-15, max_iter=200):
    """Unique ``t* > 0`` with ``y(t*) = 0``.

    Brackets by doubling/halving from ``t = 1`` and then runs a
    safeguarded Newton iteration that falls back to bisection whenever the
    Newton step leaves the bracket.
    """
    A, B, C = float(fc.A), float(fc.B), float(fc.C)
    if not (A > 0 and C > 0) or not math.isfinite(B):
        raise ValueError(f"degenerate fiber: need A > 0 and C > 0, got A={A}, C={C}")
    f = lambda t: _reduced(fc, t)  # noqa: E731
    lo = hi = 1.0
    if f(1.0) > 0:
        while f(hi) > 0:
            lo, hi = hi, 2.0 * hi
    else:
        while f(lo) <= 0:
            hi, lo = lo, 0.5 * lo
    if f(hi) == 0:
        return hi
    t = 0.5 * (lo + hi)
    for _ in range(max_iter):
        ft = f(t)
        if ft == 0:
            return t
        if ft > 0:
            lo = t
        else:
            hi = t
        dft = 0.75 * B - 4.0 * t**3 * C
        step_ok = dft != 0
        if step_ok:
            tn = t - ft / dft
            step_ok = lo < tn < hi
        if not step_ok:
            tn = 0.5 * (lo + hi)
        if abs(tn - t) <= rtol * t or hi - lo <= rtol * hi:
            return tn
        t = tn
    return t


def _axis_dilation(n, L, t):
    """Real ``n x n`` matrix sampling ``t^(1/2) v(t x)`` from samples of v.

    Built from the band-limited interpolant with the Nyquist mode split
    symmetrically so that real inputs stay real.
    """
    h = 2.0 * L / n
    x = -L + h * np.arange(n)
    k = np.arange(-n // 2, n // 2 + 1)
    w = np.ones(k.size)
    w[0] = w[-1] = 0.5
    xi = np.pi * k / L
    keep = np.abs(xi) / t <= np.pi / h * (1 + 1e-12)
    xi, w = xi[keep], w[keep]
    # P[m, j] = t^(-1/2)/n * sum_k w_k cos(xi_k (x_m - x_j / t))
    phase = xi[None, None, :] * (x[:, None, None] - x[None, :, None] / t)
    return (np.cos(phase) @ w) / (n * math.sqrt(t))


def dilation_loss(grid, u, t):
    """Fraction of the mass of ``u`` that a dilation by ``t`` cannot represent.

    For ``t > 1`` this is the spectral mass above ``nyquist / t``; for
    ``t < 1`` the mass outside the shrunken box ``|x_i| < t L_i``.
    """
    u = check_field(u, grid)
    total = np.sum(np.abs(u) ** 2)
    if total == 0 or t == 1.0:
        return 0.0
    if t > 1.0:
        uh = np.fft.fftn(u)
        mask = np.zeros(grid.shape, dtype=bool)
        for axis, (f, h) in enumerate(zip(grid.freq_axes, grid.spacing)):
            shape = [1, 1, 1]
            shape[axis] = -1
            mask |= (np.abs(f) > np.pi / h / t).reshape(shape)
        return float(np.sum(np.abs(uh[mask]) ** 2) / np.sum(np.abs(uh) ** 2))
    # Fraction of each cell lying beyond t*L, so that t -> 1 gives loss -> 0.
    inside = np.ones(grid.shape)
    for axis, (x, Li, h) in enumerate(zip(grid.axes, grid.L, grid.spacing)):
        shape = [1, 1, 1]
        shape[axis] = -1
        beyond = np.clip((np.abs(x) - t * Li) / h + 0.5, 0.0, 1.0)
        inside = inside * (1.0 - beyond).reshape(shape)
    return float(np.sum(np.abs(u) ** 2 * (1.0 - inside)) / total)


def dilate(grid, u, t, *, warn_loss=1e-12, max_loss=1e-6):
    """Mass-preserving dilation ``t^(3/2) u(t x)`` by Fourier interpolation.

    Raises :class:`ResolutionError` if more than ``max_loss`` of the mass
    falls outside what the grid can represent, and warns above
    ``warn_loss``.
    """
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"dilation factor must be positive, got {t}")
    u = check_field(u, grid)
    if t == 1.0:
        return u.copy()
    loss = dilation_loss(grid, u, t)
    if loss > max_loss:
        raise ResolutionError(f"dilation by t={t:.6g} loses {loss:.3g} of the mass")
    if loss > warn_loss:
        warnings.warn(f"dilation by t={t:.6g} loses {loss:.3g} of the mass", ResolutionWarning, stacklevel=2)
    out = u
    for axis, (ni, Li) in enumerate(zip(grid.n, grid.L)):
        P = _axis_dilation(ni, Li, t)
        out = np.moveaxis(np.tensordot(P, out, axes=([1], [axis])), 0, axis)
    return np.ascontiguousarray(out)


def project_to_V(grid, u, cp, *, mass=None, tol=1e-10, max_iter=30, max_loss=1e-6):
    """Dilate ``u`` onto the virial manifold ``Q = 0``.

    Returns ``(u^t, t)``.  The critical dilation is recomputed on the
    dilated field until ``|Q| <= tol (A + C)``, which absorbs the small
    interpolation error of each dilation; ``t`` is the accumulated factor.
    If ``mass`` is given the field is rescaled to it after every dilation.
    """
    u = check_field(u, grid)
    if not np.any(u):
        raise ValueError("cannot project the zero field")
    total = 1.0
    for _ in range(max_iter):
        rep = evaluate(grid, u, cp)
        if mass is not None and rep.mass != mass:
            u = u * math.sqrt(mass / rep.mass)
            rep = evaluate(grid, u, cp)
        if abs(rep.Q) <= tol * (rep.A + rep.C):
            return u, total
        t = find_tstar(FiberCoefficients.from_report(rep))
        u = dilate(grid, u, t, max_loss=max_loss)
        total *= t
    rep = evaluate(grid, u, cp)
    if abs(rep.Q) > 1e3 * tol * (rep.A + rep.C):
        raise ResolutionError(f"projection did not reach Q = 0 (Q = {rep.Q:.3g})")
    return u, total
