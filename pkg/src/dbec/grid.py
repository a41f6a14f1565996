"""Periodic box, scaled Fourier transforms and the dipolar multiplier.

The box ``[-L1, L1) x [-L2, L2) x [-L3, L3)`` stands in for R^3.  The
forward transform carries the cell volume and a phase for the box offset,
so that ``forward_transform(u)`` approximates the continuum transform
``int u(x) exp(-i xi.x) dx`` and integrals computed in Fourier space need
no hidden factors.  Spectral arrays are stored in FFT order (zero
frequency first).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from ._validation import GridMismatchError, check_field, check_real_field

FOUR_PI_THIRDS = 4.0 * np.pi / 3.0

# pocketfft with a single worker: results do not depend on thread count.
_WORKERS = 1


def _triple(value, cast):
    if np.ndim(value) == 0:
        return (cast(value),) * 3
    out = tuple(cast(v) for v in value)
    if len(out) != 3:
        raise ValueError(f"expected 3 entries, got {len(out)}")
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)`` per axis.

    Parameters
    ----------
    n : int or tuple of 3 ints
        Points per axis; even and at least 8.
    L : float or tuple of 3 floats
        Box half-lengths.
    dipole_cutoff : float, optional
        Radius ``R <= min(L)`` beyond which the dipolar kernel is switched
        off.  Periodic images of the state then no longer interact, which
        is exact for densities supported in a ball of diameter ``R``.
        ``None`` (default) uses the untruncated multiplier.
    """

    n: tuple
    L: tuple
    dipole_cutoff: float = None

    def __post_init__(self):
        n = _triple(self.n, int)
        L = _triple(self.L, float)
        for ni in n:
            if ni < 8 or ni % 2:
                raise ValueError(f"points per axis must be even and >= 8, got {ni}")
        for Li in L:
            if not np.isfinite(Li) or Li <= 0:
                raise ValueError(f"box half-lengths must be positive, got {Li}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", L)
        if self.dipole_cutoff is not None:
            R = float(self.dipole_cutoff)
            if not 0 < R <= min(L):
                raise ValueError(f"dipole cutoff must lie in (0, min(L)], got {R}")
            object.__setattr__(self, "dipole_cutoff", R)

    @classmethod
    def cube(cls, n, L, dipole_cutoff=None):
        return cls(n=(n, n, n), L=(L, L, L), dipole_cutoff=dipole_cutoff)

    @classmethod
    def from_dict(cls, d):
        return cls(n=tuple(d["n"]), L=tuple(d["L"]), dipole_cutoff=d.get("dipole_cutoff"))

    def to_dict(self):
        return {"n": list(self.n), "L": list(self.L), "dipole_cutoff": self.dipole_cutoff}

    @property
    def shape(self):
        return self.n

    @property
    def size(self):
        return self.n[0] * self.n[1] * self.n[2]

    @property
    def spacing(self):
        return tuple(2.0 * Li / ni for Li, ni in zip(self.L, self.n))

    @property
    def dV(self):
        h = self.spacing
        return h[0] * h[1] * h[2]

    @property
    def dXi(self):
        """Volume of one cell of the frequency lattice."""
        return float(np.prod([np.pi / Li for Li in self.L]))

    @property
    def volume(self):
        return float(np.prod([2.0 * Li for Li in self.L]))

    @cached_property
    def axes(self):
        """Sample coordinates per axis, ``-L + h*j``."""
        return tuple(
            _frozen(-Li + (2.0 * Li / ni) * np.arange(ni)) for Li, ni in zip(self.L, self.n)
        )

    @cached_property
    def freq_axes(self):
        """Frequencies ``pi*k/L`` per axis in FFT order, ``k = -n/2 .. n/2-1``."""
        return tuple(
            _frozen(2.0 * np.pi * sfft.fftfreq(ni, d=2.0 * Li / ni))
            for Li, ni in zip(self.L, self.n)
        )

    @property
    def coords(self):
        """Open-mesh coordinates broadcastable to ``shape``."""
        x1, x2, x3 = self.axes
        return x1[:, None, None], x2[None, :, None], x3[None, None, :]

    @property
    def freqs(self):
        k1, k2, k3 = self.freq_axes
        return k1[:, None, None], k2[None, :, None], k3[None, None, :]

    @cached_property
    def r2(self):
        x1, x2, x3 = self.coords
        return _frozen(x1**2 + x2**2 + x3**2)

    @cached_property
    def xi2(self):
        k1, k2, k3 = self.freqs
        return _frozen(k1**2 + k2**2 + k3**2)

    @cached_property
    def _phase(self):
        # exp(i xi L) = (-1)^k per axis, from the box offset x_0 = -L.
        signs = [
            np.where(np.round(f * Li / np.pi).astype(int) % 2 == 0, 1.0, -1.0)
            for f, Li in zip(self.freq_axes, self.L)
        ]
        return _frozen(signs[0][:, None, None] * signs[1][None, :, None] * signs[2][None, None, :])

    @cached_property
    def dipolar_multiplier(self):
        """Fourier multiplier of the dipolar kernel, zero at the origin."""
        k1, k2, k3 = self.freqs
        xi2 = self.xi2
        with np.errstate(invalid="ignore", divide="ignore"):
            m = FOUR_PI_THIRDS * (2.0 * k3**2 - k1**2 - k2**2) / xi2
        m[xi2 == 0.0] = 0.0
        np.clip(m, -FOUR_PI_THIRDS, 2.0 * FOUR_PI_THIRDS, out=m)
        if self.dipole_cutoff is not None:
            m *= _cutoff_factor(np.sqrt(xi2) * self.dipole_cutoff)
        return _frozen(m)

    def check(self, u, name="u"):
        return check_field(u, self, name=name)


def _cutoff_factor(x):
    """Transform of the kernel restricted to ``|x| < R`` relative to the full one.

    ``1 + 3 cos(x)/x^2 - 3 sin(x)/x^3`` with ``x = R |xi|``; a Taylor
    series replaces the cancelling closed form near zero.
    """
    out = np.empty_like(x)
    small = x < 1e-2
    xs = x[small]
    out[small] = xs**2 / 10.0 - xs**4 / 280.0
    xl = x[~small]
    out[~small] = 1.0 + 3.0 * np.cos(xl) / xl**2 - 3.0 * np.sin(xl) / xl**3
    return out


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _check_spectral(uh, grid):
    arr = np.asarray(uh)
    if arr.shape != grid.shape:
        raise GridMismatchError(f"spectral array has shape {arr.shape}, grid expects {grid.shape}")
    return arr


def forward_transform(grid, u):
    """Approximate ``int u(x) exp(-i xi.x) dx`` on the frequency lattice."""
    u = check_field(u, grid)
    return grid.dV * grid._phase * sfft.fftn(u, workers=_WORKERS)


def inverse_transform(grid, uh):
    """Inverse of :func:`forward_transform`, ``(2 pi)^-3 sum uh exp(i xi.x) dXi``."""
    uh = _check_spectral(uh, grid)
    return sfft.ifftn(uh * grid._phase, workers=_WORKERS) / grid.dV


def apply_multiplier(grid, u, multiplier):
    """Apply a Fourier multiplier. The box phase cancels, so plain FFTs suffice."""
    return sfft.ifftn(multiplier * sfft.fftn(u, workers=_WORKERS), workers=_WORKERS)


def laplacian(grid, u):
    u = check_field(u, grid)
    return apply_multiplier(grid, u, -grid.xi2)


def dipolar_convolve(grid, rho):
    """``K * rho`` for a real density, computed as the inverse transform of ``K^ rho^``."""
    rho = check_real_field(rho, grid)
    return _dipolar_potential(grid, rho)


def _dipolar_potential(grid, rho):
    out = sfft.ifftn(grid.dipolar_multiplier * sfft.fftn(rho, workers=_WORKERS), workers=_WORKERS)
    return out.real


def integrate(grid, f):
    """Riemann sum ``sum f dV`` (spectrally accurate for decaying smooth f)."""
    return np.sum(f) * grid.dV


def inner(grid, f, g):
    """Real L2 inner product ``Re int conj(f) g dx``."""
    return float(np.sum(f.real * g.real + f.imag * g.imag) * grid.dV)


def norm2(grid, f):
    return float(np.sqrt(inner(grid, f, f)))
