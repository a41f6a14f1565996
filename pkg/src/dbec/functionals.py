"""Energy functionals, the energy gradient and coupling-regime classification.

For a state ``u`` and couplings ``(lambda1, lambda2)``::

    A = ||grad u||_2^2
    B = lambda1 ||u||_4^4 + lambda2 int (K * |u|^2) |u|^2
    C = ||u||_6^6
    E = A/2 + B/4 - C/6
    Q = A + 3B/4 - C

All integrals are evaluated on the grid, with ``A`` and the dipolar part
of ``B`` computed in Fourier space.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from ._validation import NumericalError, check_field
from .grid import FOUR_PI_THIRDS, _WORKERS, _dipolar_potential, inner, norm2


@dataclass(frozen=True)
class CouplingPair:
    """Contact coupling ``lambda1`` and dipolar coupling ``lambda2``."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        for name in ("lambda1", "lambda2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @property
    def d_plus(self):
        return self.lambda1 - FOUR_PI_THIRDS * self.lambda2

    @property
    def d_minus(self):
        return self.lambda1 + 2.0 * FOUR_PI_THIRDS * self.lambda2

    @property
    def regime(self):
        return classify(self).tag


class Regime(str, enum.Enum):
    UNSTABLE = "unstable"
    STABLE = "stable"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class RegimeClass:
    tag: Regime
    d_plus: float
    d_minus: float

    def to_dict(self):
        return {"regime": self.tag.value, "d_plus": self.d_plus, "d_minus": self.d_minus}


def classify(cp):
    """Classify a coupling pair as unstable, stable or on the boundary.

    With ``lambda2 > 0`` the sign of ``d_plus`` decides, with ``lambda2 < 0``
    the sign of ``d_minus``; ``lambda2 == 0`` falls back to the sign of
    ``lambda1``.  Zero discriminants are reported as ``BOUNDARY``.
    """
    l1, l2 = cp.lambda1, cp.lambda2
    dp, dm = cp.d_plus, cp.d_minus
    if l2 > 0:
        d = dp
    elif l2 < 0:
        d = dm
    else:
        d = l1
    if d < 0:
        tag = Regime.UNSTABLE
    elif d > 0:
        tag = Regime.STABLE
    else:
        tag = Regime.BOUNDARY
    return RegimeClass(tag, dp, dm)


def format_float(x):
    """17 significant digits, locale independent."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class FunctionalReport:
    mass: float
    A: float
    quartic: float
    dipolar: float
    B: float
    C: float

    @property
    def E(self):
        return 0.5 * self.A + 0.25 * self.B - self.C / 6.0

    @property
    def Q(self):
        return self.A + 0.75 * self.B - self.C

    def to_dict(self):
        return {
            "mass": self.mass,
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "E": self.E,
            "Q": self.Q,
        }

    def to_json(self):
        items = ", ".join(f'"{k}": {format_float(v)}' for k, v in self.to_dict().items())
        return "{" + items + "}"

    @classmethod
    def from_json(cls, text, quartic=float("nan"), dipolar=float("nan")):
        d = json.loads(text)
        return cls(d["mass"], d["A"], quartic, dipolar, d["B"], d["C"])


def _finite(value, name):
    value = float(value)
    if not math.isfinite(value):
        raise NumericalError(f"functional {name} is not finite")
    return value


def evaluate(grid, u, cp):
    """Evaluate mass, A, B, C (and E, Q) for ``u`` under couplings ``cp``."""
    u = check_field(u, grid)
    weight = grid.dV / grid.size
    uh = sfft.fftn(u, workers=_WORKERS)
    A = np.sum(grid.xi2 * (uh.real**2 + uh.imag**2)) * weight
    rho = u.real**2 + u.imag**2
    mass = np.sum(rho) * grid.dV
    quartic = np.sum(rho * rho) * grid.dV
    C = np.sum(rho * rho * rho) * grid.dV
    rh = sfft.fftn(rho, workers=_WORKERS)
    dipolar = np.sum(grid.dipolar_multiplier * (rh.real**2 + rh.imag**2)) * weight
    B = cp.lambda1 * quartic + cp.lambda2 * dipolar
    return FunctionalReport(
        mass=_finite(mass, "mass"),
        A=_finite(A, "A"),
        quartic=_finite(quartic, "quartic"),
        dipolar=_finite(dipolar, "dipolar"),
        B=_finite(B, "B"),
        C=_finite(C, "C"),
    )


def energy(grid, u, cp):
    return evaluate(grid, u, cp).E


def nonlinear_potential(grid, u, cp):
    """``lambda1 |u|^2 + lambda2 K*|u|^2 - |u|^4``, the multiplier of u in the gradient."""
    rho = u.real**2 + u.imag**2
    pot = cp.lambda1 * rho - rho * rho
    if cp.lambda2 != 0.0:
        pot = pot + cp.lambda2 * _dipolar_potential(grid, rho)
    return pot


def gradient(grid, u, cp):
    """L2 gradient of E: ``-lap u + lambda1|u|^2 u + lambda2 (K*|u|^2) u - |u|^4 u``."""
    u = check_field(u, grid)
    kinetic = sfft.ifftn(grid.xi2 * sfft.fftn(u, workers=_WORKERS), workers=_WORKERS)
    g = kinetic + nonlinear_potential(grid, u, cp) * u
    if not np.all(np.isfinite(g)):
        raise NumericalError("gradient is not finite")
    return g


def rayleigh_beta(grid, u, cp, g=None):
    """Multiplier minimising ``||G(u) + beta u||`` over beta."""
    u = check_field(u, grid)
    if g is None:
        g = gradient(grid, u, cp)
    m = inner(grid, u, u)
    if m <= 0:
        raise ValueError("zero field has no multiplier")
    return -inner(grid, g, u) / m


def residual(grid, u, beta, cp, g=None):
    """Relative stationarity residual ``||G(u) + beta u|| / ||u||``."""
    u = check_field(u, grid)
    nu = norm2(grid, u)
    if nu == 0.0:
        raise ValueError("residual is undefined for the zero field")
    if g is None:
        g = gradient(grid, u, cp)
    return norm2(grid, g + float(beta) * u) / nu
