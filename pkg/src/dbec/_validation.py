"""Input validation helpers shared by the public operations."""

from __future__ import annotations

import numbers

import numpy as np


class GridMismatchError(ValueError):
    """Array shape does not match the grid it is paired with."""


class ResolutionError(ValueError):
    """A field or dilation is not resolved by the grid."""


class NumericalError(ArithmeticError):
    """A non-finite value appeared in a functional or field."""


def check_field(u, grid, *, name="u", dtype=complex):
    """Return ``u`` as an array on ``grid``.

    Accepts arrays of shape ``grid.shape`` or flat arrays of length
    ``grid.size`` (row-major, axis order x1, x2, x3).
    """
    arr = np.asarray(u)
    if arr.shape != grid.shape:
        if arr.ndim == 1 and arr.size == grid.size:
            arr = arr.reshape(grid.shape)
        else:
            raise GridMismatchError(
                f"{name} has shape {arr.shape}, grid expects {grid.shape}"
            )
    if dtype is not None:
        arr = arr.astype(dtype, copy=False)
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite entries")
    return arr


def check_real_field(rho, grid, *, name="rho"):
    arr = check_field(rho, grid, name=name, dtype=None)
    if np.iscomplexobj(arr):
        scale = np.max(np.abs(arr)) if arr.size else 0.0
        if np.max(np.abs(arr.imag), initial=0.0) > 1e-12 * max(scale, 1.0):
            raise ValueError(f"{name} must be real-valued")
        arr = arr.real
    return arr.astype(float, copy=False)


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_finite_scalar(value, name):
    value = float(value)
    if not np.isfinite(value):
        raise NumericalError(f"{name} is not finite")
    return value
