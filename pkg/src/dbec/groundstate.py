"""Normalized ground states at prescribed mass on the virial manifold.

The minimizer of ``E`` over ``V(c) = {||u||^2 = c, Q(u) = 0}`` is computed in
two stages:

1. a projected, semi-implicit normalized gradient flow: one backward-Euler
   step in the Laplacian, rescaling to mass ``c``, and a dilation back onto
   ``Q = 0``.  Steps that raise the energy are rejected and retried with
   half the time step.  The projection matters because ``E`` is unbounded
   below on the mass sphere, so the plain flow can collapse.
2. an optional Newton polish of the discrete equations
   ``G(u) + beta u = 0``, ``||u||^2 = c``.  The bordered Jacobian is
   symmetric, so each step is solved by MINRES preconditioned with
   ``(-lap + beta)^-1``.  The flow alone only gets close to its fixed point
   slowly; the polish takes the residual down to round-off in a few steps.

A result counts as converged only if the stationarity residual *and* the
virial ``Q`` are small.  ``Q = 0`` is a property of continuum solutions, so
an under-resolved grid shows up as a converged residual with a large ``Q``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.fft as sfft
from scipy import integrate
from scipy.sparse.linalg import LinearOperator, minres

from ._validation import ResolutionError, check_field, check_positive
from .fibering import ResolutionWarning, project_to_V
from .functionals import CouplingPair, Regime, classify, evaluate, gradient, nonlinear_potential
from .grid import _WORKERS, Grid, inner
from .trialstates import BubbleParams, GaussianParams, anisotropic_gaussian, aubin_talenti_bubble

# Sharp Sobolev constant in 3D, S = 3 (pi/2)^(4/3); confirmed against the
# radial quadrature in ``sobolev_threshold`` before use.
SOBOLEV_CONSTANT = 3.0 * (math.pi / 2.0) ** (4.0 / 3.0)
THRESHOLD = SOBOLEV_CONSTANT**1.5 / 3.0

INIT_TAGS = ("auto", "gaussian", "bubble", "random")


class RegimeError(ValueError):
    """The coupling pair admits no normalized solution to look for."""


class DivergenceError(ArithmeticError):
    """The flow blew up; ``last_state`` holds the last accepted iterate."""

    def __init__(self, message, last_state=None, iteration=None):
        super().__init__(message)
        self.last_state = last_state
        self.iteration = iteration


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class SolverConfig:
    """Everything needed to reproduce one ground-state run."""

    mass: float
    coupling: CouplingPair
    grid: Grid
    dtau: float = 1e-2
    dtau_max: float = 1e-2
    dtau_growth: float = 1.0
    max_iter: int = 2000
    energy_tol: float = 1e-12
    residual_tol: float = 1e-8
    virial_tol: float = 1e-6
    polish: bool = True
    polish_start: float = 1e-2
    newton_max_iter: int = 30
    blowup_cap: float = 1e12
    init: str = "auto"
    widths: tuple = ()
    epsilon: float = 0.5
    seed: int = 0
    control_run: bool = True

    def __post_init__(self):
        check_positive(self.mass, "mass")
        for name in ("dtau", "dtau_max", "energy_tol", "residual_tol", "virial_tol", "polish_start", "blowup_cap"):
            check_positive(getattr(self, name), name)
        if self.dtau_growth < 1.0:
            raise ValueError("dtau_growth must be >= 1")
        if self.dtau_max < self.dtau:
            object.__setattr__(self, "dtau_max", float(self.dtau))
        if int(self.max_iter) != self.max_iter or self.max_iter < 0:
            raise ValueError("max_iter must be a non-negative integer")
        if self.init not in INIT_TAGS:
            raise ValueError(f"unknown initial state {self.init!r}; expected one of {INIT_TAGS}")
        object.__setattr__(self, "widths", tuple(float(w) for w in self.widths))
        if self.widths and len(self.widths) != 3:
            raise ValueError("widths must have three entries")

    def to_dict(self):
        d = asdict(self)
        d["coupling"] = {"lambda1": self.coupling.lambda1, "lambda2": self.coupling.lambda2}
        d["grid"] = self.grid.to_dict()
        d["widths"] = list(self.widths)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["coupling"] = CouplingPair(**d["coupling"])
        d["grid"] = Grid.from_dict(d["grid"])
        d["widths"] = tuple(d.get("widths", ()))
        return cls(**d)


@dataclass
class GroundStateResult:
    u: np.ndarray
    beta: float
    gamma_estimate: float
    report: object
    residual: float
    anisotropy: float
    iterations: int
    converged: bool
    grid: Grid = None
    beta_pohozaev: float = float("nan")
    pohozaev: tuple = ()
    history: list = field(default_factory=list)
    message: str = ""
    control: "GroundStateResult" = None
    coupling: CouplingPair = None

    def summary(self):
        """Scalar diagnostics as a flat dict (no field data)."""
        if self.report is None:
            return {"converged": False, "iterations": self.iterations, "message": self.message}
        p1, p2, p3 = self.pohozaev
        out = {
            "converged": self.converged,
            "iterations": self.iterations,
            "gamma": self.gamma_estimate,
            "beta": self.beta,
            "beta_pohozaev": self.beta_pohozaev,
            "residual": self.residual,
            "q_residual": p3,
            "pohozaev_residual": p1,
            "multiplier_residual": p2,
            "anisotropy": self.anisotropy,
            "coupling": [self.coupling.lambda1, self.coupling.lambda2] if self.coupling else None,
            **self.report.to_dict(),
            "message": self.message,
        }
        if self.control is not None:
            out["control"] = self.control.summary()
        return out


# ------------------------------------------------------------ diagnostics


@dataclass(frozen=True)
class BetaEstimate:
    pohozaev: float
    rayleigh: float

    @property
    def discrepancy(self):
        """Relative disagreement; zero at exact solutions."""
        scale = max(abs(self.pohozaev), abs(self.rayleigh))
        return abs(self.pohozaev - self.rayleigh) / scale if scale > 0 else 0.0


def estimate_beta(grid, u, cp):
    """Multiplier ``-B(u) / (4 ||u||^2)`` from the Pohozaev pair.

    This equals the multiplier of the stationary equation only at exact
    solutions; :func:`beta_estimates` also returns the Rayleigh value
    ``-<G(u), u> / ||u||^2`` for comparison.
    """
    rep = evaluate(grid, u, cp)
    if rep.mass <= 0:
        raise ValueError("beta is undefined for zero mass")
    return -rep.B / (4.0 * rep.mass)


def beta_estimates(grid, u, cp):
    rep = evaluate(grid, u, cp)
    if rep.mass <= 0:
        raise ValueError("beta is undefined for zero mass")
    g = gradient(grid, u, cp)
    return BetaEstimate(-rep.B / (4.0 * rep.mass), -inner(grid, g, check_field(u, grid)) / rep.mass)


def pohozaev_residuals(report, beta):
    """Relative defects of the three identities satisfied by solutions.

    ``A + 3 beta m + 3/2 B - C``, ``4 beta m + B`` and ``Q``, each divided
    by ``A + C``.
    """
    A, B, C, m = report.A, report.B, report.C, report.mass
    scale = A + C
    if scale <= 0:
        raise ValueError("identities are undefined for the zero field")
    return (
        (A + 3.0 * beta * m + 1.5 * B - C) / scale,
        (4.0 * beta * m + B) / scale,
        report.Q / scale,
    )


def anisotropy(grid, u):
    """``sigma_3 / sigma_1`` from centred second moments of ``|u|^2``."""
    u = check_field(u, grid)
    rho = np.abs(u) ** 2
    m = rho.sum()
    if m == 0:
        raise ValueError("anisotropy is undefined for the zero field")
    sig = []
    for axis in (0, 2):
        x = grid.coords[axis]
        mean = np.sum(rho * x) / m
        sig.append(math.sqrt(np.sum(rho * (x - mean) ** 2) / m))
    return sig[1] / sig[0]


def _radial_ratio(R, epsilon=1.0):
    """``||grad W||^2 / ||W||_6^2`` for ``W = (eps/(eps^2+r^2))^(1/2)`` truncated at ``R``."""
    e2 = epsilon * epsilon

    def quad(f):
        # split at the concentration scale so the integrand is resolved for small eps
        pts = [0.0, epsilon, 10.0 * epsilon, R]
        pts = sorted(p for p in set(pts) if p <= R)
        return sum(
            integrate.quad(f, a, b, limit=500, epsabs=0.0, epsrel=1e-13)[0] for a, b in zip(pts[:-1], pts[1:])
        )

    grad = quad(lambda r: 4.0 * math.pi * r**4 * epsilon / (e2 + r * r) ** 3)
    six = quad(lambda r: 4.0 * math.pi * r * r * (epsilon / (e2 + r * r)) ** 3)
    return grad / six ** (1.0 / 3.0)


@dataclass(frozen=True)
class ThresholdCheck:
    quadrature: float
    closed_form: float
    samples: tuple

    @property
    def agreement(self):
        return abs(self.quadrature - self.closed_form) / self.closed_form


def sobolev_check(radii=(50.0, 100.0, 200.0)):
    """Sobolev constant by truncated radial quadrature, Richardson-extrapolated in ``R``.

    Truncation leaves tails with expansions in odd powers of ``1/R``; the
    three radii eliminate the ``1/R`` and ``1/R^3`` terms.
    """
    R = np.asarray(radii, dtype=float)
    if R.size != 3 or not np.allclose(R[1:] / R[:-1], 2.0):
        raise ValueError("need three radii in ratio 2")
    ratios = np.array([_radial_ratio(r) for r in R])
    # fit S + a/R + b/R^3 through the three samples
    M = np.column_stack([np.ones(3), 1.0 / R, 1.0 / R**3])
    S = float(np.linalg.solve(M, ratios)[0])
    return ThresholdCheck(S, SOBOLEV_CONSTANT, tuple(float(x) for x in ratios))


def sobolev_threshold(grid=None, tol=1e-6):
    """The threshold ``S^(3/2)/3``.

    The Sobolev constant is obtained by radial quadrature and compared with
    the closed form; disagreement beyond ``tol`` raises.  The value does not
    depend on any grid; ``grid`` is accepted for interface symmetry only.
    """
    check = sobolev_check()
    if not check.agreement <= tol:
        raise ArithmeticError(
            f"Sobolev quadrature {check.quadrature!r} disagrees with closed form {check.closed_form!r}"
        )
    return THRESHOLD


# ---------------------------------------------------------- initial data


def _default_widths(cfg):
    """Gaussian widths already on the virial manifold, kept inside the grid.

    The seed shape is radial, or prolate along x3 (oblate) for positive
    (negative) ``lambda2``; its size is the critical dilation of that shape
    at the target mass, computed on a private grid.
    """
    from .fibering import FiberCoefficients, find_tstar
    from .trialstates import _gaussian_mass_B

    shape = np.ones(3)
    l2 = cfg.coupling.lambda2
    if cfg.init == "auto" and l2 != 0.0:
        if l2 > 0:
            shape[2] = 1.5
        else:
            shape[:2] = 1.5
    L = tuple(9.0 * s for s in shape)
    g = Grid(n=48, L=L)
    u = anisotropic_gaussian(GaussianParams(tuple(shape), cfg.mass), g, check=False)
    rep = evaluate(g, u, cfg.coupling)
    widths = shape / find_tstar(FiberCoefficients.from_report(rep))
    lo = 2.0 * np.asarray(cfg.grid.spacing)
    hi = np.asarray(cfg.grid.L) / 7.0
    return tuple(float(w) for w in np.clip(widths, lo, np.maximum(lo, hi)))


def initial_state(cfg):
    """Initial field for ``cfg`` (real, mass ``cfg.mass``)."""
    g = cfg.grid
    if cfg.init == "bubble":
        return aubin_talenti_bubble(BubbleParams(cfg.epsilon, cfg.mass, 0.25 * min(g.L), 0.5 * min(g.L)), g).real
    widths = cfg.widths or _default_widths(cfg)
    u = anisotropic_gaussian(GaussianParams(widths, cfg.mass), g, check=False).real
    if cfg.init == "random":
        rng = np.random.default_rng(cfg.seed)
        u = u * (1.0 + 0.1 * rng.standard_normal(g.shape))
        u *= math.sqrt(cfg.mass / (np.sum(u * u) * g.dV))
    return u


# ------------------------------------------------------ real-field kernels


class _RealOps:
    """Real-to-complex FFT kernels for real fields on one grid."""

    def __init__(self, grid, cp):
        self.grid, self.cp = grid, cp
        half = grid.n[2] // 2 + 1
        self.xi2 = np.ascontiguousarray(grid.xi2[:, :, :half])
        self.kdip = np.ascontiguousarray(grid.dipolar_multiplier[:, :, :half])
        self.shape = grid.shape

    def fourier(self, v, mult):
        return sfft.irfftn(mult * sfft.rfftn(v, workers=_WORKERS), s=self.shape, workers=_WORKERS)

    def potential(self, u):
        rho = u * u
        pot = self.cp.lambda1 * rho - rho * rho
        if self.cp.lambda2 != 0.0:
            pot = pot + self.cp.lambda2 * self.fourier(rho, self.kdip)
        return pot

    def G(self, u, pot=None):
        if pot is None:
            pot = self.potential(u)
        return self.fourier(u, self.xi2) + pot * u

    def hessian(self, u, pot, v):
        """Second variation of E at real ``u`` applied to real ``v``."""
        cp = self.cp
        uv = u * v
        rho = u * u
        out = self.fourier(v, self.xi2) + pot * v + u * (2.0 * cp.lambda1 * uv - 4.0 * rho * uv)
        if cp.lambda2 != 0.0:
            out += 2.0 * cp.lambda2 * u * self.fourier(uv, self.kdip)
        return out


def _newton_polish(grid, u, cp, mass, tol, max_iter, record):
    """Newton iteration on ``G(u) + beta u = 0``, ``||u||^2 = mass`` for real ``u``.

    Works in L2-scaled coordinates ``w = sqrt(dV) v``, where the bordered
    Jacobian ``[[H + beta, e], [e^T, 0]]`` (``e`` the unit vector along u)
    is symmetric.  Returns ``(u, beta, residual)``.
    """
    ops = _RealOps(grid, cp)
    dV = grid.dV
    sq = math.sqrt(dV)
    N = grid.size

    def state(u):
        pot = ops.potential(u)
        g = ops.G(u, pot)
        m = float(np.sum(u * u) * dV)
        beta = -float(np.sum(g * u) * dV) / m
        return pot, g, m, beta

    def merit(u, beta, g, m):
        r = (g + beta * u) * sq
        norm_u = math.sqrt(m)
        return float(np.sum(r * r)) + ((m - mass) / (2.0 * norm_u)) ** 2

    pot, g, m, beta = state(u)
    for it in range(max_iter):
        r = g + beta * u
        res = math.sqrt(float(np.sum(r * r)) * dV / m)
        record(u, res)
        if res <= 1e-2 * tol:
            break
        norm_u = math.sqrt(m)
        e = (u * sq / norm_u).ravel()
        shift = max(beta, 1e-12)
        precond_mult = 1.0 / (ops.xi2 + shift)

        def matvec(x, u=u, pot=pot, beta=beta, e=e):
            w, s = x[:N], x[N]
            v = (w / sq).reshape(grid.shape)
            top = (ops.hessian(u, pot, v) + beta * v).ravel() * sq + s * e
            return np.append(top, e @ w)

        def psolve(x):
            w = ops.fourier(x[:N].reshape(grid.shape), precond_mult).ravel()
            return np.append(w, x[N])

        J = LinearOperator((N + 1, N + 1), matvec=matvec, dtype=float)
        P = LinearOperator((N + 1, N + 1), matvec=psolve, dtype=float)
        rhs = np.append(-(r.ravel() * sq), (mass - m) / (2.0 * norm_u))
        eta = min(1e-2, max(res, 1e-10))
        x, _ = minres(J, rhs, M=P, rtol=eta, maxiter=500)
        du = (x[:N] / sq).reshape(grid.shape)
        dbeta = x[N] / norm_u
        phi0 = merit(u, beta, g, m)
        alpha = 1.0
        while alpha >= 1.0 / 64:
            un = u + alpha * du
            pn, gn, mn, _ = state(un)
            bn = beta + alpha * dbeta
            if merit(un, bn, gn, mn) < (1.0 - 1e-4 * alpha) * phi0:
                break
            alpha *= 0.5
        else:
            break
        u, pot, g, m = un, pn, gn, mn
        beta = -float(np.sum(g * u) * dV) / m
    u = u * math.sqrt(mass / float(np.sum(u * u) * dV))
    pot, g, m, beta = state(u)
    res = math.sqrt(float(np.sum((g + beta * u) ** 2)) * dV / m)
    return u, beta, res


# ------------------------------------------------------------- the flow


def _as_real(u):
    """Drop a global phase; return a real array if the field is real up to it."""
    u = np.asarray(u)
    if not np.iscomplexobj(u):
        return u.astype(float)
    k = np.argmax(np.abs(u))
    phase = u.flat[k] / abs(u.flat[k]) if u.flat[k] != 0 else 1.0
    v = u / phase
    if np.max(np.abs(v.imag)) <= 1e-13 * np.max(np.abs(v)):
        return np.ascontiguousarray(v.real)
    return u


def _require_unstable(cp):
    rc = classify(cp)
    if rc.tag is Regime.STABLE:
        raise RegimeError(
            f"coupling ({cp.lambda1}, {cp.lambda2}) is in the stable regime: "
            "the stationary equation has no non-trivial finite-energy solution"
        )
    if rc.tag is Regime.BOUNDARY:
        raise RegimeError(f"coupling ({cp.lambda1}, {cp.lambda2}) lies on the regime boundary")


def _flow_step(grid, u, cp, dtau):
    pot = nonlinear_potential(grid, u, cp)
    rhs = u - dtau * pot * u
    if np.iscomplexobj(u):
        return sfft.ifftn(sfft.fftn(rhs, workers=_WORKERS) / (1.0 + dtau * grid.xi2), workers=_WORKERS)
    half = grid.n[2] // 2 + 1
    denom = 1.0 + dtau * grid.xi2[:, :, :half]
    return sfft.irfftn(sfft.rfftn(rhs, workers=_WORKERS) / denom, s=grid.shape, workers=_WORKERS)


def _finish(cfg, u, iterations, history, message, converged_flow):
    grid, cp = cfg.grid, cfg.coupling
    rep = evaluate(grid, u, cp)
    g = gradient(grid, u, cp)
    uc = check_field(u, grid)
    beta = -inner(grid, g, uc) / rep.mass
    res = float(np.sqrt(inner(grid, g + beta * uc, g + beta * uc) / rep.mass))
    poh = pohozaev_residuals(rep, beta)
    converged = converged_flow and res <= cfg.residual_tol and abs(poh[2]) <= cfg.virial_tol
    if converged_flow and not converged and not message:
        message = (
            "stationary on the grid but Q = {:.3g} (A + C): the state is not resolved".format(poh[2])
            if res <= cfg.residual_tol
            else f"residual {res:.3g} above tolerance"
        )
    return GroundStateResult(
        u=u,
        beta=beta,
        gamma_estimate=rep.E,
        report=rep,
        residual=res,
        anisotropy=anisotropy(grid, u),
        iterations=iterations,
        converged=bool(converged),
        grid=grid,
        beta_pohozaev=-rep.B / (4.0 * rep.mass),
        pohozaev=poh,
        history=history,
        message=message,
        coupling=cp,
    )


def minimize(cfg, u0=None, *, callback=None):
    """Ground state at mass ``cfg.mass`` by projected flow plus Newton polish.

    ``u0`` overrides the configured initial state; it is rescaled to the
    target mass.  Raises :class:`RegimeError` unless the coupling is in the
    unstable regime and :class:`DivergenceError` if ``C`` exceeds
    ``cfg.blowup_cap``.
    """
    cp, grid, c = cfg.coupling, cfg.grid, float(cfg.mass)
    _require_unstable(cp)
    u = initial_state(cfg) if u0 is None else _as_real(check_field(u0, grid, dtype=None))
    u = u * math.sqrt(c / (np.sum(np.abs(u) ** 2) * grid.dV))
    history = []
    try:
        u, _ = project_to_V(grid, u, cp, mass=c)
    except ResolutionError as exc:
        # The fiber maximum of the seed lies outside what the grid resolves;
        # report the unprojected seed rather than a fabricated state.
        return _finish(cfg, _as_real(u), 0, history, f"initial state cannot be projected: {exc}", False)
    u = _as_real(u)

    last_ok = [None]

    def record(it, v, rep, res):
        if rep.C > cfg.blowup_cap:
            raise DivergenceError(
                f"C = {rep.C:.3g} exceeded the cap {cfg.blowup_cap:.3g} at iteration {it}",
                last_state=last_ok[0],
                iteration=it,
            )
        last_ok[0] = v
        row = (it, rep.E, rep.Q, res, rep.mass)
        history.append(row)
        if callback is not None:
            callback(row)

    def diagnostics(v):
        rep = evaluate(grid, v, cp)
        g = gradient(grid, v, cp)
        vc = check_field(v, grid)
        beta = -inner(grid, g, vc) / rep.mass
        res = float(np.sqrt(inner(grid, g + beta * vc, g + beta * vc) / rep.mass))
        return rep, res

    rep, res = diagnostics(u)
    dtau = float(cfg.dtau)
    dtau_min = 1e-12 * dtau
    it = 0
    message = ""
    record(it, u, rep, res)
    while it < cfg.max_iter and res > cfg.residual_tol:
        if cfg.polish and res <= cfg.polish_start and not np.iscomplexobj(u):
            break
        slack = 1e-12 * (rep.A + rep.C)
        while True:
            v = _flow_step(grid, u, cp, dtau)
            v = v * math.sqrt(c / (np.sum(np.abs(v) ** 2) * grid.dV))
            try:
                v, _ = project_to_V(grid, v, cp, mass=c)
            except ResolutionError:
                v = None
            if v is not None:
                rep_v = evaluate(grid, v, cp)
                if rep_v.C > cfg.blowup_cap:
                    raise DivergenceError(
                        f"C = {rep_v.C:.3g} exceeded the cap {cfg.blowup_cap:.3g} at iteration {it + 1}",
                        last_state=u,
                        iteration=it + 1,
                    )
                if rep_v.E <= rep.E + slack:
                    break
            dtau *= 0.5
            if dtau < dtau_min:
                message = "time step underflow: no energy-decreasing step"
                break
        if message:
            break
        it += 1
        gain = rep.E - rep_v.E
        u = _as_real(v)
        rep, res = diagnostics(u)
        record(it, u, rep, res)
        dtau = min(dtau * cfg.dtau_growth, cfg.dtau_max)
        if 0 <= gain <= cfg.energy_tol * abs(rep.E):
            if not cfg.polish:
                message = "energy stalled"
            break
    if cfg.polish and not np.iscomplexobj(u) and res > cfg.residual_tol:

        def rec(v, r):
            nonlocal it
            it += 1
            record(it, v, evaluate(grid, v, cp), r)

        u, _, _ = _newton_polish(grid, u, cp, c, cfg.residual_tol, cfg.newton_max_iter, rec)
        message = ""
    elif it >= cfg.max_iter and res > cfg.residual_tol and not message:
        message = f"no convergence in {cfg.max_iter} iterations"
    result = _finish(cfg, u, it, history, message, converged_flow=not message)
    if cfg.control_run and cp.lambda2 != 0.0 and u0 is None:
        result.control = _control(cfg, result.report)
    return result


def control_coupling(cp, report=None):
    """Contact-only pair for the radial control run.

    With a report of the main state (``B < 0``) the control uses that
    state's effective contact coupling ``B / ||u||_4^4``, so both states
    have comparable size and fit the same grid.  Otherwise it uses the most
    attractive value ``min(d+, d-)`` that ``lambda1 + lambda2 K^`` takes.
    """
    if report is not None and report.B < 0 and report.quartic > 0:
        return CouplingPair(report.B / report.quartic, 0.0)
    return CouplingPair(min(cp.d_plus, cp.d_minus), 0.0)


def _control(cfg, report):
    ccfg = replace(
        cfg, coupling=control_coupling(cfg.coupling, report), init="gaussian", widths=(), control_run=False
    )
    try:
        return minimize(ccfg)
    except (RegimeError, DivergenceError, ResolutionError) as exc:
        return GroundStateResult(
            None, float("nan"), float("nan"), None, float("nan"), float("nan"), 0, False,
            grid=cfg.grid, message=f"control run failed: {exc}",
        )


# --------------------------------------------------------------- sweeps


@dataclass
class GammaCurve:
    rows: list
    threshold: float = THRESHOLD
    margin: float = 1e-3

    @property
    def masses(self):
        return [r["c"] for r in self.rows]

    @property
    def gammas(self):
        return [r["gamma"] for r in self.rows]

    def c_star_bracket(self):
        """``(lo, hi)``: ``hi`` is the smallest converged mass with gamma below
        ``threshold - margin``, ``lo`` the largest mass below ``hi`` that is
        not (``None`` if there is none).  ``(None, None)`` if no row qualifies.
        """
        below = [r["c"] for r in self.rows if r["converged"] and r["gamma"] < self.threshold - self.margin]
        if not below:
            return None, None
        hi = min(below)
        lower = [r["c"] for r in self.rows if r["c"] < hi]
        return (max(lower) if lower else None), hi

    @property
    def c_star(self):
        return self.c_star_bracket()[1]


def _row(c, res):
    return {
        "c": float(c),
        "gamma": res.gamma_estimate,
        "beta": res.beta,
        "anisotropy": res.anisotropy,
        "converged": bool(res.converged),
    }


def _failed_row(c):
    return {"c": float(c), "gamma": float("nan"), "beta": float("nan"), "anisotropy": float("nan"), "converged": False}


def _run_one(cfg):
    try:
        return minimize(cfg)
    except (DivergenceError, ResolutionError):
        return None


def sweep_gamma(masses, base, *, jobs=1, margin=1e-3, results=None):
    """One minimization per mass, warm-started by rescaling the previous state.

    A row whose warm start cannot be projected onto the grid (or fails
    otherwise) is retried from the configured cold start.

    With ``jobs > 1`` rows run in parallel processes from cold starts.
    ``results``, if a list, receives every :class:`GroundStateResult`.
    """
    masses = [float(c) for c in masses]
    if not masses:
        raise ValueError("need at least one mass")
    if any(b <= a for a, b in zip(masses[:-1], masses[1:])) or masses[0] <= 0:
        raise ValueError("masses must be positive and strictly increasing")
    _require_unstable(base.coupling)
    base = replace(base, control_run=False)
    cfgs = [replace(base, mass=c) for c in masses]
    rows = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_run_one, cfgs))
    else:
        outs = []
        prev = None
        for cfg in cfgs:
            out = None
            if prev is not None:
                try:
                    out = minimize(cfg, prev.u * math.sqrt(cfg.mass / prev.report.mass))
                except (DivergenceError, ResolutionError):
                    out = None
                if out is not None and out.iterations == 0 and not out.converged:
                    out = None  # the rescaled state could not be projected; start afresh
            if out is None:
                out = _run_one(cfg)
            outs.append(out)
            if out is not None:
                prev = out
    for c, out in zip(masses, outs):
        rows.append(_failed_row(c) if out is None else _row(c, out))
        if results is not None:
            results.append(out)
    return GammaCurve(rows, THRESHOLD, margin)


__all__ = [
    "SOBOLEV_CONSTANT",
    "THRESHOLD",
    "BetaEstimate",
    "DivergenceError",
    "GammaCurve",
    "GroundStateResult",
    "RegimeError",
    "ResolutionWarning",
    "SolverConfig",
    "anisotropy",
    "beta_estimates",
    "control_coupling",
    "estimate_beta",
    "initial_state",
    "minimize",
    "pohozaev_residuals",
    "sobolev_check",
    "sobolev_threshold",
    "sweep_gamma",
]
