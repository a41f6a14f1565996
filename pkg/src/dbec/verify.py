"""Property suites behind ``dbec verify``.

Each suite returns a list of :class:`Check` rows; a suite passes when every
row does.  Sizes are chosen so that each suite finishes in well under a
minute, except ``pohozaev`` without a stored field, which has to compute a
resolved ground state first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fibering import FiberCoefficients, dilate, find_tstar, project_to_V
from .functionals import CouplingPair, Regime, classify, evaluate, gradient
from .grid import FOUR_PI_THIRDS, Grid, forward_transform, inverse_transform
from .groundstate import THRESHOLD, SolverConfig, minimize, pohozaev_residuals, sobolev_check
from .trialstates import BubbleParams, GaussianParams, anisotropic_gaussian, bubble_fiber, negative_B_widths


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _chk(name, passed, detail):
    return Check(name, bool(passed), detail)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# -------------------------------------------------------------- fourier


def suite_fourier(seed=0):
    rng = np.random.default_rng(seed)
    g = Grid.cube(32, 6.0)
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    rt = np.max(np.abs(inverse_transform(g, forward_transform(g, u)) - u)) / np.max(np.abs(u))
    uh = forward_transform(g, u)
    lhs = np.sum(np.abs(u) ** 2) * g.dV
    rhs = np.sum(np.abs(uh) ** 2) * g.dXi / (2 * np.pi) ** 3
    x1, x2, x3 = g.coords
    gauss = np.exp(-0.5 * (x1**2 + x2**2 + x3**2))
    k1, k2, k3 = g.freqs
    exact = (2 * np.pi) ** 1.5 * np.exp(-0.5 * (k1**2 + k2**2 + k3**2))
    gt = np.max(np.abs(forward_transform(g, gauss) - exact)) / np.max(exact)
    return [
        _chk("round trip", rt <= 1e-12, f"max rel err {rt:.2e}"),
        _chk("Plancherel", _rel(lhs, rhs) <= 1e-12, f"rel err {_rel(lhs, rhs):.2e}"),
        _chk("Gaussian transform", gt <= 1e-8, f"max rel err {gt:.2e}"),
    ]


# ----------------------------------------------------------- functionals


def suite_functionals(seed=0):
    rng = np.random.default_rng(seed)
    out = []
    g = Grid.cube(48, 8.0)
    gauss = np.pi**-0.75 * np.exp(-0.5 * g.r2)
    rep = evaluate(g, gauss, CouplingPair(1.0, 0.0))
    for name, got, want in (
        ("Gaussian mass", rep.mass, 1.0),
        ("Gaussian A", rep.A, 1.5),
        ("Gaussian quartic", rep.B, (2 * np.pi) ** -1.5),
        ("Gaussian C", rep.C, 3**-1.5 * np.pi**-3),
    ):
        out.append(_chk(name, _rel(got, want) <= 1e-9, f"rel err {_rel(got, want):.2e}"))
    m = g.dipolar_multiplier
    out.append(
        _chk(
            "multiplier range",
            m.min() >= -FOUR_PI_THIRDS and m.max() <= 2 * FOUR_PI_THIRDS,
            f"[{m.min():.6f}, {m.max():.6f}]",
        )
    )
    worst = 0.0
    r = np.sqrt(g.r2)
    for _ in range(10):
        a, b = rng.uniform(0.5, 1.5, 2)
        u = np.exp(-a * r**2) * (1 + b * r**2)
        rep = evaluate(g, u, CouplingPair(0.0, 1.0))
        worst = max(worst, abs(rep.dipolar) / rep.quartic)
    out.append(_chk("radial dipolar vanishing", worst <= 1e-9, f"max |D|/||u||_4^4 = {worst:.2e}"))
    gs = Grid.cube(16, 4.0)
    cp = CouplingPair(-1.0, 0.7)
    worst = 0.0
    for _ in range(5):
        u = np.exp(-0.5 * gs.r2) * (1 + 0.3 * rng.standard_normal(gs.shape))
        v = np.exp(-0.5 * gs.r2) * rng.standard_normal(gs.shape)
        h = 1e-4
        fd = (evaluate(gs, u + h * v, cp).E - evaluate(gs, u - h * v, cp).E) / (2 * h)
        an = float(np.sum((gradient(gs, u, cp).conj() * v).real) * gs.dV)
        worst = max(worst, _rel(fd, an))
    out.append(_chk("gradient vs finite differences", worst <= 1e-6, f"max rel err {worst:.2e}"))
    return out


# --------------------------------------------------------------- fibering


def suite_fibering(seed=0, trials=1000):
    rng = np.random.default_rng(seed)
    ts = np.logspace(-3, 3, 2001)
    bad_unique = bad_root = bad_sign = bad_max = bad_equiv = 0
    for _ in range(trials):
        # magnitudes within e^(+-3) keep t* inside the sampled window
        A, C = np.exp(rng.uniform(-3, 3, 2))
        B = rng.choice([-1.0, 1.0]) * math.exp(rng.uniform(-3, 3))
        fc = FiberCoefficients(A, B, C)
        t = find_tstar(fc)
        y = fc.y(ts)
        changes = np.count_nonzero(np.diff(np.sign(y)) != 0)
        bad_unique += changes != 1
        bad_root += abs(fc.y(t)) > 1e-12 * max(A * t, C * t**5, abs(B) * t * t)
        bad_sign += not (fc.virial(0.9 * t) > 0 > fc.virial(1.1 * t))
        bad_max += np.any(fc.energy(ts) > fc.energy(t) * (1 + 1e-12) + 1e-300)
        bad_equiv += (t < 1) != (A + 0.75 * B - C < 0)
    out = [
        _chk("unique sign change", bad_unique == 0, f"{bad_unique} failures in {trials}"),
        _chk("root accuracy", bad_root == 0, f"{bad_root} failures"),
        _chk("virial sign pattern", bad_sign == 0, f"{bad_sign} failures"),
        _chk("fiber maximum at t*", bad_max == 0, f"{bad_max} failures"),
        _chk("t* < 1 iff Q < 0", bad_equiv == 0, f"{bad_equiv} failures"),
    ]
    worst = 0.0
    for _ in range(100):
        A, C = np.exp(rng.uniform(-4, 4, 2))
        worst = max(worst, _rel(find_tstar(FiberCoefficients(A, 0.0, C)), (A / C) ** 0.25))
    out.append(_chk("closed form for B = 0", worst <= 1e-12, f"max rel err {worst:.2e}"))
    g = Grid.cube(64, 6.0)
    u = np.exp(-0.5 * g.r2)
    r0 = evaluate(g, u, CouplingPair(-1.0, 0.0))
    r2 = evaluate(g, dilate(g, u, 2.0), CouplingPair(-1.0, 0.0))
    errs = (_rel(r2.A, 4 * r0.A), _rel(r2.quartic, 8 * r0.quartic), _rel(r2.C, 64 * r0.C), _rel(r2.mass, r0.mass))
    out.append(_chk("dilation scaling t = 2", max(errs) <= 1e-8, "rel errs " + ", ".join(f"{e:.1e}" for e in errs)))
    cp = CouplingPair(-1.0, 0.0)
    v, t = project_to_V(g, 2.0 * u, cp)
    rv = evaluate(g, v, cp)
    out.append(_chk("projection onto Q = 0", abs(rv.Q) <= 1e-8 * (rv.A + rv.C), f"Q/(A+C) = {rv.Q / (rv.A + rv.C):.1e}"))
    return out


# --------------------------------------------------------------- pohozaev


def default_pohozaev_config():
    """A contact-coupled ground state that 128^3 resolves to Pohozaev accuracy 1e-7."""
    return SolverConfig(
        mass=600.0,
        coupling=CouplingPair(-1.0, 0.0),
        grid=Grid.cube(128, 300.0),
        dtau=100.0,
        dtau_max=1e4,
        dtau_growth=1.5,
        max_iter=400,
        control_run=False,
    )


def suite_pohozaev(field=None, cp=None, tol=1e-6, residual_tol=1e-8):
    """Check the stationarity residual and the three identities.

    ``field`` is ``(grid, u)``; without it a resolved ground state is computed.
    """
    if field is None:
        res = minimize(default_pohozaev_config())
        grid, u, cp = res.grid, res.u, default_pohozaev_config().coupling
    else:
        grid, u = field
    rep = evaluate(grid, u, cp)
    g = gradient(grid, u, cp)
    uc = np.asarray(u, dtype=complex)
    beta = -float(np.sum((g.conj() * uc).real) * grid.dV) / rep.mass
    r = g + beta * uc
    resid = math.sqrt(float(np.sum(np.abs(r) ** 2) * grid.dV) / rep.mass)
    p = pohozaev_residuals(rep, beta)
    return [
        _chk("residual", resid <= residual_tol, f"{resid:.2e}"),
        _chk("A + 3 beta m + 3B/2 - C = 0", abs(p[0]) <= tol, f"{p[0]:.2e}"),
        _chk("4 beta m + B = 0", abs(p[1]) <= tol, f"{p[1]:.2e}"),
        _chk("Q = 0", abs(p[2]) <= tol, f"{p[2]:.2e}"),
        _chk("beta > 0", beta > 0, f"{beta:.6g}"),
        _chk("B < 0", rep.B < 0, f"{rep.B:.6g}"),
        _chk("A/6 < E < threshold", rep.A / 6 - 1e-10 < rep.E < THRESHOLD, f"E = {rep.E:.6g}"),
    ]


# ---------------------------------------------------------------- regimes


def random_pair(rng, regime):
    """A random coupling pair in the requested regime."""
    while True:
        l1, l2 = rng.uniform(-10, 10, 2)
        if classify(CouplingPair(l1, l2)).tag is regime:
            return CouplingPair(l1, l2)


def random_smooth_field(rng, grid):
    """Random band-limited field with Gaussian envelope (complex)."""
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spectrum = np.fft.fftn(noise) * np.exp(-0.5 * grid.xi2 / 4.0)
    return np.exp(-0.25 * grid.r2 / rng.uniform(0.5, 2.0)) * np.fft.ifftn(spectrum)


def suite_regimes(seed=0, pairs=20, fields=1000):
    rng = np.random.default_rng(seed)
    g = Grid.cube(16, 6.0)
    stable = [random_pair(rng, Regime.STABLE) for _ in range(pairs)]
    worst = math.inf
    for k in range(fields):
        rep = evaluate(g, random_smooth_field(rng, g), stable[k % pairs])
        worst = min(worst, rep.B / rep.quartic)
    out = [_chk("stable pairs give B > 0", worst > 0, f"min B/||u||_4^4 = {worst:.3g} over {fields} fields")]
    found = 0
    for _ in range(pairs):
        cp = random_pair(rng, Regime.UNSTABLE)
        w = np.asarray(negative_B_widths(cp))
        gg = Grid(n=64, L=tuple(12.0 * w / w.min()))
        u = anisotropic_gaussian(GaussianParams(tuple(w / w.min())), gg)
        found += evaluate(gg, u, cp).B < 0
    out.append(_chk("unstable pairs admit B < 0", found == pairs, f"{found}/{pairs} trial states with B < 0"))
    return out


# ---------------------------------------------------------------- bubbles


def bubble_energies(epsilons=(0.1, 0.05, 0.025), lambda1=-1.0, mass=1.0):
    """Projected bubble energies ``E(v_eps^{t*})`` from radial quadrature."""
    out = []
    for eps in epsilons:
        fc = bubble_fiber(BubbleParams(eps, mass), lambda1)
        out.append(fc.energy(find_tstar(fc)))
    return np.array(out)


def fit_excess(epsilons, energies):
    """Constants of the bound ``E <= threshold + K eps^(1/2)``.

    Returns ``(K, K1, K2)``: ``K`` is the smallest constant for which the
    bound holds at every sample, ``(K1, K2)`` the least-squares fit of
    ``E - threshold = K1 eps^(1/2) + K2 eps``.
    """
    x = np.sqrt(np.asarray(epsilons, dtype=float))
    y = np.asarray(energies, dtype=float) - THRESHOLD
    K = float(np.max(y / x))
    K1, K2 = np.linalg.lstsq(np.column_stack([x, x * x]), y, rcond=None)[0]
    return K, float(K1), float(K2)


def suite_bubbles():
    chk = sobolev_check()
    eps = (0.1, 0.05, 0.025)
    E = bubble_energies(eps)
    K, K1, K2 = fit_excess(eps, E)
    scale_inv = max(_rel(_ratio(e), _ratio(1.0)) for e in (0.1, 0.01))
    g = Grid.cube(48, 3.0)
    from .trialstates import aubin_talenti_bubble

    v = aubin_talenti_bubble(BubbleParams(0.8, 2.0, 1.0, 2.0), g)
    rep = evaluate(g, v, CouplingPair(-1.0, 1.0))
    return [
        _chk("Sobolev constant: quadrature vs closed form", chk.agreement <= 1e-6, f"rel diff {chk.agreement:.1e}"),
        _chk("quotient scale invariance", scale_inv <= 1e-8, f"max rel diff {scale_inv:.1e}"),
        _chk("energies decrease as eps -> 0", np.all(np.diff(E) < 0), ", ".join(f"{e:.6f}" for e in E)),
        _chk("energies above threshold", np.all(E > THRESHOLD), f"threshold {THRESHOLD:.6f}"),
        _chk("finite eps^(1/2) constant", math.isfinite(K), f"K = {K:.4f} (fit K1 = {K1:.4f}, K2 = {K2:.4f})"),
        _chk("bubble mass", _rel(rep.mass, 2.0) <= 1e-10, f"{rep.mass:.12g}"),
        _chk("bubble dipolar part", abs(rep.dipolar) <= 1e-9 * rep.quartic, f"{rep.dipolar:.1e}"),
    ]


def _ratio(eps):
    from .groundstate import _radial_ratio

    return _radial_ratio(1e4 * eps, eps)


SUITES = {
    "fourier": suite_fourier,
    "functionals": suite_functionals,
    "fibering": suite_fibering,
    "pohozaev": suite_pohozaev,
    "regimes": suite_regimes,
    "bubbles": suite_bubbles,
}


def run(tag, **kwargs):
    if tag not in SUITES:
        raise KeyError(tag)
    return SUITES[tag](**kwargs)
