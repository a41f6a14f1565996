"""scikit-learn style wrappers.

:class:`GroundStateSolver` is an estimator whose ``fit`` computes a ground
state (an optional initial field can be passed as ``X``);
:class:`FunctionalTransformer` maps a batch of fields to the rows
``[mass, A, B, C, E, Q]``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field
from .functionals import CouplingPair, evaluate
from .grid import Grid
from .groundstate import SolverConfig, minimize

FEATURES = ("mass", "A", "B", "C", "E", "Q")


class GroundStateSolver(BaseEstimator):
    """Normalized ground state at mass ``mass`` for couplings ``(lambda1, lambda2)``.

    Parameters mirror :class:`~dbec.groundstate.SolverConfig`, with the grid
    given by ``n``, ``L`` and ``dipole_cutoff``.
    """

    def __init__(
        self,
        mass=1.0,
        lambda1=-1.0,
        lambda2=0.0,
        n=64,
        L=12.0,
        dipole_cutoff=None,
        dtau=1e-2,
        dtau_max=1e-2,
        dtau_growth=1.0,
        max_iter=2000,
        residual_tol=1e-8,
        virial_tol=1e-6,
        polish=True,
        init="auto",
        widths=None,
        seed=0,
        control_run=True,
    ):
        self.mass = mass
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.n = n
        self.L = L
        self.dipole_cutoff = dipole_cutoff
        self.dtau = dtau
        self.dtau_max = dtau_max
        self.dtau_growth = dtau_growth
        self.max_iter = max_iter
        self.residual_tol = residual_tol
        self.virial_tol = virial_tol
        self.polish = polish
        self.init = init
        self.widths = widths
        self.seed = seed
        self.control_run = control_run

    def to_config(self):
        return SolverConfig(
            mass=self.mass,
            coupling=CouplingPair(self.lambda1, self.lambda2),
            grid=Grid(n=self.n, L=self.L, dipole_cutoff=self.dipole_cutoff),
            dtau=self.dtau,
            dtau_max=self.dtau_max,
            dtau_growth=self.dtau_growth,
            max_iter=self.max_iter,
            residual_tol=self.residual_tol,
            virial_tol=self.virial_tol,
            polish=self.polish,
            init=self.init,
            widths=tuple(self.widths or ()),
            seed=self.seed,
            control_run=self.control_run,
        )

    def fit(self, X=None, y=None):
        """Run the solver; ``X`` optionally supplies the initial field."""
        cfg = self.to_config()
        u0 = None if X is None else check_field(X, cfg.grid, name="X", dtype=None)
        res = minimize(cfg, u0)
        self.grid_ = cfg.grid
        self.result_ = res
        self.u_ = res.u
        self.beta_ = res.beta
        self.gamma_ = res.gamma_estimate
        self.report_ = res.report
        self.residual_ = res.residual
        self.anisotropy_ = res.anisotropy
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        return self

    def transform(self, X=None):
        """The fitted ground state (``X`` is ignored)."""
        check_is_fitted(self, "u_")
        return self.u_

    def score(self, X=None, y=None):
        """Negative energy, so that larger is better."""
        check_is_fitted(self, "gamma_")
        return -self.gamma_


class FunctionalTransformer(TransformerMixin, BaseEstimator):
    """Rows ``[mass, A, B, C, E, Q]`` for a batch of fields.

    ``X`` has shape ``(n_fields, n1*n2*n3)`` or ``(n_fields, n1, n2, n3)``.
    """

    def __init__(self, lambda1=-1.0, lambda2=0.0, n=64, L=12.0, dipole_cutoff=None):
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.n = n
        self.L = L
        self.dipole_cutoff = dipole_cutoff

    def fit(self, X=None, y=None):
        self.grid_ = Grid(n=self.n, L=self.L, dipole_cutoff=self.dipole_cutoff)
        self.coupling_ = CouplingPair(self.lambda1, self.lambda2)
        if X is not None:
            self._batch(X)
        self.n_features_in_ = self.grid_.size
        return self

    def _batch(self, X):
        X = np.asarray(X)
        if X.ndim == 1 or X.ndim == 3:
            X = X[None]
        return [check_field(x, self.grid_, name="X", dtype=None) for x in X]

    def transform(self, X):
        check_is_fitted(self, "grid_")
        rows = []
        for u in self._batch(X):
            d = evaluate(self.grid_, u, self.coupling_).to_dict()
            rows.append([d[k] for k in FEATURES])
        return np.array(rows, dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURES, dtype=object)
