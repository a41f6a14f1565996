import warnings

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from dbec import ResolutionWarning
from dbec.estimators import FEATURES, FunctionalTransformer, GroundStateSolver
from dbec.functionals import CouplingPair, evaluate
from dbec.grid import Grid
from dbec.groundstate import initial_state

SMALL = dict(mass=600.0, lambda1=-1.0, lambda2=0.0, n=48, L=200.0, dtau=100.0, dtau_max=1e4, dtau_growth=1.5,
             max_iter=400, virial_tol=1e-2, control_run=False)


def test_params_and_clone():
    est = GroundStateSolver(**SMALL)
    params = est.get_params()
    assert params["mass"] == 600.0 and params["n"] == 48
    other = clone(est).set_params(mass=700.0)
    assert other.mass == 700.0 and est.mass == 600.0
    cfg = est.to_config()
    assert cfg.grid == Grid.cube(48, 200.0) and cfg.coupling == CouplingPair(-1.0, 0.0)


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        GroundStateSolver().transform()


def test_fit_and_warm_start(small_state):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        est = GroundStateSolver(**SMALL).fit()
        assert est.converged_ and est.residual_ <= 1e-8 and est.beta_ > 0
        assert est.transform().shape == (48, 48, 48)
        assert est.score() == pytest.approx(-est.gamma_)
        np.testing.assert_allclose(est.u_, small_state.u, atol=1e-12 * np.max(np.abs(small_state.u)))
        # an explicit initial field equal to the configured seed reproduces fit()
        again = GroundStateSolver(**SMALL).fit(initial_state(est.to_config()))
    assert again.converged_ and again.n_iter_ == est.n_iter_
    np.testing.assert_array_equal(again.u_, est.u_)


def test_functional_transformer():
    g = Grid.cube(16, 4.0)
    rng = np.random.default_rng(0)
    X = rng.standard_normal((3, *g.shape))
    ft = FunctionalTransformer(lambda1=-1.0, lambda2=0.5, n=16, L=4.0)
    rows = ft.fit_transform(X)
    assert rows.shape == (3, 6)
    rep = evaluate(g, X[1], CouplingPair(-1.0, 0.5))
    np.testing.assert_allclose(rows[1], [rep.mass, rep.A, rep.B, rep.C, rep.E, rep.Q], rtol=1e-12)
    assert list(ft.get_feature_names_out()) == list(FEATURES)
    flat = ft.transform(X.reshape(3, -1))
    np.testing.assert_array_equal(flat, rows)
