import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_config():
    """Contact-coupled ground state that 48^3 resolves to Q/(A+C) ~ 1e-3 in seconds."""
    from dbec import CouplingPair, Grid, SolverConfig

    return SolverConfig(
        mass=600.0,
        coupling=CouplingPair(-1.0, 0.0),
        grid=Grid.cube(48, 200.0),
        dtau=100.0,
        dtau_max=1e4,
        dtau_growth=1.5,
        max_iter=400,
        virial_tol=1e-2,
        control_run=False,
    )


@pytest.fixture(scope="session")
def small_state(small_config):
    import warnings

    from dbec import ResolutionWarning, minimize

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return minimize(small_config)
