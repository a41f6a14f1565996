import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbec import config
from dbec.grid import Grid

BASIC = """
[grid]
n = 32, 32, 64   # per axis
L = 4
dipole_cutoff = 3.5

[coupling]
lambda1 = -1
lambda2 = 0.25

[solver]
dtau = 0.5
polish = no
max_iter = 10

[init]
tag = random
seed = 7

[sweep]
masses = 1, 2, 4
"""


def test_parse_basic(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(BASIC)
    rc = config.load(path)
    s = rc.solver
    assert s.grid == Grid(n=(32, 32, 64), L=4.0, dipole_cutoff=3.5)
    assert (s.coupling.lambda1, s.coupling.lambda2) == (-1.0, 0.25)
    assert s.mass == 1.0  # first sweep mass
    assert s.dtau == 0.5 and s.polish is False and s.max_iter == 10
    assert s.init == "random" and s.seed == 7
    assert rc.masses == (1.0, 2.0, 4.0)


def test_overrides_win(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(BASIC)
    rc = config.load(path, {("solver", "mass"): "3", ("grid", "n"): "16", ("coupling", "lambda2"): None})
    assert rc.solver.mass == 3.0 and rc.solver.grid.n == (16, 16, 16) and rc.solver.coupling.lambda2 == 0.25


def test_json_form(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"grid": {"n": 16, "L": [1, 2, 3]}, "coupling": {"lambda1": -1, "lambda2": 0},'
                    ' "solver": {"mass": 2, "control_run": false}}')
    rc = config.load(path)
    assert rc.solver.grid.L == (1.0, 2.0, 3.0) and rc.solver.control_run is False


@pytest.mark.parametrize(
    "text",
    [
        "[grid]\nn = 16\n[coupling]\nlambda1 = -1\nlambda2 = 0\n[solver]\nmass = 1\n",  # no L
        "[grid]\nn = 16\nL = 1\n[coupling]\nlambda1 = -1\n[solver]\nmass = 1\n",  # no lambda2
        "[grid]\nn = 16\nL = 1\n[coupling]\nlambda1 = -1\nlambda2 = 0\n",  # no mass
        "[grid]\nn = 16\nL = 1\nfoo = 2\n[coupling]\nlambda1 = -1\nlambda2 = 0\n[solver]\nmass = 1\n",
        "[bogus]\n",
        "[grid]\nn = 15\nL = 1\n[coupling]\nlambda1 = -1\nlambda2 = 0\n[solver]\nmass = 1\n",
        "[grid]\nn = 16\nL = 1\n[coupling]\nlambda1 = x\nlambda2 = 0\n[solver]\nmass = 1\n",
        "[grid]\nn = 16\nL = 1\n[coupling]\nlambda1 = -1\nlambda2 = 0\n[solver]\nmass = 1\npolish = maybe\n",
        "not an ini file",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(config.ConfigError):
        config.build(config.parse_sections(text))


def test_round_trip_is_identity():
    rc = config.build(config.parse_sections(BASIC))
    text = config.dumps(rc)
    again = config.build(config.parse_sections(text))
    assert again == rc
    assert config.dumps(again) == text


@settings(max_examples=50, deadline=None)
@given(
    st.integers(4, 32).map(lambda k: 2 * k),
    st.floats(0.1, 1e3),
    st.floats(-1e3, 1e3, allow_subnormal=False),
    st.floats(1e-3, 1e4),
    st.sampled_from(["auto", "gaussian", "bubble", "random"]),
    st.booleans(),
)
def test_round_trip_property(n, L, l1, mass, tag, polish):
    text = (f"[grid]\nn = {n}\nL = {L!r}\n[coupling]\nlambda1 = {l1!r}\nlambda2 = 0.5\n"
            f"[solver]\nmass = {mass!r}\npolish = {polish}\n[init]\ntag = {tag}\n")
    rc = config.build(config.parse_sections(text))
    assert config.build(config.parse_sections(config.dumps(rc))) == rc


def test_with_mass():
    rc = config.build(config.parse_sections(BASIC))
    assert config.with_mass(rc, 9.0).solver.mass == 9.0
