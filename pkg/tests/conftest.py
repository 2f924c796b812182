import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# generic generator with independent reference values (scipy DOP853 and mpmath quadrature)
REF_TAU = 0.3 + 0.1j
REF_CONSTANT = 0.5j
REF_ATOMS = ((1.0, 0.6), (3.5, 0.3))


@pytest.fixture(scope="session")
def ref_gen():
    from petalflow.generators import AtomicHerglotz, make_berkson_porta
    return make_berkson_porta(REF_TAU, AtomicHerglotz.from_angles(REF_CONSTANT, REF_ATOMS))


@pytest.fixture(scope="session")
def grid100():
    from petalflow.petals import _grid
    return _grid()


@pytest.fixture(scope="session")
def flowers():
    from petalflow.generators import example1, example2, example3
    from petalflow.petals import build_flower
    out = {}
    for key, gen in [("ex1n1", example1(1)), ("ex1n2", example1(2)), ("ex1n3", example1(3)),
                     ("ex2", example2()), ("ex3", example3())]:
        out[key] = build_flower(gen)
    return out


def disk_grid(n=50, rmax=0.85, seed=1):
    rng = np.random.default_rng(seed)
    r = rmax * np.sqrt(rng.uniform(0, 1, n))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, n))



def pytest_terminal_summary(terminalreporter):
    import sys
    lines = getattr(sys.modules.get("test_acceptance"), "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
