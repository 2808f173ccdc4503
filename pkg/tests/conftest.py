import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("bergball", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("bergball")

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def ball_points(n, rmax=0.95):
    """Hypothesis strategy for points of the ball of radius ``rmax`` in C^n."""
    comp = st.floats(-1.0, 1.0, allow_nan=False)

    def build(xs):
        z = np.array(xs[:n]) + 1j * np.array(xs[n:])
        r = np.linalg.norm(z)
        return z if r <= rmax else z * (rmax / r)

    return st.lists(comp, min_size=2 * n, max_size=2 * n).map(build)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
