import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from distrej.dynamics import ArmModel, Link, bundled_arm

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_unit(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_spd(rng, scale=0.05):
    a = rng.standard_normal((3, 3)) * scale
    return a @ a.T + np.eye(3) * scale * 0.2


def random_arm(rng, n: int, gravity=(0.0, 0.0, -9.81)) -> ArmModel:
    links = []
    for i in range(n):
        links.append(Link(
            mass=float(rng.uniform(0.5, 5.0)),
            com=rng.uniform(-0.2, 0.2, 3),
            inertia=random_spd(rng),
            axis=random_unit(rng),
            offset=np.zeros(3) if i == 0 else rng.uniform(-0.3, 0.3, 3),
            name=f"l{i}",
        ))
    return ArmModel(tuple(links), gravity=np.array(gravity, dtype=float), name=f"random{n}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def pendulum():
    return bundled_arm("pendulum")


@pytest.fixture(scope="session")
def planar2():
    return bundled_arm("planar2")


@pytest.fixture(scope="session")
def hya():
    return bundled_arm("hya_like")
