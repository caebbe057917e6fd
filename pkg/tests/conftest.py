import pytest

import msgflow as mf


@pytest.fixture(scope="session")
def fixtures():
    return {name: mf.build(name) for name in mf.FIXTURE_NAMES}


@pytest.fixture(scope="session")
def joints(fixtures):
    """Exact discrete joints for every finite-alphabet fixture."""
    return {
        name: mf.enumerate_joint(fx.spec)
        for name, fx in fixtures.items()
        if not fx.spec.is_gaussian
    }


@pytest.fixture(scope="session")
def sk_joint(fixtures):
    return mf.linear_propagate(fixtures["sk"].spec)
