import pytest

from fkqc import (
    build_chain,
    build_hierarchy,
    crystal_rule,
    default_model,
    fibonacci_rule,
)

PHI = (1 + 5 ** 0.5) / 2


@pytest.fixture(scope="session")
def fib_rule():
    return fibonacci_rule()


@pytest.fixture(scope="session")
def fib_chain(fib_rule):
    return build_chain(fib_rule, (-160, 160))


@pytest.fixture(scope="session")
def fib_model(fib_chain):
    return default_model(fib_chain)


@pytest.fixture(scope="session")
def fib_hierarchy(fib_rule):
    return build_hierarchy(fib_rule, 12)


@pytest.fixture(scope="session")
def cry_rule():
    return crystal_rule(1)


@pytest.fixture(scope="session")
def cry_chain(cry_rule):
    return build_chain(cry_rule, (-60, 60))


@pytest.fixture(scope="session")
def cry_model(cry_chain):
    return default_model(cry_chain, amplitude=0.05)


@pytest.fixture(scope="session")
def cry_hierarchy(cry_rule):
    return build_hierarchy(cry_rule, 10)
