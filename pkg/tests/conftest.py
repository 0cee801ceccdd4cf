import functools

import pytest

from vacdetect import oracle, runner
from vacdetect.model import default_spec

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def observables(correlation=True, mode_count=None, **spec_kwargs):
    """Oracle observables for ``default_spec(**spec_kwargs)``, cached per session."""
    spec = default_spec(**spec_kwargs)
    settings = oracle.OracleSettings(mode_count=mode_count)
    return runner.oracle_observables(spec, settings, correlation=correlation)


@functools.lru_cache(maxsize=None)
def transfer(**spec_kwargs):
    spec = default_spec(**spec_kwargs)
    settings = oracle.OracleSettings()
    system = oracle.build_discretized(spec, settings)
    return system, oracle.propagate(system, settings.time_grid(spec))


@pytest.fixture(scope="session")
def default_transfer():
    return transfer()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
