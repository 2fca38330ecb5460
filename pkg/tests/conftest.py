import pytest

from h2s.pipeline import Plan, build_plan
from h2s.sample_models import fixture_config, fixture_model

_SOLVE_LIMIT = 90.0


@pytest.fixture(scope="session")
def plan_of():
    """Lazy per-fixture plans; solving table8 once per session is enough."""
    cache: dict[str, Plan] = {}

    def get(name: str) -> Plan:
        if name not in cache:
            cache[name] = build_plan(
                fixture_model(name), fixture_config(name),
                time_limit=_SOLVE_LIMIT)
        return cache[name]

    return get
