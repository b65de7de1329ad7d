from __future__ import annotations

import pytest

from epirel.inference_client import _canned_block
from epirel.schema import default_schema


@pytest.fixture(scope="session")
def schema():
    return default_schema()


@pytest.fixture(scope="session")
def extended_schema():
    return default_schema(death_host_extension=True)


@pytest.fixture(scope="session")
def example_block() -> str:
    """The five-line worked output block the stub backend returns."""
    return _canned_block()
