import pytest

from whittle.corpus import Dictionary


@pytest.fixture(scope="session")
def bundled() -> Dictionary:
    return Dictionary.bundled()
