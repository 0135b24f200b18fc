import hypothesis
import pytest

hypothesis.settings.register_profile("suite", deadline=None, max_examples=60)
hypothesis.settings.load_profile("suite")


@pytest.fixture(scope="session")
def library():
    from tripfit import default_library

    return default_library()
