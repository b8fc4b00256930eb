import pytest

from potentskp.fabgup import layered_base


@pytest.fixture(scope="session")
def fg_base():
    """Layered base words for Gamma/Stab(4) in the generators a, b."""
    return layered_base()
