import pytest

from dedulog.prompts import TemplateStore


@pytest.fixture(scope="session")
def templates() -> TemplateStore:
    return TemplateStore()
