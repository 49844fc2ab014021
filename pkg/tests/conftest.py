import json
from pathlib import Path

import pytest

from edgehome.defaults import default_catalog, default_home
from edgehome.promptdoc import SystemContext

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def demo_context() -> SystemContext:
    return SystemContext(default_catalog(), default_home())


@pytest.fixture(scope="session")
def transition_oracle() -> dict:
    with open(DATA_DIR / "transition_oracle.json", encoding="utf-8") as fh:
        return json.load(fh)
