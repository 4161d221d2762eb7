import importlib

import pytest


@pytest.fixture(scope="session")
def ts():
    """The bindings module: the installed package or the in-build extension."""
    try:
        return importlib.import_module("tessera")
    except ImportError:
        return importlib.import_module("_tessera")
