import json
import os

import pytest

from array_consumer import load

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURE_DIR, name)


def read_json(name: str):
    with open(fixture_path(name)) as fh:
        return json.load(fh)


@pytest.fixture
def fig_program():
    return load(fixture_path("fig_main.klay"))


@pytest.fixture
def pair_program():
    return load(fixture_path("pair.klay"))
