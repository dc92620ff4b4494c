import json

import pytest

from fixtures import compact_fixture, fixture_json
from steenbrink import build_steenbrink



@pytest.fixture(scope="session")
def compact():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = compact_fixture(name)
        return cache[name]

    return get


@pytest.fixture(scope="session")
def page(compact):
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = build_steenbrink(compact(name))
        return cache[name]

    return get


@pytest.fixture
def fixture_file(tmp_path):
    def write(name, data=None):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(data if data is not None else fixture_json(name)), encoding="utf-8")
        return path

    return write
