import json

import pytest

from fixtures import ALL_FIXTURES, FIXTURE_FILES, compact_fixture, fixture_json, write_fixtures
from polyhedral import complex_from_json


def test_write_fixtures(tmp_path):
    written = write_fixtures(tmp_path / "out")
    assert [path.name for path in written] == [f"{name}.json" for name in FIXTURE_FILES]
    for path in written:
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data == fixture_json(path.stem)
        complex_from_json(data)


def test_write_fixtures_is_stable(tmp_path):
    first = [path.read_bytes() for path in write_fixtures(tmp_path / "a")]
    second = [path.read_bytes() for path in write_fixtures(tmp_path / "b")]
    assert first == second


def test_fixture_json_is_a_copy():
    data = fixture_json("fixD")
    data["rays"].append([7])
    assert fixture_json("fixD")["rays"] == [[1], [-1]]


@pytest.mark.parametrize("name", ALL_FIXTURES)
def test_every_fixture_compactifies(name):
    x = compact_fixture(name)
    assert x.faces


def test_unknown_fixture():
    with pytest.raises(KeyError):
        fixture_json("fixZ")
