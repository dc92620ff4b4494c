import json
import logging
from pathlib import Path

from matroid import Matroid, bergman_fan
from polyhedral import Fan, FaceComplex, compactify, complex_from_json, fan_to_json

logger = logging.getLogger(__name__)

FIX_B = {
    "lattice_rank": 1,
    "vertices": [],
    "rays": [[1], [-1]],
    "faces": [{"vertices": [], "rays": [0]}, {"vertices": [], "rays": [1]}],
}

FIX_D = {
    "lattice_rank": 1,
    "vertices": [[0]],
    "rays": [[1], [-1]],
    "faces": [{"vertices": [0], "rays": [0]}, {"vertices": [0], "rays": [1]}],
}

FIX_E = {
    "lattice_rank": 1,
    "vertices": [[0], [1]],
    "rays": [[1], [-1]],
    "faces": [
        {"vertices": [0, 1], "rays": []},
        {"vertices": [1], "rays": [0]},
        {"vertices": [0], "rays": [1]},
    ],
}

FIX_F = {
    "lattice_rank": 2,
    "vertices": [[0, 0]],
    "rays": [[1, 0], [-1, 0], [0, 1], [0, -1]],
    "faces": [{"vertices": [0], "rays": [i, j]} for i in (0, 1) for j in (2, 3)],
}

STRIP = {
    "lattice_rank": 2,
    "vertices": [[0, 0], [1, 0]],
    "rays": [[1, 0], [-1, 0], [0, 1], [0, -1]],
    "faces": [
        {"vertices": [0, 1], "rays": [2]},
        {"vertices": [0, 1], "rays": [3]},
        {"vertices": [1], "rays": [0, 2]},
        {"vertices": [1], "rays": [0, 3]},
        {"vertices": [0], "rays": [1, 2]},
        {"vertices": [0], "rays": [1, 3]},
    ],
}


def fix_a() -> Fan:
    """Веер Бергмана U_{2,3}"""
    return bergman_fan(Matroid.uniform(3, 2))


def fix_c() -> Fan:
    """Веер Бергмана булева матроида B_3 (пермутоэдрический веер)"""
    return bergman_fan(Matroid.boolean(3))


def u34() -> Fan:
    return bergman_fan(Matroid.uniform(4, 3))


def fixture_json(name: str) -> dict:
    if name == "fixA":
        return fan_to_json(fix_a())
    if name == "fixB":
        return json.loads(json.dumps(FIX_B))
    if name == "fixC":
        return fan_to_json(fix_c())
    if name == "u34":
        return fan_to_json(u34())
    tables = {"fixD": FIX_D, "fixE": FIX_E, "fixF": FIX_F, "strip": STRIP}
    if name not in tables:
        raise KeyError(f"Unknown fixture {name!r}")
    return json.loads(json.dumps(tables[name]))


FIXTURE_FILES = ("fixA", "fixB", "fixC", "fixD", "fixE", "fixF")
ALL_FIXTURES = FIXTURE_FILES + ("u34", "strip")


def compact_fixture(name: str) -> FaceComplex:
    """Каноническая компактификация фикстуры"""
    return compactify(complex_from_json(fixture_json(name)))


def write_fixtures(out: Path, names=FIXTURE_FILES) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in names:
        path = out / f"{name}.json"
        path.write_text(json.dumps(fixture_json(name), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)
    logger.info(f"Wrote {len(written)} fixtures to {out}")
    return written
