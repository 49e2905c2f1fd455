from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from tcspace.matching import MatchingInstance, dual_from_dict
from tcspace.metric import space_from_dict

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(Path(__file__).parent))


def load(name: str):
    return json.loads((DATA / name).read_text())


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def two_triangles():
    """Triangles A = {a1,a2,a3} and B = {b1,b2,b3}: sides 1, cross distances 10."""
    return space_from_dict(load("two_triangles.json"))


@pytest.fixture
def tt_pairs():
    return [("a1", "a2"), ("b1", "b2"), ("a3", "b3")]


@pytest.fixture
def tt_symmetric_dual(two_triangles, tt_pairs):
    inst = MatchingInstance.from_pairs(two_triangles, tt_pairs)
    return dual_from_dict(inst, load("two_triangles_symmetric_dual.json"))


@pytest.fixture
def line4():
    return space_from_dict(load("line4.json"))


@pytest.fixture
def line_pairs():
    return [("0", "1"), ("10", "11")]


@pytest.fixture
def line_half_dual(line4, line_pairs):
    inst = MatchingInstance.from_pairs(line4, line_pairs)
    return dual_from_dict(inst, load("line4_half_dual.json"))


@pytest.fixture
def two_point():
    return space_from_dict(load("two_point.json"))


def frac_map(d: dict) -> dict:
    return {k: Fraction(v) for k, v in d.items()}


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})")
