from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qwplanes.io import csv_text, distribution_rows, dumps_json, fmt_float, matrix_json, snapshot_lines, to_jsonable
from qwplanes.lattice import ORIGIN, Mode, Site, build_walk, evolve
from qwplanes.coins import CoinParams


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_float_round_trips(x):
    assert float(fmt_float(x)) == x


@pytest.mark.parametrize("x,s", [(float("nan"), "nan"), (float("inf"), "inf"), (-float("inf"), "-inf"), (0.1, "0.1")])
def test_fmt_float_specials(x, s):
    assert fmt_float(x) == s


def test_to_jsonable_types():
    @dataclass
    class D:
        a: complex
        b: np.ndarray

    out = to_jsonable({"d": D(1 + 2j, np.array([1.5, np.nan])), 3: (Mode.LITERAL, np.int64(4), None)})
    assert out == {"d": {"a": [1.0, 2.0], "b": [1.5, None]}, "3": ["literal", 4, None]}
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_dumps_json_is_sorted_and_strict():
    text = dumps_json({"b": 1, "a": float("inf")})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": None, "b": 1}
    assert text.endswith("\n")


def test_csv_text_crlf_and_floats():
    text = csv_text(("x", "p"), [(1, 0.1), (2, None)])
    assert text == "x,p\r\n1,0.1\r\n2,\r\n"
    rows = list(csv.reader(io.StringIO(text)))
    assert rows == [["x", "p"], ["1", "0.1"], ["2", ""]]


def test_distribution_rows_order():
    dist = {Site(1, 0, 1): 0.25, ORIGIN: 0.5, Site(0, 2, 0): 0.125, Site(0, 1, 1): 0.125}
    rows = distribution_rows(3, dist)
    assert rows[0] == (3, "", 0, 0, 0.5)
    assert [r[1:4] for r in rows[1:]] == [(0, 1, 1), (0, 2, 0), (1, 0, 1)]


def test_snapshot_lines_parse():
    s = evolve(build_walk("joined", CoinParams.hadamard(), 2, "unitarized", [1, 0]), 3)
    lines = snapshot_lines(s).splitlines()
    recs = [json.loads(line) for line in lines]
    assert all(set(r) == {"copy", "x", "y", "label", "re", "im"} for r in recs)
    assert math.isclose(sum(r["re"] ** 2 + r["im"] ** 2 for r in recs), 1.0)
    assert snapshot_lines(s, threshold=10.0) == ""


def test_matrix_json():
    assert matrix_json(np.eye(2)) == [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
