import json
import math

import numpy as np
import pytest

from aekit._jsonio import dumps, format_float, real
from aekit._parallel import THREADS_ENV, ordered_map, resolve_threads
from aekit.errors import InvalidInputError


def test_float_formatting():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(-0.0) == "0"
    assert format_float(math.inf) == '"inf"'
    assert format_float(-math.inf) == '"-inf"'
    with pytest.raises(ValueError):
        format_float(math.nan)


def test_round_trip_is_exact():
    values = [0.1, 1 / 3, 2.0 ** -25, 1e300, math.inf]
    text = dumps({"v": values})
    assert [real(v) for v in json.loads(text)["v"]] == values


def test_keys_sorted_and_numpy_scalars():
    assert dumps({"b": np.float64(1.5), "a": np.int64(2), "c": [True, None]}) == \
        '{"a":2,"b":1.5,"c":[true,null]}\n'


def test_pretty_is_equivalent():
    obj = {"x": [1.0, {"y": "z"}]}
    assert json.loads(dumps(obj, pretty=True)) == json.loads(dumps(obj))


def test_thread_resolution(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert resolve_threads(None) == 1
    monkeypatch.setenv(THREADS_ENV, "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    with pytest.raises(InvalidInputError):
        resolve_threads(0)


def test_ordered_map_preserves_order():
    assert ordered_map(lambda v: v * v, range(50), 8) == [v * v for v in range(50)]


def test_bad_thread_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(InvalidInputError):
        resolve_threads(None)
