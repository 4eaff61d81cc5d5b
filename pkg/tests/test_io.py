import json
import os

import numpy as np
import pytest

from ajdkit.io import (
    atomic_write,
    dumps,
    dumps_matrix,
    dumps_matrix_set,
    format_float,
    loads_matrix,
    loads_matrix_set,
    matrix_from_obj,
    read_matrix_set,
)
from ajdkit.linalg import DimensionError


class TestMatrixJson:
    def test_real_roundtrip_is_exact(self, rng):
        a = rng.standard_normal((4, 4)) * 10.0 ** rng.integers(-30, 30, (4, 4))
        b = loads_matrix(dumps_matrix(a))
        assert b.dtype == np.float64
        np.testing.assert_array_equal(b, a)

    def test_complex_roundtrip_is_exact(self, rng):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        np.testing.assert_array_equal(loads_matrix(dumps_matrix(a)), a)

    def test_imag_is_optional(self):
        obj = json.loads(dumps_matrix(np.eye(2)))
        assert obj["dim"] == 2 and "imag" not in obj
        np.testing.assert_array_equal(matrix_from_obj({"real": [[1, 2], [3, 4]]}), [[1, 2], [3, 4]])

    def test_set_roundtrip(self, rng, tmp_path):
        mats = [rng.standard_normal((3, 3)) for _ in range(4)]
        path = tmp_path / "set.json"
        atomic_write(path, dumps_matrix_set(mats))
        out = read_matrix_set(path)
        assert len(out) == 4
        for x, y in zip(out, mats):
            np.testing.assert_array_equal(x, y)

    def test_set_wrapped_in_object(self):
        text = json.dumps({"matrices": [{"real": [[1.0]]}, {"real": [[2.0]]}]})
        assert [m[0, 0] for m in loads_matrix_set(text)] == [1.0, 2.0]

    def test_bad_objects(self):
        with pytest.raises(DimensionError):
            matrix_from_obj({"dim": 3, "real": [[1, 0], [0, 1]]})
        with pytest.raises(DimensionError):
            matrix_from_obj({"real": [[1, 0], [0, 1]], "imag": [[1]]})
        with pytest.raises(ValueError):
            matrix_from_obj({"imag": [[1]]})


class TestFormatting:
    def test_seventeen_digits(self):
        assert float(format_float(0.1)) == 0.1
        assert format_float(1 / 3) == "0.33333333333333331"
        assert format_float(float("nan")) == "NaN"
        assert format_float(float("-inf")) == "-Infinity"

    def test_dumps_nested(self):
        text = dumps({"a": [1.5, 2], "b": None, "c": True, "d": np.float64(0.1)}, indent=2)
        assert json.loads(text) == {"a": [1.5, 2], "b": None, "c": True, "d": 0.1}

    def test_dumps_rejects_unknown(self):
        with pytest.raises(TypeError):
            dumps({"x": object()})


class TestAtomicWrite:
    def test_creates_directories(self, tmp_path):
        path = tmp_path / "a" / "b" / "out.txt"
        atomic_write(path, "hello\n")
        assert path.read_text() == "hello\n"

    def test_failure_leaves_old_file(self, tmp_path):
        path = tmp_path / "out.txt"
        atomic_write(path, "old")
        with pytest.raises(TypeError):
            atomic_write(path, 12345)
        assert path.read_text() == "old"
        assert os.listdir(tmp_path) == ["out.txt"]
