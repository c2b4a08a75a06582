"""Deterministic serialization and the matrix document schema."""

import json
import math

import numpy as np
import pytest

from hypoindex import (
    ValidationError,
    decay_curve,
    epsilon_sweep,
    get_example_pair,
    hermitian_split,
    linear_grid,
    waiting_time,
)
from hypoindex.jsonio import (
    csv_text,
    curve_csv,
    curve_json_obj,
    export_matrix_document,
    format_float,
    parse_matrix_document,
    render_json,
    sweep_csv,
    sweep_json_obj,
)


class TestFloatFormatting:
    @pytest.mark.parametrize("x", [0.1, 1 / 3, 1e-300, 12.231232870370, -0.0075, 2.0**-52])
    def test_seventeen_digits_round_trip(self, x):
        assert float(format_float(x)) == x

    def test_integral_floats_stay_short(self):
        assert format_float(1.0) == "1"
        assert format_float(-4.0) == "-4"


class TestRenderJson:
    def test_insertion_order_preserved(self):
        text = render_json({"b": 1, "a": 2})
        assert text.index('"b"') < text.index('"a"')

    def test_byte_determinism(self):
        obj = {"x": [1.0, 0.1, {"y": None}], "z": "s"}
        assert render_json(obj) == render_json(obj)

    def test_strict_json_parse_back(self):
        obj = {"name": "t", "values": [1, 2.5, None, True, False], "nested": {"k": [[1, 2]]}}
        parsed = json.loads(render_json(obj))
        assert parsed == obj

    def test_infinity_renders_as_sentinel_strings(self):
        assert render_json(math.inf) == '"infinite"\n'
        assert render_json(-math.inf) == '"-infinite"\n'

    def test_nan_renders_as_null(self):
        assert render_json(math.nan) == "null\n"
        assert json.loads(render_json({"v": math.nan})) == {"v": None}

    def test_numpy_scalars_accepted(self):
        text = render_json({"i": np.int64(3), "f": np.float64(0.5), "a": np.arange(3)})
        assert json.loads(text) == {"i": 3, "f": 0.5, "a": [0, 1, 2]}

    def test_empty_containers(self):
        assert json.loads(render_json({"d": {}, "l": []})) == {"d": {}, "l": []}

    def test_lf_line_endings_and_trailing_newline(self):
        text = render_json({"a": 1})
        assert text.endswith("}\n") and "\r" not in text

    def test_non_string_keys_rejected(self):
        with pytest.raises(ValidationError):
            render_json({1: "x"})

    def test_unknown_types_rejected(self):
        with pytest.raises(ValidationError):
            render_json({"x": object()})


class TestCsvText:
    def test_cells_and_none_as_nan(self):
        text = csv_text("a,b,c", [(1, 0.5, None), (2, 1.0, 3.25)])
        lines = text.split("\n")
        assert lines[0] == "a,b,c"
        assert lines[1] == "1,0.5,nan"
        assert lines[2] == "2,1,3.25"
        assert text.endswith("\n") and "\r" not in text


class TestParseDocument:
    def test_real_and_complex_entries(self):
        doc = {"n": 2, "matrix": [[1.0, [0.0, -0.5]], [[0.0, 0.5], 1]]}
        B, split = parse_matrix_document(doc)
        assert split is None
        assert B[0, 1] == -0.5j and B[1, 0] == 0.5j and B[1, 1] == 1.0

    def test_split_parsed_and_checked(self):
        A = [[0.0, 1.0], [-1.0, 0.0]]
        C = [[1.0, 0.0], [0.0, 0.0]]
        doc = {"n": 2, "matrix": [[1.0, 1.0], [-1.0, 0.0]], "split": {"A": A, "C": C}}
        B, split = parse_matrix_document(doc)
        assert split is not None
        assert np.array_equal(split[0] + split[1], B)

    @pytest.mark.parametrize(
        "doc",
        [
            [],  # not an object
            {"matrix": [[1.0]]},  # n missing
            {"n": True, "matrix": [[1.0]]},  # boolean n
            {"n": 0, "matrix": []},  # dimension < 1
            {"n": 1},  # matrix missing
            {"n": 2, "matrix": [[1.0, 0.0]]},  # wrong row count
            {"n": 2, "matrix": [[1.0, 0.0], [0.0]]},  # ragged row
            {"n": 1, "matrix": [[True]]},  # boolean entry
            {"n": 1, "matrix": [["x"]]},  # non-numeric entry
            {"n": 1, "matrix": [[[1.0, 2.0, 3.0]]]},  # overlong pair
            {"n": 1, "matrix": [[[1.0, True]]]},  # boolean inside pair
            {"n": 1, "matrix": [[float("inf")]]},  # non-finite entry
            {"n": 1, "matrix": [[0.0]], "split": {"A": [[0.0]]}},  # C missing
            # split parts with the wrong symmetry or the wrong sum
            {
                "n": 1,
                "matrix": [[1.0]],
                "split": {"A": [[1.0]], "C": [[0.0]]},
            },
            {
                "n": 1,
                "matrix": [[1.0]],
                "split": {"A": [[0.0]], "C": [[[0.0, 1.0]]]},
            },
            {
                "n": 1,
                "matrix": [[1.0]],
                "split": {"A": [[0.0]], "C": [[2.0]]},
            },
        ],
    )
    def test_malformed_documents_rejected(self, doc):
        with pytest.raises(ValidationError):
            parse_matrix_document(doc)


class TestExportRoundTrip:
    def test_real_matrix_exports_plain_numbers(self):
        B = np.array([[1.0, -2.5], [0.0, 3.0]])
        doc = export_matrix_document(B)
        assert doc["matrix"][0] == [1.0, -2.5]
        parsed, _ = parse_matrix_document(doc)
        assert np.array_equal(parsed, B.astype(complex))

    def test_complex_round_trip_is_exact(self):
        rng = np.random.default_rng(31)
        B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        parsed, _ = parse_matrix_document(export_matrix_document(B))
        assert np.array_equal(parsed, B)

    def test_split_round_trip(self):
        A, C = get_example_pair("num2")
        doc = export_matrix_document(A + C, (A, C))
        parsed, split = parse_matrix_document(doc)
        assert split is not None
        assert np.array_equal(split[0], A) and np.array_equal(split[1], C)
        assert np.array_equal(parsed, A + C)

    def test_document_survives_json_text(self):
        rng = np.random.default_rng(32)
        B = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        text = render_json(export_matrix_document(B))
        parsed, _ = parse_matrix_document(json.loads(text))
        assert np.array_equal(parsed, B)


@pytest.fixture(scope="module")
def envelope_curve(envelope_sys):
    return decay_curve(envelope_sys, linear_grid(2.0, 5))


@pytest.fixture(scope="module")
def num1_sweep():
    A, C = get_example_pair("num1")
    return epsilon_sweep(A, C, [0.5, 1.0], with_fit=False, with_waiting=True)


class TestCurveAndSweepViews:
    def test_curve_csv_layout(self, envelope_curve):
        lines = curve_csv(envelope_curve).strip().split("\n")
        assert lines[0] == "t,norm"
        assert len(lines) == 6
        first = lines[1].split(",")
        assert float(first[0]) == 0.0 and float(first[1]) == 1.0

    def test_curve_json_fields(self, envelope_sys, envelope_curve):
        wt = waiting_time(envelope_sys)
        obj = curve_json_obj(envelope_curve, wt)
        assert obj["spacing"] == "linear" and obj["points"] == 5
        assert obj["t_min"] == 0.0 and obj["t_max"] == 2.0
        assert len(obj["t"]) == 5 and len(obj["norm"]) == 5
        assert obj["t0_reached"] is True and obj["t0"] == wt.t0
        assert obj["system_fingerprint"] == envelope_curve.system_fingerprint

    def test_curve_json_without_waiting(self, envelope_curve):
        obj = curve_json_obj(envelope_curve)
        assert "t0" not in obj and "t0_reached" not in obj

    def test_sweep_csv_layout(self, num1_sweep):
        lines = sweep_csv(num1_sweep).strip().split("\n")
        assert lines[0] == "eps,m_hc,a,c_theory,c_fit,t0"
        assert len(lines) == 3
        row = lines[1].split(",")
        assert float(row[0]) == 0.5 and row[1] == "1" and row[2] == "3"
        assert float(row[3]) == pytest.approx(0.25 / 12.0, rel=1e-12)
        assert row[4] == "nan"  # fits disabled

    def test_sweep_json_fields(self, num1_sweep):
        obj = sweep_json_obj(num1_sweep)
        assert obj["m_hc"] == 1 and obj["a"] == 3
        assert obj["c_tilde"] == pytest.approx(1.0 / 12.0, rel=1e-10)
        assert len(obj["t0_ratios"]) == 1
        assert obj["t0_ratios"][0] == pytest.approx(obj["t0"][0] / obj["t0"][1], rel=1e-12)

    def test_sweep_json_none_ratio_when_waiting_disabled(self):
        A, C = get_example_pair("num1")
        sweep = epsilon_sweep(A, C, [0.5, 1.0], with_fit=False, with_waiting=False)
        assert sweep_json_obj(sweep)["t0_ratios"] == [None]
