import math

import numpy as np
import pytest

from epgrav_figs.errors import FigsError, MissingColumn
from epgrav_figs.reader import read_csv

SAMPLE = """\
# generator: epgrav 0.1.0
# case: X
# alpha_ep: 200
a,b,c
1,2.5,hello
-3e2,0.125,world
"""


def write(tmp_path, text, name="t.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parses_comments_header_and_data(tmp_path):
    table = read_csv(write(tmp_path, SAMPLE))
    assert table.comments["case"] == "X"
    assert table.comments["alpha_ep"] == "200"
    assert table.comments["generator"].startswith("epgrav")
    assert table.columns == ("a", "b", "c")
    np.testing.assert_array_equal(table.column("a"), [1.0, -300.0])
    np.testing.assert_array_equal(table.column("b"), [2.5, 0.125])


def test_non_numeric_cells_become_nan(tmp_path):
    table = read_csv(write(tmp_path, SAMPLE))
    assert all(math.isnan(v) for v in table.column("c"))


def test_string_column_preserves_text(tmp_path):
    table = read_csv(write(tmp_path, SAMPLE))
    assert table.string_column("c") == ["hello", "world"]


def test_missing_column_names_column_and_path(tmp_path):
    path = write(tmp_path, SAMPLE)
    table = read_csv(path)
    with pytest.raises(MissingColumn) as exc_info:
        table.column("nope")
    assert exc_info.value.column == "nope"
    assert exc_info.value.path == path
    assert "nope" in str(exc_info.value)


def test_require_checks_several_names(tmp_path):
    table = read_csv(write(tmp_path, SAMPLE))
    table.require("a", "b", "c")
    with pytest.raises(MissingColumn):
        table.require("a", "zzz")


def test_ragged_row_rejected(tmp_path):
    with pytest.raises(FigsError):
        read_csv(write(tmp_path, "a,b\n1,2\n3\n"))


def test_empty_file_rejected(tmp_path):
    with pytest.raises(FigsError):
        read_csv(write(tmp_path, ""))


def test_comments_only_rejected(tmp_path):
    with pytest.raises(FigsError):
        read_csv(write(tmp_path, "# case: X\n"))


def test_header_only_gives_zero_rows(tmp_path):
    table = read_csv(write(tmp_path, "a,b\n"))
    assert table.column("a").size == 0


def test_roundtrips_real_harness_output(tmp_path, fig_dir):
    table = read_csv(str(fig_dir / "fig2_X.csv"))
    table.require("alpha_in", "nu_plus", "nu_minus", "ups_plus", "ups_minus")
    assert table.comments["case"] == "X"
    assert float(table.comments["alpha_ep"]) == 200.0
    assert table.column("alpha_in").size == 201
    assert np.isfinite(table.column("nu_plus")).all()
