import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from model_space import ModelIndicator
from posterior_summaries import HpmChoice, PosteriorSummary
from report_storage import (
    DIMENSION_FILE,
    INCLUSION_FILE,
    SUMMARY_FILE,
    ReportStorage,
    dimension_rows,
    dumps,
    format_float,
    inclusion_rows,
)


def _summary(p=4):
    q_reg = np.array([0.2, 0.9, 0.2, 0.05])[:p]
    return PosteriorSummary(
        p_singular=0.1,
        c_estimate=12.5,
        log_c=math.log(12.5),
        q=q_reg * 0.9 + 0.05,
        q_regular=q_reg,
        q_singular_value=0.5,
        hpm=HpmChoice(model=ModelIndicator.from_indices([1], p), log_posterior=-1.25),
        dim_posterior=np.array([0.05, 0.6, 0.2, 0.1, 0.05])[: p + 1],
        column_names=["a", "b", "c", "d"][:p],
        method="gibbs",
        n=5,
        p=p,
        k0=1,
        prior_label="scott-berger",
        mixing_label="hyper-g:3",
    )


def test_write_summary_creates_all_files(tmp_path):
    storage = ReportStorage(tmp_path / "out")
    paths = storage.write_summary(_summary())

    assert [p.name for p in paths] == [SUMMARY_FILE, INCLUSION_FILE, DIMENSION_FILE]
    payload = json.loads((tmp_path / "out" / SUMMARY_FILE).read_text())
    assert payload["p_singular"] == 0.1
    assert payload["hpm"] == [1]
    assert payload["hpm_detail"]["singular_block"] is False

    with (tmp_path / "out" / INCLUSION_FILE).open() as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["index", "name", "q", "q_regular"]
    # sorted by q descending, ties by index
    assert [r[1] for r in rows[1:]] == ["b", "a", "c", "d"]


def test_dimension_rows_respect_plot_limit():
    rows = dimension_rows(_summary(), dim_plot_max=2)
    assert [r.k for r in rows] == [0, 1, 2]
    assert rows[1].to_row() == ["1", "0.59999999999999998"]


def test_inclusion_csv_matches_rows(tmp_path):
    storage = ReportStorage(tmp_path)
    storage.write_summary(_summary())
    with (tmp_path / INCLUSION_FILE).open(newline="") as f:
        written = list(csv.DictReader(f))
    expected = inclusion_rows(_summary())
    assert [int(r["index"]) for r in written] == [r.index for r in expected]
    assert [float(r["q"]) for r in written] == [r.q for r in expected]
    assert [float(r["q_regular"]) for r in written] == [r.q_regular for r in expected]


def test_non_finite_values_are_blank_or_null():
    assert format_float(math.nan) == ""
    assert format_float(math.inf) == ""
    assert format_float(None) == ""
    assert json.loads(dumps({"c": math.inf, "v": np.float64(1.5), "n": np.int64(3)})) == {"c": None, "v": 1.5, "n": 3}


def test_traces_one_file_per_chain(tmp_path):
    class _Row:
        def __init__(self, i):
            self.i = i

        def to_row(self):
            return [str(self.i), "1", "-2.5", "40"]

    class _Chain:
        def __init__(self, chain):
            self.chain = chain
            self.trace = [_Row(1), _Row(2)]

    storage = ReportStorage(tmp_path)
    paths = storage.write_traces([_Chain(0), _Chain(1)])
    assert [p.name for p in paths] == ["trace-0.csv", "trace-1.csv"]
    with paths[1].open(newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["iteration", "k", "log_posterior", "gamma_hex"]
    assert len(rows) == 3
