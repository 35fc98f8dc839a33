import numpy as np
import pytest

from dilation_lab.converge import frostman_table, h2_column_distance, sup_circle_distance, truncation_table
from dilation_lab.inner import BPFactor, BPProduct
from dilation_lab.sampling import random_product
from dilation_lab.verify import Check, VerifyReport, run_verify


def test_report_table_marks_failures():
    rep = VerifyReport([Check.at_most("s", "ok", 1e-12, 1e-9), Check.at_least("s", "bad", -1.0, 0.0)])
    assert not rep.passed
    lines = rep.table().splitlines()
    assert lines[1].endswith("PASS") and lines[2].endswith("FAIL")
    assert rep.as_dict()["checks"][1]["passed"] is False


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_verify(random_product(0), "everything")


@pytest.mark.parametrize("suite", ["defects", "dilation", "zxi", "spectrum", "continuity"])
def test_suites_pass_on_random_product(suite):
    rep = run_verify(random_product(31, N=2, d_max=5), suite, seed=2)
    assert rep.passed, rep.table()


def test_wrap_suite_small():
    rep = run_verify(random_product(32, N=1, d_max=4), "wrap", samples=16)
    assert rep.passed, rep.table()


def test_distances_vanish_on_equal_functions():
    B = random_product(3)
    assert sup_circle_distance(B, B) == 0.0 and h2_column_distance(B, B) == 0.0


def test_truncation_table_monotone():
    B = BPProduct([BPFactor.full(l, 1) for l in (0.0, 0.5, -0.3j, 0.7)])
    t = truncation_table(B, wrap_directions=0)
    assert t.passed and [r[0] for r in t.rows] == [1, 2, 3, 4]
    hd = [r[2] for r in t.rows]
    assert all(a >= b for a, b in zip(hd, hd[1:]))


def test_truncation_rejects_bad_depths():
    with pytest.raises(ValueError):
        truncation_table(BPProduct([BPFactor.full(0.0, 1)]), [3])


def test_frostman_table_zero_row():
    t = frostman_table(random_product(6, N=2), [0.2, 0.0], wrap_directions=0)
    assert t.passed
    assert t.rows[-1][3] == 0.0 and t.rows[-1][5] == 0.0
    assert np.isnan(t.rows[0][7])
