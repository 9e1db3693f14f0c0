import math

import numpy as np
import pytest

from hweno_sn import error_norms, field_hash, order_table
from hweno_sn.report import fmt_err


def test_order_table_examples():
    out = order_table([1.26e-05, 1.84e-07], [10, 20])
    assert out[0] is None and out[1] == pytest.approx(6.09, abs=0.01)
    assert order_table([1e-3, 1e-3])[1] == 0
    assert order_table([1e-2, 2.5e-3])[1] == pytest.approx(2.0)
    assert order_table([1e-2, 0.0])[1] == "exact"


def test_order_table_errors():
    with pytest.raises(ValueError):
        order_table([1.0])
    with pytest.raises(ValueError):
        order_table([1.0, 0.5], [10, 30])


def test_error_norms_are_volume_weighted_means():
    e = error_norms(np.array([1.0, 2.0]), np.array([0.0, 0.0]), np.array([0.25, 0.75]))
    assert e["L1"] == pytest.approx(1.75) and e["Linf"] == 2.0


def test_fmt_err_six_digits():
    assert fmt_err(1.2345678e-5) == "1.23457e-05"
    assert fmt_err(None) == "" and fmt_err(math.inf) == "inf"


def test_field_hash_is_stable_under_roundoff():
    a = np.array([1.0, 2.0, 3.0])
    assert field_hash(a) == field_hash(a * (1 + 1e-14))
    assert field_hash(a) != field_hash(a * 1.001)
