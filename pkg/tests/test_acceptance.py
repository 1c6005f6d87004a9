"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every test prints one ``[PASS]``/``[FAIL]`` line.  Criterion 3 additionally
checks every residual order against the independent oracle in ``oracles``.
"""

import json

import pytest

from oracles import eq_to_oracle_args, oracle_residual_order
from tronquee.acceptance import CHECKS, run_check
from tronquee.series import compute_coefficients


def residual_oracle(eq, m, N, order):
    table = compute_coefficients(m, eq, N, "exact")
    return oracle_residual_order(*eq_to_oracle_args(eq, table)) == order


EXTRA = {3: {"oracle": residual_oracle}}


@pytest.mark.parametrize("number", [c[0] for c in CHECKS], ids=[f"c{c[0]:02d}" for c in CHECKS])
def test_criterion(number, capsys):
    result = run_check(number, **EXTRA.get(number, {}))
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, json.dumps(result.detail, default=str)[:2000]
