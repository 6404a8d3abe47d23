"""Acceptance gate: one test per release criterion.

Each test delegates to skewlab.verification (the same checks behind
`skewlab verify --all`) and prints the criterion's PASS/FAIL line.

Criterion 7 is expected to fail: its third clause asserts a pointwise cap
on the spurious weight that the exact logistic-flow dynamics genuinely
violate (by ~0.1 at moderate t, far beyond numerical error).  The check
implements the clause as stated rather than weakening it; see the test's
failure message for the measured violation.
"""

from skewlab import verification


def _run(number):
    result = verification.run_check(number)
    print(result.line)
    assert result.passed, result.line
    return result


def test_criterion_01_qp_oracle_equivalence():
    _run(1)


def test_criterion_02_worked_geometric_instance():
    _run(2)


def test_criterion_03_geometric_sandwich_sweep():
    _run(3)


def test_criterion_04_balanced_maxmargin_mitigation():
    _run(4)


def test_criterion_05_closed_form_dynamics():
    _run(5)


def test_criterion_06_exponential_2d_invariants():
    _run(6)


def test_criterion_07_logistic_2d_invariants():
    _run(7)


def test_criterion_08_fig5a_beta_ordering():
    _run(8)


def test_criterion_09_duplication_statistical_skew():
    _run(9)


def test_criterion_10_norm_growth_monotonicity():
    _run(10)


def test_criterion_11_highdim_accumulation():
    _run(11)


def test_criterion_12_gradient_correctness():
    _run(12)


def test_criterion_13_cli_determinism():
    _run(13)
