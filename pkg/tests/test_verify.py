from centering_lab.verify import SUITES, run_all, run_suite


def test_suites_cover_every_module():
    assert set(SUITES) == {"constants", "prob_core", "opnorm", "mixture", "interval", "bcap"}


def test_report_is_seed_determined():
    a = run_all(3, names=("constants", "mixture"))
    b = run_all(3, names=("constants", "mixture"))
    assert a == b
    assert a["passed"]


def test_only_the_grid_block_slack_check_fails():
    # equal-block E^G on a grid has ||I - E^G|| = c(n / m) < c(n) = nu(1); see the bcap tests
    checks = run_suite("bcap", 0)
    failed = [c.name for c in checks if not c.passed]
    assert failed == ["sanctioned operators: eigenvalue slack >= -1e-4 at n = 32"]
    slacks = next(c for c in checks if not c.passed).details["min_slack"]
    assert slacks["E"] == 0 and slacks["0.5 E"] == 0
