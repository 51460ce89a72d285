import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robinspec import rectangle as rc
from robinspec.rectangle import IntervalRobinProblem, RectangleFamily


def test_interval_matches_even_odd_oracle(oracles):
    for row in oracles["interval"]:
        p = IntervalRobinProblem(row["length"], row["beta"])
        got = rc.interval_robin_spectrum(p, len(row["values"]))
        assert got == pytest.approx(row["values"], rel=1e-11, abs=1e-11), row


def test_interval_examples():
    assert rc.interval_robin_eigen(IntervalRobinProblem(1.0, 0.0), 2) == pytest.approx(math.pi**2)
    assert rc.interval_robin_eigen(IntervalRobinProblem(1.0, 1e8), 1) == pytest.approx(math.pi**2, rel=1e-5)
    with pytest.raises(ValueError):
        rc.interval_robin_eigen(IntervalRobinProblem(1.0, 0.0), 21)
    with pytest.raises(ValueError):
        IntervalRobinProblem(0.0, 1.0)


def test_interval_dense_scan_oracle():
    # first root of the determinant form by a 2000-point sign scan
    l, b = 1.0, 1.0
    w = np.linspace(1e-6, math.pi, 2001)
    det = (w * w - b * b) * np.sin(w * l) - 2 * b * w * np.cos(w * l)
    i = np.flatnonzero(np.sign(det[:-1]) != np.sign(det[1:]))[0]
    lo, hi = w[i], w[i + 1]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = (mid * mid - b * b) * math.sin(mid * l) - 2 * b * mid * math.cos(mid * l)
        if np.sign(fm) == np.sign((lo * lo - b * b) * math.sin(lo * l) - 2 * b * lo * math.cos(lo * l)):
            lo = mid
        else:
            hi = mid
    assert rc.interval_robin_eigen(IntervalRobinProblem(l, b), 1) == pytest.approx(lo * lo, rel=1e-9)


def test_zero_eigenvalue_at_critical_beta():
    vals = rc.interval_robin_spectrum(IntervalRobinProblem(1.0, -2.0), 3)
    assert vals[0] < 0
    assert vals[1] == 0.0


@pytest.mark.parametrize("beta", [-5.0, -2.5, -1.0, -0.1])
def test_negative_count(beta):
    l = 1.0
    vals = rc.interval_robin_spectrum(IntervalRobinProblem(l, beta), 6)
    n_neg = sum(v < 0 for v in vals)
    assert n_neg == (2 if beta * l < -2 else 1)


@given(st.floats(0.1, 5.0), st.floats(-50, 50), st.integers(1, 6))
def test_interval_residual(length, beta, k):
    p = IntervalRobinProblem(length, beta)
    lam = rc.interval_robin_eigen(p, k)
    assert p.boundary_residual(lam) <= 1e-10
    if beta >= 0:
        assert lam >= 0


@given(st.floats(0.1, 5.0), st.floats(-20, 20), st.floats(0.01, 2.0))
def test_interval_beta_monotone(length, beta, step):
    a = rc.interval_robin_spectrum(IntervalRobinProblem(length, beta), 3)
    b = rc.interval_robin_spectrum(IntervalRobinProblem(length, beta + step), 3)
    assert np.all(np.array(b) > np.array(a))


def test_interval_residual_huge_beta():
    p = IntervalRobinProblem(1.0, 1e8)
    assert p.boundary_residual(rc.interval_robin_eigen(p, 1)) <= 1e-8


def test_rectangle_examples():
    assert rc.rectangle_spectrum(1, 1, 0.0, 4).values == pytest.approx([0, math.pi**2, math.pi**2, 2 * math.pi**2])
    assert rc.rectangle_spectrum(1, 1, 1e8, 1).values[0] == pytest.approx(2 * math.pi**2, rel=1e-5)
    assert rc.rectangle_spectrum(2, 1, 0.0, 2).values == pytest.approx([0, math.pi**2 / 4])
    with pytest.raises(ValueError):
        rc.rectangle_spectrum(1, 1, 0.0, 41)


def test_rectangle_lambda1_is_tensor_sum():
    a, b, beta = 2.0, 0.7, -0.3
    la = rc.interval_robin_eigen(IntervalRobinProblem(a, beta), 1)
    lb = rc.interval_robin_eigen(IntervalRobinProblem(b, beta), 1)
    assert rc.rectangle_lambda1(a, b, beta) == la + lb
    assert rc.rectangle_spectrum(a, b, beta, 1).values[0] == pytest.approx(la + lb)


def test_family():
    fam = RectangleFamily(4.0)
    assert fam.area == 1.0
    assert fam.perimeter == 2 * (4.0 + 0.25)
    with pytest.raises(ValueError):
        RectangleFamily(0.5)


def test_theorem_a_sweep_examples():
    rows = rc.theorem_a_sweep(1.0, [1.0, 4.0, 8.0, 16.0, 32.0])
    assert all(r["scaled"] < 1.0 for r in rows)
    slope = rc.gap_slope(rows[1:])
    assert -2.3 <= slope <= -1.7
    neg = rc.theorem_a_sweep(-1.0, [16.0])
    assert neg[0]["scaled"] < -1.0
    with pytest.raises(ValueError):
        rc.theorem_a_sweep(0.0, [1.0])


@given(st.floats(-20, 20).filter(lambda a: abs(a) > 1e-3), st.floats(1.0, 50.0))
def test_theorem_a_strict_for_rectangles(alpha, t):
    row = rc.theorem_a_sweep(alpha, [t])[0]
    assert row["scaled"] < alpha


def test_sweep_csv(tmp_path):
    rows = rc.theorem_a_sweep(2.0, [1.0, 2.0])
    p = rc.write_sweep_csv(rows, tmp_path / "s.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == "t,L,beta,lambda1,scaled,gap,alpha"
    assert len(lines) == 3


@pytest.mark.parametrize("beta", [1e-300, 1e-12, -1e-9, 9.9e-7, -9.9e-7, 1.01e-6])
def test_tiny_beta_continuity(beta):
    vals = rc.interval_robin_spectrum(IntervalRobinProblem(1.0, beta), 3)
    assert vals[0] == pytest.approx(2 * beta - beta * beta / 3, rel=1e-9)
    assert vals[1] == pytest.approx(math.pi**2, rel=1e-5)
    assert vals[2] == pytest.approx(4 * math.pi**2, rel=1e-5)
