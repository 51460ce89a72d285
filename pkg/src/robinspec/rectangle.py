"""Robin eigenvalues of intervals and rectangles by separation of variables.

On (0, l) with u'(0) = beta u(0), -u'(l) = beta u(l) (outward normal form of
du/dnu + beta u = 0), positive eigenvalues omega^2 solve

    (omega^2 - beta^2) sin(omega l) = 2 beta omega cos(omega l)

divided by omega so that the trivial root omega = 0 disappears.  Negative
ones -omega^2 come from the hyperbolic analogue, solved separately for the
even and odd modes about the midpoint.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
import math
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from robinspec.disk import Spectrum, SpectrumRecord

__all__ = [
    "IntervalRobinProblem",
    "RectangleFamily",
    "interval_robin_eigen",
    "interval_robin_spectrum",
    "rectangle_spectrum",
    "rectangle_lambda1",
    "theorem_a_sweep",
    "gap_slope",
    "write_sweep_csv",
]

_CELLS_PER_PERIOD = 8


@dataclass(frozen=True)
class IntervalRobinProblem:
    length: float
    beta: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("interval length must be positive")

    def boundary_residual(self, lam: float) -> float:
        """Residual of -u'(l) = beta u(l) for u normalised by u'(0) = beta u(0).

        du + beta u expands into terms that cancel (exponentially so on long
        intervals with beta < 0); the residual is relative to the size of
        their coefficients.
        """
        l, b = self.length, self.beta
        if lam > 0:
            w = math.sqrt(lam)
            s, c = math.sin(w * l), math.cos(w * l)
            value = (b * b - w * w) * s + 2.0 * b * w * c
            size = w * w + b * b
        elif lam < 0:
            w = math.sqrt(-lam)
            s, c = math.sinh(w * l), math.cosh(w * l)
            value = (w * w + b * b) * s + 2.0 * b * w * c
            size = (w * w + b * b + 2.0 * abs(b) * w) * c
        else:
            value = b * (2.0 + b * l)
            size = abs(b) * (2.0 + abs(b) * l)
        return abs(value) / max(size, 1e-300)


@dataclass(frozen=True)
class RectangleFamily:
    """Rectangles with sides t and 1/t: unit area, perimeter 2(t + 1/t)."""

    t: float

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")

    @property
    def sides(self) -> tuple[float, float]:
        return self.t, 1.0 / self.t

    @property
    def area(self) -> float:
        return 1.0

    @property
    def perimeter(self) -> float:
        return 2.0 * (self.t + 1.0 / self.t)


def _sinc(z):
    return 1.0 if z == 0 else math.sin(z) / z


def _trig_condition(w, l, b):
    return (w * w - b * b) * l * _sinc(w * l) - 2.0 * b * math.cos(w * l)


def _negative_roots(l, b):
    """Hyperbolic roots split into even and odd modes about the midpoint.

    Even: s tanh(s l/2) = -beta, always one root for beta < 0, in
    [|beta|, |beta| / tanh(|beta| l/2)].  Odd: s coth(s l/2) = -beta, one root
    in (0, |beta|) iff beta l < -2.  On long intervals the two are only
    e^(-|beta| l) apart, too close for a sign scan of the combined condition.
    """
    h = 0.5 * l
    a = -b
    roots = []
    even = lambda s: s * math.tanh(s * h) - a
    hi = a / math.tanh(a * h)
    roots.append(a if even(a) >= 0 else brentq(even, a, hi, xtol=1e-15, rtol=1e-15, maxiter=200))
    if b * l < -2.0:
        odd = lambda s: (s / math.tanh(s * h) if s > 0 else 1.0 / h) - a
        roots.append(a if odd(a) <= 0 else brentq(odd, 0.0, a, xtol=1e-15, rtol=1e-15, maxiter=200))
    return roots


def _scan_roots(func, lo, hi, cells):
    roots = []
    grid = np.linspace(lo, hi, cells + 1)
    vals = [func(w) for w in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            if a > 0:
                roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(func, a, b, xtol=1e-15, rtol=1e-15, maxiter=200))
    if vals[-1] == 0.0:
        roots.append(hi)
    return roots


def interval_robin_spectrum(p: IntervalRobinProblem, count: int) -> list[float]:
    """First ``count`` eigenvalues of the interval, ascending."""
    l, b = p.length, p.beta
    if b == 0.0:
        return [((k * math.pi) / l) ** 2 for k in range(count)]
    values: list[float] = []
    if abs(b) * l < 1e-6:
        # the eigenvalue leaving 0 sits below brentq's resolution in omega; use its series
        values.append(2.0 * b / l - b * b / 3.0)
        pos = _scan_roots(lambda w: _trig_condition(w, l, b), 0.0, (count + 1) * math.pi / l, _CELLS_PER_PERIOD * (count + 1))
        values.extend(w * w for w in pos if w * l > 1.0)
        values.sort()
        return values[:count]
    if b < 0:
        values.extend(-(w * w) for w in _negative_roots(l, b))
        if b * l == -2.0:
            values.append(0.0)
    # omega_k lies below k pi / l, so count + 1 periods suffice
    periods = count + 1
    pos = _scan_roots(lambda w: _trig_condition(w, l, b), 0.0, periods * math.pi / l, _CELLS_PER_PERIOD * periods)
    values.extend(w * w for w in pos if w > 0)
    values.sort()
    if len(values) < count:
        raise RuntimeError("interval root scan found too few eigenvalues")
    return values[:count]


def interval_robin_eigen(p: IntervalRobinProblem, k: int) -> float:
    """k-th (1-based) Robin eigenvalue of the interval."""
    if not 1 <= k <= 20:
        raise ValueError("k must be in 1..20")
    return interval_robin_spectrum(p, k)[k - 1]


def rectangle_spectrum(a: float, b: float, beta: float, K: int = 4) -> Spectrum:
    """First K Robin eigenvalues of the a x b rectangle, tagged with (i, j)."""
    if not 1 <= K <= 40:
        raise ValueError("K must be in 1..40")
    ea = interval_robin_spectrum(IntervalRobinProblem(a, beta), K)
    eb = interval_robin_spectrum(IntervalRobinProblem(b, beta), K)
    records = [
        SpectrumRecord(x + y, 1, (i + 1, j + 1), "robin")
        for i, x in enumerate(ea)
        for j, y in enumerate(eb)
    ]
    spec = Spectrum(records, "robin", beta)
    spec.records = spec.records[:K]
    return spec


def rectangle_lambda1(a: float, b: float, beta: float) -> float:
    return interval_robin_eigen(IntervalRobinProblem(a, beta), 1) + interval_robin_eigen(
        IntervalRobinProblem(b, beta), 1
    )


def theorem_a_sweep(alpha: float, t_grid: Sequence[float]) -> list[dict]:
    """Scaled first eigenvalue lambda_1(Omega_t; alpha / L(t)) A(t) along the t x 1/t family.

    Rows carry t, L, beta, lambda1, scaled, gap = alpha - scaled, alpha.
    """
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    rows = []
    for t in t_grid:
        fam = RectangleFamily(float(t))
        beta = alpha / fam.perimeter
        lam = rectangle_lambda1(*fam.sides, beta)
        scaled = lam * fam.area
        rows.append(
            {"t": fam.t, "L": fam.perimeter, "beta": beta, "lambda1": lam, "scaled": scaled, "gap": alpha - scaled, "alpha": alpha}
        )
    return rows


def gap_slope(rows: Sequence[dict]) -> float:
    """Least-squares slope of log(gap) against log(t)."""
    t = np.log([r["t"] for r in rows])
    g = np.log([abs(r["gap"]) for r in rows])
    return float(np.polyfit(t, g, 1)[0])


def write_sweep_csv(rows: Sequence[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = ["t", "L", "beta", "lambda1", "scaled", "gap", "alpha"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow({c: repr(float(r[c])) for c in cols})
    return path
