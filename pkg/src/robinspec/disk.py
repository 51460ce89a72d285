"""Robin, Neumann, Dirichlet spectra of the unit disk and Steklov spectra of annuli.

Separating variables u = g(r) T(theta) with T = cos(kappa theta), sin(kappa theta)
leaves the radial Robin condition g'(1) + alpha g(1) = 0.  For lambda = x^2 > 0
the radial part is J_kappa(x r); for lambda = -s^2 < 0 it is I_kappa(s r); at
alpha = -kappa the eigenvalue is exactly 0 with g = r^kappa.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from robinspec import specfun
from robinspec.specfun import J01, J11, J11_PRIME, bessel_i, bessel_i_ratio, bessel_j, jn_zeros, jnp_zeros

__all__ = [
    "DiskMode",
    "SpectrumRecord",
    "Spectrum",
    "disk_mode_eigenvalue",
    "dirichlet_mode",
    "neumann_mode",
    "disk_spectrum",
    "lambda1",
    "lambda2",
    "radial_profile",
    "radial_values",
    "alpha_from_lambda2",
    "threshold_alpha",
    "annulus_steklov",
    "annulus_mode_roots",
    "write_profile_csv",
]

MAX_KAPPA = 25
MAX_M = 10
_XTOL = 1e-15


@dataclass(frozen=True)
class DiskMode:
    """One separated eigenpair of the unit disk."""

    kappa: int
    alpha: float
    lam: float
    branch: str  # "oscillatory", "linear" or "exponential"
    m: int = 1
    bc: str = "robin"

    @property
    def multiplicity(self) -> int:
        return 1 if self.kappa == 0 else 2

    def boundary_residual(self) -> float:
        """|g'(1) + alpha g(1)| relative to the size of the terms involved."""
        if self.branch == "exponential" and self.bc == "robin":
            # logarithmic derivative kappa + s I_{k+1}/I_k stays finite where I_k(s) overflows
            s = math.sqrt(-self.lam)
            logder = self.kappa + s * bessel_i_ratio(self.kappa, s)
            return abs(logder + self.alpha) / max(1.0, abs(logder), abs(self.alpha))
        g, dg = radial_values(self, np.array([1.0]))
        g, dg = float(g[0]), float(dg[0])
        if self.bc == "dirichlet":
            return abs(g) / max(abs(dg), 1e-300)
        if self.bc == "neumann":
            return abs(dg) / max(abs(g), 1e-300)
        scale = max(abs(g), abs(dg), abs(self.alpha * g))
        return abs(dg + self.alpha * g) / scale


@dataclass(frozen=True)
class SpectrumRecord:
    lam: float
    multiplicity: int
    mode: tuple
    bc: str
    branch: str = ""

    def to_json(self) -> dict:
        out = {"lambda": self.lam, "mult": self.multiplicity, "mode": list(self.mode), "bc": self.bc}
        if self.branch:
            out["branch"] = self.branch
        if len(self.mode) == 2 and self.bc != "steklov":
            out["kappa"] = self.mode[0]
        return out


@dataclass
class Spectrum:
    """Eigenvalues in nondecreasing order, one record per eigenvalue counted with multiplicity."""

    records: list[SpectrumRecord]
    bc: str
    alpha: float | None = None

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: r.lam)

    @property
    def values(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i) -> float:
        return self.records[i].lam

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "bc": self.bc, "eigenvalues": [r.to_json() for r in self.records]}


def _check_mode(kappa, m):
    if int(kappa) != kappa or not 0 <= kappa <= MAX_KAPPA:
        raise ValueError(f"kappa must be an integer in 0..{MAX_KAPPA}")
    if int(m) != m or not 1 <= m <= MAX_M:
        raise ValueError(f"m must be an integer in 1..{MAX_M}")
    return int(kappa), int(m)


def _robin_positive(kappa, alpha, x):
    """x J_k'(x) + alpha J_k(x) = (kappa + alpha) J_k(x) - x J_{k+1}(x)."""
    return (kappa + alpha) * bessel_j(kappa, x) - x * bessel_j(kappa + 1, x)


def _robin_positive_scaled(kappa, alpha, x):
    """The same condition divided by (x/2)^kappa / kappa!, finite and equal to kappa + alpha at 0."""
    if x <= 2.0:
        q = -0.25 * x * x
        term, total, mag, k = 1.0, kappa + alpha, abs(kappa + alpha), 0
        while True:
            k += 1
            term *= q / (k * (k + kappa))
            total += (2 * k + kappa + alpha) * term
            mag += abs((2 * k + kappa + alpha) * term)
            if abs(term) * (2 * k + kappa + abs(alpha)) <= 1e-18 * max(mag, 1e-300) or k > 60:
                return total
    return _robin_positive(kappa, alpha, x) * math.factorial(kappa) / (0.5 * x) ** kappa


def _zero_pair(kappa, m):
    """Left and right zeros of J_kappa bounding the m-th positive root, with j_{kappa,0} = 0."""
    zeros = jn_zeros(kappa, m)
    return (0.0 if m == 1 else zeros[m - 2]), zeros[m - 1]


def _derivative_zero_between(kappa, lo, hi):
    """Zero of J_kappa' strictly inside (lo, hi), if any (0 for kappa = 0, m = 1 is excluded)."""
    for z in jnp_zeros(kappa, MAX_M + 2):
        if lo < z < hi:
            return z
    return None


def _positive_root(kappa, alpha, m):
    lo, hi = _zero_pair(kappa, m)
    if m == 1:
        f = lambda x: _robin_positive_scaled(kappa, alpha, x)
    else:
        f = lambda x: _robin_positive(kappa, alpha, x)
    # a zero of J' splits the bracket: alpha > 0 puts the root on its right
    mid = _derivative_zero_between(kappa, lo, hi)
    if mid is not None:
        if alpha > 0:
            lo = mid
        elif alpha < 0:
            hi = mid
        else:
            return mid
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        # |alpha| below rounding level: the root coincides with a bracket end
        small, big = sorted([(abs(flo), lo), (abs(fhi), hi)])
        if small[0] <= 1e-12 * max(big[0], 1.0):
            return small[1]
        raise RuntimeError(
            f"no sign change for kappa={kappa}, alpha={alpha}, m={m} on [{lo}, {hi}]: f={flo}, {fhi}"
        )
    return brentq(f, lo, hi, xtol=_XTOL, rtol=1e-15, maxiter=200)


def _negative_root(kappa, alpha):
    """s > 0 with s I_k'(s) + alpha I_k(s) = 0, i.e. kappa + alpha + s I_{k+1}/I_k = 0."""
    h = lambda s: kappa + alpha + s * bessel_i_ratio(kappa, s)
    hi = max(3.0 * abs(alpha), 2.0 * kappa + 4.0)
    while h(hi) <= 0:
        hi *= 2.0
    lo = 0.0
    f = lambda s: h(s) if s > 0 else kappa + alpha
    return brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=400)


def disk_mode_eigenvalue(kappa: int, alpha: float, m: int = 1) -> DiskMode:
    """m-th Robin eigenvalue of angular mode kappa on the unit disk."""
    kappa, m = _check_mode(kappa, m)
    alpha = float(alpha)
    if m == 1 and alpha == -kappa:
        return DiskMode(kappa, alpha, 0.0, "linear", m)
    if kappa == 0 and m == 1 and 0 < abs(alpha) < 1e-4:
        # inverse of alpha = y/2 + y^2/16 + y^3/96 (y = lambda), where the bracketed solve loses x
        lam = 2.0 * alpha - 0.5 * alpha**2 + alpha**3 / 12.0
        return DiskMode(0, alpha, lam, "oscillatory" if alpha > 0 else "exponential", 1)
    if m == 1 and alpha < -kappa:
        s = _negative_root(kappa, alpha)
        return DiskMode(kappa, alpha, -s * s, "exponential", m)
    x = _positive_root(kappa, alpha, m)
    return DiskMode(kappa, alpha, x * x, "oscillatory", m)


def dirichlet_mode(kappa: int, m: int = 1) -> DiskMode:
    kappa, m = _check_mode(kappa, m)
    x = jn_zeros(kappa, m)[m - 1]
    return DiskMode(kappa, math.inf, x * x, "oscillatory", m, bc="dirichlet")


def neumann_mode(kappa: int, m: int = 1) -> DiskMode:
    kappa, m = _check_mode(kappa, m)
    if kappa == 0:
        if m == 1:
            return DiskMode(0, 0.0, 0.0, "linear", 1, bc="neumann")
        x = jnp_zeros(0, m - 1)[m - 2]
    else:
        x = jnp_zeros(kappa, m)[m - 1]
    return DiskMode(kappa, 0.0, x * x, "oscillatory", m, bc="neumann")


def _mode_solver(bc, alpha):
    if bc == "robin":
        return lambda kappa, m: disk_mode_eigenvalue(kappa, alpha, m)
    if bc == "dirichlet":
        return dirichlet_mode
    if bc == "neumann":
        return neumann_mode
    raise ValueError(f"unknown boundary condition {bc!r}")


def disk_spectrum(alpha: float = 0.0, K: int = 10, bc: str = "robin") -> Spectrum:
    """First K eigenvalues (with multiplicity) of the unit disk.

    Modes are enumerated kappa = 0, 1, ...; a mode's eigenvalues increase in m
    and its lowest eigenvalue increases in kappa, so enumeration stops once a
    mode starts above the current K-th candidate.
    """
    if not 1 <= K <= 40:
        raise ValueError("K must be in 1..40")
    if bc == "robin" and abs(alpha) > 1e8:
        raise ValueError("|alpha| must not exceed 1e8")
    solve = _mode_solver(bc, alpha)
    records: list[SpectrumRecord] = []

    def kth():
        vals = sorted(r.lam for r in records)
        return vals[K - 1] if len(vals) >= K else math.inf

    for kappa in range(MAX_KAPPA + 1):
        first = solve(kappa, 1)
        if first.lam > kth():
            break
        for m in range(1, MAX_M + 1):
            mode = first if m == 1 else solve(kappa, m)
            if mode.lam > kth():
                break
            for _ in range(mode.multiplicity):
                records.append(SpectrumRecord(mode.lam, mode.multiplicity, (kappa, m), bc, mode.branch))
    else:
        raise RuntimeError("mode enumeration exceeded kappa range")
    spec = Spectrum(records, bc, alpha if bc == "robin" else None)
    spec.records = spec.records[:K]
    return spec


def lambda1(alpha: float) -> float:
    """First Robin eigenvalue of the unit disk (radial mode)."""
    return disk_mode_eigenvalue(0, alpha, 1).lam


def lambda2(alpha: float) -> float:
    """Second (double) Robin eigenvalue of the unit disk, from the kappa = 1 mode."""
    return disk_mode_eigenvalue(1, alpha, 1).lam


def radial_values(mode: DiskMode, r) -> tuple[np.ndarray, np.ndarray]:
    """Normalised radial function g and its derivative g' on r in [0, 1].

    Normalisation: g(r) ~ r^kappa as r -> 0, i.e. g(0) = 1 for kappa = 0 and
    g'(0) = 1 for kappa = 1.
    """
    r = np.asarray(r, dtype=float)
    k = mode.kappa
    if mode.branch == "linear":
        g = r**k
        dg = k * r ** (k - 1) if k > 0 else np.zeros_like(r)
        return g, dg
    norm_fact = math.factorial(k)
    if mode.branch == "oscillatory":
        x = math.sqrt(mode.lam)
        c = norm_fact * (2.0 / x) ** k
        g = c * bessel_j(k, x * r)
        dg = c * x * (k * _safe_ratio(bessel_j, k, x * r) - bessel_j(k + 1, x * r))
        return g, dg
    s = math.sqrt(-mode.lam)
    c = norm_fact * (2.0 / s) ** k
    g = c * bessel_i(k, s * r)
    dg = c * s * (k * _safe_ratio(bessel_i, k, s * r) + bessel_i(k + 1, s * r))
    return g, dg


def _safe_ratio(func, k, z):
    """func(k, z) / z with the z -> 0 limit (nonzero only for k = 1)."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    if k == 0:
        return out
    nz = z > 0
    out[nz] = func(k, z[nz]) / z[nz]
    if k == 1:
        out[~nz] = 0.5
    return out


def radial_profile(mode: DiskMode, r_grid) -> np.ndarray:
    return radial_values(mode, r_grid)[0]


def write_profile_csv(path: str | Path, r_grid, columns: dict[str, Sequence[float]]) -> Path:
    """CSV with an ``r`` column followed by one column per profile."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", *names])
        for i, r in enumerate(r_grid):
            w.writerow([repr(float(r)), *(repr(float(columns[n][i])) for n in names)])
    return path


def alpha_from_lambda2(lam: float) -> float:
    """Perimeter-scaled parameter alpha with lambda_2(D; alpha / 2 pi) = lam.

    alpha = -2 pi x J_1'(x) / J_1(x) with x = sqrt(lam), strictly increasing on
    0 < lam < j_{1,1}^2.
    """
    if not 0.0 < lam < J11 * J11:
        raise ValueError(f"lambda must lie in (0, j11^2) = (0, {J11 * J11}), got {lam}")
    x = math.sqrt(lam)
    j1 = bessel_j(1, x)
    dj1 = bessel_j(0, x) - j1 / x
    return -2.0 * math.pi * x * dj1 / j1


def threshold_alpha() -> tuple[float, float]:
    """Root x* of -2 J_1'(x) / (x J_1(x)) = 1 on (j'_{1,1}, j_{1,1}) and alpha* = pi x*^2.

    For alpha above alpha* the disk value pi lambda_2(D; alpha / 2 pi) falls
    below alpha.
    """

    def h(x):
        j1 = bessel_j(1, x)
        dj1 = bessel_j(0, x) - j1 / x
        return -2.0 * dj1 - x * j1

    x_star = brentq(h, J11_PRIME, J11 - 1e-12, xtol=1e-15, rtol=1e-15)
    return x_star, alpha_from_lambda2(x_star * x_star)


def annulus_mode_roots(n: int, eps: float) -> np.ndarray:
    """Steklov values of mode n >= 1 on eps < r < 1 from the 2x2 determinant.

    u = A r^n + B r^-n with u_r(1) = sigma u(1) and -u_r(eps) = sigma u(eps);
    the inner row is multiplied by eps^(n+1) to keep the pencil well scaled.
    """
    q = eps ** (2 * n)
    a0 = np.array([[n, -n], [-n * q, n]], dtype=float)
    a1 = np.array([[-1.0, -1.0], [-q * eps, -eps]])
    roots = sla.eigvals(a0, -a1)
    return np.sort(roots.real)


def annulus_steklov(eps: float, K: int = 6) -> Spectrum:
    """First K nonzero Steklov eigenvalues (with multiplicity) of the annulus eps < r < 1."""
    if not 0.01 <= eps <= 0.99:
        raise ValueError("eps must lie in [0.01, 0.99]")
    records = [SpectrumRecord((1.0 + eps) / (eps * math.log(1.0 / eps)), 1, (0, 1), "steklov")]
    n = 0
    while True:
        n += 1
        lo, hi = annulus_mode_roots(n, eps)
        if len(records) >= K and lo > sorted(r.lam for r in records)[K - 1]:
            break
        for j, sigma in enumerate((lo, hi)):
            records.extend([SpectrumRecord(float(sigma), 2, (n, j + 1), "steklov")] * 2)
        if n > 5000:
            raise RuntimeError("annulus mode enumeration did not terminate")
    spec = Spectrum(records, "steklov")
    spec.records = spec.records[:K]
    return spec
