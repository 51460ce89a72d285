"""P1 finite elements for Robin, Neumann and Steklov eigenproblems.

The Robin problem -Δu = λu, ∂u/∂ν + βu = 0 becomes the pencil
(K + βB) u = λ M u.  At desk scale (a few thousand nodes) it is reduced with a
dense Cholesky factor of M, computed once per mesh and reused for every β.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
import math
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq

from robinspec.geometry import ConvexPolygon, Mesh, mesh_convex_polygon

__all__ = [
    "MAX_NODES",
    "AssembledForms",
    "EigResult",
    "assemble",
    "robin_eigs",
    "steklov_schur",
    "steklov_via_robin",
    "richardson",
    "LevelStudy",
    "robin_level_study",
    "steklov_level_study",
    "cached_mesh",
    "beta_derivative",
    "SolverError",
]

MAX_NODES = 5000


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class AssembledForms:
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    boundary_mass: sp.csr_matrix
    boundary_nodes: np.ndarray

    @property
    def n(self) -> int:
        return self.stiffness.shape[0]


@dataclass
class EigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    level: int
    extrapolated: np.ndarray | None = None
    error: np.ndarray | None = None

    def diagnostics(self) -> dict:
        out = {
            "level": self.level,
            "eigenvalues": self.eigenvalues.tolist(),
            "residuals": self.residuals.tolist(),
        }
        if self.extrapolated is not None:
            out["extrapolated"] = self.extrapolated.tolist()
            out["error"] = self.error.tolist()
        return out


def assemble(mesh: Mesh) -> AssembledForms:
    """Exact P1 stiffness, mass and boundary-mass matrices."""
    p = mesh.nodes
    t = mesh.triangles
    n = len(p)
    x, y = p[t, 0], p[t, 1]  # (nt, 3)
    # b_i = y_j - y_k, c_i = x_k - x_j for (i, j, k) cyclic
    b = np.roll(y, -1, axis=1) - np.roll(y, -2, axis=1)
    c = np.roll(x, -2, axis=1) - np.roll(x, -1, axis=1)
    area = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    if np.any(area <= 1e-14 * np.abs(area).max()):
        raise ValueError("degenerate or clockwise triangle in mesh")

    k_loc = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area[:, None, None])
    m_loc = area[:, None, None] * (np.ones((3, 3)) + np.eye(3)) / 12.0
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    stiffness = sp.coo_matrix((k_loc.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mass = sp.coo_matrix((m_loc.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    e = mesh.boundary_edges
    length = mesh.boundary_lengths()
    b_loc = length[:, None, None] * (np.ones((2, 2)) + np.eye(2)) / 6.0
    brow = np.repeat(e, 2, axis=1).ravel()
    bcol = np.tile(e, (1, 2)).ravel()
    bmass = sp.coo_matrix((b_loc.ravel(), (brow, bcol)), shape=(n, n)).tocsr()

    return AssembledForms(stiffness, mass, bmass, mesh.boundary_nodes)


class _Reduced:
    """K and B in the basis orthonormal for M, kept per mesh."""

    def __init__(self, mesh: Mesh):
        if mesh.n_nodes > MAX_NODES:
            raise ValueError(f"mesh has {mesh.n_nodes} nodes; dense cap is {MAX_NODES}")
        self.forms = assemble(mesh)
        try:
            self.chol = sla.cholesky(self.forms.mass.toarray(), lower=True)
        except sla.LinAlgError as exc:
            raise SolverError(f"mass matrix factorization failed: {exc}") from None
        self.k = self._congruence(self.forms.stiffness.toarray())
        self.b = self._congruence(self.forms.boundary_mass.toarray())

    def _congruence(self, a):
        tmp = sla.solve_triangular(self.chol, a, lower=True)
        out = sla.solve_triangular(self.chol, tmp.T, lower=True)
        return 0.5 * (out + out.T)


# LRU of dense reductions, bounded by memory: three n x n float64 arrays each
CACHE_BYTES = 1_500_000_000
_CACHE: "OrderedDict[int, tuple[Mesh, _Reduced]]" = OrderedDict()


def _reduced(mesh: Mesh) -> _Reduced:
    key = id(mesh)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is mesh:
        _CACHE.move_to_end(key)
        return hit[1]
    red = _Reduced(mesh)
    _CACHE[key] = (mesh, red)
    while len(_CACHE) > 1 and sum(24 * m.n_nodes**2 for m, _ in _CACHE.values()) > CACHE_BYTES:
        _CACHE.popitem(last=False)
    return red


def robin_eigs(mesh: Mesh, beta: float, k: int = 3) -> EigResult:
    """Smallest k eigenpairs of (K + beta B) u = lambda M u.

    ``beta`` is the actual Robin coefficient on this mesh; perimeter scaling
    is the caller's job.  Eigenvectors are M-normalised with nonnegative mean.
    """
    if not 1 <= k <= min(10, mesh.n_nodes):
        raise ValueError("k must be in 1..10")
    red = _reduced(mesh)
    try:
        vals, vecs = sla.eigh(red.k + beta * red.b, subset_by_index=[0, k - 1])
    except sla.LinAlgError as exc:
        raise SolverError(str(exc)) from None
    u = sla.solve_triangular(red.chol.T, vecs, lower=False)
    f = red.forms
    mass_u = f.mass @ u
    signs = np.where(mass_u.sum(axis=0) < 0, -1.0, 1.0)
    u = u * signs
    mass_u = mass_u * signs
    resid_vec = f.stiffness @ u + beta * (f.boundary_mass @ u) - mass_u * vals
    residuals = np.linalg.norm(resid_vec, axis=0)
    scale = 1.0 + abs(beta) + np.abs(vals)
    if np.any(residuals > 1e-8 * scale):
        raise SolverError(f"eigen-residual contract violated: {residuals}")
    return EigResult(vals, u, residuals, mesh.level)


def beta_derivative(mesh: Mesh, beta: float, k: int = 3) -> np.ndarray:
    """d lambda_i / d beta = u_i^T B u_i for the first k M-normalised eigenvectors."""
    res = robin_eigs(mesh, beta, k)
    u = res.eigenvectors
    return np.einsum("ij,ij->j", u, _reduced(mesh).forms.boundary_mass @ u)


def steklov_schur(mesh: Mesh, k: int = 4) -> EigResult:
    """Discrete Steklov eigenpairs from the Dirichlet-to-Neumann Schur complement.

    Returned eigenvectors hold boundary values only, ordered like
    ``mesh.boundary_nodes``; sigma_0 = 0 is included.
    """
    f = assemble(mesh)
    bnd = f.boundary_nodes
    interior = np.setdiff1d(np.arange(f.n), bnd)
    kmat = f.stiffness.tocsr()
    k_bb = kmat[bnd][:, bnd].toarray()
    k_bi = kmat[bnd][:, interior]
    k_ii = kmat[interior][:, interior].tocsc()
    if len(interior):
        try:
            lu = spla.splu(k_ii)
        except RuntimeError as exc:
            raise SolverError(f"interior stiffness is singular: {exc}") from None
        schur = k_bb - k_bi @ lu.solve(k_bi.T.toarray())
    else:
        schur = k_bb
    schur = 0.5 * (schur + schur.T)
    b_bb = f.boundary_mass[bnd][:, bnd].toarray()
    k = min(k, len(bnd))
    vals, vecs = sla.eigh(schur, b_bb, subset_by_index=[0, k - 1])
    residuals = np.linalg.norm(schur @ vecs - (b_bb @ vecs) * vals, axis=0)
    return EigResult(vals, vecs, residuals, mesh.level)


def steklov_via_robin(mesh: Mesh, c: float = 8.0, xtol: float = 1e-12) -> float:
    """First positive Steklov eigenvalue as the zero crossing of the second Robin eigenvalue.

    Finds the greatest a < 0 with lambda_2(K + (a/L) B, M) = 0 and returns -a/L.
    The bracket [-2 pi c, 0) is doubled until lambda_2 changes sign.
    """
    perimeter = mesh.perimeter

    def second(a):
        return robin_eigs(mesh, a / perimeter, 2).eigenvalues[1]

    hi = 0.0
    if second(hi) <= 0:
        raise SolverError("second Neumann eigenvalue is not positive; mesh disconnected?")
    lo = -2.0 * math.pi * c
    for _ in range(12):
        if second(lo) < 0:
            break
        hi, lo = lo, 2.0 * lo
    else:
        raise SolverError("no sign change of lambda_2 found; enlarge the bracket")
    root = brentq(second, lo, hi, xtol=xtol, rtol=1e-14)
    return -root / perimeter


def richardson(values: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Extrapolate P1 eigenvalues assuming an O(h^2) leading error.

    ``values`` are (h, v) pairs, coarse to fine with h halving.  Returns
    (extrapolated value, error estimate).  If three or more levels show the
    differences changing sign, the finest value is returned unextrapolated
    with error |v_fine - v_coarse|.
    """
    if len(values) < 2:
        raise ValueError("need at least two levels")
    pairs = sorted(values, key=lambda hv: -hv[0])
    (h0, v0), (h1, v1) = pairs[-2], pairs[-1]
    ratio = h0 / h1
    if not math.isclose(ratio, 2.0, rel_tol=1e-6):
        raise ValueError(f"levels must halve h, got ratio {ratio}")
    diffs = np.diff([v for _, v in pairs])
    if len(diffs) >= 2 and np.any(np.sign(diffs[1:]) * np.sign(diffs[:-1]) < 0):
        return v1, abs(v1 - v0)
    delta = v1 - v0
    return v1 + delta / 3.0, abs(delta) / 3.0


@dataclass
class LevelStudy:
    """Per-level values of the first k eigenvalues plus their Richardson extrapolation."""

    levels: list[int]
    values: np.ndarray  # (n_levels, k)
    extrapolated: np.ndarray
    error: np.ndarray
    n_nodes: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "levels": self.levels,
            "values": self.values.tolist(),
            "extrapolated": self.extrapolated.tolist(),
            "error": self.error.tolist(),
            "n_nodes": self.n_nodes,
        }


def _study(levels, per_level, meshes):
    values = np.array(per_level)
    extrap = np.empty(values.shape[1])
    err = np.empty(values.shape[1])
    for j in range(values.shape[1]):
        # h of a red-refined mesh halves exactly with each level
        extrap[j], err[j] = richardson([(2.0**-lev, v) for lev, v in zip(levels, values[:, j])])
    return LevelStudy(list(levels), values, extrap, err, [m.n_nodes for m in meshes])


_MESHES: dict = {}


def cached_mesh(poly: ConvexPolygon, level: int) -> Mesh:
    """Meshes keyed by polygon and level so repeated sweeps reuse factorizations."""
    key = (poly, level)
    mesh = _MESHES.get(key)
    if mesh is None:
        if len(_MESHES) > 64:
            _MESHES.clear()
        mesh = mesh_convex_polygon(poly, level)
        _MESHES[key] = mesh
    return mesh


def robin_level_study(poly: ConvexPolygon, beta: float, k: int = 3, levels: Sequence[int] = (3, 4)) -> LevelStudy:
    meshes = [cached_mesh(poly, lev) for lev in levels]
    per_level = [robin_eigs(m, beta, k).eigenvalues for m in meshes]
    return _study(levels, per_level, meshes)


def steklov_level_study(poly: ConvexPolygon, k: int = 3, levels: Sequence[int] = (3, 4)) -> LevelStudy:
    meshes = [cached_mesh(poly, lev) for lev in levels]
    per_level = [steklov_schur(m, k).eigenvalues for m in meshes]
    return _study(levels, per_level, meshes)
