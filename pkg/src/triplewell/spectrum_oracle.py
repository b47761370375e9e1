"""Brute-force ground truth from finite-difference diagonalization.

Two eigenproblems are discretized on uniform Dirichlet grids:

* the Schroedinger operator -1/2 d^2/dx^2 + V(x) (unit mass), second-order
  central differences, Richardson-extrapolated from N and 2N-1 points;
* the stability operator -d^2/dtau^2 + V''(x_c(tau)) on [-T/2, T/2].

The lowest stability eigenvalue is exponentially small (~e^{-omega T}),
far below the O(h^2) shift a second-order stencil gives to the zero mode,
so that operator uses a fourth-order (pentadiagonal) stencil by default.
Determinant ratios pair eigenvalues of two operators on one grid by index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import eig_banded, eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.sparse import diags
from scipy.sparse.linalg import eigsh

from .errors import BoxTooSmall
from .instanton import InstantonProfile
from .potential import FloatArray, PotentialSpec, evaluate

BOX_RTOL = 1e-6
DEFAULT_POINTS = 4000
DEFAULT_SCHRODINGER_HALF_WIDTH = 3.0


@dataclass(frozen=True)
class GridSpec:
    half_width: float
    points: int = DEFAULT_POINTS
    boundary: str = "dirichlet"

    def __post_init__(self) -> None:
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if int(self.points) < 100:
            raise ValueError(f"need at least 100 grid points, got {self.points}")
        if self.boundary != "dirichlet":
            raise ValueError("only Dirichlet boundaries are supported")
        object.__setattr__(self, "points", int(self.points))

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    def interior(self) -> FloatArray:
        return np.linspace(-self.half_width, self.half_width, self.points)[1:-1]

    def refined(self) -> GridSpec:
        """Same box, half the step."""
        return GridSpec(self.half_width, 2 * self.points - 1, self.boundary)

    def widened(self, factor: float) -> GridSpec:
        """Box scaled by ``factor`` at (nearly) the same step."""
        n = int(round(factor * (self.points - 1))) + 1
        return GridSpec(factor * self.half_width, n, self.boundary)


def _lowest_eigenpairs(potential, h, count, order, kinetic, vectors=False):
    n = potential.size
    if order == 2:
        diag = 2.0 * kinetic / h**2 + potential
        off = np.full(n - 1, -kinetic / h**2)
        if vectors:
            return eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))
        return eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, count - 1)), None
    if order == 4:
        c = kinetic / (12.0 * h**2)
        ab = np.empty((3, n))
        ab[0] = c
        ab[1] = -16.0 * c
        ab[2] = 30.0 * c + potential
        # odd reflection across the Dirichlet wall: u_{-1} = -u_1
        ab[2, 0] -= c
        ab[2, -1] -= c
        e = eig_banded(ab, eigvals_only=True, select="i", select_range=(0, count - 1))
        if not vectors:
            return e, None
        # eig_banded accumulates a dense n x n transform for vectors; shift-invert
        # Lanczos below the spectrum is O(n) per step instead
        mat = diags([ab[0, 2:], ab[1, 1:], ab[2], ab[1, 1:], ab[0, 2:]], [-2, -1, 0, 1, 2], format="csc")
        sigma = e[0] - max(e[-1] - e[0], 1.0)
        _, v = eigsh(mat, k=count, sigma=sigma, which="LM", tol=0.0)
        rayleigh = np.einsum("ij,ij->j", v, mat @ v)
        return e, v[:, np.argsort(rayleigh)]
    raise ValueError(f"stencil order must be 2 or 4, got {order}")


def _schrodinger_levels(spec, grid, count, richardson):
    x = grid.interior()
    e = _lowest_eigenpairs(evaluate(spec, x), grid.step, count, 2, 0.5)[0]
    if not richardson:
        return e
    fine = grid.refined()
    e_fine = _lowest_eigenpairs(evaluate(spec, fine.interior()), fine.step, count, 2, 0.5)[0]
    return (4.0 * e_fine - e) / 3.0


def diagonalize_schrodinger(
    spec: PotentialSpec,
    grid: GridSpec | None = None,
    count: int = 3,
    *,
    richardson: bool = True,
    auto_expand: bool = True,
    max_expansions: int = 8,
) -> FloatArray:
    """Lowest ``count`` levels of H = -1/2 d^2/dx^2 + V, ascending.

    Every result is checked against the same calculation on a box 1.2 times
    wider; a relative shift above BOX_RTOL either widens the box by 1.5
    (``auto_expand``) or raises BoxTooSmall.
    """
    grid = GridSpec(DEFAULT_SCHRODINGER_HALF_WIDTH) if grid is None else grid
    for _ in range(max_expansions + 1):
        e = _schrodinger_levels(spec, grid, count, richardson)
        e_wide = _schrodinger_levels(spec, grid.widened(1.2), count, richardson)
        shift = np.max(np.abs(e_wide - e) / np.maximum(np.abs(e), 1e-300))
        if shift <= BOX_RTOL:
            return e
        if not auto_expand:
            break
        grid = grid.widened(1.5)
    raise BoxTooSmall(
        f"levels move by {shift:.3g} (relative) when the box grows from "
        f"L={grid.half_width:.6g} to {1.2 * grid.half_width:.6g}"
    )


def schrodinger_states(
    spec: PotentialSpec, grid: GridSpec | None = None, count: int = 3
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """(energies, orthonormal eigenvectors as columns, interior grid), no extrapolation."""
    grid = GridSpec(DEFAULT_SCHRODINGER_HALF_WIDTH) if grid is None else grid
    x = grid.interior()
    e, v = _lowest_eigenpairs(evaluate(spec, x), grid.step, count, 2, 0.5, vectors=True)
    return e, v, x


def parities(vectors: FloatArray) -> list[int]:
    """+1 / -1 for even / odd columns on a grid symmetric about 0."""
    overlap = np.sum(vectors * vectors[::-1], axis=0)
    return [int(np.sign(o)) for o in overlap]


def _stability_potential(profile, half_box, grid):
    grid = GridSpec(half_box) if grid is None else grid
    if abs(grid.half_width - half_box) > 1e-12 * half_box:
        raise ValueError("grid half_width must equal half_box")
    if profile.tau[0] > -half_box + 1e-9 or profile.tau[-1] < half_box - 1e-9:
        raise ValueError("profile grid does not cover the box")
    tau = grid.interior()
    return tau, profile.curvature(tau), grid.step


def diagonalize_stability(
    profile: InstantonProfile,
    half_box: float,
    grid: GridSpec | None = None,
    count: int = 3,
    order: int = 4,
) -> FloatArray:
    """Lowest Dirichlet eigenvalues of -d^2/dtau^2 + V''(x_c) on [-T/2, T/2]."""
    _, w, h = _stability_potential(profile, half_box, grid)
    return _lowest_eigenpairs(w, h, count, order, 1.0)[0]


def stability_modes(
    profile: InstantonProfile,
    half_box: float,
    grid: GridSpec | None = None,
    count: int = 3,
    order: int = 4,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Eigenvalues, eigenvectors (columns, unit 2-norm) and interior times."""
    tau, w, h = _stability_potential(profile, half_box, grid)
    e, v = _lowest_eigenpairs(w, h, count, order, 1.0, vectors=True)
    return e, v, tau


class BruteForceRatio(NamedTuple):
    raw: float
    reduced: float


def determinant_ratio_bruteforce(
    curvature: Callable[[FloatArray], FloatArray],
    nu: float,
    half_box: float,
    grid: GridSpec | None = None,
) -> BruteForceRatio:
    """Eigenvalue-product ratio of -d^2 + W against -d^2 + nu^2.

    ``raw`` is prod_j eps_j / eps~_j over all interior modes of the
    second-order discretization; ``reduced`` divides out the lowest eps_0.
    The sign of ``raw`` follows eps_0, which the coarse stencil can push
    slightly negative; ``reduced`` is unaffected.
    """
    grid = GridSpec(half_box) if grid is None else grid
    tau = grid.interior()
    h = grid.step
    off = np.full(tau.size - 1, -1.0 / h**2)
    eps = eigvalsh_tridiagonal(2.0 / h**2 + np.asarray(curvature(tau), dtype=float), off)
    ref = eigvalsh_tridiagonal(np.full(tau.size, 2.0 / h**2 + nu**2), off)
    log_ref = np.sum(np.log(ref))
    raw = float(np.sign(eps[0]) * np.exp(np.sum(np.log(np.abs(eps))) - log_ref))
    reduced = float(np.exp(np.sum(np.log(eps[1:])) - log_ref))
    return BruteForceRatio(raw=raw, reduced=reduced)


def exponential_fit(times, values) -> tuple[float, float]:
    """Least-squares fit values ~ A exp(slope * t); returns (slope, A)."""
    slope, intercept = np.polyfit(np.asarray(times, float), np.log(np.asarray(values, float)), 1)
    return float(slope), float(np.exp(intercept))
