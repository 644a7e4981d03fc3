"""Composite Gauss-Legendre grid on [-pi, 0) and (0, pi] and functions sampled on it.

Every sampled function in the library lives on this grid, so inner products,
Fourier coefficients and Parseval sums share one discrete inner product.
Nodes are interior to each panel; neither 0 nor the endpoints are nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import UsageError
from .problem import LEFT, RIGHT, SIDE_EXTENT, SIDES, ProblemSpec, SolverSettings


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes, weights and barycentric weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    # barycentric weights for Gauss points: (-1)^j sqrt((1 - x_j^2) w_j)
    bary = (-1.0) ** np.arange(order) * np.sqrt((1.0 - x * x) * w)
    return x, w, bary


@dataclass(frozen=True, eq=False)
class SideGrid:
    side: str
    edges: np.ndarray      # panel edges, ascending
    nodes: np.ndarray      # all quadrature nodes, ascending
    weights: np.ndarray
    order: int

    @property
    def panels(self) -> int:
        return len(self.edges) - 1

    def panel_of(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.panels - 1)


@dataclass(frozen=True, eq=False)
class StandardGrid:
    """``panels`` Gauss-Legendre panels of ``order`` nodes per side."""

    order: int
    panels: int

    @classmethod
    def from_settings(cls, settings: SolverSettings) -> "StandardGrid":
        order = settings.quadrature_order
        panels = max(1, math.ceil(settings.grid_points_per_side / order))
        return cls(order, panels)

    @cached_property
    def reference(self):
        return gauss_legendre(self.order)

    @cached_property
    def sides(self) -> dict[str, SideGrid]:
        x, w, _ = self.reference
        out = {}
        for side in SIDES:
            lo, hi = SIDE_EXTENT[side]
            edges = np.linspace(lo, hi, self.panels + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[:-1] + edges[1:])
            nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
            weights = (half[:, None] * w[None, :]).ravel()
            out[side] = SideGrid(side, edges, nodes, weights, self.order)
        return out

    @property
    def left(self) -> SideGrid:
        return self.sides[LEFT]

    @property
    def right(self) -> SideGrid:
        return self.sides[RIGHT]

    @property
    def x(self) -> np.ndarray:
        """All nodes, ascending, left side first."""
        return np.concatenate([self.left.nodes, self.right.nodes])

    @property
    def size(self) -> int:
        return 2 * self.order * self.panels

    def sample(self, func) -> "GridFunction":
        """Evaluate ``func(x)`` (vectorized) on the grid."""
        def on(nodes):
            return np.broadcast_to(np.asarray(func(nodes), dtype=float), nodes.shape).copy()
        return GridFunction(self, on(self.left.nodes), on(self.right.nodes))

    def zeros(self) -> "GridFunction":
        n = self.order * self.panels
        return GridFunction(self, np.zeros(n), np.zeros(n))

    def __eq__(self, other):
        return isinstance(other, StandardGrid) and (self.order, self.panels) == (other.order, other.panels)

    def __hash__(self):
        return hash((self.order, self.panels))

    def partial_rule(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes and weights of the grid's order on [a, b]."""
        x, w, _ = self.reference
        half = 0.5 * (b - a)
        return 0.5 * (a + b) + half * x, half * w


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function sampled on a :class:`StandardGrid`, one array per side."""

    grid: StandardGrid
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        n = self.grid.order * self.grid.panels
        for side in SIDES:
            arr = np.asarray(getattr(self, side), dtype=float)
            if arr.shape != (n,):
                raise UsageError(f"{side} samples have shape {arr.shape}, grid expects ({n},)")
            object.__setattr__(self, side, arr)

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.left, self.right])

    def side(self, side: str) -> np.ndarray:
        return self.left if side == LEFT else self.right

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            check_same_grid(self, other)
            return GridFunction(self.grid, op(self.left, other.left), op(self.right, other.right))
        return GridFunction(self.grid, op(self.left, other), op(self.right, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.left, -self.right)

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.left)), np.max(np.abs(self.right))))

    def __call__(self, x, side: str | None = None) -> np.ndarray:
        """Evaluate off-grid by barycentric interpolation within each panel.

        Points with x < 0 use the left samples and x > 0 the right ones; at
        x = 0 pass ``side`` to choose the one-sided limit.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        if side is None:
            masks = {LEFT: x < 0.0, RIGHT: x >= 0.0}
        else:
            masks = {side: np.ones(x.shape, bool), ({LEFT, RIGHT} - {side}).pop(): np.zeros(x.shape, bool)}
        for s, mask in masks.items():
            if np.any(mask):
                out[mask] = _interpolate(self.grid, s, self.side(s), x[mask])
        return out


def _interpolate(grid: StandardGrid, side: str, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    sg = grid.sides[side]
    ref, _, bary = grid.reference
    p = sg.panel_of(x)
    a, b = sg.edges[p], sg.edges[p + 1]
    t = (2.0 * x - a - b) / (b - a)
    vals = values.reshape(sg.panels, sg.order)[p]
    diff = t[:, None] - ref[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    c = bary[None, :] / diff
    out = (c * vals).sum(axis=1) / c.sum(axis=1)
    rows, cols = np.nonzero(exact)
    out[rows] = vals[rows, cols]
    return out


def check_same_grid(*funcs: GridFunction) -> StandardGrid:
    grid = funcs[0].grid
    for f in funcs[1:]:
        if f.grid != grid:
            raise UsageError("functions are sampled on different grids")
    return grid


def weighted_inner_product(f: GridFunction, g: GridFunction, spec: ProblemSpec,
                           settings: SolverSettings | None = None) -> float:
    """rho12 * int_{-pi}^0 f g dx + rho34 * int_0^pi f g dx by composite Gauss-Legendre."""
    grid = check_same_grid(f, g)
    if settings is not None and grid != StandardGrid.from_settings(settings):
        raise UsageError("samples do not match the grid implied by the settings")
    return float(spec.rho12 * np.dot(grid.left.weights, f.left * g.left)
                 + spec.rho34 * np.dot(grid.right.weights, f.right * g.right))


def weighted_norm_sq(f: GridFunction, spec: ProblemSpec) -> float:
    return weighted_inner_product(f, f, spec)


def differentiate(f: GridFunction) -> GridFunction:
    """Spectral derivative within each panel (polynomial interpolant of the panel's nodes)."""
    grid = f.grid
    ref, _, bary = grid.reference
    D = _diff_matrix(ref, bary)
    out = {}
    for side in SIDES:
        sg = grid.sides[side]
        vals = f.side(side).reshape(sg.panels, sg.order)
        scale = 2.0 / np.diff(sg.edges)
        out[side] = ((vals @ D.T) * scale[:, None]).ravel()
    return GridFunction(grid, out[LEFT], out[RIGHT])


def _diff_matrix(x: np.ndarray, bary: np.ndarray) -> np.ndarray:
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D
