"""Fourier coefficients in the eigenfunction basis, reconstruction and Parseval checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearSingularError, UsageError
from .grid import GridFunction, StandardGrid
from .green import RESOLVENT_SIGN, apply_resolvent
from .problem import ProblemSpec, SolverSettings
from .spectral import Spectrum


@dataclass(frozen=True, eq=False)
class ExpansionResult:
    coefficients: np.ndarray
    n_terms: int
    sup_error: float
    parseval_gap: float
    norm_sq: float

    @property
    def coefficient_energy(self) -> float:
        return float(np.sum(self.coefficients ** 2))


def _weights(spec: ProblemSpec, grid: StandardGrid) -> np.ndarray:
    """Quadrature weights times the side weights rho12 / rho34."""
    return np.concatenate([spec.rho12 * grid.left.weights, spec.rho34 * grid.right.weights])


def _check_grid(f: GridFunction, spectrum: Spectrum):
    if spectrum.grid is None:
        raise UsageError("spectrum carries no eigenfunction samples")
    if f.grid != spectrum.grid:
        raise UsageError("f and the eigenfunctions are sampled on different grids")


def fourier_coefficients(f: GridFunction, spectrum: Spectrum, spec: ProblemSpec,
                         settings: SolverSettings | None = None,
                         n_terms: int | None = None) -> np.ndarray:
    """c_n = rho12 int_{-pi}^0 f phi_n + rho34 int_0^pi f phi_n, n < n_terms.

    Uses the same nodes and weights as the inner product, so orthonormality
    and Parseval are judged in one discrete inner product.
    """
    _check_grid(f, spectrum)
    n = len(spectrum) if n_terms is None else n_terms
    spectrum.require(n)
    if n == 0:
        return np.zeros(0)
    return spectrum.matrix(n) @ (_weights(spec, f.grid) * f.values)


def evaluate_series(coefficients, spectrum: Spectrum, x=None):
    """sum_n c_n phi_n on the grid (``x=None``, returns a GridFunction) or at points ``x``."""
    c = np.asarray(coefficients, dtype=float)
    spectrum.require(len(c))
    grid = spectrum.grid
    if x is None:
        if len(c) == 0:
            return grid.zeros()
        vals = c @ spectrum.matrix(len(c))
        half = grid.size // 2
        return GridFunction(grid, vals[:half], vals[half:])
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape)
    for cn, pair in zip(c, spectrum.pairs):
        out += cn * pair(x)
    return out


def parseval_check(f: GridFunction, spectrum: Spectrum, spec: ProblemSpec,
                   settings: SolverSettings | None = None,
                   n_terms: int | None = None) -> ExpansionResult:
    """Weighted norm^2 of f against sum c_n^2, plus the sup reconstruction error."""
    _check_grid(f, spectrum)
    n = len(spectrum) if n_terms is None else n_terms
    c = fourier_coefficients(f, spectrum, spec, settings, n)
    norm_sq = float(np.dot(_weights(spec, f.grid), f.values ** 2))
    series = evaluate_series(c, spectrum)
    sup = (f - series).max_abs()
    return ExpansionResult(c, n, sup, norm_sq - float(np.sum(c ** 2)), norm_sq)


def resolvent_series(coefficients, spectrum: Spectrum, lam: float, tol: float = 1e-9) -> GridFunction:
    """sum_n c_n phi_n / (lam - lambda_n) on the grid."""
    c = np.asarray(coefficients, dtype=float)
    ev = spectrum.eigenvalues[:len(c)]
    if len(c) and np.min(np.abs(lam - ev)) <= tol:
        k = int(np.argmin(np.abs(lam - ev)))
        raise NearSingularError(lam, ev[k])
    return evaluate_series(c / (lam - ev), spectrum)


def resolvent_spectral_check(f, spectrum: Spectrum, spec: ProblemSpec, lam: float,
                             settings: SolverSettings, n_terms: int | None = None) -> float:
    """Max gap on the grid between the resolvent and its eigenfunction expansion."""
    grid = spectrum.grid
    result = apply_resolvent(spec, lam, f, settings, grid)
    n = len(spectrum) if n_terms is None else n_terms
    c = fourier_coefficients(result.input_f, spectrum, spec, settings, n)
    series = resolvent_series(c, spectrum, lam, settings.root_tol) * RESOLVENT_SIGN
    return (result.output_y - series).max_abs()


__all__ = ["ExpansionResult", "fourier_coefficients", "evaluate_series", "parseval_check",
           "resolvent_series", "resolvent_spectral_check"]
