"""Green's function, resolvent, spectral kernel series and the trace identity.

G(x, s; lam) = phi(min(x, s)) chi(max(x, s)) / w(lam), and the resolvent

    y(x) = rho12 * int_{-pi}^0 G(x, s) f(s) ds + rho34 * int_0^pi G(x, s) f(s) ds

solves y'' + (lam - q) y = f with all four boundary/transmission conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NearSingularError, UsageError
from .grid import GridFunction, StandardGrid, differentiate
from .problem import LEFT, RIGHT, ProblemSpec, SolverSettings
from .spectral import (SolutionBranch, Spectrum, _bisect, boundary_residuals, build_chi,
                       build_phi, char_value, characteristic, transmission_residuals)

#: Overall sign of the resolvent. With w = rho12*W(phi, chi) on the left the
#: weighted Green integral solves y'' + (lam - q) y = +f; the regression test
#: ``test_resolvent_sign_minimizes_residual`` pins this choice.
RESOLVENT_SIGN = 1.0


@dataclass(frozen=True, eq=False)
class GreenEvaluator:
    """phi, chi and w cached at a non-eigenvalue lambda."""

    lam: float
    phi: SolutionBranch
    chi: SolutionBranch
    w: float
    spec: ProblemSpec
    settings: SolverSettings

    @property
    def grid(self) -> StandardGrid:
        return self.phi.grid

    def __call__(self, x, s):
        return green_eval(self, x, s)

    def diagonal(self) -> GridFunction:
        """G(x, x; lam) on the grid."""
        pv, _ = self.phi.samples()
        cv, _ = self.chi.samples()
        return pv * cv * (1.0 / self.w)


def _near_eigenvalue(spec, lam, settings, w):
    """Nearest eigenvalue if one lies within root_tol of ``lam``, else None."""
    tol = settings.root_tol
    if w == 0.0:
        return lam
    lo, hi = lam - tol, lam + tol
    wlo, whi = char_value(spec, lo, settings), char_value(spec, hi, settings)
    for a, fa, b, fb in ((lo, wlo, lam, w), (lam, w, hi, whi)):
        if fa == 0.0:
            return a
        if (fa < 0.0) != (fb < 0.0):
            return _bisect(lambda v: char_value(spec, v, settings), a, fa, b, fb, tol * 1e-3)
    return None


def green_evaluator(spec: ProblemSpec, lam: float, settings: SolverSettings,
                    grid: StandardGrid | None = None) -> GreenEvaluator:
    grid = StandardGrid.from_settings(settings) if grid is None else grid
    sample = characteristic(spec, lam, settings)
    nearest = _near_eigenvalue(spec, lam, settings, sample.w)
    if nearest is not None:
        raise NearSingularError(lam, nearest)
    phi = build_phi(spec, lam, settings, grid)
    chi = build_chi(spec, lam, settings, grid)
    return GreenEvaluator(float(lam), phi, chi, sample.w, spec, settings)


def green_eval(g: GreenEvaluator, x, s):
    """G(x, s; lam) for x, s in [-pi, 0) U (0, pi]; broadcasts over arrays."""
    x, s = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(s, dtype=float))
    if np.any(x == 0.0) or np.any(s == 0.0):
        raise UsageError("the Green's function is defined only for x, s != 0 (interface point)")
    if np.any(np.abs(x) > math.pi) or np.any(np.abs(s) > math.pi):
        raise UsageError("x and s must lie in [-pi, pi]")
    lo = np.minimum(x, s).ravel()
    hi = np.maximum(x, s).ravel()
    p, _ = g.phi.evaluate(g.spec, g.settings, lo)
    c, _ = g.chi.evaluate(g.spec, g.settings, hi)
    out = (p * c / g.w).reshape(x.shape)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ResolventResult:
    lam: float
    input_f: GridFunction
    output_y: GridFunction
    output_dy: GridFunction
    residual_norm: float
    condition_residuals: tuple[float, float, float, float]  # interface a, interface b, y(-pi), y(pi)
    endpoint_states: dict = field(default_factory=dict)


def as_evaluator(f, grid: StandardGrid):
    """Turn a GridFunction or a vectorized callable into (callable, samples)."""
    if isinstance(f, GridFunction):
        if f.grid != grid:
            raise UsageError("f is sampled on a different grid")
        return f, f
    samples = grid.sample(f)
    return (lambda x: np.broadcast_to(np.asarray(f(x), dtype=float), np.shape(x))), samples


def _partial_nodes(grid: StandardGrid, side: str):
    """Per-node Gauss rules on [panel start, x_i] and [x_i, panel end]."""
    sg = grid.sides[side]
    ref, wref, _ = grid.reference
    m = grid.order
    p = np.repeat(np.arange(sg.panels), m)
    a, b, x = sg.edges[p], sg.edges[p + 1], sg.nodes
    hl = 0.5 * (x - a)
    hr = 0.5 * (b - x)
    left_nodes = (0.5 * (a + x))[:, None] + hl[:, None] * ref[None, :]
    right_nodes = (0.5 * (x + b))[:, None] + hr[:, None] * ref[None, :]
    return p, left_nodes, hl[:, None] * wref[None, :], right_nodes, hr[:, None] * wref[None, :]


def apply_resolvent(spec: ProblemSpec, lam: float, f, settings: SolverSettings,
                    grid: StandardGrid | None = None,
                    evaluator: GreenEvaluator | None = None) -> ResolventResult:
    """Apply the weighted Green integral operator to ``f`` at a non-eigenvalue ``lam``.

    Each side's integral is split at x so the kink of G along s = x never
    falls inside a Gauss panel.
    """
    grid = StandardGrid.from_settings(settings) if grid is None else grid
    g = green_evaluator(spec, lam, settings, grid) if evaluator is None else evaluator
    fe, fs = as_evaluator(f, grid)
    rho = {LEFT: spec.rho12, RIGHT: spec.rho34}
    phi_v, phi_d = g.phi.samples()
    chi_v, chi_d = g.chi.samples()

    panel_phi, panel_chi, partials = {}, {}, {}
    for side in (LEFT, RIGHT):
        sg = grid.sides[side]
        wf = sg.weights * fs.side(side)
        panel_phi[side] = (wf * phi_v.side(side)).reshape(sg.panels, -1).sum(axis=1)
        panel_chi[side] = (wf * chi_v.side(side)).reshape(sg.panels, -1).sum(axis=1)
        p, ln, lw, rn, rw = _partial_nodes(grid, side)
        sign = -1.0 if side == LEFT else 1.0
        # evaluate() assigns sides by sign bit; keep left points negative
        ph, _ = g.phi.evaluate(spec, settings, sign * np.abs(ln.ravel()))
        ch, _ = g.chi.evaluate(spec, settings, sign * np.abs(rn.ravel()))
        part_a = (lw * ph.reshape(ln.shape) * fe(ln)).sum(axis=1)
        part_b = (rw * ch.reshape(rn.shape) * fe(rn)).sum(axis=1)
        partials[side] = (p, part_a, part_b)

    tot_phi = {s: rho[s] * panel_phi[s].sum() for s in (LEFT, RIGHT)}
    tot_chi = {s: rho[s] * panel_chi[s].sum() for s in (LEFT, RIGHT)}
    ys, dys = {}, {}
    for side in (LEFT, RIGHT):
        p, part_a, part_b = partials[side]
        before = np.concatenate([[0.0], np.cumsum(panel_phi[side])])[p]
        after = np.concatenate([np.cumsum(panel_chi[side][::-1])[::-1], [0.0]])[p + 1]
        A = rho[side] * (before + part_a)
        B = rho[side] * (after + part_b)
        if side == LEFT:
            B = B + tot_chi[RIGHT]
        else:
            A = A + tot_phi[LEFT]
        ys[side] = RESOLVENT_SIGN * (chi_v.side(side) * A + phi_v.side(side) * B) / g.w
        dys[side] = RESOLVENT_SIGN * (chi_d.side(side) * A + phi_d.side(side) * B) / g.w

    y = GridFunction(grid, ys[LEFT], ys[RIGHT])
    dy = GridFunction(grid, dys[LEFT], dys[RIGHT])

    a_all = tot_phi[LEFT] + tot_phi[RIGHT]
    b_all = tot_chi[LEFT] + tot_chi[RIGHT]

    def combine(phi_state, chi_state, A, B):
        return tuple(RESOLVENT_SIGN * (c * A + p * B) / g.w for p, c in zip(phi_state, chi_state))

    states = {
        "-pi": combine(g.phi.at_minus_pi, g.chi.at_minus_pi, 0.0, b_all),
        "0-": combine(g.phi.at_zero_minus, g.chi.at_zero_minus, tot_phi[LEFT], tot_chi[RIGHT]),
        "0+": combine(g.phi.at_zero_plus, g.chi.at_zero_plus, tot_phi[LEFT], tot_chi[RIGHT]),
        "pi": combine(g.phi.at_pi, g.chi.at_pi, a_all, 0.0),
    }
    t1, t2 = transmission_residuals(spec.transmission, states["0-"], states["0+"])
    b3, b4 = boundary_residuals(spec, states["-pi"], states["pi"])

    d2y = differentiate(dy)
    q = grid.sample(lambda x: spec.potential(x))
    residual = d2y + (q * -1.0 + lam) * y - fs
    return ResolventResult(float(lam), fs, y, dy, residual.max_abs(), (t1, t2, b3, b4), states)


def kernel_series(spectrum: Spectrum, t: float, n_terms: int, x, s, tol: float = 1e-9):
    """Partial sum over n < n_terms of phi_n(x) phi_n(s) / (t - lambda_n)."""
    spectrum.require(n_terms)
    ev = spectrum.eigenvalues[:n_terms]
    if n_terms and np.min(np.abs(t - ev)) <= tol:
        k = int(np.argmin(np.abs(t - ev)))
        raise NearSingularError(t, ev[k])
    x, s = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(s, dtype=float))
    total = np.zeros(x.shape)
    for n in range(n_terms):
        pair = spectrum[n]
        total = total + pair(x.ravel()).reshape(x.shape) * pair(s.ravel()).reshape(x.shape) / (t - ev[n])
    return float(total) if total.ndim == 0 else total


@dataclass(frozen=True, eq=False)
class CarlemanReport:
    t: float
    lhs: float
    rhs_partial: float
    n_terms: int
    counting_function: list  # (lambda_n, N(lambda_n)) steps
    eigenvalues: np.ndarray = field(repr=False, default=None)

    def partial_sum(self, n_terms: int) -> float:
        """sum over n < n_terms of 1/(t - lambda_n); 0 for n_terms = 0."""
        if n_terms > len(self.eigenvalues):
            raise UsageError(f"only {len(self.eigenvalues)} eigenvalues available")
        return float(np.sum(1.0 / (self.t - self.eigenvalues[:n_terms])))

    @property
    def relative_gap(self) -> float:
        return abs(self.rhs_partial - self.lhs) / abs(self.lhs)

    def count_at(self, lam: float) -> int:
        """N(lam) = #{n : lambda_n <= lam} over the computed eigenvalues."""
        return int(np.searchsorted(self.eigenvalues, lam, side="right"))


def carleman_report(spec: ProblemSpec, spectrum: Spectrum, t: float, settings: SolverSettings,
                    n_terms: int | None = None, grid: StandardGrid | None = None) -> CarlemanReport:
    """Weighted integral of G(x, x; t) against the partial sums of 1/(t - lambda_n)."""
    ev = spectrum.eigenvalues
    n_terms = len(ev) if n_terms is None else n_terms
    if n_terms > len(ev):
        raise UsageError(f"{n_terms} terms requested but only {len(ev)} eigenvalues available")
    if len(ev) and np.min(np.abs(t - ev)) <= settings.root_tol:
        k = int(np.argmin(np.abs(t - ev)))
        raise NearSingularError(t, ev[k])
    grid = StandardGrid.from_settings(settings) if grid is None else grid
    g = green_evaluator(spec, t, settings, grid)
    diag = g.diagonal()
    lhs = float(spec.rho12 * np.dot(grid.left.weights, diag.left)
                + spec.rho34 * np.dot(grid.right.weights, diag.right))
    rhs = float(np.sum(1.0 / (t - ev[:n_terms])))
    counting = [(float(lam), n + 1) for n, lam in enumerate(ev)]
    return CarlemanReport(float(t), lhs, rhs, n_terms, counting, ev.copy())


__all__ = ["GreenEvaluator", "ResolventResult", "CarlemanReport", "RESOLVENT_SIGN",
           "green_evaluator", "green_eval", "apply_resolvent", "kernel_series", "carleman_report"]
