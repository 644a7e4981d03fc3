"""Shooting integrator for -y'' + q(x) y = lambda y on one side of the interface."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernel
from .errors import IntegrationError, UsageError
from .problem import LEFT, RIGHT, SIDE_EXTENT, PiecewisePoly, SolverSettings

# Fraction of the local wavelength scale used as the step ceiling.
MAX_STEP_PHASE = 0.1
# Step used by the fixed-step mode, same scaling.
FIXED_STEP_PHASE = 0.02


class StateVector(NamedTuple):
    y: float
    dy: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States at ``nodes`` in the order of integration.

    ``nodes[0]`` is the starting abscissa and ``nodes[-1]`` the far end.
    """

    lam: float
    side: str
    nodes: np.ndarray
    y: np.ndarray
    dy: np.ndarray

    @property
    def endpoint_state(self) -> StateVector:
        return StateVector(float(self.y[-1]), float(self.dy[-1]))

    @property
    def initial_state(self) -> StateVector:
        return StateVector(float(self.y[0]), float(self.dy[0]))

    def index(self, x: float) -> int:
        hits = np.flatnonzero(self.nodes == x)
        if hits.size == 0:
            raise UsageError(f"x={x!r} is not a node of this trajectory")
        return int(hits[0])

    def state_at(self, x: float) -> StateVector:
        i = self.index(x)
        return StateVector(float(self.y[i]), float(self.dy[i]))

    def scaled(self, c: float) -> "Trajectory":
        return Trajectory(self.lam, self.side, self.nodes, c * self.y, c * self.dy)


def side_of(start: float, stop: float) -> str:
    lo, hi = min(start, stop), max(start, stop)
    if lo < -math.pi - 1e-12 or hi > math.pi + 1e-12:
        raise UsageError(f"[{lo!r}, {hi!r}] leaves the domain [-pi, pi]")
    if hi <= 0.0:
        return LEFT
    if lo >= 0.0:
        return RIGHT
    raise UsageError(f"[{lo!r}, {hi!r}] straddles the interface at 0")


def max_step(lam: float, qmin: float) -> float:
    """Step ceiling tied to the local wavelength, 0.1 / sqrt(max(lam, lam - min q, 1))."""
    return MAX_STEP_PHASE / math.sqrt(max(lam, lam - qmin, 1.0))


def fixed_step(lam: float, qmin: float) -> float:
    return FIXED_STEP_PHASE / math.sqrt(max(lam, lam - qmin, 1.0))


def propagate(q: PiecewisePoly, lam: float, start: float, stop: float, init,
              settings: SolverSettings, nodes=None) -> Trajectory:
    """Integrate from ``start`` to ``stop`` (either direction) within one side.

    ``nodes`` are extra abscissae strictly between the two ends at which the
    state is recorded; the integrator lands exactly on each of them. The
    returned trajectory's nodes are ``[start, *nodes (travel order), stop]``.
    """
    side = side_of(start, stop)
    y0, dy0 = (float(v) for v in init)
    if not (math.isfinite(y0) and math.isfinite(dy0)):
        raise UsageError("initial state must be finite")
    direction = 1.0 if stop >= start else -1.0
    if nodes is None:
        inner = np.empty(0)
    else:
        inner = np.asarray(nodes, dtype=float).ravel()
        lo, hi = min(start, stop), max(start, stop)
        if inner.size and (inner.min() <= lo or inner.max() >= hi):
            raise UsageError("requested nodes must lie strictly between start and stop")
        inner = np.sort(inner)
        if direction < 0:
            inner = inner[::-1]
    targets = np.concatenate([inner, [float(stop)]])
    lam = float(lam)
    hmax = max_step(lam, q.minimum)
    hfix = fixed_step(lam, q.minimum) if settings.fixed_step else 0.0
    ys, dys, status, fail_x, _ = kernel.integrate(
        lam, float(start), y0, dy0, targets, q.breaks, q.bases, q.coefs,
        settings.rel_tol, settings.abs_tol, hmax, hfix)
    if status == 1:
        raise IntegrationError(fail_x, f"step size underflow on the {side} side")
    if status == 2:
        raise IntegrationError(fail_x, f"non-finite state on the {side} side")
    return Trajectory(
        lam, side,
        np.concatenate([[float(start)], targets]),
        np.concatenate([[y0], ys]),
        np.concatenate([[dy0], dys]),
    )


def wronskian_at(u: Trajectory, v: Trajectory, x: float) -> float:
    """W(u, v; x) = u(x) v'(x) - u'(x) v(x)."""
    if u.side != v.side or u.lam != v.lam:
        raise UsageError("Wronskian needs trajectories of the same side and lambda")
    a = u.state_at(x)
    b = v.state_at(x)
    return a.y * b.dy - a.dy * b.y


def wronskian(u: Trajectory, v: Trajectory) -> np.ndarray:
    """W at every common node, for trajectories sharing the same node array."""
    if u.side != v.side or u.lam != v.lam or not np.array_equal(u.nodes, v.nodes):
        raise UsageError("Wronskian profile needs trajectories on identical nodes")
    return u.y * v.dy - u.dy * v.y


__all__ = ["StateVector", "Trajectory", "propagate", "wronskian_at", "wronskian",
           "max_step", "side_of", "SIDE_EXTENT"]
