"""Fundamental solutions, the characteristic function and the eigenvalue search.

phi starts at -pi from (sin alpha, -cos alpha) and chi at pi from
(-sin beta, cos beta); each is carried across x = 0 by the linear map that
makes both transmission conditions hold. With w1 = W(phi, chi) on the left
and w2 on the right, rho12 * w1 == rho34 * w2, and that common value w(lambda)
vanishes exactly at the eigenvalues.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConsistencyError, DegenerateEigenfunctionError, UsageError
from .grid import GridFunction, StandardGrid, weighted_inner_product
from .integrate import StateVector, Trajectory, propagate
from .problem import LEFT, RIGHT, ProblemSpec, SolverSettings, TransmissionMatrix

log = logging.getLogger(__name__)

PHI = "phi"
CHI = "chi"

#: Relative tolerance of the rho12*w1 == rho34*w2 cross-check.
IDENTITY_RTOL = 1e-8
#: Scan spacing: in lambda for lambda <= 0, in sqrt(lambda) above.
SCAN_STEP = 0.25
#: A dip of |w| below this fraction of its neighbours without a sign change is flagged.
DOUBLE_ROOT_RATIO = 1e-6


def transfer_right(T: TransmissionMatrix, state) -> StateVector:
    """(y, y') at 0+ from (y, y') at 0-, solving both transmission conditions."""
    r = T.rho
    y, dy = state
    r34 = r[3, 4]
    return StateVector((r[2, 3] * y + r[1, 3] * dy) / r34,
                       -(r[2, 4] * y + r[1, 4] * dy) / r34)


def transfer_left(T: TransmissionMatrix, state) -> StateVector:
    """(y, y') at 0- from (y, y') at 0+; inverse of :func:`transfer_right`."""
    r = T.rho
    y, dy = state
    r12 = r[1, 2]
    return StateVector(-(r[1, 4] * y + r[1, 3] * dy) / r12,
                       (r[2, 4] * y + r[2, 3] * dy) / r12)


def transmission_residuals(T: TransmissionMatrix, minus, plus) -> tuple[float, float]:
    """Values of the two interface conditions for the one-sided states at 0."""
    (y0, d0), (y1, d1) = minus, plus
    a, b = T.row_a, T.row_b
    return (a[0] * d0 + a[1] * y0 + a[2] * d1 + a[3] * y1,
            b[0] * d0 + b[1] * y0 + b[2] * d1 + b[3] * y1)


def boundary_residuals(spec: ProblemSpec, at_minus_pi, at_pi) -> tuple[float, float]:
    al, be = spec.angles.alpha, spec.angles.beta
    return (math.cos(al) * at_minus_pi[0] + math.sin(al) * at_minus_pi[1],
            math.cos(be) * at_pi[0] + math.sin(be) * at_pi[1])


@dataclass(frozen=True, eq=False)
class SolutionBranch:
    """phi or chi at one lambda, as a left and a right trajectory.

    Trajectories run in the direction of integration: for phi the left one
    goes -pi -> 0 and the right one 0 -> pi; for chi the reverse. When built
    on a grid, the interior nodes of each trajectory are that side's grid
    nodes.
    """

    lam: float
    kind: str
    left: Trajectory
    right: Trajectory
    grid: StandardGrid | None = None

    def trajectory(self, side: str) -> Trajectory:
        return self.left if side == LEFT else self.right

    def _ends(self, side):
        tr = self.trajectory(side)
        return {tr.nodes[0]: tr.initial_state, tr.nodes[-1]: tr.endpoint_state}

    @property
    def at_minus_pi(self) -> StateVector:
        return self._ends(LEFT)[-math.pi]

    @property
    def at_pi(self) -> StateVector:
        return self._ends(RIGHT)[math.pi]

    @property
    def at_zero_minus(self) -> StateVector:
        return self._ends(LEFT)[0.0]

    @property
    def at_zero_plus(self) -> StateVector:
        return self._ends(RIGHT)[0.0]

    def samples(self) -> tuple[GridFunction, GridFunction]:
        """Values and derivatives on the grid, ascending."""
        if self.grid is None:
            raise UsageError("branch was built without a grid")
        vals, ders = {}, {}
        for side in (LEFT, RIGHT):
            tr = self.trajectory(side)
            y, dy = tr.y[1:-1], tr.dy[1:-1]
            if tr.nodes[-1] < tr.nodes[0]:
                y, dy = y[::-1], dy[::-1]
            vals[side], ders[side] = y, dy
        return (GridFunction(self.grid, vals[LEFT], vals[RIGHT]),
                GridFunction(self.grid, ders[LEFT], ders[RIGHT]))

    def scaled(self, c: float) -> "SolutionBranch":
        return SolutionBranch(self.lam, self.kind, self.left.scaled(c), self.right.scaled(c), self.grid)

    def evaluate(self, spec: ProblemSpec, settings: SolverSettings, x) -> tuple[np.ndarray, np.ndarray]:
        """(y, y') at arbitrary points by re-integrating from each side's start.

        ``x`` may contain 0 only through ``-0.0`` (left limit) or ``+0.0``
        (right limit); points are assigned to a side by the sign bit.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.empty_like(x)
        dy = np.empty_like(x)
        left_mask = np.signbit(x)
        for side, mask in ((LEFT, left_mask), (RIGHT, ~left_mask)):
            if not np.any(mask):
                continue
            tr = self.trajectory(side)
            start, stop = tr.nodes[0], tr.nodes[-1]
            pts = np.abs(x[mask]) * (-1.0 if side == LEFT else 1.0)
            uniq = np.unique(pts)
            interior = uniq[(uniq != start) & (uniq != stop)]
            sub = propagate(spec.potential.side(side), self.lam, start, stop,
                            tr.initial_state, settings, nodes=interior)
            order = np.argsort(sub.nodes, kind="stable")
            idx = order[np.searchsorted(sub.nodes[order], pts)]
            y[mask] = sub.y[idx]
            dy[mask] = sub.dy[idx]
        return y, dy


def _grid_nodes(grid, side):
    return None if grid is None else grid.sides[side].nodes


def build_phi(spec: ProblemSpec, lam: float, settings: SolverSettings,
              grid: StandardGrid | None = None) -> SolutionBranch:
    """phi: left boundary condition at -pi, carried across 0 by the transmission conditions."""
    al = spec.angles.alpha
    left = propagate(spec.potential.side(LEFT), lam, -math.pi, 0.0,
                     (math.sin(al), -math.cos(al)), settings, _grid_nodes(grid, LEFT))
    start = transfer_right(spec.transmission, left.endpoint_state)
    right = propagate(spec.potential.side(RIGHT), lam, 0.0, math.pi, start, settings,
                      _grid_nodes(grid, RIGHT))
    return SolutionBranch(float(lam), PHI, left, right, grid)


def build_chi(spec: ProblemSpec, lam: float, settings: SolverSettings,
              grid: StandardGrid | None = None) -> SolutionBranch:
    """chi: right boundary condition at pi, carried back across 0."""
    be = spec.angles.beta
    right = propagate(spec.potential.side(RIGHT), lam, math.pi, 0.0,
                      (-math.sin(be), math.cos(be)), settings, _grid_nodes(grid, RIGHT))
    start = transfer_left(spec.transmission, right.endpoint_state)
    left = propagate(spec.potential.side(LEFT), lam, 0.0, -math.pi, start, settings,
                     _grid_nodes(grid, LEFT))
    return SolutionBranch(float(lam), CHI, left, right, grid)


def _w(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _w_scale(a, b):
    # |W(a, b)| <= |a| |b| by Cauchy-Schwarz
    return math.hypot(a[0], a[1]) * math.hypot(b[0], b[1])


@dataclass(frozen=True)
class CharacteristicSample:
    lam: float
    w1: float
    w2: float
    w: float
    scale: float            # bound on |w| from the state magnitudes
    identity_error: float   # |rho12*w1 - rho34*w2| / scale


def characteristic(spec: ProblemSpec, lam: float, settings: SolverSettings,
                   check: bool = True) -> CharacteristicSample:
    """w1 = W(phi, chi; -pi), w2 = W(phi, chi; pi) and w = rho34 * w2.

    The two Wronskians are taken at opposite ends so that each uses fully
    integrated data; their agreement after weighting checks the integration.
    The gap is measured relative to ``scale``, the largest value the weighted
    Wronskians could take given the state magnitudes, which keeps the check
    meaningful near eigenvalues where w itself vanishes.
    """
    phi = build_phi(spec, lam, settings)
    chi = build_chi(spec, lam, settings)
    w1 = _w(phi.at_minus_pi, chi.at_minus_pi)
    w2 = _w(phi.at_pi, chi.at_pi)
    r12, r34 = spec.rho12, spec.rho34
    scale = max(r12 * _w_scale(phi.at_minus_pi, chi.at_minus_pi),
                r34 * _w_scale(phi.at_pi, chi.at_pi))
    err = abs(r12 * w1 - r34 * w2) / max(scale, 1e-300)
    if check and err > IDENTITY_RTOL:
        raise ConsistencyError(
            f"rho12*w1 and rho34*w2 disagree by {err:.3g} (relative) at lambda={lam!r}; "
            "tighten the integrator tolerances")
    return CharacteristicSample(float(lam), w1, w2, r34 * w2, scale, err)


def char_value(spec: ProblemSpec, lam: float, settings: SolverSettings) -> float:
    """w(lambda) = rho34 * W(phi, chi; pi), needing only phi."""
    phi = build_phi(spec, lam, settings)
    be = spec.angles.beta
    return spec.rho34 * _w(phi.at_pi, (-math.sin(be), math.cos(be)))


@dataclass(frozen=True, eq=False)
class Eigenpair:
    index: int
    lambda_n: float
    eigenfunction: SolutionBranch
    norm_constant: float
    values: GridFunction
    derivatives: GridFunction

    def __call__(self, x, side=None) -> np.ndarray:
        """Normalized eigenfunction off-grid, by panel interpolation of the samples."""
        return self.values(x, side)


@dataclass(frozen=True, eq=False)
class Spectrum:
    pairs: list
    search_window: tuple[float, float]
    shift_eta: float = 0.0
    warnings: list = field(default_factory=list)
    grid: StandardGrid | None = None

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lambda_n for p in self.pairs], dtype=float)

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def require(self, n_terms: int) -> None:
        if n_terms > len(self.pairs):
            raise UsageError(f"{n_terms} terms requested but only {len(self.pairs)} eigenpairs available")
        if n_terms and self.pairs[0].values is None:
            raise UsageError("spectrum was computed without eigenfunctions")

    def matrix(self, n_terms: int | None = None) -> np.ndarray:
        """Eigenfunction samples as rows, shape (n_terms, grid size)."""
        n = len(self.pairs) if n_terms is None else n_terms
        self.require(n)
        if n == 0:
            return np.zeros((0, self.grid.size if self.grid else 0))
        return np.stack([p.values.values for p in self.pairs[:n]])

    def counting(self, lam: float) -> int:
        """N(lambda): number of computed eigenvalues <= lambda."""
        return int(np.searchsorted(self.eigenvalues, lam, side="right"))


def _sign_normalized(values: GridFunction) -> float:
    v = values.values
    tiny = 1e-14 * max(np.max(np.abs(v)), 1e-300)
    nz = np.flatnonzero(np.abs(v) > tiny)
    if nz.size == 0:
        return 1.0
    return 1.0 if v[nz[0]] > 0 else -1.0


def normalize(candidate: SolutionBranch, spec: ProblemSpec, settings: SolverSettings,
              index: int = 0) -> Eigenpair:
    """Scale a grid-sampled branch to unit weighted norm with the sign convention.

    The sign is chosen so that the first nonzero sample, scanning from the
    leftmost grid node, is positive. ``norm_constant`` is the divisor used.
    """
    values, _ = candidate.samples()
    norm = math.sqrt(max(weighted_inner_product(values, values, spec), 0.0))
    if not norm > 1e-12:
        raise DegenerateEigenfunctionError(
            f"candidate eigenfunction at lambda={candidate.lam!r} has weighted norm {norm:.3g}")
    sign = _sign_normalized(values)
    branch = candidate.scaled(sign / norm)
    vals, ders = branch.samples()
    return Eigenpair(index, candidate.lam, branch, norm, vals, ders)


def scan_nodes(lmin: float, lmax: float):
    """Scan abscissae: step 0.25 in lambda up to 0, then 0.25 in sqrt(lambda)."""
    if lmin < 0.0:
        n_neg = int(math.ceil(-lmin / SCAN_STEP))
        for i in range(n_neg):
            lam = lmin + i * SCAN_STEP
            if lam >= min(0.0, lmax):
                break
            yield lam
        if lmax >= 0.0:
            yield 0.0
        k0 = 0.0
    else:
        yield lmin
        k0 = math.sqrt(lmin)
    if lmax <= 0.0:
        if lmax < 0.0:
            yield lmax
        return
    kmax = math.sqrt(lmax)
    j = 1
    while True:
        k = k0 + j * SCAN_STEP
        if k >= kmax:
            break
        yield k * k
        j += 1
    yield lmax


def _bisect(f, a, fa, b, fb, tol):
    while b - a > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0.0) == (fa < 0.0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


@dataclass
class _Root:
    lam: float
    bracket_scale: float


def _search(spec: ProblemSpec, settings: SolverSettings, nodes,
            count: int) -> tuple[list[_Root], list[str], dict]:
    def f(lam):
        return char_value(spec, lam, settings)

    roots: list[_Root] = []
    warnings: list[str] = []
    samples: dict[float, float] = {}
    history: list[tuple[float, float]] = []
    for lam in nodes:
        w = f(lam)
        samples[lam] = w
        if w == 0.0:
            roots.append(_Root(lam, 0.0))
        elif history:
            pl, pw = history[-1]
            if pw != 0.0 and (pw < 0.0) != (w < 0.0):
                r = _bisect(f, pl, pw, lam, w, settings.root_tol)
                roots.append(_Root(r, max(abs(pw), abs(w))))
            elif len(history) >= 2:
                _check_dip(f, history[-2], history[-1], (lam, w), settings, warnings)
        history.append((lam, w))
        if len(roots) >= count:
            break
    return roots[:count], warnings, samples


def _check_dip(f, p0, p1, p2, settings, warnings):
    (l0, w0), (_, w1), (l2, w2) = p0, p1, p2
    same = (w0 > 0) == (w1 > 0) == (w2 > 0) and 0.0 not in (w0, w1, w2)
    if not (same and abs(w1) < abs(w0) and abs(w1) < abs(w2)):
        return
    res = minimize_scalar(lambda lam: abs(f(lam)), bounds=(l0, l2), method="bounded",
                          options={"xatol": max(settings.root_tol, 1e-12)})
    if res.fun <= DOUBLE_ROOT_RATIO * max(abs(w0), abs(w2)):
        msg = (f"suspected double root near lambda={res.x:.12g} "
               f"(|w| dips to {res.fun:.3g} without a sign change); not resolved")
        log.warning(msg)
        warnings.append(msg)


def _choose_shift(eigenvalues: list[float]) -> float:
    """Midpoint of the larger eigenvalue-free gap adjacent to the eigenvalue at 0."""
    ev = sorted(eigenvalues)
    j = int(np.argmin(np.abs(ev)))
    below = ev[j - 1] if j > 0 else ev[j] - 2.0
    above = ev[j + 1] if j + 1 < len(ev) else ev[j] + 2.0
    if ev[j] - below >= above - ev[j]:
        return 0.5 * (below + ev[j])
    return 0.5 * (ev[j] + above)


def find_eigenvalues(spec: ProblemSpec, settings: SolverSettings, *,
                     eigenfunctions: bool = True, count: int | None = None) -> Spectrum:
    """All simple eigenvalues in [lambda_min, lambda_max], lowest first, up to ``count``.

    Sign changes of w on the scan are refined by bisection to ``root_tol``.
    If 0 is itself an eigenvalue, the search is redone on the problem with
    q - eta (eigenvalues lambda - eta) and shifted back; eta is reported.
    """
    count = settings.max_eigenvalues if count is None else count
    lmin, lmax = settings.lambda_min, settings.lambda_max
    roots, warnings, samples = _search(spec, settings, scan_nodes(lmin, lmax), count)
    eta = 0.0
    if lmin <= 0.0 <= lmax and roots:
        nodes = sorted(samples)
        i0 = nodes.index(0.0)
        neighbours = [abs(samples[nodes[k]]) for k in (i0 - 1, i0 + 1) if 0 <= k < len(nodes)]
        scale = max(neighbours + [1.0])
        if abs(samples[0.0]) <= settings.root_tol * scale:
            eta = _choose_shift([r.lam for r in roots])
            log.info("0 is an eigenvalue; shifting the potential by eta=%g", eta)
            shifted = spec.with_potential(spec.potential.shifted(-eta))
            # Same abscissae as the first pass, less the node sitting on the
            # eigenvalue, so the root at 0 is bracketed by its neighbours.
            nodes = [lam - eta for lam in scan_nodes(lmin, lmax) if lam != 0.0]
            roots, warnings, _ = _search(shifted, settings, nodes, count)
            roots = [_Root(r.lam + eta, r.bracket_scale) for r in roots]
    grid = StandardGrid.from_settings(settings) if eigenfunctions else None
    pairs = []
    for n, root in enumerate(roots):
        if eigenfunctions:
            branch = build_phi(spec, root.lam, settings, grid)
            pairs.append(normalize(branch, spec, settings, index=n))
        else:
            pairs.append(Eigenpair(n, root.lam, None, float("nan"), None, None))
    return Spectrum(pairs, (lmin, lmax), eta, warnings, grid)


__all__ = [
    "SolutionBranch", "CharacteristicSample", "Eigenpair", "Spectrum",
    "build_phi", "build_chi", "characteristic", "char_value", "find_eigenvalues",
    "normalize", "transfer_left", "transfer_right", "transmission_residuals",
    "boundary_residuals", "weighted_inner_product", "scan_nodes",
]
