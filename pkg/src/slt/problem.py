"""Problem instances: potential, boundary angles, transmission matrix, settings.

The boundary-value-transmission problem is

    -y'' + q(x) y = lambda y       on [-pi, 0) and (0, pi]
    a1 y'(0-) + a2 y(0-) + a3 y'(0+) + a4 y(0+) = 0
    b1 y'(0-) + b2 y(0-) + b3 y'(0+) + b4 y(0+) = 0
    cos(alpha) y(-pi) + sin(alpha) y'(-pi) = 0
    cos(beta)  y(pi)  + sin(beta)  y'(pi)  = 0

Configuration documents are YAML (JSON is accepted too, being a subset).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping

import numpy as np
import yaml
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, InvalidTransmissionError, UsageError

LEFT = "left"
RIGHT = "right"
SIDES = (LEFT, RIGHT)

#: Closed extents of the two subintervals; the interface sits at 0.
SIDE_EXTENT = {LEFT: (-math.pi, 0.0), RIGHT: (0.0, math.pi)}

POTENTIAL_KINDS = ("constant", "polynomial", "table")

# Slack allowed when checking that a table covers its side; users cannot type pi exactly.
_COVER_SLACK = 1e-8


def _reduce_angle(theta: float) -> float:
    r = math.fmod(theta, math.pi)
    if r < 0.0:
        r += math.pi
    if r >= math.pi:
        r = 0.0
    return r


@dataclass(frozen=True)
class TransmissionMatrix:
    """Rows (a1..a4) and (b1..b4) of the interface conditions, used verbatim."""

    row_a: tuple[float, float, float, float]
    row_b: tuple[float, float, float, float]

    def __post_init__(self):
        for name in ("row_a", "row_b"):
            row = tuple(float(v) for v in getattr(self, name))
            if len(row) != 4:
                raise ConfigError(f"transmission.{name} must have 4 entries, got {len(row)}")
            object.__setattr__(self, name, row)

    @classmethod
    def from_rows(cls, rows) -> "TransmissionMatrix":
        rows = list(rows)
        if len(rows) != 2:
            raise ConfigError("transmission matrix must have exactly 2 rows")
        return cls(tuple(rows[0]), tuple(rows[1]))

    def minor(self, i: int, j: int) -> float:
        return minor(self, i, j)

    @property
    def rho(self) -> dict[tuple[int, int], float]:
        """All six minors keyed by 1-based column pairs."""
        return {(i, j): minor(self, i, j) for i in range(1, 5) for j in range(i + 1, 5)}

    def as_array(self) -> np.ndarray:
        return np.array([self.row_a, self.row_b], dtype=float)


def minor(T: TransmissionMatrix, i: int, j: int) -> float:
    """Determinant of columns ``i`` and ``j`` (1-based) of ``T``: a_i b_j - a_j b_i."""
    for k in (i, j):
        if not isinstance(k, (int, np.integer)) or not 1 <= k <= 4:
            raise UsageError(f"column index must be an integer in 1..4, got {k!r}")
    if i == j:
        raise UsageError("minor needs two distinct columns")
    a, b = T.row_a, T.row_b
    return a[i - 1] * b[j - 1] - a[j - 1] * b[i - 1]


@dataclass(frozen=True)
class BoundaryAngles:
    """Angles in radians, stored reduced to [0, pi)."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = float(getattr(self, name))
            if math.isfinite(v):
                v = _reduce_angle(v)
            object.__setattr__(self, name, v)


@dataclass(frozen=True, eq=False)
class PiecewisePoly:
    """Side potential as pieces ``sum_k coefs[i, k] * (x - bases[i])**k``.

    Piece ``i`` covers ``[breaks[i], breaks[i+1]]``; evaluation outside the
    breaks uses the nearest end piece. This is the form the integration
    kernels consume.
    """

    breaks: np.ndarray
    bases: np.ndarray
    coefs: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self.bases) - 1)
        t = x - self.bases[idx]
        c = self.coefs[idx]
        out = np.zeros_like(t)
        for k in range(self.coefs.shape[1] - 1, -1, -1):
            out = out * t + c[..., k]
        return out

    @cached_property
    def minimum(self) -> float:
        """Approximate minimum of q over the breaks, sampled densely; used for step sizing."""
        xs = np.linspace(self.breaks[0], self.breaks[-1], 257)
        return float(np.min(self(xs)))


@dataclass(frozen=True)
class Potential:
    """q(x) given separately on each side so it may jump at the interface.

    ``left`` and ``right`` hold, depending on ``kind``:

    * ``constant``: a scalar;
    * ``polynomial``: ascending coefficients in x, so ``[1, 0, 2]`` is 1 + 2x^2;
    * ``table``: ``{"x": [...], "q": [...]}`` with strictly increasing x covering
      the side, interpolated by a monotone cubic (exact at the nodes).
    """

    kind: str
    left: Any
    right: Any

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ConfigError(f"unknown potential kind {self.kind!r}; expected one of {POTENTIAL_KINDS}")
        for side in SIDES:
            object.__setattr__(self, side, self._normalize(side, getattr(self, side)))

    def _normalize(self, side, data):
        if self.kind == "constant":
            if isinstance(data, (list, tuple, dict)):
                raise ConfigError(f"potential.{side} must be a scalar for kind 'constant'")
            return float(data)
        if self.kind == "polynomial":
            if isinstance(data, dict):
                raise ConfigError(f"potential.{side} must be a coefficient list for kind 'polynomial'")
            coeffs = [float(data)] if np.isscalar(data) else [float(c) for c in data]
            if not coeffs:
                raise ConfigError(f"potential.{side} has no coefficients")
            return tuple(coeffs)
        if not isinstance(data, Mapping) or "x" not in data or "q" not in data:
            raise ConfigError(f"potential.{side} must be a mapping with 'x' and 'q' for kind 'table'")
        xs = tuple(float(v) for v in data["x"])
        qs = tuple(float(v) for v in data["q"])
        if len(xs) != len(qs):
            raise ConfigError(f"potential.{side}: x and q have different lengths")
        if len(xs) < 2:
            raise ConfigError(f"potential.{side}: table needs at least 2 nodes")
        return {"x": xs, "q": qs}

    @classmethod
    def constant(cls, value: float = 0.0, right: float | None = None) -> "Potential":
        return cls("constant", value, value if right is None else right)

    def diagnostics(self) -> list[str]:
        out = []
        for side in SIDES:
            data = getattr(self, side)
            if self.kind == "constant":
                values = [data]
            elif self.kind == "polynomial":
                values = list(data)
            else:
                values = list(data["x"]) + list(data["q"])
            if not all(math.isfinite(v) for v in values):
                out.append(f"potential.{side} contains non-finite values")
                continue
            if self.kind == "table":
                xs = np.asarray(data["x"])
                lo, hi = SIDE_EXTENT[side]
                if np.any(np.diff(xs) <= 0):
                    out.append(f"potential.{side}.x must be strictly increasing")
                if xs[0] > lo + _COVER_SLACK or xs[-1] < hi - _COVER_SLACK:
                    out.append(f"potential.{side}.x must cover [{lo:g}, {hi:g}]")
        return out

    @cached_property
    def pieces(self) -> dict[str, PiecewisePoly]:
        return {side: self._pieces(side) for side in SIDES}

    def _pieces(self, side) -> PiecewisePoly:
        lo, hi = SIDE_EXTENT[side]
        data = getattr(self, side)
        if self.kind == "table":
            interp = PchipInterpolator(np.asarray(data["x"]), np.asarray(data["q"]))
            # PPoly stores descending powers about each left break.
            coefs = np.ascontiguousarray(interp.c[::-1].T)
            breaks = np.ascontiguousarray(interp.x, dtype=float)
            return PiecewisePoly(breaks, breaks[:-1].copy(), coefs)
        coeffs = [data] if self.kind == "constant" else list(data)
        return PiecewisePoly(np.array([lo, hi]), np.array([0.0]), np.array([coeffs], dtype=float))

    def side(self, side: str) -> PiecewisePoly:
        return self.pieces[side]

    def __call__(self, x, side: str | None = None):
        """Evaluate q; ``side`` selects the one-sided branch (needed at x = 0)."""
        x = np.asarray(x, dtype=float)
        if side is not None:
            return self.pieces[side](x)
        return np.where(x < 0.0, self.pieces[LEFT](x), self.pieces[RIGHT](x))

    def shifted(self, c: float) -> "Potential":
        """Potential q + c on both sides."""
        if self.kind == "constant":
            return Potential("constant", self.left + c, self.right + c)
        if self.kind == "polynomial":
            return Potential("polynomial", (self.left[0] + c,) + self.left[1:],
                             (self.right[0] + c,) + self.right[1:])
        def shift(d):
            return {"x": d["x"], "q": tuple(v + c for v in d["q"])}
        return Potential("table", shift(self.left), shift(self.right))

    def to_config(self) -> dict:
        def conv(d):
            if self.kind == "constant":
                return d
            if self.kind == "polynomial":
                return list(d)
            return {"x": list(d["x"]), "q": list(d["q"])}
        return {"kind": self.kind, "left": conv(self.left), "right": conv(self.right)}


@dataclass(frozen=True)
class ProblemSpec:
    potential: Potential
    angles: BoundaryAngles
    transmission: TransmissionMatrix

    @property
    def rho12(self) -> float:
        return self.transmission.minor(1, 2)

    @property
    def rho34(self) -> float:
        return self.transmission.minor(3, 4)

    def side_weight(self, side: str) -> float:
        """Weight of each side in the inner product."""
        return self.rho12 if side == LEFT else self.rho34

    def with_potential(self, potential: Potential) -> "ProblemSpec":
        return dataclasses.replace(self, potential=potential)

    def to_config(self) -> dict:
        return {
            "alpha": self.angles.alpha,
            "beta": self.angles.beta,
            "transmission": {"row_a": list(self.transmission.row_a),
                             "row_b": list(self.transmission.row_b)},
            "potential": self.potential.to_config(),
        }

    def digest(self) -> str:
        """Stable hash of the problem definition."""
        blob = json.dumps(self.to_config(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class SolverSettings:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    root_tol: float = 1e-9
    lambda_min: float = -10.0
    lambda_max: float = 400.0
    max_eigenvalues: int = 50
    grid_points_per_side: int = 512
    quadrature_order: int = 64
    fixed_step: bool = False

    def diagnostics(self) -> list[str]:
        out = []
        for name in ("abs_tol", "rel_tol", "root_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                out.append(f"solver.{name} must be a positive finite number, got {v!r}")
        if not (math.isfinite(self.lambda_min) and math.isfinite(self.lambda_max)):
            out.append("solver.lambda_min and solver.lambda_max must be finite")
        elif self.lambda_min >= self.lambda_max:
            out.append("solver.lambda_min must be below solver.lambda_max")
        if self.max_eigenvalues < 1:
            out.append("solver.max_eigenvalues must be at least 1")
        for name in ("grid_points_per_side", "quadrature_order"):
            if getattr(self, name) < 2:
                out.append(f"solver.{name} must be at least 2")
        return out

    def replace(self, **changes) -> "SolverSettings":
        return validate_settings(dataclasses.replace(self, **changes))

    def to_config(self) -> dict:
        return dataclasses.asdict(self)


def validate(spec: ProblemSpec) -> ProblemSpec:
    """Return ``spec`` unchanged if every invariant holds, else raise with all violations.

    Non-finite data raises :class:`ConfigError`; otherwise a failure of
    rho12 > 0 or rho34 > 0 raises :class:`InvalidTransmissionError`.
    """
    parse_problems = list(spec.potential.diagnostics())
    for name in ("alpha", "beta"):
        if not math.isfinite(getattr(spec.angles, name)):
            parse_problems.append(f"problem.{name} must be finite")
    entries = spec.transmission.row_a + spec.transmission.row_b
    if not all(math.isfinite(v) for v in entries):
        parse_problems.append("transmission matrix contains non-finite entries")
    if parse_problems:
        raise ConfigError(parse_problems)
    problems = []
    for name, value in (("rho12", spec.rho12), ("rho34", spec.rho34)):
        if not value > 0:
            problems.append(f"{name} must be positive, got {name} = {value:g}")
    if problems:
        raise InvalidTransmissionError(problems)
    return spec


def validate_settings(settings: SolverSettings) -> SolverSettings:
    problems = settings.diagnostics()
    if problems:
        raise ConfigError(problems)
    return settings


_PROBLEM_KEYS = {"alpha", "beta", "transmission", "potential"}
_SOLVER_FIELDS = {f.name: f for f in dataclasses.fields(SolverSettings)}


def _require(mapping, key, where):
    if not isinstance(mapping, Mapping):
        raise ConfigError(f"{where} must be a mapping")
    if key not in mapping:
        raise ConfigError(f"missing required key {where}.{key}")
    return mapping[key]


def _real(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a real number, got {value!r}")
    return float(value)


def parse_config_dict(doc: Mapping) -> tuple[ProblemSpec, SolverSettings]:
    if not isinstance(doc, Mapping):
        raise ConfigError("configuration document must be a mapping")
    problem = _require(doc, "problem", "<root>")
    if not isinstance(problem, Mapping):
        raise ConfigError("problem must be a mapping")
    unknown = set(problem) - _PROBLEM_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s) under problem: {sorted(unknown)}")
    alpha = _real(_require(problem, "alpha", "problem"), "problem.alpha")
    beta = _real(_require(problem, "beta", "problem"), "problem.beta")
    trans = _require(problem, "transmission", "problem")
    if isinstance(trans, (list, tuple)):  # bare 2x4 matrix
        if len(trans) != 2:
            raise ConfigError("problem.transmission as a list must have exactly 2 rows")
        trans = {"row_a": trans[0], "row_b": trans[1]}
    rows = []
    for name in ("row_a", "row_b"):
        row = _require(trans, name, "problem.transmission")
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise ConfigError(f"problem.transmission.{name} must be a list of 4 reals")
        rows.append(tuple(_real(v, f"problem.transmission.{name}") for v in row))
    pot = _require(problem, "potential", "problem")
    kind = _require(pot, "kind", "problem.potential")
    try:
        potential = Potential(kind,
                              _require(pot, "left", "problem.potential"),
                              _require(pot, "right", "problem.potential"))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"problem.potential: {exc}") from None
    spec = ProblemSpec(potential, BoundaryAngles(alpha, beta), TransmissionMatrix(*rows))

    solver = doc.get("solver") or {}
    if not isinstance(solver, Mapping):
        raise ConfigError("solver must be a mapping")
    unknown = set(solver) - set(_SOLVER_FIELDS)
    if unknown:
        raise ConfigError(f"unknown key(s) under solver: {sorted(unknown)}")
    kwargs = {}
    for name, value in solver.items():
        default = _SOLVER_FIELDS[name].default
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"solver.{name} must be true or false")
            kwargs[name] = value
        elif isinstance(default, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"solver.{name} must be an integer")
            kwargs[name] = value
        else:
            kwargs[name] = _real(value, f"solver.{name}")
    settings = SolverSettings(**kwargs)
    return validate(spec), validate_settings(settings)


def parse_config(text: str) -> tuple[ProblemSpec, SolverSettings]:
    """Parse a YAML/JSON configuration document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed configuration document: {exc}") from None
    return parse_config_dict(doc)


def load_config(path) -> tuple[ProblemSpec, SolverSettings]:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(spec: ProblemSpec, settings: SolverSettings | None = None) -> str:
    doc: dict = {"problem": spec.to_config()}
    if settings is not None:
        doc["solver"] = settings.to_config()
    return yaml.safe_dump(doc, sort_keys=False)


# Reference instances used throughout the tests and examples.
CONTINUITY = TransmissionMatrix((0, 1, 0, -1), (-1, 0, 1, 0))


def delta_interaction(gamma: float) -> TransmissionMatrix:
    """y continuous, y'(0+) - y'(0-) = gamma * y(0)."""
    return TransmissionMatrix((0, 1, 0, -1), (-1, -gamma, 1, 0))


def classical_dirichlet(transmission: TransmissionMatrix = CONTINUITY) -> ProblemSpec:
    return validate(ProblemSpec(Potential.constant(0.0), BoundaryAngles(0.0, 0.0), transmission))
