"""Sturm-Liouville problems on [-pi, 0) U (0, pi] with transmission conditions at 0.

Eigenvalues by shooting on the characteristic function, Green's function and
resolvent, eigenfunction expansions and the trace identity for the resolvent.
"""

from types import ModuleType as _ModuleType

from .errors import (ConfigError, ConsistencyError, DegenerateEigenfunctionError, IntegrationError,
                     InvalidTransmissionError, NearSingularError, NumericalError, SLTError,
                     UsageError, ValidationError)
from .expansion import (ExpansionResult, evaluate_series, fourier_coefficients, parseval_check,
                        resolvent_series, resolvent_spectral_check)
from .green import (CarlemanReport, GreenEvaluator, ResolventResult, apply_resolvent,
                    carleman_report, green_eval, green_evaluator, kernel_series)
from .grid import GridFunction, StandardGrid, weighted_inner_product, weighted_norm_sq
from .integrate import StateVector, Trajectory, propagate, wronskian, wronskian_at
from .kernel import BACKEND
from .problem import (CONTINUITY, BoundaryAngles, Potential, ProblemSpec, SolverSettings,
                      TransmissionMatrix, classical_dirichlet, delta_interaction, dump_config,
                      load_config, minor, parse_config, validate)
from .spectral import (CharacteristicSample, Eigenpair, SolutionBranch, Spectrum, build_chi,
                       build_phi, characteristic, find_eigenvalues, normalize)

__version__ = "0.1.0"

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, _ModuleType)]
