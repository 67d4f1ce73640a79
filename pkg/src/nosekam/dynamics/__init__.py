from .backend import BACKEND, backend_name, kernels  # noqa: F401
from .integrate import (EmbeddedRK, ImplicitMidpoint, IntegrationError,  # noqa: F401
                        StageSolveError, Trajectory, integrate, midpoint_step)
from .observables import birkhoff_temperature, running_average, tail_oscillation  # noqa: F401
from .rotation import RotationError, rotation_number, xi1_rotation_oracle  # noqa: F401
from .sections import (InsufficientDataError, SectionError, SectionRecord,  # noqa: F401
                       SectionSpec, poincare_section, torus_classify)
from .experiments import GridSpec, run_cell, run_grid, xi1_initial_condition  # noqa: F401
