"""Kinematics of the VERNE hybrid 5-axis machine: a 3-DOF parallel module on a 2-DOF tilting table."""

from .coupling import (IsoOrientationEllipse, coupling_residual, coupling_residual_scaled,
                       ellipse_point, ellipse_samples, iso_orientation_ellipse)
from .errors import (DegenerateInput, DegenerateTarget, EmptyLocus, InvalidValue, MissingField,
                     MultipleFeasible, NoAssembly, NoFeasibleSolution, ParseError,
                     SingularDenominator, Unreachable, VerneError)
from .fk import (AssemblyMode, FkSolution, classify_assembly_mode, fk_back_substitute, fk_machine,
                 fk_octic, fk_parallel)
from .ik import (FeasibilityReport, IkCandidate, feasibility_report, filter_feasible, ik_machine,
                 ik_parallel, orientation_polynomial)
from .params import JointCoords, MachineParams, dump_params, load_params, parse_params, reference_params
from .transforms import PlatformPose, TableOrientation, ToolPose
from .workspace import (ConstraintLimits, WorkspaceGrid, check_constraints,
                        constant_orientation_slice, full_workspace, manufacturing_workspace)

__version__ = "0.1.0"
