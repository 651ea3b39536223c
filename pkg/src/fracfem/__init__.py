"""Nonlocal P1 finite elements, eigenpairs and mountain-pass solvers for
fractional Dirichlet problems with a superquadratic power nonlinearity."""

from .kernel import Kernel, fractional_constant
from .mesh import (
    FemFunction,
    Mesh1D,
    TriMesh,
    interpolate,
    make_disk_mesh,
    make_interval_mesh,
    prolong,
    refine,
)
from .assembly import (
    GramPair,
    assemble,
    assemble_1d,
    assemble_2d,
    h_inner,
    l2_inner,
    lp_norm,
    negative_part,
    positive_part,
)
from .spectral import EigenPair, eigenspace_basis, sign_normalize, smallest_eigenpairs
from .variational import (
    ProblemSpec,
    energy,
    gradient,
    nehari_project,
    nodal_nehari_project,
    rescale_solution,
)
from .solver import SolveReport, modified_mountain_pass, mountain_pass, solve_linear
from .reduced import (
    LimitReport,
    limit_study,
    reduced_energy,
    reduced_nehari_scale,
)
from .errors import (
    ConvergenceError,
    DegenerationError,
    DomainError,
    FracFemError,
    IndefiniteOperatorError,
    SingularityError,
)

__version__ = "0.1.0"
