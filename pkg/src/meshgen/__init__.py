"""Block-structured hexahedral mesh generation by transfinite interpolation."""

from .builders import affine_block, box_block, layer_block
from .errors import (
    AssemblyError,
    ConfigError,
    ConstructionError,
    ConvergenceError,
    DomainError,
    MeshgenError,
    SingularProblemError,
    SpecError,
)
from .fvsolve import Dirichlet, Neumann, PressureProblem, assemble_tpfa, solve, solve_pressure
from .geometry import HexCell, cell_center, face_normal_covariant, face_normal_diagonal, hex_volume, tet_volume
from .multiblock import MultiblockMesh, assemble_multiblock, assign_materials, interface_report
from .projectors import ProjectorSpec, eval_projector, eval_projector_axis_derivative, tensor_product
from .scene import SceneSpec, parse_spec
from .surfaces import BilinearPatch, DiscreteSurface, GraphSurface, LoftSurface, Plane, eval_surface
from .tfi import BlockSpec, Grading, StructuredGrid, boolean_sum_eval, covariant_vector, generate_grid, mesh_counts
from .vtk import export_vtk

__version__ = "0.1.0"
