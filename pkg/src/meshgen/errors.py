"""Exception and warning types shared across meshgen."""


class MeshgenError(Exception):
    """Base class for all meshgen errors."""


class DomainError(MeshgenError, ValueError):
    """A reference coordinate or surface parameter lies outside [0, 1]."""


class ConstructionError(MeshgenError, ValueError):
    """An operator or surface was built from invalid data."""


class SpecError(MeshgenError):
    """A block or scene violates one of its declared invariants."""


class AssemblyError(MeshgenError):
    """Blocks cannot be merged into one conforming mesh."""


class ConfigError(MeshgenError, KeyError):
    """A lookup table (materials, permeabilities) is incomplete."""

    def __str__(self):
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""


class SingularProblemError(MeshgenError):
    """The pressure problem has no Dirichlet boundary and is singular."""


class ConvergenceError(MeshgenError):
    """The iterative solver hit its iteration cap."""

    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DegenerateCellWarning(UserWarning):
    """A cell contains a zero-volume tetrahedron."""


class TransmissibilityWarning(UserWarning):
    """Some faces produced a nonpositive two-point transmissibility."""
