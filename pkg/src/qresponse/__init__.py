"""Exact and sampled linear-response functions of small fermion systems."""

from .errors import (
    AssemblyError,
    BoundsError,
    ConfigurationError,
    ConflictError,
    ConvergenceError,
    DegenerateGroundStateError,
    DomainError,
    FormatError,
    QResponseError,
    ResourceError,
    SectorRequiredError,
)
from .fci import EigenSolution, GroundState, ground_state, solve_all_sectors, solve_sector
from .fock import DeterminantBasis, FockVector, Sector, enumerate_determinants, sector_dimension
from .lehmann import EigenLevels, ResponseGrid, cross_section, exact_response, polarizability
from .model import (
    HARTREE_TO_EV,
    Hamiltonian,
    OneBodyOperator,
    build_hubbard_dimer,
    load_fcidump,
    load_onebody_operator,
    write_fcidump,
)
from .sampling import SamplingConfig, calc_resp_funcs, sampled_polarizability

__version__ = "0.1.0"

__all__ = [
    "AssemblyError", "BoundsError", "ConfigurationError", "ConflictError", "ConvergenceError",
    "DegenerateGroundStateError", "DomainError", "FormatError", "QResponseError", "ResourceError",
    "SectorRequiredError", "EigenSolution", "GroundState", "ground_state", "solve_all_sectors",
    "solve_sector", "DeterminantBasis", "FockVector", "Sector", "enumerate_determinants",
    "sector_dimension", "EigenLevels", "ResponseGrid", "cross_section", "exact_response",
    "polarizability", "HARTREE_TO_EV", "Hamiltonian", "OneBodyOperator", "build_hubbard_dimer",
    "load_fcidump", "load_onebody_operator", "write_fcidump", "SamplingConfig", "calc_resp_funcs",
    "sampled_polarizability",
]
