"""Local quantum thermal susceptibility of lattice spin models by exact diagonalization."""

__version__ = "0.1.0"

from . import bounds, lattice, operators, thermometry
from .bounds import (
    DomainError,
    XiProvider,
    bound_report,
    ising_xi,
    locality_conditions,
)

from .lattice import (
    UNREACHABLE,
    GeometryConstants,
    LatticeModel,
    Subsystem,
    boundary_edges,
    build_chain,
    build_square,
    far_edges,
    geometry_constants,
    interior_edges,
    set_distance,
    shell_edges,
    site_distance,
)
from .operators import (
    EmbeddedOperator,
    SpectralState,
    assemble,
    connected_correlator,
    expectation,
    gibbs,
    hamiltonian,
    local_operator,
    partial_trace,
    variance,
)
from .thermometry import (
    DerivativeDecomposition,
    bures_norm_sq,
    canonical_qfi,
    cramer_rao_precision,
    decompose,
    drho_dbeta,
    drho_fd,
    global_state,
    local_qfi,
    qfi_fd_oracle,
    reduced_state,
)
