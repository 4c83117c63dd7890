"""Spectra of Laplace and Schrodinger operators on periodic discrete graphs.

A periodic graph is described by its finite quotient: vertices, edges, and an
integer index per edge recording which copy of the period cell the edge
crosses into. The fiber operators over the torus of quasimomenta are finite
Hermitian matrices; their eigenvalue curves sweep out the spectral bands.
"""

from .band_analysis import (
    Band,
    BandStructure,
    BZGrid,
    EffectiveMass,
    EffectiveMassError,
    FlatBand,
    SpectrumUnion,
    compute_bands,
    effective_mass,
    gaps,
    grid_eigenvalues,
    spectrum_union,
)
from .catalog import FAMILIES, CrystalFamily, generate
from .estimates import (
    EstimateError,
    SpectralReport,
    build_report,
    check_bipartite,
    check_effective_mass_bound,
    check_first_band,
    check_gap_sum,
    check_loop_graph,
    check_measure_bound,
    perron_contrast,
    perron_ground_state,
)
from .fiber_linalg import (
    ConvergenceError,
    EigenDecomposition,
    NonHermitianError,
    assemble_laplacian,
    assemble_nabla,
    assemble_schrodinger,
    fiber_offset,
    hermitian_eigen,
    hermitian_eigen_batch,
    potential_vector,
)
from .graph_core import (
    Bond,
    BridgeSet,
    Edge,
    FundamentalGraph,
    GraphError,
    PeriodicDescription,
    SpanningTreeAssignment,
    Vertex,
    ZetaReport,
    assign_indices,
    bridges,
    exact_quasimomentum,
    is_bipartite,
    is_loop_graph,
    validate,
    zeta,
)

__version__ = "0.1.0"

__all__ = [
    "Band",
    "BandStructure",
    "BZGrid",
    "Bond",
    "BridgeSet",
    "ConvergenceError",
    "CrystalFamily",
    "Edge",
    "EffectiveMass",
    "EffectiveMassError",
    "EigenDecomposition",
    "EstimateError",
    "FAMILIES",
    "FlatBand",
    "FundamentalGraph",
    "GraphError",
    "NonHermitianError",
    "PeriodicDescription",
    "SpanningTreeAssignment",
    "SpectralReport",
    "SpectrumUnion",
    "Vertex",
    "ZetaReport",
    "assemble_laplacian",
    "assemble_nabla",
    "assemble_schrodinger",
    "assign_indices",
    "bridges",
    "build_report",
    "check_bipartite",
    "check_effective_mass_bound",
    "check_first_band",
    "check_gap_sum",
    "check_loop_graph",
    "check_measure_bound",
    "compute_bands",
    "effective_mass",
    "exact_quasimomentum",
    "fiber_offset",
    "gaps",
    "generate",
    "grid_eigenvalues",
    "hermitian_eigen",
    "hermitian_eigen_batch",
    "is_bipartite",
    "is_loop_graph",
    "perron_contrast",
    "perron_ground_state",
    "potential_vector",
    "spectrum_union",
    "validate",
    "zeta",
]
