"""Polar codes on the binary erasure channel with erasure-faulty SC decoding."""

__version__ = "0.1.0"

from .analysis import (
    DEFAULT_RATE_GRID,
    SweepResult,
    fer_proxy,
    fer_vs_rate_sweep,
    protection_sweep,
    rate_loss_sweep,
    staircase,
)
from .codec import (
    ERASED_BIT,
    DecodeResult,
    Frame,
    TernaryLLR,
    check_node,
    encode,
    inject_fault,
    sc_decode,
    transmit_bec,
    variable_node,
)
from .construction import (
    CodeConstruction,
    IndexPath,
    PECounts,
    construct_code,
    design_code,
    evolve_all,
    evolve_path,
    expected_epsilon,
    index_to_path,
    pe_counts,
    rate_loss,
)
from .core import (
    INDEPENDENT_TREE,
    SHARED,
    FaultSpec,
    erasure_floor,
    mean_step,
    t_minus,
    t_minus_faulty,
    t_plus,
    t_plus_faulty,
)
from .errors import InternalInvariantError, ResourceLimitError
from .montecarlo import (
    ProxyComparison,
    SimConfig,
    SimOutcome,
    binomial_ci95,
    compare_to_proxy,
    run_simulation,
    substream,
)

__all__ = [
    "CodeConstruction",
    "DecodeResult",
    "DEFAULT_RATE_GRID",
    "ERASED_BIT",
    "FaultSpec",
    "Frame",
    "INDEPENDENT_TREE",
    "IndexPath",
    "InternalInvariantError",
    "PECounts",
    "ProxyComparison",
    "ResourceLimitError",
    "SHARED",
    "SimConfig",
    "SimOutcome",
    "SweepResult",
    "TernaryLLR",
    "binomial_ci95",
    "check_node",
    "compare_to_proxy",
    "construct_code",
    "design_code",
    "encode",
    "erasure_floor",
    "evolve_all",
    "evolve_path",
    "expected_epsilon",
    "fer_proxy",
    "fer_vs_rate_sweep",
    "index_to_path",
    "inject_fault",
    "mean_step",
    "pe_counts",
    "protection_sweep",
    "rate_loss",
    "rate_loss_sweep",
    "run_simulation",
    "sc_decode",
    "staircase",
    "substream",
    "t_minus",
    "t_minus_faulty",
    "t_plus",
    "t_plus_faulty",
    "transmit_bec",
    "variable_node",
]
