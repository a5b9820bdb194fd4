"""Exact finite-dimensional quantum and classical information kernel."""

from .measures import (
    conditional_mutual_information,
    fidelity,
    hellinger,
    hellinger_squared,
    mutual_information,
    relative_entropy,
    trace_distance,
    vn_entropy,
)
from .prob import ProbTable, classical_cmi, classical_measures, classical_mi, shannon_entropy
from .registers import RegisterSystem, dim_cap, set_dim_cap
from .sampling import random_channel, random_isometry, random_probs, random_state, random_unitary
from .states import (
    DensityMatrix,
    Isometry,
    PureState,
    apply_isometry,
    canonical_purification,
    controlled_isometry,
    embed_diagonal,
    marginal,
    merge_registers,
    partial_trace,
    purify,
    tensor,
)
from .uhlmann import uhlmann_isometry

__all__ = [
    "DensityMatrix",
    "Isometry",
    "ProbTable",
    "PureState",
    "RegisterSystem",
    "apply_isometry",
    "canonical_purification",
    "classical_cmi",
    "classical_measures",
    "classical_mi",
    "conditional_mutual_information",
    "controlled_isometry",
    "dim_cap",
    "embed_diagonal",
    "fidelity",
    "hellinger",
    "hellinger_squared",
    "marginal",
    "merge_registers",
    "mutual_information",
    "partial_trace",
    "purify",
    "random_channel",
    "random_isometry",
    "random_probs",
    "random_state",
    "random_unitary",
    "relative_entropy",
    "set_dim_cap",
    "shannon_entropy",
    "tensor",
    "trace_distance",
    "uhlmann_isometry",
    "vn_entropy",
]
