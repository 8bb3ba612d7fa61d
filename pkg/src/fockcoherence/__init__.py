"""Quantum coherence of bosonic states in truncated Fock space."""

__version__ = "0.1.0"

from .fock import (  # noqa: E402
    DensityMatrix,
    NumberDistribution,
    PureFockState,
    TwoModePureState,
    densify,
    mean_n,
    moment,
    number_distribution,
    second_moment,
)
from .measures import (  # noqa: E402
    LogBase,
    g2_zero,
    l1_coherence,
    max_rel_ent_coherence,
    max_rel_ent_coherence_multimode,
    rel_ent_coherence,
    s_d_series,
    shannon_entropy,
    von_neumann_entropy,
)
from .states import (  # noqa: E402
    TruncationPolicy,
    beam_splitter_50_50,
    coherent,
    multimode_max_coherent,
    pstd,
    squeezed,
    squeezed_vacuum_state,
    thermal,
    tmsv,
    tmsv_through_bs,
    two_mode_coherent,
)
