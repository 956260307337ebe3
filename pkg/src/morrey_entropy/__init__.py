"""Morrey sequence spaces on dyadic lattices: norms, embedding operator
norms, entropy-number bounds and decay-regime classification."""

from .dyadic import CubeIndex, LevelSequence, MultiLevelSequence, aggregate_powers, contains
from .norms import (
    LpParams,
    MorreyLevelParams,
    SeqSpaceParams,
    lp_norm,
    morrey_level_norm,
    rnorm_exponent,
    seq_space_norm,
)
from .operators import (
    CaseTag,
    EmbeddingSpec,
    OpNormResult,
    extremal_sparse_spread,
    opnorm_bruteforce,
    opnorm_closed_form,
    split_blocks,
    step3_lower_diagram,
)
from .entropy import (
    EntropyBoundSeries,
    ResourceLimitError,
    ball_volume_lp,
    combine_interpolation,
    combine_multiplicativity,
    covering_upper_bound,
    entropy_series,
    lre_norm,
    packing_lower_bound,
    schuett_reference,
    volume_lower_bound,
)
from .regimes import ParamTuple, Regime, RegimeKind, classify, classify_function_space, is_compact

__version__ = "0.1.0"
