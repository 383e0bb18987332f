"""Binary linear compression lab: disjunctive-normal-form generator
matrices, exact maximum-likelihood decoding at small block lengths, and
numeric checks of the combinatorial facts behind them."""
from ._kernels import BACKEND, available_backends
from .channels import (
    Bec,
    BiAwgn,
    Bsc,
    Noiseless,
    SourceModel,
    TotallyErased,
    parse_channel,
)
from .decoders import (
    channel_decode,
    ml_error_pattern,
    ml_source_decode,
    two_step_list_decode,
)
from .errors import ConfigError, GuardExceeded, RmlabError
from .gf2 import BitMatrix, BitVec, null_space_basis, rank, vec_mat_mul
from .rm import (
    RmMatrix,
    RmParams,
    build_full_rm_matrix,
    minimal_order_for_rate,
    trim_to_full_rank,
    weight_enumerator,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND",
    "available_backends",
    "BitMatrix",
    "BitVec",
    "null_space_basis",
    "rank",
    "vec_mat_mul",
    "RmMatrix",
    "RmParams",
    "build_full_rm_matrix",
    "trim_to_full_rank",
    "minimal_order_for_rate",
    "weight_enumerator",
    "SourceModel",
    "Bsc",
    "Bec",
    "BiAwgn",
    "Noiseless",
    "TotallyErased",
    "parse_channel",
    "ml_source_decode",
    "ml_error_pattern",
    "channel_decode",
    "two_step_list_decode",
    "RmlabError",
    "ConfigError",
    "GuardExceeded",
]
