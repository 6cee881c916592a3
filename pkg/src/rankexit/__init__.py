"""Mixed-information EXIT measurements for rank-only decoders over GF(2^m)."""

__version__ = "0.1.0"

from .galois import FieldSpec, gf_add, gf_inv, gf_mul
from .simspace import ChannelConfig, Modulation, SourceConfig, snr_convert
from .messages import check_node, rank_retain, var_node, wht
from .infomeasure import (
    DiscreteJoint,
    Estimate,
    SampleBatch,
    SampleRecord,
    entropy,
    exact_mi,
    exact_role_model_audit,
    expected_divergence,
    mi_time_average,
    mixed_info,
)
from .rolemodel import FullTableModel, RankPositionModel, fit_full_table, fit_rank_position
from .exitlab import (
    CurveResult,
    ExitPoint,
    SweepConfig,
    check_exit,
    full_chart,
    rank_loss_sweep,
    var_exit_rank,
    var_exit_sumproduct,
)

__all__ = [
    "FieldSpec", "gf_add", "gf_inv", "gf_mul",
    "ChannelConfig", "Modulation", "SourceConfig", "snr_convert",
    "check_node", "rank_retain", "var_node", "wht",
    "DiscreteJoint", "Estimate", "SampleBatch", "SampleRecord", "entropy", "exact_mi",
    "exact_role_model_audit", "expected_divergence", "mi_time_average", "mixed_info",
    "FullTableModel", "RankPositionModel", "fit_full_table", "fit_rank_position",
    "CurveResult", "ExitPoint", "SweepConfig", "check_exit", "full_chart", "rank_loss_sweep",
    "var_exit_rank", "var_exit_sumproduct",
]
