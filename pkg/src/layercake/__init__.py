"""Exact fair division of a multi-layered cake.

Intervals, pieces and valuations use exact rationals (gmpy2 ``mpq``) throughout;
protocols talk to agents only through a counting :class:`QuerySession` and
verify their own output before returning it.
"""
from .core import (
    Interval, Layer, LayeredCake, MultiAllocation, NoSuchPoint, Piece, PreconditionError,
    StepDensity, Valuation, VerificationFailed, as_rational, bundle_value, piece_value,
)
from .ef_protocols import (
    NoIdenticalPair, ShoutPoint, cut_and_choose, ef_noncontiguous, moving_knife_three,
    moving_knife_trace,
)
from .matching import BipartiteGraph, is_envy_free_matching, max_envy_free_matching, max_matching
from .prop_protocols import (
    EquitablePartition, MergeMap, equitable_partition, merge_diagonal, merge_layers,
    prop_matching, prop_power_two,
)
from .rw_queries import (
    OddLayerCount, QuerySession, Side, diagonal_piece, long_cut, long_eval,
    majority_switching_point, short_cut, short_eval, switching_point,
)
from .verify import (
    StructureReport, check_envy_free, check_equitable, check_proportional, check_structure,
)

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not hasattr(obj, "__path__") and getattr(obj, "__module__", "").startswith("layercake")]
