"""Exact structural and fairness checks for multi-allocations.

These checks only use piece algebra and :meth:`Valuation.bundle_value`; they
never look at how an allocation was produced.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import LayeredCake, MultiAllocation, Piece, Valuation


@dataclass(frozen=True)
class StructureReport:
    feasible: bool
    contiguous: bool
    complete: bool

    def __bool__(self) -> bool:
        return self.feasible and self.contiguous and self.complete

    def as_dict(self) -> dict:
        return {"feasible": self.feasible, "contiguous": self.contiguous, "complete": self.complete}


def _check_shape(cake: LayeredCake, a: MultiAllocation):
    for i, bundle in enumerate(a.bundles):
        if len(bundle) != cake.n_original:
            raise ValueError(f"bundle {i} has {len(bundle)} layers, cake has {cake.n_original}")


def _disjoint(pieces: Sequence[Piece]) -> bool:
    """No two of ``pieces`` share more than boundary points."""
    ivs = sorted(iv for p in pieces for iv in p)
    return all(b.lo >= a.hi for a, b in zip(ivs, ivs[1:]))


def is_feasible_bundle(bundle: Sequence[Piece]) -> bool:
    return _disjoint(bundle)


def check_structure(cake: LayeredCake, a: MultiAllocation) -> StructureReport:
    """Feasibility, contiguity and completeness of ``a`` over the original ``cake``."""
    _check_shape(cake, a)
    feasible = all(is_feasible_bundle(b) for b in a.bundles)
    contiguous = all(p.is_contiguous() for b in a.bundles for p in b)
    complete = True
    originals = [Piece.empty() for _ in range(cake.n_original)]
    for layer in cake.layers:
        for j, part in layer.parts:
            originals[j] = originals[j] | part
    for j, layer_piece in enumerate(originals):
        pieces = [b[j] for b in a.bundles]
        union = Piece([iv for p in pieces for iv in p])
        if union != layer_piece or not _disjoint(pieces):
            complete = False
            break
    return StructureReport(feasible, contiguous, complete)


def _check_agents(vals: Sequence[Valuation], a: MultiAllocation):
    if len(vals) != a.n:
        raise ValueError(f"{len(vals)} valuations for {a.n} bundles")


def check_envy_free(vals: Sequence[Valuation], a: MultiAllocation) -> bool:
    _check_agents(vals, a)
    for v, own in zip(vals, a.bundles):
        mine = v.bundle_value(own)
        if any(v.bundle_value(other) > mine for other in a.bundles):
            return False
    return True


def check_proportional(vals: Sequence[Valuation], a: MultiAllocation) -> bool:
    """Every agent gets at least ``1/n`` of its value for the whole cake."""
    _check_agents(vals, a)
    n = a.n
    return all(v.bundle_value(b) * n >= v.total for v, b in zip(vals, a.bundles))


def check_equitable(vals: Sequence[Valuation], a: MultiAllocation) -> bool:
    """Every agent gets exactly ``1/n`` of its value for the whole cake."""
    _check_agents(vals, a)
    n = a.n
    return all(v.bundle_value(b) * n == v.total for v, b in zip(vals, a.bundles))
