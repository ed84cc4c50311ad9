"""Proportional division for any n >= m through envy-free matchings.

In each round one agent cuts the cake into equally valued pieces, every
agent marks the pieces worth at least its share, and a maximum envy-free
matching hands some pieces out.  Unmatched pieces become the layers of the
next round.  This instance is built so that only the cutter is matched in
the first round and the other two finish with cut-and-choose.
"""
from fractions import Fraction as F

from layercake import (
    LayeredCake, QuerySession, StepDensity, Valuation, check_proportional, equitable_partition,
    max_envy_free_matching, prop_matching,
)
from layercake.prop_protocols import matching_round_graph

cake = LayeredCake.full(3)
cutter = Valuation.uniform([1, 2, 3], cake)
left = StepDensity((0, F(1, 2), 1), (1, 0))
right = StepDensity((0, F(1, 2), 1), (0, 1))
zero = StepDensity.constant(0)
vals = [cutter, Valuation([left, zero, right], cake), Valuation([left.scaled(2), zero, right], cake)]

s = QuerySession(cake, vals)
part = equitable_partition(s, 0)
for h, piece in enumerate(part.pieces):
    print(f"piece {h}: " + ", ".join(f"layer {k} {p}" for k, p in enumerate(piece) if p))
g = matching_round_graph(s, part)
print("adjacency:", {a: list(g.edges[a]) for a in g.agents})
print("envy-free matching:", max_envy_free_matching(g))

alloc = prop_matching(QuerySession(cake, vals))
for i, bundle in enumerate(alloc.bundles):
    print(f"agent {i}: value {vals[i].bundle_value(bundle)}", {k: p for k, p in enumerate(bundle) if p})
print("proportional:", check_proportional(vals, alloc))
