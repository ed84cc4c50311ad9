"""Two flatmates split two shared rooms over one day.

Each room is a layer of the cake and the day is [0, 1].  Nobody may be in
both rooms at once, so a bundle must not overlap across layers.  The cutter
picks the point where the two diagonal halves look equal to them; the
chooser takes the half they like better.
"""
from fractions import Fraction as F

from layercake import (
    LayeredCake, QuerySession, StepDensity, Valuation, check_envy_free, check_structure, cut_and_choose,
)

cake = LayeredCake.full(2)
# the cutter likes the top room three times as much as the bottom one
cutter = Valuation.uniform([3, 1], cake)
# the chooser only cares about the bottom room, and only in the morning
chooser = Valuation([StepDensity.constant(1), StepDensity((0, F(1, 2), 1), (2, 0))], cake)

s = QuerySession(cake, [cutter, chooser])
alloc = cut_and_choose(s)

for name, bundle in zip(["cutter", "chooser"], alloc.bundles):
    print(f"{name:8s} top={bundle[0]} bottom={bundle[1]}")
print("values (row = agent, column = bundle):")
for row in alloc.values(s.valuations):
    print("   ", [str(v) for v in row])
print("structure:", check_structure(cake, alloc).as_dict())
print("envy-free:", check_envy_free(s.valuations, alloc))
print("queries:", dict(s.counters))
