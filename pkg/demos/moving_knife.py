"""Three agents on two layers, two of whom agree on everything.

The swept piece Y grows along the top layer while a long knife tracks where
the identical pair is indifferent between the two diagonal pieces of what is
left.  Whoever first weakly prefers Y takes it.  Here the shared valuation
prefers the bottom layer, so the layers get swapped before the sweep.
"""
from fractions import Fraction as F

from layercake import (
    LayeredCake, QuerySession, StepDensity, Valuation, check_envy_free, check_structure, moving_knife_trace,
)

cake = LayeredCake.full(2)
pair = Valuation([StepDensity.constant(1), StepDensity((0, F(1, 3), 1), (1, 4))], cake)
outsider = Valuation([StepDensity((0, F(1, 2), 1), (3, 1)), StepDensity.constant(2)], cake)
vals = [pair, outsider, pair]

s = QuerySession(cake, vals)
alloc, shout = moving_knife_trace(s)
print(f"short knife y = {shout.y}, long knife x = {shout.x}, shouter = agent {shout.shouter}")
for i, bundle in enumerate(alloc.bundles):
    print(f"agent {i}: top={bundle[0]} bottom={bundle[1]}")
print("value matrix:")
for row in alloc.values(vals):
    print("   ", [f"{float(v):.4f}" for v in row])
print("envy-free:", check_envy_free(vals, alloc), "| structure:", check_structure(cake, alloc).as_dict())

# the textbook case: everyone values only the top layer, uniformly
top = Valuation([StepDensity.constant(1), StepDensity.constant(0)], cake)
_, shout = moving_knife_trace(QuerySession(cake, [top] * 3))
print(f"all-top agents: y = {shout.y}, x = {shout.x}")
