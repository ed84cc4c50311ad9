"""Proportional, contiguous, non-overlapping division for m = 2**a layers.

Extra agents are first peeled off with single-layer shouts.  With n = m the
agents are split in halves at a majority switching point; each half gets one
merged diagonal and recurses, down to cut-and-choose.
"""
from layercake import QuerySession, check_proportional, check_structure, majority_switching_point, prop_power_two
from layercake.instances import random_instance

inst = random_instance(6, 4, breakpoints=3, seed=21)
s = QuerySession(inst.cake, inst.valuations)
print("first majority switching point:", majority_switching_point(QuerySession(inst.cake, inst.valuations)))

alloc = prop_power_two(s)
for i, (v, bundle) in enumerate(zip(inst.valuations, alloc.bundles)):
    pieces = {k: p for k, p in enumerate(bundle) if p}
    print(f"agent {i}: value {float(v.bundle_value(bundle)):.4f} (share {1 / inst.n:.4f})  {pieces}")
print("proportional:", check_proportional(inst.valuations, alloc))
print("structure:", check_structure(inst.cake, alloc).as_dict())
print("queries:", dict(s.counters))
