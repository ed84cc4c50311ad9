"""Envy-free division for any n >= m when pieces may be fragmented.

Every elementary segment (between consecutive density breakpoints of anyone)
is cut into n equal slices.  Slice h of every segment forms group Y_h, which
every agent values at exactly 1/n of each layer.  Agent i gets group
(i + k) mod n on layer k, so no agent holds the same stretch of time twice.
"""
from layercake import QuerySession, check_envy_free, check_structure, ef_noncontiguous
from layercake.ef_protocols import elementary_segment_count
from layercake.instances import random_instance

inst = random_instance(4, 3, breakpoints=2, seed=12)
s = QuerySession(inst.cake, inst.valuations)
alloc = ef_noncontiguous(s)

print("elementary segments:", elementary_segment_count(s))
print("intervals per (agent, layer):", alloc.piece_counts())
print("every agent values every bundle at:", {str(v) for row in alloc.values(inst.valuations) for v in row})
print("envy-free:", check_envy_free(inst.valuations, alloc))
print("structure:", check_structure(inst.cake, alloc).as_dict())
