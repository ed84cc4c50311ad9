"""Robertson-Webb queries on a layered cake.

Short queries ask about one layer; long queries ask about the diagonal piece
LR(x): the top half of the layers left of x plus the bottom half right of x.
All answers are exact rationals, and every call is counted.
"""
from fractions import Fraction as F

from layercake import (
    LayeredCake, QuerySession, Side, StepDensity, Valuation, long_cut, long_eval, short_cut, short_eval,
    switching_point,
)

cake = LayeredCake.full(2)
spiky = StepDensity((0, F(1, 4), F(3, 4), 1), (2, 0, F(2, 3)))
v = Valuation([spiky, StepDensity.constant(1)], cake, normalize=False)
s = QuerySession(cake, [v])

print("short eval, layer 0 on [1/4, 3/4]:", short_eval(s, 0, 0, F(1, 4), F(3, 4)))
print("short cut, layer 0 from 0 worth 3/5:", short_cut(s, 0, 0, 0, F(3, 5)))
for x in (0, F(1, 2), 1):
    print(f"LR({x}) = {long_eval(s, 0, x)}, RL({x}) = {long_eval(s, 0, x, Side.RL)}")
print("long cut to 1:", long_cut(s, 0, 1))
x = switching_point(s, 0)
print("switching point:", x, "-> both sides worth", long_eval(s, 0, x))
print("queries asked:", dict(s.counters))
