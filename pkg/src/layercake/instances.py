"""Instance and allocation files, plus a seeded random instance generator.

Rationals are written as ``"p/q"`` or integer strings; JSON numbers are
rejected on input so nothing passes through a float.
"""
from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path

from .core import ONE, ZERO, LayeredCake, MultiAllocation, Piece, Rational, StepDensity, Valuation

_RATIONAL = re.compile(r"\s*-?\d+(\s*/\s*\d+)?\s*")
GRID = 1024


class InstanceError(ValueError):
    """Malformed instance or allocation file."""


@dataclass(frozen=True)
class Instance:
    cake: LayeredCake
    valuations: tuple
    names: tuple

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def m(self) -> int:
        return self.cake.m

    def extents(self) -> list[tuple[Rational, Rational]]:
        return [tuple(layer.piece.bounds) for layer in self.cake.layers]


def parse_rational(text, what: str = "value") -> Rational:
    if not isinstance(text, str) or not _RATIONAL.fullmatch(text):
        raise InstanceError(f"{what}: expected a rational string like \"3/4\", got {text!r}")
    try:
        return Rational(text.replace(" ", ""))
    except ZeroDivisionError:
        raise InstanceError(f"{what}: zero denominator in {text!r}") from None


def format_rational(x: Rational) -> str:
    return str(x)


def _field(obj, key, what):
    if not isinstance(obj, dict) or key not in obj:
        raise InstanceError(f"{what}: missing {key!r}")
    return obj[key]


def instance_from_dict(data: dict) -> Instance:
    layers = _field(data, "layers", "instance")
    agents = _field(data, "agents", "instance")
    if not isinstance(layers, list) or not layers:
        raise InstanceError("instance: 'layers' must be a non-empty list")
    if not isinstance(agents, list) or not agents:
        raise InstanceError("instance: 'agents' must be a non-empty list")
    extents = []
    for j, layer in enumerate(layers):
        lo = parse_rational(_field(layer, "start", f"layer {j}"), f"layer {j} start")
        hi = parse_rational(_field(layer, "end", f"layer {j}"), f"layer {j} end")
        if not 0 <= lo < hi <= 1:
            raise InstanceError(f"layer {j}: need 0 <= start < end <= 1, got [{lo}, {hi}]")
        extents.append((lo, hi))
    cake = LayeredCake.from_intervals(extents)
    vals, names = [], []
    for i, agent in enumerate(agents):
        name = agent.get("name", f"agent{i}") if isinstance(agent, dict) else None
        dens = _field(agent, "densities", f"agent {i}")
        if not isinstance(dens, list) or len(dens) != len(extents):
            raise InstanceError(f"agent {i}: need one density list per layer ({len(extents)})")
        steps = []
        for j, segs in enumerate(dens):
            where = f"agent {i} layer {j}"
            if not isinstance(segs, list) or not segs:
                raise InstanceError(f"{where}: density must be a non-empty segment list")
            pairs = []
            for seg in segs:
                to = parse_rational(_field(seg, "to", where), f"{where} 'to'")
                value = parse_rational(_field(seg, "value", where), f"{where} 'value'")
                if value < 0:
                    raise InstanceError(f"{where}: negative density {value}")
                pairs.append((to, value))
            try:
                steps.append(StepDensity.from_segments(pairs, *extents[j]))
            except ValueError as exc:
                raise InstanceError(f"{where}: {exc}") from None
        try:
            vals.append(Valuation(steps, cake))
        except ValueError as exc:
            raise InstanceError(f"agent {i}: {exc}") from None
        names.append(str(name))
    return Instance(cake, tuple(vals), tuple(names))


def parse_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(data)


def _density_segments(d: StepDensity, lo: Rational, hi: Rational) -> list[dict]:
    out = []
    for a, b, v in d.segments():
        a, b = max(a, lo), min(b, hi)
        if a >= b:
            continue
        if out and out[-1]["value"] == str(v):
            out[-1]["to"] = str(b)
        else:
            out.append({"to": str(b), "value": str(v)})
    return out


def instance_to_dict(inst: Instance) -> dict:
    extents = inst.extents()
    return {
        "layers": [{"start": str(lo), "end": str(hi)} for lo, hi in extents],
        "agents": [
            {"name": name,
             "densities": [_density_segments(d, lo, hi) for d, (lo, hi) in zip(v.layers, extents)]}
            for name, v in zip(inst.names, inst.valuations)
        ],
    }


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2) + "\n"


def allocation_to_dict(inst: Instance, alloc: MultiAllocation) -> list[dict]:
    return [
        {"name": name,
         "layers": [[[str(iv.lo), str(iv.hi)] for iv in piece] for piece in bundle]}
        for name, bundle in zip(inst.names, alloc.bundles)
    ]


def allocation_from_dict(data, inst: Instance) -> MultiAllocation:
    rows = data.get("allocation") if isinstance(data, dict) else data
    if not isinstance(rows, list) or len(rows) != inst.n:
        raise InstanceError(f"allocation: need one bundle per agent ({inst.n})")
    bundles = []
    for i, row in enumerate(rows):
        layers = _field(row, "layers", f"bundle {i}")
        if not isinstance(layers, list) or len(layers) != inst.cake.n_original:
            raise InstanceError(f"bundle {i}: need one piece per layer ({inst.cake.n_original})")
        bundle = []
        for j, ivs in enumerate(layers):
            try:
                pairs = [(parse_rational(lo, f"bundle {i} layer {j}"), parse_rational(hi, f"bundle {i} layer {j}"))
                         for lo, hi in ivs]
                bundle.append(Piece(pairs))
            except (TypeError, ValueError) as exc:
                raise InstanceError(f"bundle {i} layer {j}: {exc}") from None
        bundles.append(tuple(bundle))
    return MultiAllocation(tuple(bundles))


def parse_allocation(path, inst: Instance) -> MultiAllocation:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: not valid JSON ({exc})") from None
    return allocation_from_dict(data, inst)


# random instances

def _random_density(rng: random.Random, breakpoints: int) -> StepDensity:
    cuts = sorted(rng.sample(range(1, GRID), min(breakpoints, GRID - 1)))
    bps = [ZERO] + [Rational(c, GRID) for c in cuts] + [ONE]
    vals = [Rational(rng.randint(0, 16)) for _ in range(len(bps) - 1)]
    if not any(vals):
        vals[rng.randrange(len(vals))] = ONE
    return StepDensity(tuple(bps), tuple(vals))


def random_instance(n: int, m: int, breakpoints: int = 0, seed: int = 0, *,
                    identical_pair: bool = False, prefer: str | None = None) -> Instance:
    """A seeded instance over ``m`` full layers with ``n`` agents.

    Each layer density has ``breakpoints`` interior breakpoints on a 1/1024
    grid and integer values in 0..16; with 0 breakpoints the density is
    uniform with a random weight.  ``identical_pair`` makes agent 1 a copy of
    agent 0.  ``prefer`` ("top" or "bottom", two layers only) reorders every
    agent's densities so that layer is strictly preferred.
    """
    if n < 1 or m < 1 or breakpoints < 0:
        raise ValueError("need n >= 1, m >= 1 and breakpoints >= 0")
    if prefer not in (None, "top", "bottom") or (prefer and m != 2):
        raise ValueError("prefer must be 'top' or 'bottom' and needs two layers")
    rng = random.Random(seed)
    cake = LayeredCake.full(m)
    dens = []
    for _ in range(n):
        while True:
            layer_dens = [_random_density(rng, breakpoints) for _ in range(m)]
            if sum(d.total for d in layer_dens) > 0:
                break
        if prefer:
            heavy, light = sorted(layer_dens, key=lambda d: d.total, reverse=True)
            if heavy.total == light.total:
                light = light.scaled(Rational(1, 2))
            layer_dens = [light, heavy] if prefer == "bottom" else [heavy, light]
        dens.append(layer_dens)
    if identical_pair and n >= 2:
        dens[1] = list(dens[0])
    vals = tuple(Valuation(d, cake) for d in dens)
    return Instance(cake, vals, tuple(f"agent{i}" for i in range(n)))
