"""Maximum matchings and maximum envy-free matchings in bipartite graphs.

An envy-free matching leaves no unmatched agent adjacent to a matched item.
Ties are broken towards lower agent and item indices so results are
reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


@dataclass(frozen=True)
class BipartiteGraph:
    agents: tuple
    items: tuple
    edges: dict = field(hash=False)

    def __init__(self, agents: Iterable, items: Iterable, edges: dict):
        agents, items = tuple(agents), tuple(items)
        item_set = set(items)
        clean = {}
        for a in agents:
            adj = set(edges.get(a, ()))
            if not adj <= item_set:
                raise ValueError(f"agent {a!r} is adjacent to unknown items {sorted(adj - item_set)!r}")
            clean[a] = tuple(t for t in items if t in adj)
        if set(edges) - set(agents):
            raise ValueError(f"edges for unknown agents {sorted(set(edges) - set(agents))!r}")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "edges", clean)

    def adjacent(self, a, t) -> bool:
        return t in self.edges[a]


def max_matching(g: BipartiteGraph) -> dict:
    """Maximum-cardinality matching as ``{agent: item}`` (augmenting paths)."""
    owner: dict = {}

    def augment(a, seen):
        for t in g.edges[a]:
            if t in seen:
                continue
            seen.add(t)
            if t not in owner or augment(owner[t], seen):
                owner[t] = a
                return True
        return False

    for a in g.agents:
        augment(a, set())
    return {a: t for t, a in owner.items()}


def max_envy_free_matching(g: BipartiteGraph) -> dict:
    """Largest matching in which no unmatched agent is adjacent to a matched item.

    Start from a maximum matching and discard every agent reachable from an
    unmatched agent by an alternating path (non-matching edge to an item,
    matching edge back to its agent), together with the items reached.  What
    is left is a maximum envy-free matching.
    """
    m = max_matching(g)
    owner = {t: a for a, t in m.items()}
    frontier = [a for a in g.agents if a not in m]
    bad_agents, bad_items = set(frontier), set()
    while frontier:
        a = frontier.pop()
        for t in g.edges[a]:
            if t in bad_items:
                continue
            bad_items.add(t)
            b = owner.get(t)
            if b is not None and b not in bad_agents:
                bad_agents.add(b)
                frontier.append(b)
    return {a: t for a, t in m.items() if a not in bad_agents}


def is_envy_free_matching(g: BipartiteGraph, matching: dict) -> bool:
    matched_items = set(matching.values())
    return all(not (set(g.edges[a]) & matched_items) for a in g.agents if a not in matching)
