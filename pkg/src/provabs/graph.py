"""Small directed-graph helpers over adjacency dicts (vertex -> sorted successors)."""

from __future__ import annotations

import heapq
from collections import deque
from collections.abc import Hashable, Iterable, Mapping, Sequence

Adjacency = Mapping[Hashable, Sequence[Hashable]]


def build_adjacency(vertices: Iterable, edges: Iterable[tuple]) -> dict:
    adj: dict = {v: set() for v in vertices}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set())
    return {u: tuple(sorted(vs)) for u, vs in adj.items()}


def reverse(adj: Adjacency) -> dict:
    rev: dict = {v: [] for v in adj}
    for u, vs in adj.items():
        for v in vs:
            rev[v].append(u)
    return {v: tuple(sorted(us)) for v, us in rev.items()}


def reachable(adj: Adjacency, starts: Iterable) -> set:
    """Vertices reachable from ``starts`` by a walk of length >= 0."""
    seen = set(starts)
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def distances(adj: Adjacency, start) -> dict:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def topological_order(adj: Adjacency) -> list | None:
    """Kahn's algorithm with smallest-vertex tie breaking; None if cyclic."""
    indeg = {v: 0 for v in adj}
    for vs in adj.values():
        for v in vs:
            indeg[v] += 1
    heap = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in adj[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != len(indeg):
        return None
    return order


def find_cycle(adj: Adjacency) -> list | None:
    """Return one directed cycle as a closed vertex list ``[v0, ..., v0]``, or None."""
    white, grey, black = 0, 1, 2
    colour = {v: white for v in adj}
    for root in sorted(adj):
        if colour[root] != white:
            continue
        stack = [(root, iter(adj[root]))]
        path = [root]
        colour[root] = grey
        while stack:
            u, it = stack[-1]
            for v in it:
                if colour[v] == grey:
                    return path[path.index(v):] + [v]
                if colour[v] == white:
                    colour[v] = grey
                    path.append(v)
                    stack.append((v, iter(adj[v])))
                    break
            else:
                colour[u] = black
                path.pop()
                stack.pop()
    return None
