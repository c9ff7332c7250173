"""Finite balls of the Bass-Serre tree and the left-translation action on them.

A vertex ``gG_i`` is stored as ``(i, rep)`` where ``rep`` is the syllable
sequence of ``g``'s normal form with the H tail dropped and, if the last
syllable lies in factor ``i``, that syllable dropped too.  An edge ``gH`` is
the syllable sequence alone.  Its endpoints are its two truncations.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .amalgam import Amalgam, NormalForm, Syllable

MAX_RADIUS = 8


@dataclass(frozen=True, order=True)
class TreeVertex:
    side: int
    rep: tuple

    def label(self) -> str:
        return f"v:{self.side}:{rep_label(self.rep)}"


@dataclass(frozen=True, order=True)
class TreeEdge:
    rep: tuple

    def endpoints(self) -> tuple:
        return (vertex_of(self.rep, 0), vertex_of(self.rep, 1))

    def label(self) -> str:
        return rep_label(self.rep)


def rep_label(rep: tuple) -> str:
    return ".".join(f"{s.factor}:{s.index}" for s in rep) or "e"


def parse_rep(text: str) -> tuple:
    if text == "e":
        return ()
    out = []
    for part in text.split("."):
        f, _, i = part.partition(":")
        out.append(Syllable(int(f), int(i)))
    return tuple(out)


def vertex_of(syllables: tuple, side: int) -> TreeVertex:
    syl = tuple(Syllable(*s) for s in syllables)
    if syl and syl[-1].factor == side:
        syl = syl[:-1]
    return TreeVertex(side, syl)


def vertex_element(am: Amalgam, v) -> NormalForm:
    return am.transversal_element(v.rep)


@dataclass
class TreeBall:
    radius: int
    vertices: list
    edges: list
    adjacency: dict

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TreeBall)
            and self.radius == other.radius
            and self.vertices == other.vertices
            and self.edges == other.edges
        )

    def degree(self, v: TreeVertex) -> int:
        return len(self.adjacency[v])

    def distances_from(self, v: TreeVertex) -> dict:
        dist = {v: 0}
        q = deque([v])
        while q:
            x = q.popleft()
            for y in self.adjacency[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    q.append(y)
        return dist

    def interior(self) -> list:
        """Vertices strictly inside the ball (all their neighbours are present)."""
        return [v for v in self.vertices if len(v.rep) < self.radius]


def _edges_at(am: Amalgam, v: TreeVertex) -> list:
    idx = am.factors[v.side].index
    if idx is None:
        raise ValueError("ball construction needs finite indices")
    return [TreeEdge(v.rep + ((Syllable(v.side, i),) if i else ())) for i in range(idx)]


def build_ball(am: Amalgam, radius: int) -> TreeBall:
    """Vertices within ``radius`` of the base edge's endpoints, breadth first."""
    if radius < 0 or radius > MAX_RADIUS:
        raise ValueError(f"radius must be in [0, {MAX_RADIUS}]")
    base = [TreeVertex(0, ()), TreeVertex(1, ())]
    seen = set(base)
    order = list(base)
    edges = {TreeEdge(())}
    frontier = base
    for _ in range(radius):
        nxt = []
        for v in frontier:
            for e in _edges_at(am, v):
                for w in e.endpoints():
                    if w not in seen:
                        seen.add(w)
                        order.append(w)
                        nxt.append(w)
                        edges.add(e)
        frontier = nxt
    adjacency = {v: [] for v in order}
    for e in sorted(edges):
        a, b = e.endpoints()
        adjacency[a].append(b)
        adjacency[b].append(a)
    return TreeBall(radius, sorted(order), sorted(edges), adjacency)


def act(am: Amalgam, g: NormalForm, x):
    """Left translation ``g . x`` on a vertex or an edge."""
    y = am.mul(g, am.transversal_element(x.rep))
    if isinstance(x, TreeEdge):
        return TreeEdge(y.syllables)
    return vertex_of(y.syllables, x.side)


def fixed_points(am: Amalgam, g: NormalForm, ball: TreeBall) -> set:
    return {v for v in ball.vertices if act(am, g, v) == v}


def half_tree(ball: TreeBall, edge: TreeEdge, toward: TreeVertex) -> set:
    """Ball vertices strictly closer to ``toward`` than to the other endpoint."""
    a, b = edge.endpoints()
    if toward not in (a, b):
        raise ValueError("direction must be an endpoint of the edge")
    other = b if toward == a else a
    da, db = ball.distances_from(toward), ball.distances_from(other)
    return {v for v in ball.vertices if da[v] < db[v]}


def fixator_membership(am: Amalgam, x: NormalForm, prefix: Iterable) -> bool:
    """Does ``x`` fix the cylinder ``U(prefix)`` pointwise?

    The fixator is ``prefix K_j prefix^-1`` where ``j`` is the factor not
    holding the last syllable.  The empty prefix stands for the whole
    boundary, fixed only by the kernel of the amalgam.
    """
    prefix = tuple(Syllable(*s) for s in prefix)
    if not prefix:
        return all(am.in_one_sided_kernel(x.tail, j) for j in (0, 1)) and x.in_H()
    g = am.transversal_element(prefix)
    c = am.conjugate(x, g)
    if not c.in_H():
        return False
    return am.in_one_sided_kernel(c.tail, 1 - prefix[-1].factor)


def cylinder_fix_check(am: Amalgam, x: NormalForm, prefix: Iterable, ball: TreeBall) -> bool:
    """Does ``x`` fix every ball vertex whose representative extends ``prefix``?"""
    prefix = tuple(Syllable(*s) for s in prefix)
    if ball.radius < len(prefix) + 1:
        raise ValueError("ball too small for this prefix")
    n = len(prefix)
    return all(act(am, x, v) == v for v in ball.vertices if v.rep[:n] == prefix and len(v.rep) >= n)


def prefixes(am: Amalgam, length: int):
    for j in (0, 1):
        for w in am.transversal_words(j, length):
            yield w.syllables


def interior_witness(am: Amalgam, x: NormalForm, max_prefix_len: int) -> Optional[tuple]:
    """First prefix (by length, then lexicographic) whose cylinder ``x`` fixes."""
    if am.is_identity(x):
        raise ValueError("the identity fixes everything")
    for n in range(1, max_prefix_len + 1):
        for p in prefixes(am, n):
            if fixator_membership(am, x, p):
                return p
    return None


# -- export --------------------------------------------------------------
def export_ball(ball: TreeBall, fmt: str = "dot") -> str:
    if fmt == "dot":
        lines = sorted(f'  "{v.label()}";' for v in ball.vertices)
        stmts = []
        for e in ball.edges:
            a, b = sorted(v.label() for v in e.endpoints())
            stmts.append(f'  "{a}" -- "{b}" [label="{e.label()}"];')
        return "graph {\n" + "\n".join(lines + sorted(stmts)) + "\n}\n"
    if fmt == "json":
        return json.dumps(
            {
                "radius": ball.radius,
                "vertices": [v.label() for v in ball.vertices],
                "edges": [e.label() for e in ball.edges],
            },
            sort_keys=True,
        )
    raise ValueError(f"unknown format {fmt!r}")


def parse_vertex(label: str) -> TreeVertex:
    _, side, rep = label.split(":", 2)
    return TreeVertex(int(side), parse_rep(rep))


def ball_from_json(text: str) -> TreeBall:
    d = json.loads(text)
    verts = sorted(parse_vertex(v) for v in d["vertices"])
    edges = sorted(TreeEdge(parse_rep(e)) for e in d["edges"])
    adjacency = {v: [] for v in verts}
    for e in edges:
        a, b = e.endpoints()
        adjacency[a].append(b)
        adjacency[b].append(a)
    return TreeBall(d["radius"], verts, edges, adjacency)


_DOT_EDGE = re.compile(r'^\s*"([^"]+)" -- "([^"]+)"')
_DOT_NODE = re.compile(r'^\s*"([^"]+)";\s*$')


def dot_counts(text: str) -> tuple:
    """(vertex count, edge count) read back from DOT output."""
    nodes, edges = set(), 0
    for line in text.splitlines():
        if m := _DOT_EDGE.match(line):
            nodes.update(m.groups())
            edges += 1
        elif m := _DOT_NODE.match(line):
            nodes.add(m.group(1))
    return len(nodes), edges
