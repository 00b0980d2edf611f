"""Stable trees with labelled tails, grafting and edge contraction."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u


@dataclass(frozen=True)
class Flag:
    """Incidence of a vertex with a tail (``edge is None``) or with one end of an edge."""

    vertex: int
    tail: int | None = None
    edge: int | None = None


@dataclass(frozen=True)
class StableTree:
    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    tails: tuple[tuple[int, int], ...]  # (label, vertex), sorted by label

    @classmethod
    def build(cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]], tails: dict[int, int]) -> "StableTree":
        es = tuple(Edge(i, u, v) for i, (u, v) in enumerate(edges))
        return cls(tuple(sorted(vertices)), es, tuple(sorted(tails.items())))

    @classmethod
    def corolla(cls, labels: Iterable[int]) -> "StableTree":
        return cls((0,), (), tuple((lab, 0) for lab in sorted(labels)))

    @property
    def tail_labels(self) -> tuple[int, ...]:
        return tuple(lab for lab, _ in self.tails)

    def edge(self, eid: int) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(f"no edge {eid}")

    def flags(self, v: int | None = None) -> list[Flag]:
        """Flags in canonical order: by vertex, tails (by label) before edge ends (by edge id)."""
        out = []
        for x in self.vertices if v is None else (v,):
            out.extend(Flag(x, tail=lab) for lab, w in self.tails if w == x)
            out.extend(Flag(x, edge=e.id) for e in self.edges if x in (e.u, e.v))
        return out

    def valence(self, v: int) -> int:
        return len(self.flags(v))

    def tails_at(self, v: int) -> list[int]:
        return [lab for lab, w in self.tails if w == v]

    def neighbours(self, v: int, skip: int | None = None) -> list[tuple[int, Edge]]:
        return [(e.other(v), e) for e in self.edges if v in (e.u, e.v) and e.id != skip]

    def side(self, eid: int, start: int) -> set[int]:
        """Vertices reachable from ``start`` without crossing edge ``eid``."""
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y, _ in self.neighbours(x, skip=eid):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def split(self, eid: int) -> frozenset[int]:
        """Tail labels on the side of edge ``eid`` that does not contain the smallest label."""
        e = self.edge(eid)
        side = self.side(eid, e.v)
        labels = frozenset(lab for lab, w in self.tails if w in side)
        if min(self.tail_labels) in labels:
            labels = frozenset(self.tail_labels) - labels
        return labels

    def splits(self) -> frozenset[frozenset[int]]:
        return frozenset(self.split(e.id) for e in self.edges)


def validate_tree(t: StableTree) -> tuple[bool, list[str]]:
    diags: list[str] = []
    vs = set(t.vertices)
    if len(vs) != len(t.vertices):
        diags.append("duplicate vertex ids")
    if not vs:
        return False, ["tree has no vertices"]
    for e in t.edges:
        if e.u == e.v:
            diags.append(f"edge {e.id} is a loop at vertex {e.u}")
        if e.u not in vs or e.v not in vs:
            diags.append(f"edge {e.id} has an endpoint outside the vertex set")
    if len({e.id for e in t.edges}) != len(t.edges):
        diags.append("duplicate edge ids")
    labels = [lab for lab, _ in t.tails]
    if len(set(labels)) != len(labels):
        diags.append("duplicate tail labels")
    for lab, w in t.tails:
        if w not in vs:
            diags.append(f"tail {lab} attached to unknown vertex {w}")
    if diags:
        return False, diags
    if len(t.edges) != len(vs) - 1:
        diags.append(f"|E| = {len(t.edges)} but |V| - 1 = {len(vs) - 1}")
    reach = t.side(-1, t.vertices[0])
    if reach != vs:
        diags.append(f"not connected: vertices {sorted(vs - reach)} unreachable")
    for v in t.vertices:
        if t.valence(v) < 3:
            diags.append(f"vertex {v} has flag valence {t.valence(v)} < 3")
    return not diags, diags


class TreeError(ValueError):
    pass


def require_valid(t: StableTree) -> None:
    ok, diags = validate_tree(t)
    if not ok:
        raise TreeError("; ".join(diags))


def graft(tau: StableTree, sigma: StableTree, tail_tau: int, tail_sigma: int) -> StableTree:
    """Join the vertex carrying ``tail_tau`` to the one carrying ``tail_sigma`` by a new edge."""
    require_valid(tau)
    require_valid(sigma)
    tt = dict(tau.tails)
    ts = dict(sigma.tails)
    if tail_tau not in tt or tail_sigma not in ts:
        raise TreeError("grafting tail not found")
    rest_tau = {k: v for k, v in tt.items() if k != tail_tau}
    rest_sigma = {k: v for k, v in ts.items() if k != tail_sigma}
    if set(rest_tau) & set(rest_sigma):
        raise TreeError(f"remaining tail labels overlap: {sorted(set(rest_tau) & set(rest_sigma))}")
    shift = max(tau.vertices) + 1
    remap = {v: i + shift for i, v in enumerate(sigma.vertices)}
    vertices = list(tau.vertices) + [remap[v] for v in sigma.vertices]
    edges = [(e.u, e.v) for e in tau.edges] + [(remap[e.u], remap[e.v]) for e in sigma.edges]
    edges.append((tt[tail_tau], remap[ts[tail_sigma]]))
    tails = dict(rest_tau)
    tails.update({k: remap[v] for k, v in rest_sigma.items()})
    out = StableTree.build(vertices, edges, tails)
    require_valid(out)
    return out


def contract(t: StableTree, eid: int) -> StableTree:
    """Tree with edge ``eid`` collapsed; the merged vertex keeps the smaller id."""
    e = t.edge(eid)
    keep, gone = min(e.u, e.v), max(e.u, e.v)

    def m(x: int) -> int:
        return keep if x == gone else x

    edges = tuple(Edge(f.id, m(f.u), m(f.v)) for f in t.edges if f.id != eid)
    tails = tuple((lab, m(w)) for lab, w in t.tails)
    vertices = tuple(v for v in t.vertices if v != gone)
    return StableTree(vertices, edges, tails)


def is_isomorphic(a: StableTree, b: StableTree) -> bool:
    """Stable trees with labelled tails are determined by their edge splits."""
    return set(a.tail_labels) == set(b.tail_labels) and a.splits() == b.splits()


def compatible(s: frozenset, t: frozenset, labels: frozenset) -> bool:
    return not (s & t and s - t and t - s and labels - (s | t))


def tree_from_splits(labels: Sequence[int], splits: Iterable[Iterable[int]]) -> StableTree:
    """Tree whose edges realise a set of pairwise compatible splits.

    The root vertex carries the smallest label; each split is normalized to the
    side without that label, and the resulting clusters nest into a tree.
    """
    labels = tuple(sorted(labels))
    full = frozenset(labels)
    root_label = labels[0]
    clusters = set()
    for s in splits:
        s = frozenset(s)
        if root_label in s:
            s = full - s
        if not (2 <= len(s) <= len(full) - 2) or not s <= full:
            raise TreeError(f"invalid split {sorted(s)}")
        clusters.add(s)
    clusters = sorted(clusters, key=lambda c: (-len(c), sorted(c)))
    for a, b in combinations(clusters, 2):
        if not compatible(a, b, full):
            raise TreeError(f"splits {sorted(a)} and {sorted(b)} cross")
    ids = {c: i + 1 for i, c in enumerate(clusters)}

    def owner(x: frozenset) -> int:
        best = 0
        for c in clusters:  # largest first, so the last hit is the smallest container
            if x < c or (len(x) == 1 and x <= c):
                best = ids[c]
        return best

    edges = [(owner(c), ids[c]) for c in clusters]
    tails = {lab: owner(frozenset([lab])) for lab in labels}
    return StableTree.build(range(len(clusters) + 1), edges, tails)


def compatible_split_sets(labels: Sequence[int], max_edges: int) -> list[tuple[frozenset, ...]]:
    """All sets of at most ``max_edges`` pairwise compatible splits (normalized away from min label)."""
    labels = tuple(sorted(labels))
    full = frozenset(labels)
    rest = labels[1:]
    cands = [frozenset(c) for k in range(2, len(labels) - 1) for c in combinations(rest, k)]
    out: list[tuple[frozenset, ...]] = [()]
    frontier: list[tuple[int, tuple[frozenset, ...]]] = [(-1, ())]
    for _ in range(max_edges):
        nxt = []
        for last, chosen in frontier:
            for i in range(last + 1, len(cands)):
                c = cands[i]
                if all(compatible(c, d, full) for d in chosen):
                    nxt.append((i, chosen + (c,)))
        out.extend(ch for _, ch in nxt)
        frontier = nxt
    return out


def set_partitions(items: Sequence[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def two_level_trees(n: int) -> list[StableTree]:
    """Root with leg 0 whose children are the blocks of a partition of 1..n (blocks of size >= 2 become vertices)."""
    out = []
    for part in set_partitions(list(range(1, n + 1))):
        if len(part) < 2:
            continue
        blocks = [frozenset(b) for b in part if len(b) >= 2]
        out.append(tree_from_splits(range(n + 1), blocks))
    return out
