"""Quotient cycle graphs, edge partitions and their hypergraphs.

The directed k-cycle 1 -> 2 -> ... -> k -> 1 is quotiented by a partition
``pi`` of its vertices.  Edges keep their position ``l`` in the circuit, so an
edge partition ``tau`` is simply a :class:`Partition` of {1..k}.  Vertices of
the quotient are the blocks of ``pi``, numbered 0..|pi|-1 in restricted-growth
order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence

from .partitions import K_MAX, Partition, PartitionError, _trusted

EdgePartition = Partition


class ContractViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class QuotientCycleGraph:
    pi: Partition
    edges: tuple[tuple[int, int], ...]  # edge l-1 = (block of l, block of l+1), 0-based

    @property
    def n_vertices(self) -> int:
        return self.pi.n_blocks

    @property
    def k(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class Hypergraph:
    vertex_count: int
    edges: tuple[frozenset, ...]

    def __post_init__(self):
        if any(not e for e in self.edges):
            raise ValueError("hyperedges must be non-empty")
        covered = set().union(*self.edges) if self.edges else set()
        if covered != set(range(self.vertex_count)):
            raise ValueError("hyperedges must cover every vertex")


def quotient_cycle(pi: Partition) -> QuotientCycleGraph:
    lab = pi.labels
    k = len(lab)
    return QuotientCycleGraph(pi, tuple((lab[l] - 1, lab[(l + 1) % k] - 1) for l in range(k)))


def build_hypergraph(g: QuotientCycleGraph, tau: EdgePartition) -> Hypergraph:
    if tau.k != g.k:
        raise PartitionError(f"tau is on {tau.k} edges, graph has {g.k}")
    members: list[set[int]] = [set() for _ in range(tau.n_blocks)]
    for (u, v), w in zip(g.edges, tau.labels):
        members[w - 1].update((u, v))
    return Hypergraph(g.n_vertices, tuple(frozenset(m) for m in members))


def _find(parent: list[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def hypergraph_components(h: Hypergraph) -> int:
    parent = list(range(h.vertex_count))
    n = h.vertex_count
    for e in h.edges:
        it = iter(e)
        r = _find(parent, next(it))
        for v in it:
            s = _find(parent, v)
            if s != r:
                parent[s] = r
                n -= 1
    return n


def cyclomatic_quantity(h: Hypergraph) -> int:
    """sum |E_W| - |tau| - |V| + (number of components); never negative."""
    return sum(len(e) for e in h.edges) - len(h.edges) - h.vertex_count + hypergraph_components(h)


def is_acyclic(h: Hypergraph) -> bool:
    return cyclomatic_quantity(h) == 0


def cycle_search_oracle(h: Hypergraph, max_vertices: int = 12) -> bool:
    """Exhaustive search for a cycle (v0, E1, v1, ..., E_l, v0), l >= 2.

    Vertices v0..v_{l-1} pairwise distinct, edges pairwise distinct.
    Returns True when no cycle exists.  Test oracle only.
    """
    if h.vertex_count > max_vertices:
        raise PartitionError(f"cycle search limited to {max_vertices} vertices")
    edges = h.edges

    def extend(start: int, cur: int, used_v: set, used_e: set, length: int) -> bool:
        for i, e in enumerate(edges):
            if i in used_e or cur not in e:
                continue
            for v in e:
                if v == cur:
                    continue
                if v == start and length >= 1:
                    return True
                if v in used_v:
                    continue
                used_v.add(v)
                used_e.add(i)
                found = extend(start, v, used_v, used_e, length + 1)
                used_v.discard(v)
                used_e.discard(i)
                if found:
                    return True
        return False

    for v0 in range(h.vertex_count):
        if extend(v0, v0, {v0}, set(), 0):
            return False
    return True


# --------------------------------------------------------- acyclic enumeration

def enumerate_acyclic_edge_partitions(pi: Partition, k_max: int | None = None) -> Iterator[EdgePartition]:
    """Edge partitions tau with H(pi, tau) free of cycles, in RGS order.

    Depth-first over restricted-growth labellings of the edges.  The
    incidence graph (vertices + tau-blocks) of a partial labelling is a
    subgraph of the final one, so a cycle there is fatal and the branch is
    cut.  Acyclic tau are admissible, so a vertex whose incident edges are
    all labelled must already be colour-balanced; that prunes further.
    """
    k = pi.k
    if k > (K_MAX if k_max is None else k_max):
        raise PartitionError(f"k={k} exceeds K_MAX")
    yield from (_trusted(t) for t in _acyclic_labellings(pi.labels))


def _acyclic_labellings(lab: Sequence[int]) -> list[tuple[int, ...]]:
    k = len(lab)
    nv = max(lab)
    tail = [lab[l] - 1 for l in range(k)]
    head = [lab[(l + 1) % k] - 1 for l in range(k)]
    # vertex becomes complete after the last edge touching it is labelled
    last_touch = [0] * nv
    for l in range(k):
        last_touch[tail[l]] = max(last_touch[tail[l]], l)
        last_touch[head[l]] = max(last_touch[head[l]], l)
    complete_at: list[list[int]] = [[] for _ in range(k)]
    for v in range(nv):
        complete_at[last_touch[v]].append(v)

    # union-find over nodes 0..nv-1 (vertices) and nv.. (tau blocks), with undo
    parent = list(range(nv + k))
    size = [1] * (nv + k)
    members: list[set[int]] = [set() for _ in range(k)]
    bal: list[dict[int, int]] = [dict() for _ in range(nv)]  # out - in per colour
    labels = [0] * k
    out: list[tuple[int, ...]] = []

    def find(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(l: int, nblocks: int) -> None:
        if l == k:
            out.append(tuple(labels))
            return
        u, v = tail[l], head[l]
        for b in range(nblocks + 1):
            if b == k:
                break
            node = nv + b
            undo: list[tuple[int, int]] = []
            added: list[int] = []
            ok = True
            for x in (u, v):
                if x in members[b]:
                    continue
                rx, rb = find(x), find(node)
                if rx == rb:
                    ok = False
                    break
                if size[rx] < size[rb]:
                    rx, rb = rb, rx
                parent[rb] = rx
                size[rx] += size[rb]
                undo.append((rb, rx))
                members[b].add(x)
                added.append(x)
            if ok:
                bal[u][b] = bal[u].get(b, 0) + 1
                bal[v][b] = bal[v].get(b, 0) - 1
                if all(c == 0 for w in complete_at[l] for c in bal[w].values()):
                    labels[l] = b + 1
                    rec(l + 1, max(nblocks, b + 1))
                bal[u][b] -= 1
                bal[v][b] += 1
            for rb, rx in reversed(undo):
                parent[rb] = rb
                size[rx] -= size[rb]
            for x in added:
                members[b].discard(x)

    rec(0, 0)
    return out


# ------------------------------------------------------------ degree profiles

def degree_profiles(g: QuotientCycleGraph, tau: EdgePartition, check: bool = True) -> dict[int, tuple[int, ...]]:
    """Per-vertex non-increasing out-degree counts per tau block (zeros dropped)."""
    if check and not is_acyclic(build_hypergraph(g, tau)):
        raise ContractViolation(f"H(pi, tau) has a cycle for pi={g.pi}, tau={tau}")
    return _profiles(g.edges, tau.labels, g.n_vertices)


def _profiles(edges, tau_labels, nv) -> dict[int, tuple[int, ...]]:
    counts: list[dict[int, int]] = [dict() for _ in range(nv)]
    ins: list[dict[int, int]] = [dict() for _ in range(nv)]
    for (u, v), w in zip(edges, tau_labels):
        counts[u][w] = counts[u].get(w, 0) + 1
        ins[v][w] = ins[v].get(w, 0) + 1
    assert counts == ins, "acyclic edge partition must be admissible"
    return {j: tuple(sorted(c.values(), reverse=True)) for j, c in enumerate(counts)}


def is_admissible(g: QuotientCycleGraph, tau: EdgePartition) -> bool:
    outs: list[dict[int, int]] = [dict() for _ in range(g.n_vertices)]
    ins: list[dict[int, int]] = [dict() for _ in range(g.n_vertices)]
    for (u, v), w in zip(g.edges, tau.labels):
        outs[u][w] = outs[u].get(w, 0) + 1
        ins[v][w] = ins[v].get(w, 0) + 1
    return outs == ins


def monochromatic_decomposition(g: QuotientCycleGraph, tau: EdgePartition) -> list[list[int]] | None:
    """Split the circuit into edge-disjoint simple cycles, each inside one tau block.

    Returns lists of 1-based edge positions, or None when impossible.
    """
    cycles: list[list[int]] = []
    for w in range(1, tau.n_blocks + 1):
        remaining = [l for l in range(g.k) if tau.labels[l] == w]
        out_of: dict[int, list[int]] = {}
        for l in remaining:
            out_of.setdefault(g.edges[l][0], []).append(l)
        unused = set(remaining)
        while unused:
            start = min(unused)
            walk = [start]
            unused.discard(start)
            seen_at = {g.edges[start][0]: 0}
            cur = g.edges[start][1]
            while True:
                if cur in seen_at:
                    i = seen_at[cur]
                    cycles.append([l + 1 for l in walk[i:]])
                    for l in walk[:i]:
                        unused.add(l)
                    break
                seen_at[cur] = len(walk)
                nxt = next((l for l in out_of.get(cur, ()) if l in unused), None)
                if nxt is None:
                    return None
                walk.append(nxt)
                unused.discard(nxt)
                cur = g.edges[nxt][1]
    return cycles


def dump_triple(pi: Partition, tau: EdgePartition) -> str:
    """JSON debug record for a (pi, tau, H) triple."""
    h = build_hypergraph(quotient_cycle(pi), tau)
    rec = {
        "pi": str(pi),
        "tau": str(tau),
        "hyperedges": [sorted(v + 1 for v in e) for e in h.edges],
        "acyclic": is_acyclic(h),
    }
    return json.dumps(rec, sort_keys=True)
