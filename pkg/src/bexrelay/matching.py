"""Graph matching: exact weighted (blossom), local greedy, bipartite cardinality.

Vertices are arbitrary sortable hashables (node ids in practice). Ties are
broken by the smallest vertex id, then the smallest partner id.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence, TextIO

EDGE_THRESHOLD = 1e-9
ENUMERATE_LIMIT = 14


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with strictly positive edge weights."""
    vertices: tuple
    edges: tuple  # ((u, v, weight), ...) with u < v

    def __init__(self, vertices: Iterable[Hashable], edges: Iterable[tuple]):
        verts = set(vertices)
        seen = set()
        clean = []
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if not w > 0 or math.isinf(w):
                raise ValueError(f"edge weight must be positive and finite, got {w!r}")
            a, b = (u, v) if u < v else (v, u)
            if (a, b) in seen:
                raise ValueError(f"duplicate edge {a!r}-{b!r}")
            seen.add((a, b))
            verts.update((a, b))
            clean.append((a, b, float(w)))
        object.__setattr__(self, "vertices", tuple(sorted(verts)))
        object.__setattr__(self, "edges", tuple(sorted(clean, key=lambda e: (e[0], e[1]))))

    @classmethod
    def from_gains(cls, vertices, weighted_pairs, threshold: float = EDGE_THRESHOLD):
        """Build a graph keeping only pairs whose weight exceeds ``threshold``."""
        return cls(vertices, [(u, v, w) for u, v, w in weighted_pairs if w > threshold])

    def weight(self, u, v) -> float:
        a, b = (u, v) if u < v else (v, u)
        for x, y, w in self.edges:
            if (x, y) == (a, b):
                return w
        raise KeyError((u, v))

    def adjacency(self) -> dict:
        adj = {v: {} for v in self.vertices}
        for u, v, w in self.edges:
            adj[u][v] = w
            adj[v][u] = w
        return adj


@dataclass(frozen=True)
class Matching:
    edges: tuple  # ((u, v, weight), ...) with u < v, sorted
    total_weight: float

    @classmethod
    def of(cls, edges: Iterable[tuple]) -> "Matching":
        es = tuple(sorted(((u, v, w) if u < v else (v, u, w)) for u, v, w in edges))
        return cls(es, math.fsum(w for _, _, w in es))

    @property
    def pairs(self) -> list[tuple]:
        return [(u, v) for u, v, _ in self.edges]

    def __len__(self):
        return len(self.edges)

    def is_valid(self) -> bool:
        used = [x for u, v, _ in self.edges for x in (u, v)]
        return len(used) == len(set(used))


@dataclass
class MessageTrace:
    """Messages of the local greedy protocol: ``(round, sender, receiver, kind)``."""
    events: list = field(default_factory=list)

    def __len__(self):
        return len(self.events)

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e[3] == kind)


# ---------------------------------------------------------------------------
# Exact maximum weighted matching (Edmonds, O(n^3) primal-dual).

class _Blossom:
    """Edmonds' primal-dual maximum weight matching on vertices 0..n-1.

    Blossoms are numbered n..2n-1. Edge ``k`` has endpoints ``2k`` and
    ``2k+1``; ``endpoint[p]`` is the vertex at endpoint ``p`` and ``p ^ 1``
    is the opposite endpoint.
    """

    def __init__(self, n: int, edges: Sequence[tuple[int, int, float]]):
        self.n = n
        self.edges = edges
        m = len(edges)
        self.endpoint = [edges[p >> 1][p & 1] for p in range(2 * m)]
        self.neighbend = [[] for _ in range(n)]
        for k, (i, j, _) in enumerate(edges):
            self.neighbend[i].append(2 * k + 1)
            self.neighbend[j].append(2 * k)
        maxw = max((w for _, _, w in edges), default=0.0)
        self.mate = [-1] * n
        self.label = [0] * (2 * n)
        self.labelend = [-1] * (2 * n)
        self.inblossom = list(range(n))
        self.parent = [-1] * (2 * n)
        self.childs = [None] * (2 * n)
        self.base = list(range(n)) + [-1] * n
        self.endps = [None] * (2 * n)
        self.bestedge = [-1] * (2 * n)
        self.blossombestedges = [None] * (2 * n)
        self.unused = list(range(n, 2 * n))
        self.dual = [maxw] * n + [0.0] * n
        self.allowedge = [False] * m
        self.queue: list[int] = []

    def slack(self, k):
        i, j, w = self.edges[k]
        return self.dual[i] + self.dual[j] - 2 * w

    def leaves(self, b):
        if b < self.n:
            yield b
            return
        for t in self.childs[b]:
            if t < self.n:
                yield t
            else:
                yield from self.leaves(t)

    def assign_label(self, w, t, p):
        b = self.inblossom[w]
        self.label[w] = self.label[b] = t
        self.labelend[w] = self.labelend[b] = p
        self.bestedge[w] = self.bestedge[b] = -1
        if t == 1:
            self.queue.extend(self.leaves(b))
        else:
            base = self.base[b]
            self.assign_label(self.endpoint[self.mate[base]], 1, self.mate[base] ^ 1)

    def scan_blossom(self, v, w):
        """Trace back from v and w; return the base of a new blossom or -1."""
        path = []
        top = -1
        while v != -1 or w != -1:
            b = self.inblossom[v]
            if self.label[b] & 4:
                top = self.base[b]
                break
            path.append(b)
            self.label[b] = 5
            if self.labelend[b] == -1:
                v = -1
            else:
                v = self.endpoint[self.labelend[b]]
                b = self.inblossom[v]
                v = self.endpoint[self.labelend[b]]
            if w != -1:
                v, w = w, v
        for b in path:
            self.label[b] = 1
        return top

    def add_blossom(self, base, k):
        v, w, _ = self.edges[k]
        bb = self.inblossom[base]
        bv = self.inblossom[v]
        bw = self.inblossom[w]
        b = self.unused.pop()
        self.base[b] = base
        self.parent[b] = -1
        self.parent[bb] = b
        path = []
        endps = []
        self.childs[b] = path
        self.endps[b] = endps
        while bv != bb:
            self.parent[bv] = b
            path.append(bv)
            endps.append(self.labelend[bv])
            v = self.endpoint[self.labelend[bv]]
            bv = self.inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(2 * k)
        while bw != bb:
            self.parent[bw] = b
            path.append(bw)
            endps.append(self.labelend[bw] ^ 1)
            w = self.endpoint[self.labelend[bw]]
            bw = self.inblossom[w]
        self.label[b] = 1
        self.labelend[b] = self.labelend[bb]
        self.dual[b] = 0.0
        for v in self.leaves(b):
            if self.label[self.inblossom[v]] == 2:
                self.queue.append(v)
            self.inblossom[v] = b
        # least-slack edges from the new blossom to other S-blossoms
        bestedgeto = [-1] * (2 * self.n)
        for bv in path:
            if self.blossombestedges[bv] is None:
                nblists = [[p >> 1 for p in self.neighbend[u]] for u in self.leaves(bv)]
            else:
                nblists = [self.blossombestedges[bv]]
            for nblist in nblists:
                for kk in nblist:
                    i, j, _ = self.edges[kk]
                    if self.inblossom[j] == b:
                        i, j = j, i
                    bj = self.inblossom[j]
                    if (bj != b and self.label[bj] == 1
                            and (bestedgeto[bj] == -1 or self.slack(kk) < self.slack(bestedgeto[bj]))):
                        bestedgeto[bj] = kk
            self.blossombestedges[bv] = None
            self.bestedge[bv] = -1
        self.blossombestedges[b] = [kk for kk in bestedgeto if kk != -1]
        self.bestedge[b] = -1
        for kk in self.blossombestedges[b]:
            if self.bestedge[b] == -1 or self.slack(kk) < self.slack(self.bestedge[b]):
                self.bestedge[b] = kk

    def expand_blossom(self, b, endstage):
        for s in self.childs[b]:
            self.parent[s] = -1
            if s < self.n:
                self.inblossom[s] = s
            elif endstage and self.dual[s] == 0:
                self.expand_blossom(s, endstage)
            else:
                for v in self.leaves(s):
                    self.inblossom[v] = s
        if not endstage and self.label[b] == 2:
            # relabel the T-blossom's children along the even path
            entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]]
            childs = self.childs[b]
            endps = self.endps[b]
            j = childs.index(entrychild)
            if j & 1:
                j -= len(childs)
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = self.labelend[b]
            while j != 0:
                self.label[self.endpoint[p ^ 1]] = 0
                self.label[self.endpoint[endps[j - endptrick] ^ endptrick ^ 1]] = 0
                self.assign_label(self.endpoint[p ^ 1], 2, p)
                self.allowedge[endps[j - endptrick] >> 1] = True
                j += jstep
                p = endps[j - endptrick] ^ endptrick
                self.allowedge[p >> 1] = True
                j += jstep
            bv = childs[j]
            self.label[self.endpoint[p ^ 1]] = self.label[bv] = 2
            self.labelend[self.endpoint[p ^ 1]] = self.labelend[bv] = p
            self.bestedge[bv] = -1
            j += jstep
            while childs[j] != entrychild:
                bv = childs[j]
                if self.label[bv] == 1:
                    j += jstep
                    continue
                for v in self.leaves(bv):
                    if self.label[v] != 0:
                        break
                else:
                    v = -1
                if v != -1:
                    self.label[v] = 0
                    self.label[self.endpoint[self.mate[self.base[bv]]]] = 0
                    self.assign_label(v, 2, self.labelend[v])
                j += jstep
        self.label[b] = self.labelend[b] = -1
        self.childs[b] = self.endps[b] = None
        self.base[b] = -1
        self.blossombestedges[b] = None
        self.bestedge[b] = -1
        self.unused.append(b)

    def augment_blossom(self, b, v):
        """Rotate blossom b so that its base becomes v, fixing mates inside."""
        t = v
        while self.parent[t] != b:
            t = self.parent[t]
        if t >= self.n:
            self.augment_blossom(t, v)
        childs = self.childs[b]
        endps = self.endps[b]
        i = j = childs.index(t)
        if i & 1:
            j -= len(childs)
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = childs[j]
            p = endps[j - endptrick] ^ endptrick
            if t >= self.n:
                self.augment_blossom(t, self.endpoint[p])
            j += jstep
            t = childs[j]
            if t >= self.n:
                self.augment_blossom(t, self.endpoint[p ^ 1])
            self.mate[self.endpoint[p]] = p ^ 1
            self.mate[self.endpoint[p ^ 1]] = p
        self.childs[b] = childs[i:] + childs[:i]
        self.endps[b] = endps[i:] + endps[:i]
        self.base[b] = self.base[self.childs[b][0]]

    def augment_matching(self, k):
        v, w, _ = self.edges[k]
        for s, p in ((v, 2 * k + 1), (w, 2 * k)):
            while True:
                bs = self.inblossom[s]
                if bs >= self.n:
                    self.augment_blossom(bs, s)
                self.mate[s] = p
                if self.labelend[bs] == -1:
                    break
                t = self.endpoint[self.labelend[bs]]
                bt = self.inblossom[t]
                s = self.endpoint[self.labelend[bt]]
                j = self.endpoint[self.labelend[bt] ^ 1]
                if bt >= self.n:
                    self.augment_blossom(bt, j)
                self.mate[j] = self.labelend[bt]
                p = self.labelend[bt] ^ 1

    def run(self) -> list[int]:
        n = self.n
        for _ in range(n):
            self.label = [0] * (2 * n)
            self.bestedge = [-1] * (2 * n)
            for b in range(n, 2 * n):
                self.blossombestedges[b] = None
            self.allowedge = [False] * len(self.edges)
            self.queue = []
            for v in range(n):
                if self.mate[v] == -1 and self.label[self.inblossom[v]] == 0:
                    self.assign_label(v, 1, -1)
            augmented = False
            while True:
                while self.queue and not augmented:
                    v = self.queue.pop()
                    for p in self.neighbend[v]:
                        k = p >> 1
                        w = self.endpoint[p]
                        if self.inblossom[v] == self.inblossom[w]:
                            continue
                        if not self.allowedge[k]:
                            kslack = self.slack(k)
                            if kslack <= 0:
                                self.allowedge[k] = True
                        if self.allowedge[k]:
                            if self.label[self.inblossom[w]] == 0:
                                self.assign_label(w, 2, p ^ 1)
                            elif self.label[self.inblossom[w]] == 1:
                                base = self.scan_blossom(v, w)
                                if base >= 0:
                                    self.add_blossom(base, k)
                                else:
                                    self.augment_matching(k)
                                    augmented = True
                                    break
                            elif self.label[w] == 0:
                                self.label[w] = 2
                                self.labelend[w] = p ^ 1
                        elif self.label[self.inblossom[w]] == 1:
                            b = self.inblossom[v]
                            if self.bestedge[b] == -1 or kslack < self.slack(self.bestedge[b]):
                                self.bestedge[b] = k
                        elif self.label[w] == 0:
                            if self.bestedge[w] == -1 or kslack < self.slack(self.bestedge[w]):
                                self.bestedge[w] = k
                if augmented:
                    break
                # dual adjustment
                deltatype = 1
                delta = min(self.dual[:n])
                deltaedge = deltablossom = -1
                for v in range(n):
                    if self.label[self.inblossom[v]] == 0 and self.bestedge[v] != -1:
                        d = self.slack(self.bestedge[v])
                        if deltatype == -1 or d < delta:
                            delta, deltatype, deltaedge = d, 2, self.bestedge[v]
                for b in range(2 * n):
                    if self.parent[b] == -1 and self.label[b] == 1 and self.bestedge[b] != -1:
                        d = self.slack(self.bestedge[b]) / 2
                        if d < delta:
                            delta, deltatype, deltaedge = d, 3, self.bestedge[b]
                for b in range(n, 2 * n):
                    if (self.base[b] >= 0 and self.parent[b] == -1 and self.label[b] == 2
                            and self.dual[b] < delta):
                        delta, deltatype, deltablossom = self.dual[b], 4, b
                for v in range(n):
                    lab = self.label[self.inblossom[v]]
                    if lab == 1:
                        self.dual[v] -= delta
                    elif lab == 2:
                        self.dual[v] += delta
                for b in range(n, 2 * n):
                    if self.base[b] >= 0 and self.parent[b] == -1:
                        if self.label[b] == 1:
                            self.dual[b] += delta
                        elif self.label[b] == 2:
                            self.dual[b] -= delta
                if deltatype == 1:
                    break
                if deltatype == 2:
                    self.allowedge[deltaedge] = True
                    i, j, _ = self.edges[deltaedge]
                    if self.label[self.inblossom[i]] == 0:
                        i, j = j, i
                    self.queue.append(i)
                elif deltatype == 3:
                    self.allowedge[deltaedge] = True
                    i, _, _ = self.edges[deltaedge]
                    self.queue.append(i)
                else:
                    self.expand_blossom(deltablossom, False)
            if not augmented:
                break
            for b in range(n, 2 * n):
                if (self.parent[b] == -1 and self.base[b] >= 0
                        and self.label[b] == 1 and self.dual[b] == 0):
                    self.expand_blossom(b, True)
        return [self.endpoint[p] if p != -1 else -1 for p in self.mate]


def blossom_mwm(graph: WeightedGraph) -> Matching:
    """Maximum total weight matching (exact) of a general graph."""
    if not graph.edges:
        return Matching((), 0.0)
    verts = [v for v in graph.vertices]
    index = {v: i for i, v in enumerate(verts)}
    edges = [(index[u], index[v], w) for u, v, w in graph.edges]
    mate = _Blossom(len(verts), edges).run()
    chosen = [(verts[i], verts[j], w) for i, j, w in edges if mate[i] == j]
    return Matching.of(chosen)


# ---------------------------------------------------------------------------

def enumerate_mwm(graph: WeightedGraph) -> Matching:
    """Exhaustive maximum weight matching; graphs up to 14 vertices.

    Memoized over the set of already-decided vertices: the lowest undecided
    vertex is either left unmatched or matched to one undecided neighbour.
    """
    n = len(graph.vertices)
    if n > ENUMERATE_LIMIT:
        raise ValueError(f"enumeration limited to {ENUMERATE_LIMIT} vertices")
    index = {v: i for i, v in enumerate(graph.vertices)}
    nbrs = [[] for _ in range(n)]
    for u, v, w in graph.edges:
        nbrs[index[u]].append((index[v], w))
        nbrs[index[v]].append((index[u], w))
    full = (1 << n) - 1
    memo: dict[int, tuple[float, tuple]] = {full: (0.0, ())}

    def best(mask):
        if mask in memo:
            return memo[mask]
        i = 0
        while mask >> i & 1:
            i += 1
        top = best(mask | 1 << i)
        for j, w in nbrs[i]:
            if not mask >> j & 1:
                sub_w, sub = best(mask | 1 << i | 1 << j)
                if sub_w + w > top[0]:
                    top = (sub_w + w, ((i, j, w),) + sub)
        memo[mask] = top
        return top

    verts = graph.vertices
    _, chosen = best(0)
    return Matching.of((verts[i], verts[j], w) for i, j, w in chosen)


# ---------------------------------------------------------------------------

def greedy_local_mwm(graph: WeightedGraph) -> tuple[Matching, MessageTrace]:
    """Locally heaviest-edge matching simulated as a synchronous protocol.

    Each round, every free node without a pending request sends ``add`` to its
    heaviest remaining neighbour. Mutual requests lock a pair; the two nodes
    then send ``drop`` to every other remaining neighbour, who delete the
    edge and re-propose next round if it was their pending candidate.
    """
    adj = graph.adjacency()
    trace = MessageTrace()
    mate: dict = {}
    cand: dict = {}
    rnd = 0
    while True:
        rnd += 1
        sent = False
        for u in graph.vertices:
            if u in mate or u in cand or not adj[u]:
                continue
            v = min(adj[u], key=lambda x: (-adj[u][x], x))
            cand[u] = v
            trace.events.append((rnd, u, v, "add"))
            sent = True
        locked = [(u, v) for u, v in cand.items() if u < v and cand.get(v) == u]
        for u, v in locked:
            mate[u], mate[v] = v, u
            del cand[u], cand[v]
        for x in sorted(y for pair in locked for y in pair):
            for y in sorted(adj[x]):
                if y == mate[x]:
                    continue
                trace.events.append((rnd, x, y, "drop"))
                del adj[y][x]
                if cand.get(y) == x:
                    del cand[y]
            adj[x] = {mate[x]: adj[x][mate[x]]}
        for u, v in locked:
            adj[u].pop(v, None)
            adj[v].pop(u, None)
        if not sent and not locked:
            break
    chosen = [(u, v, graph.weight(u, v)) for u, v in mate.items() if u < v]
    return Matching.of(chosen), trace


# ---------------------------------------------------------------------------

def bipartite_max_matching(left: Iterable, right: Iterable,
                           edges: Iterable[tuple]) -> Matching:
    """Maximum-cardinality matching via Hopcroft-Karp.

    Returned edges carry weight 1.0 and are oriented ``(left, right)``.
    """
    left = sorted(set(left))
    right_set = set(right)
    adj = {u: [] for u in left}
    for u, v in edges:
        if u not in adj or v not in right_set:
            raise ValueError(f"edge {(u, v)!r} does not join left to right")
        adj[u].append(v)
    for u in adj:
        adj[u] = sorted(set(adj[u]))
    match_l: dict = {}
    match_r: dict = {}
    inf = math.inf

    while True:
        # BFS layering from free left vertices
        dist = {}
        dq = deque()
        for u in left:
            if u not in match_l:
                dist[u] = 0
                dq.append(u)
        found = inf
        while dq:
            u = dq.popleft()
            if dist[u] >= found:
                continue
            for v in adj[u]:
                w = match_r.get(v)
                if w is None:
                    found = min(found, dist[u] + 1)
                elif w not in dist:
                    dist[w] = dist[u] + 1
                    dq.append(w)
        if found is inf:
            break

        def dfs(u):
            for v in adj[u]:
                w = match_r.get(v)
                if (w is None and dist[u] + 1 == found) or (
                        w is not None and dist.get(w) == dist[u] + 1 and dfs(w)):
                    match_l[u] = v
                    match_r[v] = u
                    return True
            dist[u] = inf
            return False

        for u in left:
            if u not in match_l:
                dfs(u)
    return Matching(tuple(sorted((u, v, 1.0) for u, v in match_l.items())), float(len(match_l)))


# ---------------------------------------------------------------------------
# Line-oriented text dumps: "u v weight" per edge, "round sender receiver kind"
# per message.

def write_edges(graph: WeightedGraph, fh: TextIO) -> None:
    for u, v, w in graph.edges:
        fh.write(f"{u} {v} {w!r}\n")


def read_edges(fh: Iterable[str]) -> WeightedGraph:
    edges = []
    for lineno, line in enumerate(fh, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'u v weight', got {line!r}")
        u, v = (int(x) if x.lstrip("-").isdigit() else x for x in parts[:2])
        edges.append((u, v, float(parts[2])))
    return WeightedGraph((), edges)


def write_trace(trace: MessageTrace, fh: TextIO) -> None:
    for rnd, s, r, kind in trace.events:
        fh.write(f"{rnd} {s} {r} {kind}\n")
