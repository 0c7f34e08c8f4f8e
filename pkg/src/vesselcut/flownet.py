"""Two-terminal max-flow / min-cut on sparse graphs.

The solver is a Boykov-Kolmogorov style augmenting-path algorithm (two search
trees grown from the terminals, augment along the bridging arc, re-adopt
orphaned nodes) compiled with numba. The source and sink are implicit: every
node carries a pair of terminal capacities instead.

After the flow is maximal, nodes reachable from the source in the residual
graph are labelled SOURCE_SIDE and every other node SINK_SIDE. This picks the
min cut with the smallest source set, so ties between equal-cost cuts are
resolved the same way on every run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InvalidNode, NegativeCapacity, TooLarge

INF = float("inf")

BRUTE_FORCE_LIMIT = 20


class Side(enum.IntEnum):
    SINK_SIDE = 0
    SOURCE_SIDE = 1


SOURCE_SIDE = Side.SOURCE_SIDE
SINK_SIDE = Side.SINK_SIDE


def _check_caps(*caps):
    for c in caps:
        arr = np.asarray(c, dtype=np.float64)
        if np.isnan(arr).any() or (arr < 0).any():
            raise NegativeCapacity(f"capacities must be nonnegative, got {c!r}")


class FlowNetwork:
    """A graph with nonnegative arc capacities and per-node terminal arcs.

    Arcs are stored in insertion order; parallel arcs are allowed and simply
    add up. Terminal capacities accumulate across calls, and ``INF`` is
    accepted for terminal arcs only.
    """

    def __init__(self, node_count: int):
        if node_count < 0:
            raise ValueError("node_count must be >= 0")
        self.node_count = int(node_count)
        self._tails: list[np.ndarray] = []
        self._heads: list[np.ndarray] = []
        self._cap_uv: list[np.ndarray] = []
        self._cap_vu: list[np.ndarray] = []
        self._arrays = None
        self.to_source = np.zeros(self.node_count)
        self.to_sink = np.zeros(self.node_count)

    def __repr__(self):
        return f"FlowNetwork(node_count={self.node_count}, arcs={self.arc_count})"

    def _check_nodes(self, *nodes):
        for u in nodes:
            arr = np.asarray(u)
            if arr.size and (arr.min() < 0 or arr.max() >= self.node_count):
                raise InvalidNode(f"node id out of range [0, {self.node_count})")

    def add_edge(self, u: int, v: int, cap_uv: float, cap_vu: float = 0.0) -> None:
        """Add an arc pair u->v (cap_uv) and v->u (cap_vu)."""
        self.add_edges([u], [v], [cap_uv], [cap_vu])

    def add_edges(self, u, v, cap_uv, cap_vu=None) -> None:
        """Vectorised add_edge for arrays of endpoints and capacities."""
        u = np.atleast_1d(np.asarray(u, dtype=np.int64))
        v = np.atleast_1d(np.asarray(v, dtype=np.int64))
        cap_uv = np.broadcast_to(np.asarray(cap_uv, dtype=np.float64), u.shape)
        if cap_vu is None:
            cap_vu = np.zeros_like(cap_uv)
        cap_vu = np.broadcast_to(np.asarray(cap_vu, dtype=np.float64), u.shape)
        if u.shape != v.shape:
            raise ValueError("endpoint arrays differ in length")
        self._check_nodes(u, v)
        if (u == v).any():
            raise InvalidNode("self-loops are not allowed")
        _check_caps(cap_uv, cap_vu)
        if np.isinf(cap_uv).any() or np.isinf(cap_vu).any():
            raise ValueError("INF is only supported on terminal arcs")
        self._tails.append(u.copy())
        self._heads.append(v.copy())
        self._cap_uv.append(np.array(cap_uv))
        self._cap_vu.append(np.array(cap_vu))
        self._arrays = None

    def set_terminal(self, u: int, to_source: float, to_sink: float) -> None:
        """Add terminal capacities source->u and u->sink. ``INF`` pins u."""
        self.set_terminals([u], [to_source], [to_sink])

    def set_terminals(self, nodes, to_source, to_sink) -> None:
        nodes = np.atleast_1d(np.asarray(nodes, dtype=np.int64))
        to_source = np.broadcast_to(np.asarray(to_source, dtype=np.float64), nodes.shape)
        to_sink = np.broadcast_to(np.asarray(to_sink, dtype=np.float64), nodes.shape)
        self._check_nodes(nodes)
        _check_caps(to_source, to_sink)
        np.add.at(self.to_source, nodes, to_source)
        np.add.at(self.to_sink, nodes, to_sink)

    def arcs(self):
        """Return (tails, heads, cap_uv, cap_vu) as flat arrays."""
        if self._arrays is None:
            if self._tails:
                self._arrays = tuple(
                    np.concatenate(parts)
                    for parts in (self._tails, self._heads, self._cap_uv, self._cap_vu)
                )
            else:
                ints = np.zeros(0, dtype=np.int64)
                floats = np.zeros(0)
                self._arrays = (ints, ints, floats, floats)
        return self._arrays

    @property
    def arc_count(self) -> int:
        return len(self.arcs()[0])

    def infinity(self) -> float:
        """Finite stand-in for INF: every finite capacity summed, plus one."""
        _, _, cuv, cvu = self.arcs()
        total = cuv.sum() + cvu.sum()
        for t in (self.to_source, self.to_sink):
            total += t[np.isfinite(t)].sum()
        return float(total + 1.0)

    def terminal_caps(self):
        """Terminal capacities with INF replaced by :meth:`infinity`."""
        big = self.infinity()
        src = np.where(np.isinf(self.to_source), big, self.to_source)
        snk = np.where(np.isinf(self.to_sink), big, self.to_sink)
        return src, snk

    def normalized_terminals(self):
        """Net terminal capacity per node and the flow offset removed.

        Positive net values connect to the source, negative to the sink.
        """
        src, snk = self.terminal_caps()
        common = np.minimum(src, snk)
        return src - snk, float(common.sum())

    def cut_capacity(self, source_side) -> float:
        """Capacity of the s-t cut whose source set is ``source_side``."""
        side = np.asarray(source_side, dtype=bool)
        tails, heads, cuv, cvu = self.arcs()
        src, snk = self.terminal_caps()
        st, sh = side[tails], side[heads]
        return float(
            cuv[st & ~sh].sum() + cvu[sh & ~st].sum() + src[~side].sum() + snk[side].sum()
        )


def new_network(node_count: int) -> FlowNetwork:
    return FlowNetwork(node_count)


@dataclass
class CutLabeling:
    source_side: np.ndarray  # bool per node
    flow_value: float

    def label(self, u: int) -> Side:
        return SOURCE_SIDE if self.source_side[u] else SINK_SIDE

    @property
    def labels(self) -> list:
        return [self.label(u) for u in range(len(self.source_side))]


# ---------------------------------------------------------------------------
# numba kernels

_FREE, _S, _T = 0, 1, 2
_TERMINAL, _ORPHAN, _NONE = -1, -2, -3
_INF_D = 1 << 60


@njit(cache=True)
def _bk_maxflow(n, head, rescap, adj_start, adj_arcs, tr_cap):
    # Arc a and a ^ 1 are sisters; the tail of a is head[a ^ 1].
    # parent[v] is the arc from v to its parent in the search tree.
    tree = np.zeros(n, dtype=np.int8)
    parent = np.full(n, _NONE, dtype=np.int64)
    ts = np.zeros(n, dtype=np.int64)
    dist = np.zeros(n, dtype=np.int64)
    cap = n + 1
    queue = np.empty(cap, dtype=np.int64)
    in_queue = np.zeros(n, dtype=np.bool_)
    qh = 0
    qt = 0
    orphans = np.empty(cap, dtype=np.int64)
    oh = 0
    ot = 0
    flow = 0.0
    time = 0

    for v in range(n):
        if tr_cap[v] != 0.0:
            tree[v] = _S if tr_cap[v] > 0.0 else _T
            parent[v] = _TERMINAL
            dist[v] = 1
            queue[qt] = v
            qt = (qt + 1) % cap
            in_queue[v] = True

    while True:
        # grow
        bridge = -1
        while qh != qt:
            v = queue[qh]
            tv = tree[v]
            if tv != _FREE:
                for k in range(adj_start[v], adj_start[v + 1]):
                    a = adj_arcs[k]
                    c = rescap[a] if tv == _S else rescap[a ^ 1]
                    if c <= 0.0:
                        continue
                    w = head[a]
                    tw = tree[w]
                    if tw == _FREE:
                        tree[w] = tv
                        parent[w] = a ^ 1
                        ts[w] = ts[v]
                        dist[w] = dist[v] + 1
                        if not in_queue[w]:
                            queue[qt] = w
                            qt = (qt + 1) % cap
                            in_queue[w] = True
                    elif tw != tv:
                        bridge = a if tv == _S else a ^ 1
                        break
                    elif ts[w] <= ts[v] and dist[w] > dist[v]:
                        parent[w] = a ^ 1
                        ts[w] = ts[v]
                        dist[w] = dist[v] + 1
                if bridge >= 0:
                    break
            qh = (qh + 1) % cap
            in_queue[v] = False
        if bridge < 0:
            break

        # augment
        time += 1
        x = head[bridge ^ 1]
        y = head[bridge]
        f = rescap[bridge]
        u = x
        while parent[u] != _TERMINAL:
            a = parent[u]
            if rescap[a ^ 1] < f:
                f = rescap[a ^ 1]
            u = head[a]
        if tr_cap[u] < f:
            f = tr_cap[u]
        u = y
        while parent[u] != _TERMINAL:
            a = parent[u]
            if rescap[a] < f:
                f = rescap[a]
            u = head[a]
        if -tr_cap[u] < f:
            f = -tr_cap[u]

        rescap[bridge] -= f
        rescap[bridge ^ 1] += f
        u = x
        while parent[u] != _TERMINAL:
            a = parent[u]
            nxt = head[a]
            rescap[a] += f
            rescap[a ^ 1] -= f
            if rescap[a ^ 1] <= 0.0:
                rescap[a ^ 1] = 0.0
                parent[u] = _ORPHAN
                orphans[ot] = u
                ot = (ot + 1) % cap
            u = nxt
        tr_cap[u] -= f
        if tr_cap[u] <= 0.0:
            tr_cap[u] = 0.0
            parent[u] = _ORPHAN
            orphans[ot] = u
            ot = (ot + 1) % cap
        u = y
        while parent[u] != _TERMINAL:
            a = parent[u]
            nxt = head[a]
            rescap[a] -= f
            rescap[a ^ 1] += f
            if rescap[a] <= 0.0:
                rescap[a] = 0.0
                parent[u] = _ORPHAN
                orphans[ot] = u
                ot = (ot + 1) % cap
            u = nxt
        tr_cap[u] += f
        if tr_cap[u] >= 0.0:
            tr_cap[u] = 0.0
            parent[u] = _ORPHAN
            orphans[ot] = u
            ot = (ot + 1) % cap
        flow += f

        # adopt
        while oh != ot:
            v = orphans[oh]
            oh = (oh + 1) % cap
            tv = tree[v]
            best = _NONE
            dmin = _INF_D
            for k in range(adj_start[v], adj_start[v + 1]):
                a = adj_arcs[k]
                c = rescap[a ^ 1] if tv == _S else rescap[a]
                if c <= 0.0:
                    continue
                w = head[a]
                if tree[w] != tv:
                    continue
                u = w
                d = 0
                while True:
                    if ts[u] == time:
                        d += dist[u]
                        break
                    pa = parent[u]
                    d += 1
                    if pa == _TERMINAL:
                        ts[u] = time
                        dist[u] = 1
                        break
                    if pa == _ORPHAN:
                        d = _INF_D
                        break
                    u = head[pa]
                if d < _INF_D:
                    if d < dmin:
                        best = a
                        dmin = d
                    u = w
                    while ts[u] != time:
                        ts[u] = time
                        dist[u] = d
                        d -= 1
                        u = head[parent[u]]
            if best != _NONE:
                parent[v] = best
                ts[v] = time
                dist[v] = dmin + 1
            else:
                for k in range(adj_start[v], adj_start[v + 1]):
                    a = adj_arcs[k]
                    w = head[a]
                    if tree[w] != tv:
                        continue
                    c = rescap[a ^ 1] if tv == _S else rescap[a]
                    if c > 0.0 and not in_queue[w]:
                        queue[qt] = w
                        qt = (qt + 1) % cap
                        in_queue[w] = True
                    pa = parent[w]
                    if pa >= 0 and head[pa] == v:
                        parent[w] = _ORPHAN
                        orphans[ot] = w
                        ot = (ot + 1) % cap
                tree[v] = _FREE
                parent[v] = _NONE
    return flow


@njit(cache=True)
def _source_reachable(n, head, rescap, adj_start, adj_arcs, tr_cap):
    seen = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for v in range(n):
        if tr_cap[v] > 0.0:
            seen[v] = True
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for k in range(adj_start[v], adj_start[v + 1]):
            a = adj_arcs[k]
            w = head[a]
            if rescap[a] > 0.0 and not seen[w]:
                seen[w] = True
                stack[top] = w
                top += 1
    return seen


def solve(net: FlowNetwork) -> CutLabeling:
    """Compute the maximum flow and the minimal-source-set minimum cut."""
    n = net.node_count
    tr_cap, offset = net.normalized_terminals()
    if n == 0:
        return CutLabeling(np.zeros(0, dtype=bool), offset)
    tails, heads, cuv, cvu = net.arcs()
    m = len(tails)
    head = np.empty(2 * m, dtype=np.int64)
    head[0::2] = heads
    head[1::2] = tails
    rescap = np.empty(2 * m)
    rescap[0::2] = cuv
    rescap[1::2] = cvu
    arc_tail = np.empty(2 * m, dtype=np.int64)
    arc_tail[0::2] = tails
    arc_tail[1::2] = heads
    adj_arcs = np.argsort(arc_tail, kind="stable").astype(np.int64)
    adj_start = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(arc_tail, minlength=n), out=adj_start[1:])
    tr = np.ascontiguousarray(tr_cap, dtype=np.float64)

    flow = _bk_maxflow(n, head, rescap, adj_start, adj_arcs, tr)
    side = _source_reachable(n, head, rescap, adj_start, adj_arcs, tr)
    return CutLabeling(side, float(flow) + offset)


def brute_force_min_cut(net: FlowNetwork):
    """Exact minimum cut by enumerating every labeling. Test oracle only.

    Returns ``(value, source_side)``; among equal-cost cuts the one found
    first in enumeration order wins.
    """
    n = net.node_count
    if n > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{n} nodes exceeds the brute-force limit of {BRUTE_FORCE_LIMIT}")
    tails, heads, cuv, cvu = net.arcs()
    src, snk = net.terminal_caps()
    best_value, best = None, None
    total = 1 << n
    chunk = 1 << 14
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        side = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
        st, sh = side[:, tails], side[:, heads]
        values = (
            (st & ~sh) @ cuv + (sh & ~st) @ cvu + (~side) @ src + side @ snk
        )
        i = int(np.argmin(values))
        if best_value is None or values[i] < best_value:
            best_value, best = float(values[i]), side[i].copy()
    return best_value, best
