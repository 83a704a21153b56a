"""Node storage, canonicalization and caching shared by every decision diagram kind.

A :class:`Manager` owns one complex table, one unique table per (kind, level),
the compute caches and the reference counts.  Edges produced by one manager
must never be combined with edges of another.
"""
from __future__ import annotations

import math
from typing import NamedTuple

TOLERANCE = 1e-13

SCHEMES = ("l2", "leftmost")


class Node:
    """Interior node (``v >= 0``) or the shared terminal (``v == -1``)."""

    __slots__ = ("v", "e", "ref")

    def __init__(self, v: int, e: tuple):
        self.v = v
        self.e = e
        self.ref = 0

    def __repr__(self):
        if self.v < 0:
            return "Terminal"
        return f"Node(q{self.v}, id={id(self):#x})"


TERMINAL = Node(-1, ())


class Edge(NamedTuple):
    node: Node
    w: complex


ZERO = 0j
ONE = 1 + 0j
ZERO_EDGE = Edge(TERMINAL, ZERO)
ONE_EDGE = Edge(TERMINAL, ONE)


class ComplexTable:
    """Interns complex numbers so that tolerance-equal values share one instance.

    Buckets are ``2 * tolerance`` wide; a representative within tolerance of a
    query lies either in the query's own bucket or in the neighbour on the
    nearer side, so at most four buckets are probed.
    """

    def __init__(self, tolerance: float = TOLERANCE):
        self.tolerance = tolerance
        self._width = 2.0 * tolerance
        self._buckets: dict[tuple[int, int], list[complex]] = {}
        self._insert(ZERO)
        self._insert(ONE)

    def __len__(self):
        return sum(len(b) for b in self._buckets.values())

    def _insert(self, c: complex) -> complex:
        key = (math.floor(c.real / self._width), math.floor(c.imag / self._width))
        self._buckets.setdefault(key, []).append(c)
        return c

    def lookup(self, value: complex) -> complex:
        re = value.real
        im = value.imag
        tol = self.tolerance
        if -tol <= re <= tol and -tol <= im <= tol:
            return ZERO
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValueError("non-finite amplitude")
        fr = re / self._width
        fi = im / self._width
        br = math.floor(fr)
        bi = math.floor(fi)
        buckets = self._buckets
        bucket = buckets.get((br, bi))
        if bucket is not None:
            for c in bucket:
                if abs(c.real - re) <= tol and abs(c.imag - im) <= tol:
                    return c
        nr = br - 1 if fr - br < 0.5 else br + 1
        ni = bi - 1 if fi - bi < 0.5 else bi + 1
        for key in ((nr, bi), (br, ni), (nr, ni)):
            bucket = buckets.get(key)
            if bucket is not None:
                for c in bucket:
                    if abs(c.real - re) <= tol and abs(c.imag - im) <= tol:
                        return c
        c = complex(re, im)
        buckets.setdefault((br, bi), []).append(c)
        return c


class ComputeCache:
    """Fixed-capacity direct-mapped memo table; collisions overwrite."""

    def __init__(self, capacity: int = 1 << 16, enabled: bool = True):
        if capacity <= 0 or capacity & (capacity - 1):
            raise ValueError("cache capacity must be a power of two")
        self.capacity = capacity
        self.enabled = enabled
        self._mask = capacity - 1
        self._keys: list = [None] * capacity
        self._vals: list = [None] * capacity
        self.hits = 0
        self.lookups = 0

    def get(self, key):
        if not self.enabled:
            return None
        self.lookups += 1
        i = hash(key) & self._mask
        k = self._keys[i]
        if k is not None and k == key:
            self.hits += 1
            return self._vals[i]
        return None

    def put(self, key, value):
        if self.enabled:
            i = hash(key) & self._mask
            self._keys[i] = key
            self._vals[i] = value

    def clear(self):
        self._keys = [None] * self.capacity
        self._vals = [None] * self.capacity

    def drop_touching(self, dead: set[int]) -> int:
        """Evict entries whose key or value references a node id in ``dead``."""
        dropped = 0
        for i, k in enumerate(self._keys):
            if k is None:
                continue
            if _touches(k, dead) or _touches(self._vals[i], dead):
                self._keys[i] = None
                self._vals[i] = None
                dropped += 1
        return dropped


def _touches(obj, dead: set[int]) -> bool:
    if isinstance(obj, Node):
        return id(obj) in dead
    if isinstance(obj, tuple):
        return any(_touches(x, dead) for x in obj)
    return False


class Manager:
    """Owns all state of one family of decision diagrams.

    ``scheme`` selects vector-node normalization: ``"l2"`` divides by the
    Euclidean norm of the weight pair and then by the phase of the first
    non-zero weight; ``"leftmost"`` divides by the first non-zero weight.
    Matrix nodes are always divided by the leftmost weight of maximal
    magnitude.
    """

    def __init__(
        self,
        scheme: str = "l2",
        tolerance: float = TOLERANCE,
        cache_capacity: int = 1 << 16,
        cache_enabled: bool = True,
        gc_threshold: int = 250_000,
        dense_limit: int = 20,
    ):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown normalization scheme {scheme!r}")
        self.scheme = scheme
        self.tolerance = tolerance
        self.complex_table = ComplexTable(tolerance)
        self.cache_capacity = cache_capacity
        self.cache_enabled = cache_enabled
        self.gc_threshold = gc_threshold
        self.dense_limit = dense_limit
        self._vtables: dict[int, dict] = {}
        self._mtables: dict[int, dict] = {}
        self._caches: dict[str, ComputeCache] = {}
        self.gc_runs = 0

    # -- complex numbers -------------------------------------------------

    def cn(self, value: complex) -> complex:
        """Canonical representative of ``value``."""
        return self.complex_table.lookup(value)

    def is_zero(self, w: complex) -> bool:
        tol = self.tolerance
        return -tol <= w.real <= tol and -tol <= w.imag <= tol

    def edge(self, node: Node, w: complex) -> Edge:
        """Edge with interned weight; collapses to the zero stub if ``w`` ~ 0."""
        c = self.complex_table.lookup(w)
        if c == 0:
            return ZERO_EDGE
        return Edge(node, c)

    # -- caches ------------------------------------------------------------

    def cache(self, tag: str) -> ComputeCache:
        c = self._caches.get(tag)
        if c is None:
            c = ComputeCache(self.cache_capacity, self.cache_enabled)
            self._caches[tag] = c
        return c

    def cache_stats(self) -> dict[str, tuple[int, int]]:
        return {k: (c.hits, c.lookups) for k, c in self._caches.items()}

    # -- node construction -------------------------------------------------

    def _check_children(self, v: int, edges) -> None:
        if v < 0:
            raise ValueError(f"level out of range: {v}")
        for e in edges:
            if e.w != 0 and e.node.v != v - 1:
                raise ValueError(
                    f"successor level {e.node.v} invalid below level {v}"
                )

    def make_vector_node(self, v: int, e0: Edge, e1: Edge) -> Edge:
        self._check_children(v, (e0, e1))
        w0 = e0.w
        w1 = e1.w
        z0 = self.is_zero(w0)
        z1 = self.is_zero(w1)
        if z0 and z1:
            return ZERO_EDGE
        lookup = self.complex_table.lookup
        if self.scheme == "l2":
            a0 = 0.0 if z0 else abs(w0)
            a1 = 0.0 if z1 else abs(w1)
            norm = math.sqrt(a0 * a0 + a1 * a1)
            if z0:
                factor = norm * (w1 / a1)
                c0 = ZERO_EDGE
                c1 = Edge(e1.node, lookup(a1 / norm))
            else:
                factor = norm * (w0 / a0)
                c0 = Edge(e0.node, lookup(a0 / norm))
                c1 = ZERO_EDGE if z1 else self.edge(e1.node, w1 / factor)
        else:
            if z0:
                factor = w1
                c0 = ZERO_EDGE
                c1 = Edge(e1.node, ONE)
            else:
                factor = w0
                c0 = Edge(e0.node, ONE)
                c1 = ZERO_EDGE if z1 else self.edge(e1.node, w1 / factor)
        key = (c0, c1)
        table = self._vtables.get(v)
        if table is None:
            table = self._vtables[v] = {}
        node = table.get(key)
        if node is None:
            node = Node(v, key)
            table[key] = node
        return Edge(node, lookup(factor))

    def make_matrix_node(self, v: int, edges) -> Edge:
        self._check_children(v, edges)
        tol = self.tolerance
        mags = [0.0 if self.is_zero(e.w) else abs(e.w) for e in edges]
        top = max(mags)
        if top == 0.0:
            return ZERO_EDGE
        pivot = 0
        while mags[pivot] < top - tol:
            pivot += 1
        factor = edges[pivot].w
        children = []
        for i, e in enumerate(edges):
            if i == pivot:
                children.append(Edge(e.node, ONE))
            elif mags[i] == 0.0:
                children.append(ZERO_EDGE)
            else:
                children.append(self.edge(e.node, e.w / factor))
        key = tuple(children)
        table = self._mtables.get(v)
        if table is None:
            table = self._mtables[v] = {}
        node = table.get(key)
        if node is None:
            node = Node(v, key)
            table[key] = node
        return Edge(node, self.complex_table.lookup(factor))

    # -- reclamation ---------------------------------------------------------

    def retain(self, e: Edge) -> None:
        node = e.node
        if node is TERMINAL:
            return
        node.ref += 1
        if node.ref == 1:
            for c in node.e:
                self.retain(c)

    def release(self, e: Edge) -> None:
        node = e.node
        if node is TERMINAL:
            return
        if node.ref <= 0:
            raise ValueError("release below zero reference count")
        node.ref -= 1
        if node.ref == 0:
            for c in node.e:
                self.release(c)

    def live_nodes(self) -> int:
        return sum(len(t) for t in self._vtables.values()) + sum(
            len(t) for t in self._mtables.values()
        )

    def iter_nodes(self):
        for t in self._vtables.values():
            yield from t.values()
        for t in self._mtables.values():
            yield from t.values()

    def collect_garbage(self, force: bool = True) -> int:
        """Drop unreferenced nodes from the unique tables; returns how many.

        Nodes that are still used but were never retained become orphans: keep
        every root you need across a collection retained.
        """
        if not force and self.live_nodes() < self.gc_threshold:
            return 0
        dead: set[int] = set()
        for tables in (self._vtables, self._mtables):
            for table in tables.values():
                stale = [k for k, n in table.items() if n.ref == 0]
                for k in stale:
                    dead.add(id(table.pop(k)))
        if dead:
            for c in self._caches.values():
                c.drop_touching(dead)
        self.gc_runs += 1
        return len(dead)


def node_count(root: Edge) -> int:
    """Number of distinct interior nodes reachable from ``root``."""
    seen: set[int] = set()
    stack = [root.node]
    while stack:
        node = stack.pop()
        if node is TERMINAL or id(node) in seen:
            continue
        seen.add(id(node))
        for c in node.e:
            if c.w != 0:
                stack.append(c.node)
    return len(seen)


_default: Manager | None = None


def default_manager() -> Manager:
    global _default
    if _default is None:
        _default = Manager()
    return _default


def set_default_manager(mgr: Manager | None) -> None:
    global _default
    _default = mgr
