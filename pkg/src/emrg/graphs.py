"""Quivers, layered network shapes, and exact path counting.

All counts are plain Python ints, which are arbitrary precision; nothing in
this module touches floating point.  Path counts follow the length >= 0
convention: every source vertex contributes its own trivial path.
"""

from collections import deque
from dataclasses import dataclass, field

from .errors import CycleError, InvalidShape, ShapeMismatch


@dataclass(frozen=True)
class Edge:
    """A directed arrow. Loops and parallel arrows are permitted."""

    id: str
    tail: str
    head: str


@dataclass
class Quiver:
    """A finite directed multigraph (vertex set + arrow list)."""

    vertices: frozenset
    edges: list = field(default_factory=list)

    def __post_init__(self):
        self.vertices = frozenset(self.vertices)
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise InvalidShape(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            if e.tail not in self.vertices or e.head not in self.vertices:
                raise InvalidShape(
                    f"edge {e.id!r} endpoints ({e.tail!r}, {e.head!r}) "
                    "are not all quiver vertices"
                )

    def out_edges(self, vertex):
        return [e for e in self.edges if e.tail == vertex]

    def out_neighbors(self, vertex):
        """Distinct heads of arrows leaving ``vertex``."""
        return {e.head for e in self.edges if e.tail == vertex}

    def adjacency(self, allowed=None):
        """Multiplicity-preserving adjacency restricted to ``allowed`` vertices."""
        if allowed is None:
            allowed = self.vertices
        adj = {v: [] for v in allowed}
        for e in self.edges:
            if e.tail in adj and e.head in adj:
                adj[e.tail].append(e.head)
        return adj


@dataclass
class QuiverRep:
    """A quiver with a vector-space dimension attached to every vertex.

    Linear maps are abstracted away; only dimensions enter the measures.
    """

    quiver: Quiver
    vertex_dim: dict

    def __post_init__(self):
        for v in self.quiver.vertices:
            if v not in self.vertex_dim:
                raise ShapeMismatch(f"vertex {v!r} has no dimension entry")
            if self.vertex_dim[v] < 0:
                raise ShapeMismatch(f"vertex {v!r} has negative dimension")


@dataclass(frozen=True)
class LayeredShape:
    """Widths of a fully connected feedforward network, input to output."""

    layer_sizes: tuple

    def __init__(self, layer_sizes):
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in layer_sizes))
        if len(self.layer_sizes) < 2:
            raise InvalidShape("a layered shape needs at least 2 layers")
        if any(n < 1 for n in self.layer_sizes):
            raise InvalidShape(f"layer sizes must be positive: {self.layer_sizes}")

    def __len__(self):
        return len(self.layer_sizes)

    def __iter__(self):
        return iter(self.layer_sizes)

    def __getitem__(self, i):
        return self.layer_sizes[i]


@dataclass(frozen=True)
class ActivationProfile:
    """Per-layer counts of active nodes, aligned with a LayeredShape."""

    active_counts: tuple

    def __init__(self, active_counts):
        object.__setattr__(
            self, "active_counts", tuple(int(a) for a in active_counts)
        )
        if any(a < 0 for a in self.active_counts):
            raise ShapeMismatch(f"active counts must be >= 0: {self.active_counts}")

    def check_against(self, shape):
        if len(self.active_counts) != len(shape):
            raise ShapeMismatch(
                f"profile has {len(self.active_counts)} layers, "
                f"shape has {len(shape)}"
            )
        for i, (a, n) in enumerate(zip(self.active_counts, shape)):
            if a > n:
                raise ShapeMismatch(f"layer {i + 1}: {a} active > width {n}")

    def __len__(self):
        return len(self.active_counts)

    def __iter__(self):
        return iter(self.active_counts)

    def __getitem__(self, i):
        return self.active_counts[i]


def layer_vertex(layer, index):
    """Canonical vertex id for node ``index`` of (1-based) ``layer``."""
    return f"L{layer}.{index}"


def build_layered_quiver(shape):
    """Fully connected feedforward quiver for ``shape``.

    Vertices are named ``L<layer>.<node>`` (both 1-based); every node of layer
    i is joined to every node of layer i+1.
    """
    shape = shape if isinstance(shape, LayeredShape) else LayeredShape(shape)
    vertices = set()
    edges = []
    for i, n in enumerate(shape, start=1):
        vertices.update(layer_vertex(i, j) for j in range(1, n + 1))
    for i in range(1, len(shape)):
        for u in range(1, shape[i - 1] + 1):
            for v in range(1, shape[i] + 1):
                tail = layer_vertex(i, u)
                head = layer_vertex(i + 1, v)
                edges.append(Edge(id=f"{tail}->{head}", tail=tail, head=head))
    return Quiver(vertices=frozenset(vertices), edges=edges)


def topological_order(adj):
    """Kahn topological sort of an adjacency map; raises CycleError."""
    in_degree = {v: 0 for v in adj}
    for v in adj:
        for w in adj[v]:
            in_degree[w] += 1
    queue = deque(v for v in adj if in_degree[v] == 0)
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adj[v]:
            in_degree[w] -= 1
            if in_degree[w] == 0:
                queue.append(w)
    if len(order) != len(adj):
        raise CycleError("induced subgraph contains a directed cycle")
    return order


def _check_sources(sources, allowed):
    sources = set(sources)
    if not sources <= set(allowed):
        raise ShapeMismatch("sources must be a subset of the allowed vertices")
    return sources


def enumerate_paths(quiver, sources, allowed=None):
    """Exhaustively count directed paths of length >= 0 from ``sources``.

    Paths may visit only ``allowed`` vertices (default: all).  Each source
    contributes its trivial path; parallel edges yield distinct paths.  Only
    meant for small instances — this is the brute-force oracle.
    """
    if allowed is None:
        allowed = quiver.vertices
    allowed = set(allowed)
    sources = _check_sources(sources, allowed)
    adj = quiver.adjacency(allowed)
    topological_order(adj)  # cycle check up front

    def walk(v):
        total = 1  # the path ending here
        for w in adj[v]:
            total += walk(w)
        return total

    return sum(walk(s) for s in sources)


def count_paths_dp(quiver, sources, allowed=None):
    """Same count as :func:`enumerate_paths` via topological-order DP."""
    if allowed is None:
        allowed = quiver.vertices
    allowed = set(allowed)
    sources = _check_sources(sources, allowed)
    adj = quiver.adjacency(allowed)
    order = topological_order(adj)
    paths_from = {}
    for v in reversed(order):
        paths_from[v] = 1 + sum(paths_from[w] for w in adj[v])
    return sum(paths_from[s] for s in sources)
