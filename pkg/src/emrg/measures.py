"""Closed-form emergence measures and the pivot-selection rule.

Everything here returns exact Python ints; products over realistic layer
widths overflow 64-bit quickly, so no numpy integers are used.
"""

from dataclasses import dataclass

from .errors import ShapeMismatch, Underflow, UnknownEdge
from .graphs import (
    ActivationProfile,
    Edge,
    LayeredShape,
    Quiver,
    QuiverRep,
    count_paths_dp,
    layer_vertex,
)


def emergence_network(quiver, active):
    """Path-count emergence of ``quiver`` observed through the active set.

    For every vertex x outside ``active``, count the directed paths (length
    >= 0) that start at x's out-neighbors inside ``active`` and stay inside
    ``active``.  Raises CycleError if the active-induced subgraph is cyclic.
    """
    active = set(active)
    if not active <= quiver.vertices:
        raise ShapeMismatch("active set contains vertices not in the quiver")
    total = 0
    for x in quiver.vertices - active:
        downstream = quiver.out_neighbors(x) & active
        total += count_paths_dp(quiver, downstream, active)
    return total


def emergence_layered(shape, profile):
    """Closed form for fully connected layered networks.

    E = sum over layer pairs i < j of
        (n_i - a_i) * a_j * prod_{i < k < j} a_k
    with empty products equal to 1.
    """
    shape = shape if isinstance(shape, LayeredShape) else LayeredShape(shape)
    profile = (
        profile
        if isinstance(profile, ActivationProfile)
        else ActivationProfile(profile)
    )
    profile.check_against(shape)
    n = shape.layer_sizes
    a = profile.active_counts
    big_n = len(n)
    total = 0
    for i in range(big_n - 1):
        inactive = n[i] - a[i]
        if inactive == 0:
            continue
        through = 1
        for j in range(i + 1, big_n):
            total += inactive * through * a[j]
            through *= a[j]
            if through == 0:
                break
    return total


def emergence_conv(shape, profile, filters):
    """Layered measure with filter counts as the pass-through factors.

    Same sum as :func:`emergence_layered` but intermediate layers contribute
    their filter count m_k instead of a_k.  Reduces to the plain layered
    measure when m_k == a_k.
    """
    shape = shape if isinstance(shape, LayeredShape) else LayeredShape(shape)
    profile = (
        profile
        if isinstance(profile, ActivationProfile)
        else ActivationProfile(profile)
    )
    profile.check_against(shape)
    filters = [int(m) for m in filters]
    if len(filters) != len(shape):
        raise ShapeMismatch(
            f"filters has {len(filters)} entries, shape has {len(shape)} layers"
        )
    if any(m < 0 for m in filters):
        raise ShapeMismatch("filter counts must be >= 0")
    n = shape.layer_sizes
    a = profile.active_counts
    big_n = len(n)
    total = 0
    for i in range(big_n - 1):
        inactive = n[i] - a[i]
        if inactive == 0:
            continue
        through = 1
        for j in range(i + 1, big_n):
            total += inactive * through * a[j]
            through *= filters[j]
    return total


def derived_functor_dim(rep, deleted_edges):
    """Dimension of the obstruction to a structure-deleting observation.

    ``deleted_edges`` is a collection of edge ids removed by the observation.
    Each deleted edge a contributes dim(space at tail of a) times the number
    of length->=0 paths starting at the head of a in the preserved subgraph
    (the quiver minus the deleted edges).
    """
    by_id = {e.id: e for e in rep.quiver.edges}
    deleted = set(deleted_edges)
    for eid in deleted:
        if eid not in by_id:
            raise UnknownEdge(f"deleted edge {eid!r} is not in the quiver")
    preserved = Quiver(
        vertices=rep.quiver.vertices,
        edges=[e for e in rep.quiver.edges if e.id not in deleted],
    )
    total = 0
    for eid in deleted:
        e = by_id[eid]
        total += rep.vertex_dim[e.tail] * count_paths_dp(preserved, {e.head})
    return total


def observation_rep(shape, profile):
    """Unit-dimension representation modeling the active-subnetwork observation.

    Builds the quiver whose edges are the active-induced edges of the fully
    connected layered network plus the arrows from each inactive node into
    its active downstream neighbors; returns (rep, deleted_edge_ids) where
    the deleted set is exactly those inactive-to-active arrows.  With this
    construction derived_functor_dim equals emergence_network on the layered
    quiver.
    """
    shape = shape if isinstance(shape, LayeredShape) else LayeredShape(shape)
    profile = (
        profile
        if isinstance(profile, ActivationProfile)
        else ActivationProfile(profile)
    )
    profile.check_against(shape)
    vertices = set()
    active = set()
    for i, n in enumerate(shape, start=1):
        for j in range(1, n + 1):
            v = layer_vertex(i, j)
            vertices.add(v)
            if j <= profile[i - 1]:
                active.add(v)
    edges = []
    deleted = []
    for i in range(1, len(shape)):
        for u in range(1, shape[i - 1] + 1):
            tail = layer_vertex(i, u)
            for v in range(1, shape[i] + 1):
                head = layer_vertex(i + 1, v)
                if head not in active:
                    continue
                eid = f"{tail}->{head}"
                edges.append(Edge(id=eid, tail=tail, head=head))
                if tail not in active:
                    deleted.append(eid)
    quiver = Quiver(vertices=frozenset(vertices), edges=edges)
    rep = QuiverRep(quiver=quiver, vertex_dim={v: 1 for v in vertices})
    return rep, deleted


@dataclass
class PivotReport:
    """All per-layer deltas plus the selected pivot layer (1-based).

    ``pivot`` is the largest layer index with a strictly positive delta, or
    None when no layer qualifies.  ``deltas[i - 1]`` is the delta for layer i.
    """

    pivot: int | None
    deltas: list


def pivot_delta(shape, i):
    """Net path gain from deactivating one node of layer ``i`` (1-based).

    delta = -n_{i-1} + n_{i+1} + n_{i+1} n_{i+2} + ... + n_{i+1} ... n_N
    with the conventions n_0 = 0 and an empty trailing sum for i = N.
    """
    shape = shape if isinstance(shape, LayeredShape) else LayeredShape(shape)
    n = shape.layer_sizes
    big_n = len(n)
    if not 1 <= i <= big_n:
        raise IndexError(f"layer index {i} out of range 1..{big_n}")
    delta = -(n[i - 2] if i >= 2 else 0)
    running = 1
    for k in range(i + 1, big_n + 1):
        running *= n[k - 1]
        delta += running
    return delta


def choose_pivot(shape):
    """Largest layer whose delta is strictly positive, with all deltas."""
    shape = shape if isinstance(shape, LayeredShape) else LayeredShape(shape)
    deltas = [pivot_delta(shape, i) for i in range(1, len(shape) + 1)]
    pivot = None
    for i, d in enumerate(deltas, start=1):
        if d > 0:
            pivot = i
    return PivotReport(pivot=pivot, deltas=deltas)


def exact_delta(shape, profile, i):
    """Exact emergence change from decrementing a_i by one.

    The closed-form delta above drops the cross terms through layer i to
    layers beyond i+1; this evaluates the layered measure twice and reports
    the true difference.
    """
    shape = shape if isinstance(shape, LayeredShape) else LayeredShape(shape)
    profile = (
        profile
        if isinstance(profile, ActivationProfile)
        else ActivationProfile(profile)
    )
    profile.check_against(shape)
    if not 1 <= i <= len(shape):
        raise IndexError(f"layer index {i} out of range 1..{len(shape)}")
    if profile[i - 1] == 0:
        raise Underflow(f"layer {i} has no active node to deactivate")
    counts = list(profile.active_counts)
    counts[i - 1] -= 1
    return emergence_layered(shape, ActivationProfile(counts)) - emergence_layered(
        shape, profile
    )
