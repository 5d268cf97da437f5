"""Randomized cross-oracle battery.

Each check returns a PropertyResult; the battery is used both by the test
suite and by the ``verify`` CLI subcommand.  Checks accept an optional
implementation override so the harness itself can be exercised against a
deliberately broken implementation.
"""

from dataclasses import dataclass

import numpy as np

from .graphs import (
    ActivationProfile,
    Edge,
    LayeredShape,
    Quiver,
    build_layered_quiver,
    count_paths_dp,
    enumerate_paths,
    layer_vertex,
)
from .measures import (
    derived_functor_dim,
    emergence_layered,
    emergence_network,
    observation_rep,
)
from .scaling import base_init
from .trainer import MLPModel, loss_and_grads


@dataclass
class PropertyResult:
    name: str
    passed: bool
    cases: int
    counterexample: str = ""

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} {self.name} ({self.cases} cases)"
        if self.counterexample:
            line += f"\n  counterexample: {self.counterexample}"
        return line


def random_shape(rng, max_layers, max_width):
    n = int(rng.integers(2, max_layers + 1))
    return LayeredShape([int(rng.integers(1, max_width + 1)) for _ in range(n)])


def random_profile(rng, shape):
    return ActivationProfile([int(rng.integers(0, n + 1)) for n in shape])


def random_dag(rng, max_vertices=12):
    """Random DAG with edges respecting a random vertex order (parallel edges allowed)."""
    n = int(rng.integers(1, max_vertices + 1))
    names = [f"v{i}" for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            for dup in range(int(rng.integers(0, 2)) + (rng.random() < 0.1)):
                edges.append(
                    Edge(id=f"e{len(edges)}", tail=names[i], head=names[j])
                )
    return Quiver(vertices=frozenset(names), edges=edges)


def active_vertex_set(shape, profile):
    """First a_i nodes of every layer, in the canonical vertex naming."""
    active = set()
    for i, a in enumerate(profile, start=1):
        active.update(layer_vertex(i, j) for j in range(1, a + 1))
    return active


def check_dp_vs_enumeration(trials=200, max_vertices=10, seed=0):
    """count_paths_dp == enumerate_paths on random DAGs with random subsets."""
    rng = np.random.default_rng(seed)
    for t in range(trials):
        q = random_dag(rng, max_vertices)
        verts = sorted(q.vertices)
        allowed = {v for v in verts if rng.random() < 0.8}
        sources = {v for v in allowed if rng.random() < 0.5}
        dp = count_paths_dp(q, sources, allowed)
        brute = enumerate_paths(q, sources, allowed)
        if dp != brute:
            return PropertyResult(
                "dp_vs_enumeration",
                False,
                t + 1,
                f"dag={len(verts)}v/{len(q.edges)}e sources={sorted(sources)} "
                f"dp={dp} brute={brute}",
            )
    return PropertyResult("dp_vs_enumeration", True, trials)


def check_allowed_monotonicity(trials=100, max_vertices=9, seed=1):
    """Adding an allowed vertex never decreases either count."""
    rng = np.random.default_rng(seed)
    for t in range(trials):
        q = random_dag(rng, max_vertices)
        verts = sorted(q.vertices)
        allowed = {v for v in verts if rng.random() < 0.6}
        outside = [v for v in verts if v not in allowed]
        if not outside:
            continue
        sources = {v for v in allowed if rng.random() < 0.5}
        extra = outside[int(rng.integers(0, len(outside)))]
        before_dp = count_paths_dp(q, sources, allowed)
        before_brute = enumerate_paths(q, sources, allowed)
        bigger = allowed | {extra}
        after_dp = count_paths_dp(q, sources, bigger)
        after_brute = enumerate_paths(q, sources, bigger)
        if after_dp < before_dp or after_brute < before_brute:
            return PropertyResult(
                "allowed_monotonicity",
                False,
                t + 1,
                f"adding {extra}: dp {before_dp}->{after_dp}, "
                f"brute {before_brute}->{after_brute}",
            )
    return PropertyResult("allowed_monotonicity", True, trials)


def check_layered_vs_network(
    trials=200, max_layers=5, max_width=6, seed=2, layered_impl=None
):
    """Closed form == graph measure == brute-force enumeration on layered nets."""
    impl = layered_impl or emergence_layered
    rng = np.random.default_rng(seed)
    for t in range(trials):
        shape = random_shape(rng, max_layers, max_width)
        profile = random_profile(rng, shape)
        quiver = build_layered_quiver(shape)
        active = active_vertex_set(shape, profile)
        closed = impl(shape, profile)
        network = emergence_network(quiver, active)
        brute = sum(
            enumerate_paths(quiver, quiver.out_neighbors(x) & active, active)
            for x in quiver.vertices - active
        )
        if not closed == network == brute:
            return PropertyResult(
                "layered_vs_network",
                False,
                t + 1,
                f"shape={tuple(shape)} profile={tuple(profile)} "
                f"closed={closed} network={network} brute={brute}",
            )
    return PropertyResult("layered_vs_network", True, trials)


def check_derived_functor_vs_network(trials=100, max_layers=5, max_width=6, seed=3):
    """Unit-dimension observation rep: derived dimension == network measure."""
    rng = np.random.default_rng(seed)
    for t in range(trials):
        shape = random_shape(rng, max_layers, max_width)
        profile = random_profile(rng, shape)
        rep, deleted = observation_rep(shape, profile)
        derived = derived_functor_dim(rep, deleted)
        quiver = build_layered_quiver(shape)
        network = emergence_network(quiver, active_vertex_set(shape, profile))
        if derived != network:
            return PropertyResult(
                "derived_functor_vs_network",
                False,
                t + 1,
                f"shape={tuple(shape)} profile={tuple(profile)} "
                f"derived={derived} network={network}",
            )
    return PropertyResult("derived_functor_vs_network", True, trials)


def check_trivial_zeros(trials=50, max_layers=6, max_width=8, seed=4):
    """Fully active and fully inactive profiles both give zero emergence."""
    rng = np.random.default_rng(seed)
    for t in range(trials):
        shape = random_shape(rng, max_layers, max_width)
        full = emergence_layered(shape, ActivationProfile(list(shape)))
        zero = emergence_layered(shape, ActivationProfile([0] * len(shape)))
        if full != 0 or zero != 0:
            return PropertyResult(
                "trivial_zeros",
                False,
                t + 1,
                f"shape={tuple(shape)} full={full} zero={zero}",
            )
    return PropertyResult("trivial_zeros", True, trials)


def relative_gradient_error(model, batch, labels, eps=1e-5):
    """Max elementwise relative error of backprop vs central differences."""
    _, grads = loss_and_grads(model, batch, labels)

    def loss_at():
        loss, _ = loss_and_grads(model, batch, labels)
        return loss

    worst = 0.0
    params = [("W", model.weights.matrices), ("b", model.weights.biases)]
    if model.use_batchnorm:
        params.append(("gamma", [s.gamma for s in model.bn_state]))
        params.append(("beta", [s.beta for s in model.bn_state]))
    for key, arrays in params:
        for l, arr in enumerate(arrays):
            flat = arr.reshape(-1)
            gflat = grads[key][l].reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                up = loss_at()
                flat[i] = orig - eps
                down = loss_at()
                flat[i] = orig
                numeric = (up - down) / (2 * eps)
                # floor keeps finite-difference noise (~1e-11 absolute) from
                # dominating identically-zero gradients, e.g. biases under BN
                denom = max(abs(numeric), abs(gflat[i]), 1e-6)
                worst = max(worst, abs(numeric - gflat[i]) / denom)
    return worst


def check_gradients(trials=10, max_width=8, seed=5, use_batchnorm=False, tol=1e-4):
    """Backprop matches central finite differences on small random models."""
    rng = np.random.default_rng(seed)
    for t in range(trials):
        depth = int(rng.integers(2, 4))
        sizes = [int(rng.integers(2, max_width + 1)) for _ in range(depth + 1)]
        weights = base_init(LayeredShape(sizes), "kaiming_normal", int(rng.integers(2**31)))
        # nonzero biases so the bias gradients are exercised away from the origin
        for b in weights.biases:
            b += rng.normal(0.0, 0.1, b.shape)
        model = MLPModel(
            weights=weights,
            use_batchnorm=use_batchnorm,
            activation="tanh" if rng.random() < 0.5 else "relu",
        )
        batch_size = int(rng.integers(4, 17)) if use_batchnorm else int(rng.integers(2, 9))
        batch = rng.normal(size=(batch_size, sizes[0]))
        labels = rng.integers(0, sizes[-1], size=batch_size)
        err = relative_gradient_error(model, batch, labels)
        if err > tol:
            return PropertyResult(
                "gradients_bn" if use_batchnorm else "gradients",
                False,
                t + 1,
                f"sizes={sizes} activation={model.activation} error={err:.2e}",
            )
    return PropertyResult("gradients_bn" if use_batchnorm else "gradients", True, trials)


def run_battery(max_layers=5, max_width=6, trials=200, layered_impl=None):
    """The full verification battery; returns a list of PropertyResult."""
    max_layers = min(max_layers, 6)
    max_width = min(max_width, 8)
    return [
        check_dp_vs_enumeration(min(trials, 200)),
        check_allowed_monotonicity(min(trials, 100)),
        check_layered_vs_network(
            trials, max_layers, max_width, layered_impl=layered_impl
        ),
        check_derived_functor_vs_network(min(trials, 100), max_layers, max_width),
        check_trivial_zeros(min(trials, 50)),
        check_gradients(trials=5, use_batchnorm=False),
        check_gradients(trials=5, use_batchnorm=True),
    ]
