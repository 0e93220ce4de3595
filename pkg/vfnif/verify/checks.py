"""
Property checks behind the `verify` command. Each check registers itself
with a level; `fast` runs the operator oracles and invariance on small
graphs, `full` adds the gradient and vector perceptron checks and the large
invariance sweep. Layer functions are looked up on their modules at call
time so a patched implementation is what gets checked.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from vfnif.data.synthetic import synthetic_backbone
from vfnif.errors import VfnError
from vfnif.geometry import random_rigid
from vfnif.layers import atoms as atom_updates
from vfnif.layers import interactions, layer, operator
from vfnif.layers.layer import init_layer
from vfnif.layers.params import VectorFieldWeights, VMlpWeights, count_vmlp_parameters, init_vmlp
from vfnif.model.config import Activation, ModelConfig
from vfnif.model.graph import build_graph, embed_graph
from vfnif.model.network import encode, forward, init_params
from vfnif.numerics import DiffGraph, ParameterStore, finite_difference_check
from vfnif.verify import oracles

logger = logging.getLogger(__name__)

LEVELS = ("fast", "full")


@dataclass(frozen=True)
class VerifyContext:
    cfg: ModelConfig
    seed: int = 0
    full: bool = False

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


CheckFn = Callable[[VerifyContext], str]
_REGISTRY: list[tuple[str, str, CheckFn]] = []


def check(name: str, level: str = "fast") -> Callable[[CheckFn], CheckFn]:
    def register(fn: CheckFn) -> CheckFn:
        _REGISTRY.append((name, level, fn))
        return fn
    return register


def run_checks(level: str, cfg: ModelConfig | None = None, seed: int = 0) -> list[CheckResult]:
    if level not in LEVELS:
        raise ValueError(f"unknown verification level {level!r}")
    ctx = VerifyContext(cfg or ModelConfig(), seed=seed, full=level == "full")
    wanted = LEVELS[: LEVELS.index(level) + 1]
    results = []
    for name, lvl, fn in _REGISTRY:
        if lvl not in wanted:
            continue
        try:
            detail = fn(ctx)
            results.append(CheckResult(name, True, detail))
        except (AssertionError, VfnError, ValueError) as exc:
            results.append(CheckResult(name, False, str(exc) or type(exc).__name__))
        logger.debug("%s: %s", name, "pass" if results[-1].passed else "FAIL")
    return results


# ── Helpers ────────────────────────────────────────────────────────────────

def relative_deviation(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(a))), 1e-12))


def _expect(value: float, bound: float, what: str) -> str:
    assert value <= bound, f"{what}: {value:.3g} exceeds {bound:g}"
    return f"{what} {value:.2e}"


def _gelu(cfg: ModelConfig) -> ModelConfig:
    return replace(cfg, activation=Activation.GELU)


def reduced(cfg: ModelConfig) -> ModelConfig:
    """Narrow, shallow variant for sweeps that run thousands of forwards."""
    return replace(cfg, n_layers=min(cfg.n_layers, 2), d_v=32, d_e=32, d_q=min(cfg.d_q, 8), heads=4)


def compact(cfg: ModelConfig) -> ModelConfig:
    """Two small layers, so finite differences can visit every parameter entry."""
    return replace(cfg, n_layers=2, d_v=8, d_e=8, d_q=5, n_rbf=4, heads=2, knn_k=3)


def _layer_params(cfg: ModelConfig, seed: int) -> ParameterStore:
    params = init_params(cfg, seed=seed)
    init_layer(params, np.random.default_rng(seed + 1), "layer", cfg)
    return params


# ── Operator oracles ───────────────────────────────────────────────────────

@check("vector_field matches double loop")
def check_vector_field(ctx: VerifyContext) -> str:
    rng = ctx.rng(1)
    cases = 1000 if ctx.full else 100
    worst = 0.0
    for case in range(cases):
        d_q = 4 if case % 2 == 0 else ctx.cfg.d_q
        qi, kj = rng.normal(size=(2, d_q, 3)) * 10.0
        wa, wb = rng.normal(size=(2, d_q, d_q))
        g = DiffGraph()
        got = operator.vector_field(
            g, g.constant(qi), g.constant(kj), VectorFieldWeights(g.constant(wa), g.constant(wb))
        ).value
        ref = oracles.vector_field_loop(qi, kj, wa, wb)
        worst = max(worst, float(np.max(np.abs(got - ref)) / (1.0 + np.max(np.abs(ref)))))
    return _expect(worst, 1e-12, f"{cases} cases, max error")


@check("selector weights yield atom displacement")
def check_selector(ctx: VerifyContext) -> str:
    rng = ctx.rng(2)
    d_q = ctx.cfg.d_q
    for _ in range(20):
        qi, kj = rng.normal(size=(2, d_q, 3)) * 20.0
        k, l, m = rng.integers(0, d_q, size=3)
        wa, wb = oracles.selector_weights(d_q, k, l, m)
        g = DiffGraph()
        h = operator.vector_field(
            g, g.constant(qi), g.constant(kj), VectorFieldWeights(g.constant(wa), g.constant(wb))
        ).value
        assert np.array_equal(h[k], qi[l] - kj[m]), f"row {k} is not qi[{l}] - kj[{m}]"
        others = np.delete(h, k, axis=0)
        assert not np.any(others), "rows without a selector are not zero"
    return "20 selector patterns exact"


@check("featurize blocks are unit directions and bounded RBF")
def check_featurize(ctx: VerifyContext) -> str:
    cfg = replace(ctx.cfg, use_direction=True, use_rbf=True)
    rng = ctx.rng(3)
    h = rng.normal(size=(cfg.d_q, 3)) * 8.0
    h[0] = 0.0
    rotation = random_rigid(rng).rotation
    g = DiffGraph()
    feats = operator.featurize(g, g.constant(h), cfg).value.reshape(cfg.d_q, 3 + cfg.n_rbf)
    turned = operator.featurize(g, g.constant(h @ rotation.T), cfg).value.reshape(cfg.d_q, 3 + cfg.n_rbf)
    norms = np.linalg.norm(feats[:, :3], axis=-1)
    assert np.allclose(norms[1:], 1.0, atol=1e-6), "direction block not unit length"
    assert not np.any(feats[0, :3]), "zero vector did not give the zero direction"
    assert np.all((feats[:, 3:] >= 0.0) & (feats[:, 3:] <= 1.0)), "RBF block outside [0, 1]"
    assert np.allclose(turned[:, :3], feats[:, :3] @ rotation.T, atol=1e-12), "directions did not rotate"
    return _expect(float(np.max(np.abs(turned[:, 3:] - feats[:, 3:]))), 1e-12, "RBF change under rotation")


def _random_embedded(cfg: ModelConfig, n: int, seed: int, g: DiffGraph):
    rng = np.random.default_rng(seed)
    graph = build_graph(synthetic_backbone(n, seed=seed), cfg)
    k = graph.k
    graph = replace(
        graph,
        node_features=g.constant(rng.normal(size=(n, cfg.d_v))),
        edge_features=g.constant(rng.normal(size=(n, k, cfg.d_e))),
    )
    geometry = g.constant(rng.normal(size=(n, k, cfg.d_g))) if cfg.d_g else None
    return graph, geometry


@check("node_interaction matches dense reference")
def check_node_interaction(ctx: VerifyContext) -> str:
    cfg = replace(_gelu(ctx.cfg), knn_k=max(ctx.cfg.knn_k, 2))
    params = _layer_params(cfg, ctx.seed)
    g = DiffGraph(params)
    graph, geometry = _random_embedded(cfg, 3, ctx.seed + 7, g)
    update = interactions.node_interaction(g, graph, geometry, "layer", cfg)

    n, k = graph.neighbors.shape
    assert k == n, "3-node graph is not complete"
    e_dense = np.zeros((n, n, cfg.d_e))
    g_dense = np.zeros((n, n, cfg.d_g))
    for i in range(n):
        for slot, j in enumerate(graph.neighbors[i]):
            e_dense[i, j] = graph.edge_features.value[i, slot]
            if geometry is not None:
                g_dense[i, j] = geometry.value[i, slot]
    ref, _ = oracles.dense_node_interaction(
        graph.node_features.value, e_dense, g_dense, params, "layer", cfg.heads, cfg.normalize_features
    )
    return _expect(float(np.max(np.abs(update.node_features.value - ref))), 1e-10, "max error")


@check("attention rows are probability vectors")
def check_attention(ctx: VerifyContext) -> str:
    cfg = ctx.cfg
    params = _layer_params(cfg, ctx.seed)
    g = DiffGraph(params)
    graph, geometry = _random_embedded(cfg, 12, ctx.seed + 11, g)
    attention = interactions.node_interaction(g, graph, geometry, "layer", cfg).attention.value
    assert np.all(attention >= 0.0), "negative attention weight"
    return _expect(float(np.max(np.abs(attention.sum(axis=1) - 1.0))), 1e-9, "row-sum deviation")


@check("attention aggregation matches loop")
def check_aggregate(ctx: VerifyContext) -> str:
    rng = ctx.rng(4)
    n, k, heads, d_q = 3, 3, ctx.cfg.heads, ctx.cfg.d_q
    attention = rng.random(size=(n, k, heads))
    attention /= attention.sum(axis=1, keepdims=True)
    neighbor_atoms = rng.normal(size=(n, k, d_q, 3)) * 5.0
    g = DiffGraph()
    got = atom_updates.aggregate_atoms(g, g.constant(attention), g.constant(neighbor_atoms)).value
    ref = oracles.aggregate_loop(attention, neighbor_atoms)
    return _expect(float(np.max(np.abs(got - ref))), 1e-10, "max error")


@check("v_mlp parameter count")
def check_vmlp_count(ctx: VerifyContext) -> str:
    params = ParameterStore()
    init_vmlp(params, ctx.rng(5), "count", ctx.cfg.d_q)
    expected = 3 * ctx.cfg.d_q ** 2 + 3 * ctx.cfg.d_q
    assert params.size() == expected == count_vmlp_parameters(ctx.cfg.d_q), (
        f"counted {params.size()}, expected {expected}"
    )
    return f"{expected} parameters at d_q={ctx.cfg.d_q}"


# ── Invariance ─────────────────────────────────────────────────────────────

@check("layer outputs invariant under rigid motion")
def check_layer_invariance(ctx: VerifyContext) -> str:
    worst = 0.0
    for mode in ("linear", "aggregate"):
        cfg = replace(ctx.cfg, atom_update_mode=mode)
        params = _layer_params(cfg, ctx.seed)
        structure = synthetic_backbone(12, seed=ctx.seed + 3)
        outputs = []
        for motion in (None, random_rigid(ctx.rng(6))):
            moved = structure if motion is None else structure.moved(motion)
            g = DiffGraph(params)
            graph = embed_graph(g, build_graph(moved, cfg), cfg)
            out = layer.vfn_layer(g, graph, "layer", cfg)
            outputs.append((out.node_features.value, out.edge_features.value, out.atoms.value))
        for a, b in zip(*outputs):
            worst = max(worst, relative_deviation(a, b))
    return _expect(worst, 1e-6, "max relative deviation")


def _model_invariance(cfg: ModelConfig, ctx: VerifyContext, structures: int, motions: int, sizes) -> float:
    params = init_params(cfg, seed=ctx.seed)
    rng = ctx.rng(8)
    worst = 0.0
    for index in range(structures):
        structure = synthetic_backbone(int(rng.integers(*sizes)), seed=ctx.seed + 100 + index)
        base = forward(structure, cfg, params).logits
        for _ in range(motions):
            moved = forward(structure.moved(random_rigid(rng)), cfg, params).logits
            worst = max(worst, relative_deviation(base, moved))
    return worst


@check("model logits invariant under rigid motion")
def check_model_invariance(ctx: VerifyContext) -> str:
    worst = _model_invariance(ctx.cfg, ctx, structures=1, motions=3, sizes=(10, 13))
    return _expect(worst, 1e-6, "max relative logit deviation")


# ── Full level ─────────────────────────────────────────────────────────────

@check("v_mlp matches loop reference", level="full")
def check_vmlp(ctx: VerifyContext) -> str:
    rng = ctx.rng(9)
    worst = 0.0
    for case in range(1000):
        d_q = 3 if case % 2 == 0 else ctx.cfg.d_q
        qi, qo = rng.normal(size=(2, d_q, 3)) * 5.0
        wc, wd, we = rng.normal(size=(3, d_q, d_q))
        dirs = rng.normal(size=(d_q, 3))
        g = DiffGraph()
        got = atom_updates.v_mlp(
            g, g.constant(qi), g.constant(qo),
            VMlpWeights(g.constant(wc), g.constant(wd), g.constant(we), g.constant(dirs)),
        ).value
        ref = oracles.v_mlp_loop(qi, qo, wc, wd, we, dirs)
        worst = max(worst, float(np.max(np.abs(got - ref)) / (1.0 + np.max(np.abs(ref)))))
    return _expect(worst, 1e-12, "1000 cases, max error")


@check("model gradients match finite differences", level="full")
def check_model_gradients(ctx: VerifyContext) -> str:
    worst = 0.0
    for mode in ("linear", "aggregate"):
        cfg = replace(compact(ctx.cfg), atom_update_mode=mode)
        params = init_params(cfg, seed=ctx.seed)
        graph = build_graph(synthetic_backbone(4, seed=ctx.seed + 5), cfg)

        def objective(g: DiffGraph, store: ParameterStore):
            return g.cross_entropy(encode(g, graph, cfg), graph.sequence)

        worst = max(worst, finite_difference_check(objective, params, eps=1e-5))
    return _expect(worst, 1e-4, "every parameter, max relative gradient error")


@check("invariance sweep over random structures", level="full")
def check_invariance_sweep(ctx: VerifyContext) -> str:
    worst = _model_invariance(reduced(ctx.cfg), ctx, structures=50, motions=20, sizes=(10, 61))
    return _expect(worst, 1e-6, "50 structures x 20 motions, max relative deviation")
