"""Replicated Monte Carlo experiments with declared tolerances.

Replicate ``i`` at grid point ``k`` draws from
``RngStream(seed, stream_id + i, path=(k,))``, so results do not depend on
how replicates are scheduled. Cheap experiments (tiny trees, limit
samplers) treat a block of draws as one replicate.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import _kernels, exact, limits
from .destruction import component_forest, destroy, im_coupled_walk, rank_and_generation_clusters
from .percolation import cluster_forest, cluster_size_tree, percolate, supercritical_p
from .rng import RngStream
from .stats import (
    Check,
    ExperimentReport,
    chi_square,
    chi_square_quantile,
    empirical_law,
    exponential_cdf,
    frechet_cdf,
    is_monotone_decreasing,
    ks_statistic,
    ks_two_sample,
    total_variation,
)
from .trees import generate_rrt
from .yule import martingale_path_from_births, yule_birth_times


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run.

    Exactly one of ``p`` (fixed retention probability) and ``t`` (so that
    ``p = 1 - t / ln n``) is used by experiments that percolate; ``t`` is
    also the truncation time of destruction experiments.
    """

    name: str
    n_grid: list[int]
    replicates: int
    seed: int = 0
    stream_id: int = 0
    p: float | None = None
    t: float | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; choose from {sorted(EXPERIMENTS)}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.n_grid or any(int(n) < 1 for n in self.n_grid):
            raise ValueError("n_grid must be a nonempty list of positive integers")
        self.n_grid = [int(n) for n in self.n_grid]
        if self.p is not None and self.t is not None:
            raise ValueError("give p or t, not both")
        if self.p is not None and not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")
        if self.t is not None and not self.t > 0:
            raise ValueError("t must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        defaults = EXPERIMENTS[self.name].tolerances
        self.tolerances = {**defaults, **self.tolerances}

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return asdict(self)

    def p_at(self, n: int) -> float:
        if self.p is not None:
            return self.p
        return supercritical_p(n, self.t if self.t is not None else 1.0)

    def time(self) -> float:
        return self.t if self.t is not None else 1.0

    def stream(self, k: int, i: int) -> RngStream:
        return RngStream(self.seed, self.stream_id, (k,)).replicate(i)


@dataclass(frozen=True)
class Experiment:
    run: Callable[[ExperimentConfig], ExperimentReport]
    tolerances: dict[str, float]


def _map(fn, args: list, workers: int) -> list:
    if workers <= 1 or len(args) < 2:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args), chunksize=max(1, len(args) // (8 * workers))))


def _report(cfg: ExperimentConfig) -> ExperimentReport:
    params = cfg.to_dict()
    seeds = {"seed": cfg.seed, "stream_id": cfg.stream_id, "replicates": cfg.replicates}
    params.pop("seed")
    params.pop("stream_id")
    params.pop("workers")
    return ExperimentReport(cfg.name, params, seeds=seeds)


def _trend_check(report: ExperimentReport, name: str, values: list[float]):
    if len(values) > 1:
        report.checks.append(Check.holds(f"{name} decreases over n_grid", is_monotone_decreasing(values)))


# -- percolation on large trees ----------------------------------------------


def _root_cluster_rep(n: int, p: float, stream: RngStream) -> float:
    gen = stream.generator()
    tree = generate_rrt(n, gen)
    marked = percolate(tree, p, gen)
    return _kernels.root_cluster_size(tree.parent, marked.marked) / n**p


def run_root_cluster(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    deviations = []
    for k, n in enumerate(cfg.n_grid):
        p = cfg.p_at(n)
        vals = np.array(_map(_root_cluster_rep, [(n, p, cfg.stream(k, i)) for i in range(cfg.replicates)], cfg.workers))
        med = float(np.median(vals))
        deviations.append(abs(med - 1.0))
        report.rows.append({"n": n, "p": p, "median": med, "abs_dev": abs(med - 1.0), "mean": float(vals.mean())})
    tol = cfg.tolerances
    report.checks.append(Check.within("median at largest n", report.rows[-1]["median"], tol["median_lo"], tol["median_hi"]))
    _trend_check(report, "|median - 1|", deviations)
    return report


def _largest_cluster_rep(n: int, p: float, stream: RngStream) -> float:
    gen = stream.generator()
    tree = generate_rrt(n, gen)
    marked = percolate(tree, p, gen)
    _, _, size, _ = _kernels.cluster_forest(tree.parent, marked.marked)
    largest = size[1:].max() if size.size > 1 else 0
    return largest / ((1.0 - p) * n**p)


def run_largest_clusters(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    stats = []
    for k, n in enumerate(cfg.n_grid):
        p = cfg.p_at(n)
        vals = _map(_largest_cluster_rep, [(n, p, cfg.stream(k, i)) for i in range(cfg.replicates)], cfg.workers)
        ks = ks_statistic(vals, frechet_cdf)
        stats.append(ks)
        report.rows.append({"n": n, "p": p, "ks_vs_frechet": ks, "median": float(np.median(vals))})
    report.checks.append(Check.at_most("KS at largest n", stats[-1], cfg.tolerances["ks_max"]))
    _trend_check(report, "KS", stats)
    return report


def _joint_rep(n: int, p: float, stream: RngStream) -> tuple[float, float, float]:
    gen = stream.generator()
    tree = generate_rrt(n, gen)
    cf = cluster_forest(percolate(tree, p, gen), gen)
    scale = n**-p
    q = 1.0 - p
    return (
        cf.value(()) * scale,
        cf.value((1,)) * scale / q,
        cf.value((1, 1)) * scale / q**2,
    )


def run_joint_marginal(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    m = int(cfg.options.get("limit_samples", 100_000))
    zgen = RngStream(cfg.seed, cfg.stream_id, (len(cfg.n_grid),)).generator()
    z = [limits.sample_Z(2, 1, zgen) for _ in range(m)]
    z1 = limits.level_values(z, (1,))
    z11 = limits.level_values(z, (1, 1))
    stats = []
    for k, n in enumerate(cfg.n_grid):
        p = cfg.p_at(n)
        vals = np.array(_map(_joint_rep, [(n, p, cfg.stream(k, i)) for i in range(cfg.replicates)], cfg.workers))
        ks11 = ks_two_sample(vals[:, 2], z11)
        stats.append(ks11)
        report.rows.append(
            {
                "n": n,
                "p": p,
                "median_root": float(np.median(vals[:, 0])),
                "ks_C1_vs_Z1": ks_two_sample(vals[:, 1], z1),
                "ks_C11_vs_Z11": ks11,
            }
        )
    report.checks.append(Check.at_most("KS(C11, Z11) at largest n", stats[-1], cfg.tolerances["ks_max"]))
    _trend_check(report, "KS(C11, Z11)", stats)
    return report


# -- exact small-n laws -------------------------------------------------------


def _first_cut_block(n: int, size: int, stream: RngStream) -> np.ndarray:
    gen = stream.generator()
    parents = np.empty((size, n + 1), dtype=np.int64)
    parents[:, 0] = -1
    parents[:, 1:] = gen.integers(0, np.arange(1, n + 1), size=(size, n))
    edges = gen.integers(1, n + 1, size=size)
    cuts = _kernels.batch_first_cut(parents, edges)
    return np.bincount(cuts, minlength=n + 1)


def run_splitting(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    block = int(cfg.options.get("block", 100_000))
    cells = int(cfg.options.get("cells", 50))
    exact_max = int(cfg.options.get("exact_max_n", 5))
    for k, n in enumerate(cfg.n_grid):
        sizes = [min(block, cfg.replicates - s) for s in range(0, cfg.replicates, block)]
        counts = sum(_map(_first_cut_block, [(n, sz, cfg.stream(k, i)) for i, sz in enumerate(sizes)], cfg.workers))
        probs = np.array([float(exact.splitting_law(n, j)) for j in range(1, n + 1)])
        c = min(cells, n - 1)
        obs = np.append(counts[1 : c + 1], counts[c + 1 :].sum())
        expected = np.append(probs[:c], probs[c:].sum())
        expected /= expected.sum()
        stat = chi_square(obs, expected)
        dof = obs.size - 1
        crit = chi_square_quantile(cfg.tolerances["chi2_quantile"], dof)
        report.rows.append({"n": n, "cells": obs.size, "chi_square": stat, "critical": crit})
        report.checks.append(Check.below(f"chi-square at n={n}", stat, crit))
    exact_ok = all(
        exact.first_cut_law(m) == {j: exact.splitting_law(m, j) for j in range(1, m + 1)}
        for m in range(1, exact_max + 1)
    )
    report.checks.append(Check.holds(f"enumeration equals splitting law for n <= {exact_max}", exact_ok))
    return report


def _summary_block(n: int, p: float, size: int, yule: bool, stream: RngStream) -> np.ndarray:
    gen = stream.generator()
    parents = np.empty((size, n + 1), dtype=np.int64)
    parents[:, 0] = -1
    marks = np.zeros((size, n + 1), dtype=np.bool_)
    if n:
        parents[:, 1:] = gen.integers(0, np.arange(1, n + 1), size=(size, n))
        marks[:, 1:] = gen.random((size, n)) >= p
    tiebreak = gen.random((size, n + 1))
    if yule:
        return _kernels.batch_type_summary(parents, marks, tiebreak)
    return _kernels.batch_cluster_summary(parents, marks, tiebreak)


def run_generator_equivalence(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    block = int(cfg.options.get("block", 100_000))
    p_values = [Fraction(str(p)) for p in cfg.options.get("p_values", [0.25, 0.5, 0.75])]
    worst = 0.0
    for k, n in enumerate(cfg.n_grid):
        for pi, p in enumerate(p_values):
            oracle = {key: float(v) for key, v in exact.marginal(exact.cluster_summary_law(n, p), (0, 1)).items()}
            row = {"n": n, "p": float(p)}
            for yule in (False, True):
                sizes = [min(block, cfg.replicates - s) for s in range(0, cfg.replicates, block)]
                base = RngStream(cfg.seed, cfg.stream_id, (k, pi, int(yule)))
                parts = _map(
                    _summary_block,
                    [(n, float(p), sz, yule, base.replicate(i)) for i, sz in enumerate(sizes)],
                    cfg.workers,
                )
                law = empirical_law(np.concatenate(parts)[:, :2])
                tv = total_variation(law, oracle)
                worst = max(worst, tv)
                row["tv_yule" if yule else "tv_percolation"] = tv
            report.rows.append(row)
    report.checks.append(Check.below("max TV against exact law", worst, cfg.tolerances["tv_max"]))
    return report


# -- destruction ---------------------------------------------------------------


def _components_rep(n: int, t: float, stream: RngStream) -> tuple[float, float, float]:
    gen = stream.generator()
    record = destroy(generate_rrt(n, gen), gen)
    cf = component_forest(record)
    first = np.flatnonzero(cf.forest.parent == 0)
    sizes = cf.size[first]
    top = first[sizes == sizes.max()]
    pick = top[gen.integers(top.size)] if top.size > 1 else top[0]
    early = cf.birth[first] < t
    root = (n + 1) - int(sizes[early].sum())
    return cf.size[pick] * math.log(n) / n, float(cf.birth[pick]), root / (math.exp(-t) * n)


def run_components(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    t = cfg.time()
    ks_b = []
    for k, n in enumerate(cfg.n_grid):
        vals = np.array(_map(_components_rep, [(n, t, cfg.stream(k, i)) for i in range(cfg.replicates)], cfg.workers))
        ks_size = ks_statistic(vals[:, 0], frechet_cdf)
        ks_birth = ks_statistic(vals[:, 1], exponential_cdf)
        ks_b.append(ks_size)
        report.rows.append(
            {
                "n": n,
                "ks_size_vs_frechet": ks_size,
                "ks_birth_vs_exp": ks_birth,
                "median_root_ratio": float(np.median(vals[:, 2])),
            }
        )
    tol = cfg.tolerances
    last = report.rows[-1]
    report.checks.append(Check.at_most("KS of scaled B_sigma(1)", last["ks_size_vs_frechet"], tol["ks_max"]))
    _trend_check(report, "KS of scaled B_sigma(1)", ks_b)
    report.checks.append(Check.at_most("KS of b_sigma(1)", last["ks_birth_vs_exp"], tol["ks_max"]))
    report.checks.append(
        Check.within("median root component / (e^-t n)", last["median_root_ratio"], tol["median_lo"], tol["median_hi"])
    )
    return report


def _rank_rep(n: int, t: float, stream: RngStream) -> tuple[bool, bool, bool]:
    gen = stream.generator()
    record = destroy(generate_rrt(n, gen), gen)
    frak, clusters = rank_and_generation_clusters(record, t, gen)
    c = cluster_size_tree(record.marked_before(t), gen)
    ok = all(cl.rank <= cl.generation for cl in clusters)
    strict = any(cl.rank < cl.generation for cl in clusters)
    return ok, frak[()] == c[()], strict


def run_rank_vs_generation(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    t = cfg.time()
    for k, n in enumerate(cfg.n_grid):
        res = np.array(_map(_rank_rep, [(n, t, cfg.stream(k, i)) for i in range(cfg.replicates)], cfg.workers))
        report.rows.append(
            {
                "n": n,
                "replicates_rank_le_generation": int(res[:, 0].sum()),
                "replicates_root_equal": int(res[:, 1].sum()),
                "replicates_strict": int(res[:, 2].sum()),
            }
        )
        report.checks.append(Check.holds(f"rank <= generation everywhere (n={n})", bool(res[:, 0].all())))
        report.checks.append(Check.holds(f"frakC root equals C root (n={n})", bool(res[:, 1].all())))
        report.checks.append(Check.holds(f"strict rank < generation occurs (n={n})", bool(res[:, 2].any())))
    return report


def _coupling_prefix_rep(n: int, stream: RngStream) -> bool:
    w = im_coupled_walk(n, stream)
    return w.prefix_matches() and w.X_n >= w.L_n and int(w.cut_sizes.sum()) == n


def _coupling_rep(n: int, stream: RngStream) -> tuple[float, float]:
    w = im_coupled_walk(n, stream)
    scale = math.log(n) / n
    return w.L_n * scale, w.undershoot() * scale


def run_coupling(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    pn = int(cfg.options.get("prefix_n", 10_000))
    pr = int(cfg.options.get("prefix_replicates", 10_000))
    base = RngStream(cfg.seed, cfg.stream_id, (len(cfg.n_grid),))
    ok = _map(_coupling_prefix_rep, [(pn, base.replicate(i)) for i in range(pr)], cfg.workers)
    report.rows.append({"n": pn, "replicates": pr, "prefix_identity_holds": int(sum(ok))})
    report.checks.append(Check.holds(f"prefix identity for {pr} seeds at n={pn}", all(ok)))
    tol = cfg.tolerances
    for k, n in enumerate(cfg.n_grid):
        vals = np.array(_map(_coupling_rep, [(n, cfg.stream(k, i)) for i in range(cfg.replicates)], cfg.workers))
        report.rows.append(
            {
                "n": n,
                "mean_scaled_L": float(vals[:, 0].mean()),
                "mean_scaled_undershoot": float(vals[:, 1].mean()),
                # the undershoot is heavy tailed: it vanishes in probability long
                # before its mean does
                "median_scaled_undershoot": float(np.median(vals[:, 1])),
            }
        )
    last = report.rows[-1]
    report.checks.append(Check.within("mean (ln n/n) L_n", last["mean_scaled_L"], tol["L_lo"], tol["L_hi"]))
    report.checks.append(Check.below("mean (ln n/n)(n - S_L)", last["mean_scaled_undershoot"], tol["undershoot_max"]))
    return report


# -- Yule martingale ---------------------------------------------------------


def _martingale_rep(n: int, t: float, stream: RngStream) -> tuple[float, float]:
    births = yule_birth_times(n, stream)
    proxy = math.exp(-births[-1]) * (n + 1)
    return proxy, martingale_path_from_births(births).sup_sq_deviation(proxy, t)


def run_martingale(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    t = cfg.t if cfg.t is not None else 5.0
    for k, n in enumerate(cfg.n_grid):
        vals = np.array(_map(_martingale_rep, [(n, t, cfg.stream(k, i)) for i in range(cfg.replicates)], cfg.workers))
        report.rows.append(
            {
                "n": n,
                "ks_proxy_vs_exp": ks_statistic(vals[:, 0], exponential_cdf),
                "mean_sup_sq_dev": float(vals[:, 1].mean()),
                "bound": 10 * math.exp(-t),
            }
        )
    last = report.rows[-1]
    tol = cfg.tolerances
    report.checks.append(Check.below("KS of proxy vs Exp(1)", last["ks_proxy_vs_exp"], tol["ks_max"]))
    report.checks.append(
        Check.at_most("mean sup |W - proxy|^2 after t", last["mean_sup_sq_dev"], 10 * math.exp(-t) + tol["slack"])
    )
    return report


# -- limit samplers ----------------------------------------------------------


def _limit_block(t: float, size: int, stream: RngStream) -> np.ndarray:
    gens = [stream.substream(j).generator() for j in range(4)]
    out = np.empty((size, 6))
    for r in range(size):
        z = limits.sample_Z(1, 1, gens[0])
        direct = limits.sample_truncated(t, 1, 1, gens[1])
        squeezed = limits.sample_truncated_by_squeeze(t, 1, 1, gens[2])
        g = limits.sample_G(t, 1, 1, gens[3])
        out[r] = (z[(1,)], *direct[(1,)], *squeezed[(1,)], g[(1,)])
    return out


def run_limit_selfchecks(cfg: ExperimentConfig) -> ExperimentReport:
    report = _report(cfg)
    t = cfg.time()
    block = int(cfg.options.get("block", 10_000))
    sizes = [min(block, cfg.replicates - s) for s in range(0, cfg.replicates, block)]
    vals = np.concatenate(_map(_limit_block, [(t, sz, cfg.stream(0, i)) for i, sz in enumerate(sizes)], cfg.workers))
    # an independent copy of Z_1 for the comparison with G
    z_ref = np.concatenate(
        [limits.largest_atoms(1.0, sz, cfg.stream(1, i)) for i, sz in enumerate(sizes)]
    )
    row = {
        "ks_Z1_vs_frechet": ks_statistic(vals[:, 0], frechet_cdf),
        "ks_truncated_size": ks_two_sample(vals[:, 1], vals[:, 3]),
        "ks_truncated_birth": ks_two_sample(vals[:, 2], vals[:, 4]),
        "ks_G1_vs_Z1": ks_two_sample(vals[:, 5], z_ref),
    }
    report.rows.append(row)
    tol = cfg.tolerances["ks_max"]
    for key, value in row.items():
        report.checks.append(Check.below(key, value, tol))
    return report


EXPERIMENTS: dict[str, Experiment] = {
    "root-cluster": Experiment(run_root_cluster, {"median_lo": 0.85, "median_hi": 1.15}),
    "largest-clusters": Experiment(run_largest_clusters, {"ks_max": 0.15}),
    "joint-marginal": Experiment(run_joint_marginal, {"ks_max": 0.2}),
    "splitting": Experiment(run_splitting, {"chi2_quantile": 0.999}),
    "generator-equivalence": Experiment(run_generator_equivalence, {"tv_max": 0.01}),
    "coupling": Experiment(run_coupling, {"L_lo": 0.9, "L_hi": 1.1, "undershoot_max": 0.1}),
    "components": Experiment(run_components, {"ks_max": 0.15, "median_lo": 0.85, "median_hi": 1.15}),
    "rank-vs-generation": Experiment(run_rank_vs_generation, {}),
    "martingale": Experiment(run_martingale, {"ks_max": 0.02, "slack": 0.5}),
    "limit-selfchecks": Experiment(run_limit_selfchecks, {"ks_max": 0.01}),
}

# acceptance-sized defaults, used by the CLI and scripts when no config is given
PRESETS: dict[str, dict[str, Any]] = {
    "root-cluster": {"n_grid": [10_000, 100_000, 1_000_000], "replicates": 500, "t": 1.0},
    "largest-clusters": {"n_grid": [1_000, 10_000, 100_000], "replicates": 2000, "t": 1.0},
    "joint-marginal": {"n_grid": [100_000, 1_000_000], "replicates": 2000, "t": 1.0},
    "splitting": {"n_grid": [100], "replicates": 1_000_000},
    "generator-equivalence": {"n_grid": [1, 2, 3, 4, 5], "replicates": 1_000_000},
    "coupling": {"n_grid": [1_000_000], "replicates": 1000},
    "components": {"n_grid": [1_000, 10_000, 100_000], "replicates": 2000, "t": 1.0},
    "rank-vs-generation": {"n_grid": [1000], "replicates": 10_000, "t": 1.0},
    "martingale": {"n_grid": [100_000], "replicates": 10_000, "t": 5.0},
    "limit-selfchecks": {"n_grid": [1], "replicates": 100_000, "t": 1.0},
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig(name=name, **{**PRESETS[name], **overrides})


def run_replicated(config: ExperimentConfig, rng_base: RngStream | None = None) -> ExperimentReport:
    """Run ``config``; ``rng_base`` overrides the configured seed and stream id."""
    if rng_base is not None:
        config = ExperimentConfig.from_dict({**config.to_dict(), "seed": rng_base.seed, "stream_id": rng_base.stream_id})
    return EXPERIMENTS[config.name].run(config)
