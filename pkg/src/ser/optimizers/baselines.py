"""Baseline population optimizers: genetic algorithm, particle swarm, grey wolf.

All three share the MRFO contract: minimize over a box, clamp after every
update, keep the best-so-far, log one record entry per iteration.
"""

from __future__ import annotations

import numpy as np

from .common import Evaluator, OptimizerConfig, SearchAgent, SearchSpace

PSO_INERTIA = 0.729
PSO_COGNITIVE = 1.49445
PSO_SOCIAL = 1.49445
PSO_VMAX_FRACTION = 0.2

GA_TOURNAMENT = 3
GA_CROSSOVER_P = 0.9
GA_SIGMA_FRACTION = 0.1


def _result(ev: Evaluator):
    return SearchAgent(ev.best.position.copy(), ev.best.fitness), ev.record


def ga_optimize(fitness, space: SearchSpace, cfg: OptimizerConfig | None = None):
    """Generational GA with one elite.

    Tournament selection, uniform crossover and per-gene mutation with rate
    ``1/D``. Mutation is Gaussian in continuous mode; in binary mode a gene
    is mirrored about the box midpoint, which flips its bit.
    """
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(cfg.seed)
    ev = Evaluator(fitness, space, cfg)
    N, D = cfg.pop_size, space.dim
    P = space.random_points(rng, N)
    fit = ev(P)
    p_mut = 1.0 / D

    def tournament():
        idx = rng.integers(0, N, size=GA_TOURNAMENT)
        return P[idx[np.argmin(fit[idx])]]

    for _ in range(cfg.max_iter):
        children = [P[np.argmin(fit)].copy()]
        while len(children) < N:
            p1, p2 = tournament(), tournament()
            if rng.random() < GA_CROSSOVER_P:
                child = np.where(rng.random(D) < 0.5, p1, p2)
            else:
                child = p1.copy()
            hit = rng.random(D) < p_mut
            if cfg.mode == "binary":
                child = np.where(hit, space.lower + space.upper - child, child)
            else:
                child = child + hit * rng.normal(0.0, GA_SIGMA_FRACTION, D) * space.span
            children.append(space.clamp(child))
        P = np.array(children)
        fit = ev(P)
        ev.log_iteration()
    return _result(ev)


def pso_optimize(fitness, space: SearchSpace, cfg: OptimizerConfig | None = None):
    """Constriction-coefficient PSO with velocity clamped to 20% of the range."""
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(cfg.seed)
    ev = Evaluator(fitness, space, cfg)
    N, D = cfg.pop_size, space.dim
    vmax = PSO_VMAX_FRACTION * space.span
    X = space.random_points(rng, N)
    V = rng.uniform(-1.0, 1.0, (N, D)) * vmax
    fit = ev(X)
    pbest, pfit = X.copy(), fit.copy()
    for _ in range(cfg.max_iter):
        g = ev.best.position
        r1, r2 = rng.random((N, D)), rng.random((N, D))
        V = PSO_INERTIA * V + PSO_COGNITIVE * r1 * (pbest - X) + PSO_SOCIAL * r2 * (g - X)
        V = np.clip(V, -vmax, vmax)
        X = space.clamp(X + V)
        fit = ev(X)
        better = fit < pfit
        pbest[better], pfit[better] = X[better], fit[better]
        ev.log_iteration()
    return _result(ev)


def gwo_optimize(fitness, space: SearchSpace, cfg: OptimizerConfig | None = None):
    """Grey wolf optimizer; ``a`` decays linearly from 2 to 0."""
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(cfg.seed)
    ev = Evaluator(fitness, space, cfg)
    N, D = cfg.pop_size, space.dim
    X = space.random_points(rng, N)
    fit = ev(X)
    leaders = X[np.argsort(fit, kind="stable")[:3]].copy()
    lfit = np.sort(fit, kind="stable")[:3].copy()
    for t in range(cfg.max_iter):
        a = 2.0 - 2.0 * t / cfg.max_iter
        moves = []
        for L in leaders:
            A = 2.0 * a * rng.random((N, D)) - a
            C = 2.0 * rng.random((N, D))
            moves.append(L - A * np.abs(C * L - X))
        X = space.clamp(np.mean(moves, axis=0))
        fit = ev(X)
        pool = np.vstack([leaders, X])
        pfit = np.concatenate([lfit, fit])
        top = np.argsort(pfit, kind="stable")[:3]
        leaders, lfit = pool[top].copy(), pfit[top].copy()
        ev.log_iteration()
    return _result(ev)
