"""Manta-ray foraging optimization.

Each iteration every agent takes either a chain or a cyclone move (fair
coin), the population is re-evaluated, then all agents somersault around
the best position and are evaluated again. Chain and cyclone moves read the
already-updated position of the preceding agent, so the pass over agents is
sequential. Every new position is clamped to the search box.

Random draw order per agent (relevant when streams are pinned):
  chain:      a (D values)
  cyclone:    u, c, a (D values), then the random reference (D values) if exploring
  somersault: d, g
"""

from __future__ import annotations

import numpy as np

from .common import Evaluator, MrfoConfig, SearchAgent, SearchSpace


def weight_coefficient(a):
    """``b = 2 a sqrt(|ln a|)`` with ``b = 0`` at ``a = 0``."""
    a = np.asarray(a, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = 2.0 * a * np.sqrt(np.abs(np.log(a)))
    return np.where(a > 0, b, 0.0)


def spiral_coefficient(c, n: int, max_iter: int) -> float:
    return 2.0 * np.exp(c * (max_iter - n + 1) / max_iter) * np.sin(2.0 * np.pi * c)


def _chain_move(x, leader, best, rng):
    a = rng.random(x.shape)
    return x + a * (leader - x) + weight_coefficient(a) * (best - x)


def _cyclone_move(x, leader, best, n, max_iter, space, rng):
    u = rng.random()
    c = rng.random()
    a = rng.random(x.shape)
    ref = space.random_points(rng) if n / max_iter < u else best
    if leader is None:
        leader = ref
    gamma = spiral_coefficient(c, n, max_iter)
    return ref + a * (leader - x) + gamma * (ref - x)


def chain_step(positions, best, space: SearchSpace, rng) -> np.ndarray:
    """Chain foraging for every agent: the first follows the best position,
    agent ``j`` follows agent ``j-1`` (already moved) and the best."""
    P = np.array(positions, dtype=np.float64)
    best = np.asarray(best, dtype=np.float64)
    for j in range(len(P)):
        leader = best if j == 0 else P[j - 1]
        P[j] = space.clamp(_chain_move(P[j], leader, best, rng))
    return P


def cyclone_step(positions, best, n: int, max_iter: int, space: SearchSpace, rng) -> np.ndarray:
    """Cyclone foraging for every agent at iteration ``n`` of ``max_iter``.

    The spiral reference is a fresh random point while ``n / max_iter`` is
    below a uniform draw, otherwise the best position.
    """
    P = np.array(positions, dtype=np.float64)
    best = np.asarray(best, dtype=np.float64)
    for j in range(len(P)):
        leader = None if j == 0 else P[j - 1]
        P[j] = space.clamp(_cyclone_move(P[j], leader, best, n, max_iter, space, rng))
    return P


def somersault_step(positions, best, factor: float, space: SearchSpace, rng) -> np.ndarray:
    P = np.array(positions, dtype=np.float64)
    best = np.asarray(best, dtype=np.float64)
    for j in range(len(P)):
        d = rng.random(P.shape[1])
        g = rng.random(P.shape[1])
        P[j] = space.clamp(P[j] + factor * (d * best - g * P[j]))
    return P


def _keep_improved(P, fit, Q, qfit, greedy: bool):
    if not greedy:
        return Q, qfit
    better = qfit < fit
    return np.where(better[:, None], Q, P), np.where(better, qfit, fit)


def mrfo_init(fitness, space: SearchSpace, cfg: MrfoConfig, rng=None, evaluator=None):
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    ev = evaluator or Evaluator(fitness, space, cfg)
    return ev.population(space.random_points(rng, cfg.pop_size))


def mrfo_optimize(fitness, space: SearchSpace, cfg: MrfoConfig | None = None):
    """Minimize ``fitness`` over ``space``; returns (best SearchAgent, FitnessRecord)."""
    cfg = cfg or MrfoConfig()
    rng = np.random.default_rng(cfg.seed)
    ev = Evaluator(fitness, space, cfg)
    pop = mrfo_init(fitness, space, cfg, rng, ev)
    P, fit = pop.positions, pop.fitness
    I = cfg.max_iter
    for n in range(1, I + 1):
        best = ev.best.position
        Q = P.copy()
        for j in range(len(Q)):
            leader = None if j == 0 else Q[j - 1]
            if rng.random() < 0.5:
                step = _cyclone_move(P[j], leader, best, n, I, space, rng)
            else:
                step = _chain_move(P[j], best if j == 0 else leader, best, rng)
            Q[j] = space.clamp(step)
        P, fit = _keep_improved(P, fit, Q, ev(Q), cfg.greedy)
        Q = somersault_step(P, ev.best.position, cfg.somersault_factor, space, rng)
        P, fit = _keep_improved(P, fit, Q, ev(Q), cfg.greedy)
        ev.log_iteration()
    return SearchAgent(ev.best.position.copy(), ev.best.fitness), ev.record
