"""Shared test fixtures and independent oracles.

The oracles here deliberately re-implement model semantics in the plainest
possible way (raw folds over uncompressed histories, per-scalar arithmetic)
so that library results are checked against code that shares nothing with
the fast paths.
"""

from __future__ import annotations

import numpy as np

from preisach import (
    AgentPopulation,
    BranchFunction,
    GeneralizedHysteron,
    GeneralizedPopulation,
    PiecewiseLinear,
    ReversalSequence,
    SampledSeries,
    ShiftModel,
    extract_reversals,
)


def raw_relay_states(alphas, betas, seq: ReversalSequence) -> np.ndarray:
    """Brute-force relay fold of the raw, uncompressed history."""
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    states = np.full(np.broadcast(alphas, betas).shape, -1, dtype=np.int8)
    prev = seq.start_u
    for v in seq.extrema:
        if v > prev:
            states[alphas <= v] = 1
        else:
            states[betas >= v] = -1
        prev = v
    return states


def random_history(rng, lo, hi, max_reversals, start_u=None) -> ReversalSequence:
    if start_u is None:
        start_u = lo
    k = int(rng.integers(1, max_reversals + 1))
    vals = rng.uniform(lo, hi, k)
    series = SampledSeries.from_pairs([(i, v) for i, v in enumerate(vals)])
    return extract_reversals(series, float(start_u))


def random_population(rng, n_agents, lo=0.0, hi=1.0) -> AgentPopulation:
    beta = rng.uniform(lo, hi, n_agents)
    alpha = beta + rng.uniform(0.0, 1.0, n_agents) * (hi - beta)
    nu = rng.uniform(0.0, 2.0, n_agents)
    return AgentPopulation(alpha, beta, nu)


def random_soft_agent(rng, lo=-1.0, hi=1.0) -> GeneralizedHysteron:
    beta = rng.uniform(lo, 0.5 * (lo + hi))
    alpha = rng.uniform(beta + 0.05 * (hi - lo), hi)
    knots = np.sort(rng.uniform(lo - 0.5, hi + 0.5, 4))
    knots += np.arange(4) * 1e-9  # guard against duplicate knots
    base = np.sort(rng.uniform(-2.0, 0.5, 4))
    lift = np.maximum.accumulate(rng.uniform(0.05, 1.5, 4))
    f_plus = BranchFunction(list(zip(knots, base)))
    f_minus = BranchFunction(list(zip(knots, base + lift)))
    return GeneralizedHysteron(alpha, beta, f_plus, f_minus)


def random_soft_population(rng, n_agents, lo=-1.0, hi=1.0) -> GeneralizedPopulation:
    return GeneralizedPopulation([random_soft_agent(rng, lo, hi) for _ in range(n_agents)])


def random_shift_model(rng, n_agents=30, knots=9, span=2.0) -> ShiftModel:
    """A shift model with smooth random shifts satisfying well-posedness.

    Both composite maps u + g(u) are built directly as increasing functions
    and g is recovered by subtraction, so the monotonicity constraint holds
    by construction and g2 <= g1 everywhere.
    """
    pop = random_population(rng, n_agents, lo=-1.0, hi=1.0)
    us = np.linspace(-span, span, knots)
    h1 = np.cumsum(rng.uniform(0.05, 0.8, knots))
    h1 = h1 - h1[knots // 2] + rng.uniform(-0.3, 0.3)
    gap = rng.uniform(0.0, 0.5, knots)
    h2 = h1 - gap
    comp2 = np.maximum.accumulate(h2 + us) - us  # keep u + g2 non-decreasing
    g1 = PiecewiseLinear(list(zip(us, h1)))
    g2 = PiecewiseLinear(list(zip(us, comp2)))
    return ShiftModel(pop, g1=g1, g2=g2)


def series_from_values(values, start_time=0.0) -> SampledSeries:
    return SampledSeries.from_pairs(
        [(start_time + i, v) for i, v in enumerate(values)]
    )


def varying_gap_population() -> GeneralizedPopulation:
    """A wide background agent whose loop gap grows with u, plus two agents
    switching inside [-0.5, 0.5].

    Histories that park the background agent in different states bend the
    branches of later cycles without changing their vertical gaps, which is
    exactly the equal-chords-without-congruency signature.
    """
    background = GeneralizedHysteron(
        2.0,
        -2.0,
        f_plus=BranchFunction([(-2.0, -1.0), (2.0, -1.0)]),
        f_minus=BranchFunction([(-2.0, 0.0), (2.0, 4.0)]),
    )
    inner1 = GeneralizedHysteron(
        0.3,
        -0.2,
        f_plus=BranchFunction([(-1.0, -1.0), (1.0, -0.5)]),
        f_minus=BranchFunction([(-1.0, 0.5), (1.0, 1.0)]),
    )
    inner2 = GeneralizedHysteron(
        0.45,
        -0.4,
        f_plus=BranchFunction([(-1.0, -0.8), (1.0, -0.4)]),
        f_minus=BranchFunction([(-1.0, 0.4), (1.0, 0.8)]),
    )
    return GeneralizedPopulation([background, inner1, inner2])
