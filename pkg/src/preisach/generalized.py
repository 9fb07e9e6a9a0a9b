"""Aggregation of soft-branch agents and input-dependent threshold shifts.

The aggregate output of soft-branch agents splits, per agent, into a relay
part weighted by the loop gap at the *current* input plus the branch
midline. Summed over the population this yields

    f(u) = sum_k gap_k(u) * s_k  +  midline_offset(u)

and the relay sum itself splits further into the contribution of the
bistable band (agents with beta < u < alpha -- the only history-dependent
piece) and a pure function of u from the agents whose state the current
input forces. ``eval_irreversible``, ``saturation_term`` and
``midline_offset`` compute the three pieces; their sum reconstructs
``eval_generalized`` identically.

Because the loop gap moves with the input, cycles traced after different
histories are generally *not* congruent: agents outside the cycle band
contribute ``gap_k(u) * s_k`` with history-dependent signs, which bends the
branches rather than translating them. The vertical gap between the two
branches, however, only involves agents flipped inside the cycle and stays
history-independent (``chord_generalized``; ``check_equal_chords`` verifies
both halves of that statement on sampled loops).

``ShiftModel`` drives rectangular agents whose switching thresholds slide
with the input: the up threshold is crossed where ``u + g2(u)`` reaches
``alpha``, the down threshold where ``u + g1(u)`` falls to ``beta``. Both
composite maps must be non-decreasing so each monotone input leg crosses an
effective threshold at most once. Relabeling each agent by its momentary
effective thresholds turns the shift model into a soft-weight model whose
weight rides with the input; ``to_generalized`` exposes that relabeled form
and reproduces ``eval_shifted`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import AgentPopulation, LoopTrace, check_congruency, _require_comparable
from .hysteron import GeneralizedHysteron, PiecewiseLinear
from .memory import RISING, StaircaseMemory
from .signal import ReversalSequence, require_valid


class GeneralizedPopulation:
    """A finite set of soft-branch agents, evaluated in fixed order."""

    def __init__(self, agents):
        agents = list(agents)
        if not agents:
            raise ValueError("population must contain at least one agent")
        for k, h in enumerate(agents):
            if not isinstance(h, GeneralizedHysteron):
                raise ValueError(f"agent {k} is not a GeneralizedHysteron")
        self.agents = agents
        self.alpha = np.array([h.alpha for h in agents])
        self.beta = np.array([h.beta for h in agents])

    def __len__(self) -> int:
        return len(self.agents)

    def loop_gap_at(self, u: float) -> np.ndarray:
        return np.array([h.loop_gap(u) for h in self.agents])

    def midline_at(self, u: float) -> np.ndarray:
        return np.array([h.midline(u) for h in self.agents])

    def support_bounds(self) -> tuple[float, float]:
        lo = float(min(self.beta.min(), self.alpha.min()))
        hi = float(max(self.alpha.max(), self.beta.max()))
        return lo, hi

    def simulator(self, start_u=None, memory: StaircaseMemory | None = None):
        if memory is not None:
            return GeneralizedSimulator.from_memory(self, memory)
        if start_u is None:
            raise ValueError("either start_u or memory is required")
        return GeneralizedSimulator(self, start_u)


def _relay_states(alpha: np.ndarray, beta: np.ndarray, seq: ReversalSequence,
                  query_u: float) -> np.ndarray:
    """Relay states after ``seq`` plus the final monotone leg to ``query_u``."""
    require_valid(seq)
    if not math.isfinite(query_u):
        raise ValueError("query value must be finite")
    states = np.full(alpha.shape, -1.0)
    for v, rising in seq.steps():
        if rising:
            states[alpha <= v] = 1.0
        else:
            states[beta >= v] = -1.0
    last = seq.extrema[-1] if seq.extrema else seq.start_u
    if query_u != last:
        d = 1 if query_u > last else -1
        direction = seq.last_direction()
        if direction != 0 and d != direction:
            raise ValueError(
                "non-monotone query: query value backtracks from the last reversal"
            )
        if d > 0:
            states[alpha <= query_u] = 1.0
        else:
            states[beta >= query_u] = -1.0
    return states


def eval_generalized(gpop: GeneralizedPopulation, seq: ReversalSequence,
                     query_u: float) -> float:
    """Aggregate soft-branch output after ``seq`` at input ``query_u``."""
    states = _relay_states(gpop.alpha, gpop.beta, seq, query_u)
    gap = gpop.loop_gap_at(query_u)
    mid = gpop.midline_at(query_u)
    return math.fsum(gap * states + mid)


def midline_offset(gpop: GeneralizedPopulation, u: float) -> float:
    """Fully reversible part: the summed branch midlines at ``u``."""
    return math.fsum(gpop.midline_at(u))


def saturation_term(gpop: GeneralizedPopulation, u: float) -> float:
    """Reversible relay part from agents whose state ``u`` forces.

    Agents with up-threshold at or below ``u`` count positively, agents
    with down-threshold at or above ``u`` negatively, each with its loop
    gap evaluated at ``u``.
    """
    gap = gpop.loop_gap_at(u)
    pos = math.fsum(gap[gpop.alpha <= u])
    neg = math.fsum(gap[gpop.beta >= u])
    return pos - neg


def eval_irreversible(gpop: GeneralizedPopulation, seq: ReversalSequence,
                      query_u: float) -> float:
    """History-carrying part: signed gaps over the bistable band only.

    Adding ``saturation_term`` and ``midline_offset`` at the same input
    reconstructs ``eval_generalized`` exactly.
    """
    states = _relay_states(gpop.alpha, gpop.beta, seq, query_u)
    gap = gpop.loop_gap_at(query_u)
    band = (gpop.beta < query_u) & (query_u < gpop.alpha)
    return math.fsum(gap[band] * states[band])


def decompose_generalized(gpop: GeneralizedPopulation, mem: StaircaseMemory
                          ) -> tuple[float, float, float]:
    """(irreversible, saturation, midline) parts at the memory's input.

    Relay states are read off the staircase record, so this matches the
    sequence-driven ``eval_irreversible`` for any history that produced
    ``mem``. The three parts sum to the full output.
    """
    from .memory import states_of

    u = mem.current_u
    states = states_of(mem, gpop.alpha, gpop.beta).astype(float)
    gap = gpop.loop_gap_at(u)
    band = (gpop.beta < u) & (u < gpop.alpha)
    irreversible = math.fsum(gap[band] * states[band])
    return irreversible, saturation_term(gpop, u), midline_offset(gpop, u)


class GeneralizedSimulator:
    """Relay-state tracker emitting soft-branch output along an input path."""

    def __init__(self, gpop: GeneralizedPopulation, start_u, states=None):
        self.gpop = gpop
        self.current = float(start_u)
        if states is None:
            self.states = np.full(len(gpop), -1.0)
        else:
            self.states = np.asarray(states, dtype=float).copy()

    @classmethod
    def from_memory(cls, gpop: GeneralizedPopulation, mem: StaircaseMemory):
        from .memory import states_of

        states = states_of(mem, gpop.alpha, gpop.beta).astype(float)
        return cls(gpop, mem.current_u, states)

    def push(self, u) -> None:
        u = float(u)
        if u == self.current:
            return
        if u > self.current:
            self.states[self.gpop.alpha <= u] = 1.0
        else:
            self.states[self.gpop.beta >= u] = -1.0
        self.current = u

    def value(self) -> float:
        gap = self.gpop.loop_gap_at(self.current)
        mid = self.gpop.midline_at(self.current)
        return math.fsum(gap * self.states + mid)


def chord_generalized(gpop: GeneralizedPopulation, u_minus: float,
                      u_plus: float, u: float) -> float:
    """Vertical branch gap of the steady cycle at ``u`` from the weights.

    Twice the summed loop gap (taken at ``u``) of the agents flipped by the
    cycle: up-threshold in ``(u, u_plus]``, down-threshold in
    ``[u_minus, u)``. History before the cycle does not enter.
    """
    if not (u_minus <= u <= u_plus):
        raise ValueError(
            f"outside cycle: u={u!r} not within [{u_minus!r}, {u_plus!r}]"
        )
    mask = (
        (gpop.alpha > u)
        & (gpop.alpha <= u_plus)
        & (gpop.beta >= u_minus)
        & (gpop.beta < u)
    )
    gap = gpop.loop_gap_at(u)
    return 2.0 * math.fsum(gap[mask])


@dataclass(frozen=True)
class EqualChordsReport:
    chords_equal: bool
    max_chord_deviation: float
    congruent: bool
    max_branch_deviation: float


def check_equal_chords(l1: LoopTrace, l2: LoopTrace, tol: float = 1e-12) -> EqualChordsReport:
    """Compare two loops' vertical gaps pointwise; also report congruency.

    Soft-weight models keep the gaps equal across histories while the
    branch shapes themselves may differ beyond any translation, so
    ``chords_equal`` true with ``congruent`` false is the expected signature
    of an input-dependent weight.
    """
    _require_comparable(l1, l2)
    chord_dev = float(np.abs(l1.chord() - l2.chord()).max())
    congruency = check_congruency(l1, l2, tol)
    return EqualChordsReport(
        chords_equal=chord_dev <= tol,
        max_chord_deviation=chord_dev,
        congruent=congruency.congruent,
        max_branch_deviation=congruency.max_deviation,
    )


class ShiftModel:
    """Rectangular agents whose thresholds slide with the current input.

    ``g2`` shifts the up thresholds, ``g1`` the down thresholds
    (``g2 <= g1`` everywhere). An agent switches up once ``u + g2(u)``
    reaches its ``alpha`` and down once ``u + g1(u)`` falls to its ``beta``;
    both composite maps must be non-decreasing, otherwise a single monotone
    input leg could cross the same effective threshold several times.
    """

    def __init__(self, base: AgentPopulation, g1: PiecewiseLinear, g2: PiecewiseLinear):
        self.base = base
        self.g1 = g1
        self.g2 = g2
        for name, g in (("g1", g1), ("g2", g2)):
            composite = g.us + g.fs
            if np.any(np.diff(composite) < 0):
                raise ValueError(
                    f"ill-posed shift: u + {name}(u) must be non-decreasing"
                )
        probes = np.concatenate(
            (
                [min(g1.us[0], g2.us[0]) - 1.0],
                np.unique(np.concatenate((g1.us, g2.us))),
                [max(g1.us[-1], g2.us[-1]) + 1.0],
            )
        )
        gap = np.asarray(g1(probes)) - np.asarray(g2(probes))
        if np.any(gap < 0):
            u_bad = float(probes[np.argmin(gap)])
            raise ValueError(f"shift functions must satisfy g2 <= g1 (fails at u={u_bad})")

    def up_compare(self, u: float) -> float:
        """The value compared against up-thresholds when the input is at ``u``."""
        return float(u + self.g2(u))

    def down_compare(self, u: float) -> float:
        """The value compared against down-thresholds at ``u``."""
        return float(u + self.g1(u))

    def support_bounds(self) -> tuple[float, float]:
        return self.base.support_bounds()

    def simulator(self, start_u=None, memory: StaircaseMemory | None = None):
        if memory is not None:
            return ShiftedSimulator.from_memory(self, memory)
        if start_u is None:
            raise ValueError("either start_u or memory is required")
        return ShiftedSimulator(self, start_u)


def _shifted_states(sm: ShiftModel, seq: ReversalSequence, query_u: float) -> np.ndarray:
    """Relay states of the shifted model after ``seq`` and the leg to ``query_u``."""
    require_valid(seq)
    if not math.isfinite(query_u):
        raise ValueError("query value must be finite")
    pop = sm.base
    states = np.full(len(pop), -1.0)
    for v, rising in seq.steps():
        if rising:
            states[pop.alpha <= sm.up_compare(v)] = 1.0
        else:
            states[pop.beta >= sm.down_compare(v)] = -1.0
    last = seq.extrema[-1] if seq.extrema else seq.start_u
    if query_u != last:
        d = 1 if query_u > last else -1
        direction = seq.last_direction()
        if direction != 0 and d != direction:
            raise ValueError(
                "non-monotone query: query value backtracks from the last reversal"
            )
        if d > 0:
            states[pop.alpha <= sm.up_compare(query_u)] = 1.0
        else:
            states[pop.beta >= sm.down_compare(query_u)] = -1.0
    return states


def eval_shifted(sm: ShiftModel, seq: ReversalSequence, query_u: float) -> float:
    """History-carrying output of the shift model at ``query_u``.

    Signed capacities over the band of agents still bistable at the
    current input: ``alpha`` above ``u + g2(u)`` and ``beta`` below
    ``u + g1(u)``.
    """
    states = _shifted_states(sm, seq, query_u)
    pop = sm.base
    band = (pop.alpha > sm.up_compare(query_u)) & (pop.beta < sm.down_compare(query_u))
    return math.fsum(pop.nu[band] * states[band])


def shifted_saturation_term(sm: ShiftModel, u: float) -> float:
    """Reversible part of the shift model: capacities forced by ``u`` alone."""
    pop = sm.base
    pos = math.fsum(pop.nu[pop.alpha <= sm.up_compare(u)])
    neg = math.fsum(pop.nu[pop.beta >= sm.down_compare(u)])
    return pos - neg


class ShiftedSimulator:
    """Moving-threshold relay tracker emitting the band output."""

    def __init__(self, sm: ShiftModel, start_u, states=None):
        self.sm = sm
        self.current = float(start_u)
        if states is None:
            self.states = np.full(len(sm.base), -1.0)
        else:
            self.states = np.asarray(states, dtype=float).copy()

    @classmethod
    def from_memory(cls, sm: ShiftModel, mem: StaircaseMemory):
        # The dominant-extrema record compresses raw inputs; both composite
        # maps are monotone, so domination survives the transform and the
        # compressed replay reproduces the full-history states.
        pop = sm.base
        states = np.full(len(pop), -1.0)
        for big, small in mem.vertex_pairs:
            states[pop.alpha <= sm.up_compare(big)] = 1.0
            states[pop.beta >= sm.down_compare(small)] = -1.0
        if mem.trend == RISING:
            states[pop.alpha <= sm.up_compare(mem.current_u)] = 1.0
        return cls(sm, mem.current_u, states)

    def push(self, u) -> None:
        u = float(u)
        if u == self.current:
            return
        pop = self.sm.base
        if u > self.current:
            self.states[pop.alpha <= self.sm.up_compare(u)] = 1.0
        else:
            self.states[pop.beta >= self.sm.down_compare(u)] = -1.0
        self.current = u

    def value(self) -> float:
        pop = self.sm.base
        u = self.current
        band = (pop.alpha > self.sm.up_compare(u)) & (pop.beta < self.sm.down_compare(u))
        return math.fsum(pop.nu[band] * self.states[band])


def chord_shifted(sm: ShiftModel, u_minus: float, u_plus: float, u: float) -> float:
    """Vertical gap of the shift model's steady cycle at ``u``.

    The flipped set is bounded by the composite maps: up-thresholds in
    ``(u + g2(u), u_plus + g2(u_plus)]``, down-thresholds in
    ``[u_minus + g1(u_minus), u + g1(u))``.
    """
    if not (u_minus <= u <= u_plus):
        raise ValueError(
            f"outside cycle: u={u!r} not within [{u_minus!r}, {u_plus!r}]"
        )
    pop = sm.base
    mask = (
        (pop.alpha > sm.up_compare(u))
        & (pop.alpha <= sm.up_compare(u_plus))
        & (pop.beta >= sm.down_compare(u_minus))
        & (pop.beta < sm.down_compare(u))
    )
    return 2.0 * math.fsum(pop.nu[mask])


class ShiftedWeightView:
    """The shift model relabeled by momentary effective thresholds.

    At input ``u`` every base agent ``(alpha, beta, nu)`` sits at the primed
    position ``(alpha - g2(u), beta - g1(u))`` carrying its capacity: an
    input-dependent point weight. Evaluating the band output in primed
    coordinates reproduces :func:`eval_shifted` -- the relabeling is a
    change of variables, not a different model.
    """

    def __init__(self, sm: ShiftModel):
        self.sm = sm
        self.base = sm.base
        self.g1 = sm.g1
        self.g2 = sm.g2

    def support_at(self, u: float):
        """Primed positions and weights of the point masses at input ``u``."""
        pop = self.base
        alpha_p = pop.alpha - float(self.g2(u))
        beta_p = pop.beta - float(self.g1(u))
        return alpha_p, beta_p, pop.nu

    def eval_irreversible(self, seq: ReversalSequence, query_u: float) -> float:
        """Band output computed entirely in primed coordinates."""
        require_valid(seq)
        if not math.isfinite(query_u):
            raise ValueError("query value must be finite")
        q = float(query_u)
        alpha_p, beta_p, nu = self.support_at(q)
        # Thresholds recovered from the primed labels; switching compares
        # the same composite-map values as the base model.
        thr_up = alpha_p + float(self.g2(q))
        thr_dn = beta_p + float(self.g1(q))
        states = np.full(alpha_p.shape, -1.0)
        for v, rising in seq.steps():
            if rising:
                states[thr_up <= self.sm.up_compare(v)] = 1.0
            else:
                states[thr_dn >= self.sm.down_compare(v)] = -1.0
        last = seq.extrema[-1] if seq.extrema else seq.start_u
        if q != last:
            d = 1 if q > last else -1
            direction = seq.last_direction()
            if direction != 0 and d != direction:
                raise ValueError(
                    "non-monotone query: query value backtracks from the last reversal"
                )
            if d > 0:
                states[thr_up <= self.sm.up_compare(q)] = 1.0
            else:
                states[thr_dn >= self.sm.down_compare(q)] = -1.0
        band = (beta_p < q) & (q < alpha_p)
        return math.fsum(nu[band] * states[band])


def to_generalized(sm: ShiftModel) -> ShiftedWeightView:
    """Relabel a shift model as an input-dependent weight over primed labels."""
    return ShiftedWeightView(sm)
