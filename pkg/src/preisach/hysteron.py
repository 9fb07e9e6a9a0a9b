"""Elementary hysteresis operators.

Two kinds of binary agent live here:

* the rectangular-loop relay: output jumps to +1 when the input rises to
  the up-threshold ``alpha`` and to -1 when it falls to the down-threshold
  ``beta``; in between (the range of inactivity) the state is retained,
* the soft-branch agent: the same two-state relay, but the two output
  levels are replaced by monotone curves ``f_plus`` (taken while the state
  is down) and ``f_minus`` (taken while up).

Threshold ties are closed: an increasing input switches up at exactly
``u == alpha`` and a decreasing input switches down at exactly
``u == beta``. ``alpha == beta`` is allowed and gives a fully reversible
step agent. All region-membership conventions elsewhere in the package
match these tie-breaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .signal import ReversalSequence, require_valid


class BinaryState(IntEnum):
    """Relay state; the integer value is the rectangular-loop output."""

    DOWN = -1
    UP = 1


@dataclass(frozen=True)
class RectHysteron:
    """A rectangular-loop binary agent.

    alpha : up-switching input threshold
    beta  : down-switching input threshold (alpha >= beta)
    nu    : capacity weight contributed at aggregation (nu >= 0)
    """

    alpha: float
    beta: float
    nu: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("thresholds must be finite")
        if self.alpha < self.beta:
            raise ValueError(
                f"alpha must be >= beta, got alpha={self.alpha}, beta={self.beta}"
            )
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise ValueError(f"capacity must be finite and >= 0, got {self.nu}")


def rect_apply(
    h: RectHysteron, state: BinaryState, seq: ReversalSequence
) -> tuple[BinaryState, list[BinaryState]]:
    """Drive one rectangular agent through a reversal sequence.

    On a reversal reached by an increase the state becomes UP iff the value
    is >= alpha; on one reached by a decrease it becomes DOWN iff the value
    is <= beta; otherwise it is retained. Returns the final state and the
    state after each reversal.
    """
    require_valid(seq)
    s = BinaryState(state)
    trace: list[BinaryState] = []
    for v, rising in seq.steps():
        if rising:
            if v >= h.alpha:
                s = BinaryState.UP
        else:
            if v <= h.beta:
                s = BinaryState.DOWN
        trace.append(s)
    return s, trace


class PiecewiseLinear:
    """A piecewise-linear map, clamped to its end values outside the knots.

    Knot abscissae must be strictly increasing and all knot data finite.
    A single knot gives a constant map.
    """

    def __init__(self, points):
        pts = [(float(u), float(f)) for u, f in points]
        if not pts:
            raise ValueError("at least one breakpoint is required")
        us = np.array([u for u, _ in pts], dtype=float)
        fs = np.array([f for _, f in pts], dtype=float)
        if not (np.isfinite(us).all() and np.isfinite(fs).all()):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(us) <= 0):
            raise ValueError("breakpoint abscissae must be strictly increasing")
        self.us = us
        self.fs = fs

    def __call__(self, u):
        # np.interp clamps to the end values, which is exactly the contract
        return np.interp(u, self.us, self.fs)

    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.us.tolist(), self.fs.tolist()))

    def __repr__(self):
        return f"{type(self).__name__}({self.breakpoints()!r})"


class BranchFunction(PiecewiseLinear):
    """A monotone (non-decreasing) piecewise-linear output branch."""

    def __init__(self, points):
        super().__init__(points)
        if np.any(np.diff(self.fs) < 0):
            raise ValueError("branch values must be non-decreasing")

    @classmethod
    def constant(cls, value: float) -> "BranchFunction":
        return cls([(0.0, value)])


class GeneralizedHysteron:
    """A soft-branch binary agent.

    The relay part switches exactly like :class:`RectHysteron` on
    ``(alpha, beta)``; the emitted output is ``f_plus(u)`` while down and
    ``f_minus(u)`` while up. ``f_minus`` must dominate ``f_plus`` on
    ``[beta, alpha]`` so the loop has a non-negative vertical gap.
    """

    def __init__(
        self,
        alpha: float,
        beta: float,
        f_plus: BranchFunction,
        f_minus: BranchFunction,
    ):
        if not (math.isfinite(alpha) and math.isfinite(beta)):
            raise ValueError("thresholds must be finite")
        if alpha < beta:
            raise ValueError(f"alpha must be >= beta, got alpha={alpha}, beta={beta}")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.f_plus = f_plus
        self.f_minus = f_minus
        # Piecewise-linear branches: checking the gap at every knot inside
        # the switching band plus the band edges is exact.
        probes = sorted(
            {self.beta, self.alpha}
            | {u for u in f_plus.us.tolist() if self.beta <= u <= self.alpha}
            | {u for u in f_minus.us.tolist() if self.beta <= u <= self.alpha}
        )
        for u in probes:
            if float(f_minus(u)) < float(f_plus(u)):
                raise ValueError(
                    f"descending branch below ascending branch at u={u}"
                )

    @classmethod
    def rectangular(cls, alpha: float, beta: float, nu: float = 1.0):
        """The rectangular special case: constant branches -nu and +nu."""
        if nu < 0:
            raise ValueError(f"capacity must be >= 0, got {nu}")
        return cls(
            alpha,
            beta,
            f_plus=BranchFunction.constant(-nu),
            f_minus=BranchFunction.constant(+nu),
        )

    def loop_gap(self, u) -> float:
        """Half the vertical distance between the branches at ``u``."""
        return 0.5 * (float(self.f_minus(u)) - float(self.f_plus(u)))

    def midline(self, u) -> float:
        """The branch average at ``u`` (the reversible midline)."""
        return 0.5 * (float(self.f_minus(u)) + float(self.f_plus(u)))

    def __repr__(self):
        return (
            f"GeneralizedHysteron(alpha={self.alpha}, beta={self.beta}, "
            f"f_plus={self.f_plus!r}, f_minus={self.f_minus!r})"
        )


def gen_output(h: GeneralizedHysteron, state: BinaryState, u: float) -> float:
    """Output of a soft-branch agent in the given state at input ``u``.

    Equals ``loop_gap(u) * state + midline(u)``; evaluated by branch
    selection so the reductions to ``f_plus`` (down) and ``f_minus`` (up)
    are exact in floating point.
    """
    if int(state) > 0:
        return float(h.f_minus(u))
    return float(h.f_plus(u))


def _advance_state(
    h, state: BinaryState, seq: ReversalSequence, query_u: float
) -> BinaryState:
    """Relay state after ``seq`` plus the final monotone leg to ``query_u``."""
    require_valid(seq)
    if not math.isfinite(query_u):
        raise ValueError("query value must be finite")
    s = BinaryState(state)
    for v, rising in seq.steps():
        if rising:
            if v >= h.alpha:
                s = BinaryState.UP
        else:
            if v <= h.beta:
                s = BinaryState.DOWN
    last = seq.extrema[-1] if seq.extrema else seq.start_u
    direction = seq.last_direction()
    if query_u != last:
        d = 1 if query_u > last else -1
        if direction != 0 and d != direction:
            raise ValueError(
                "non-monotone query: query value backtracks from the last reversal"
            )
        if d > 0:
            if query_u >= h.alpha:
                s = BinaryState.UP
        else:
            if query_u <= h.beta:
                s = BinaryState.DOWN
    return s


def gen_apply(
    h: GeneralizedHysteron,
    state: BinaryState,
    seq: ReversalSequence,
    query_u: float,
) -> float:
    """Drive a soft-branch agent through ``seq`` and evaluate at ``query_u``.

    ``query_u`` must equal the last reversal value or continue monotonically
    past it (it is the momentary input on the final leg).
    """
    s = _advance_state(h, state, seq, query_u)
    return gen_output(h, s, query_u)
