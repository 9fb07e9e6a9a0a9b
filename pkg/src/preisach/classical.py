"""Aggregation of rectangular binary agents, with two evaluation routes.

``eval_direct`` is the definition: each agent is a rectangular relay, the
aggregate output is the capacity-weighted sum of relay states. It costs
O(agents) per input move and serves as the oracle for everything else.

``eval_geometric`` is the fast route: agents are binned by threshold pair
into a triangular grid (``WeightGrid``); the up-set under a staircase
memory is a union of one rectangle per stored vertex pair, so the output
is assembled from O(stored pairs) summed-area-table lookups, independent of
the agent count. Grid cells act as point masses at their centers, which
makes the two routes agree exactly whenever no history extremum needs to
split a cell.

Also here: cycle tracing (``minor_loop``), the translation-adjusted loop
comparison (``check_congruency``), the vertical-chord formula
(``vertical_chord``: twice the capacity inside the rectangle spanned by the
cycle bounds and the probe input, a history-independent quantity), and the
split of the output into its history-carrying band contribution and the
part forced by the current input (``decompose_classical``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .memory import (
    INITIAL,
    RISING,
    StaircaseMemory,
    initial_memory,
    push_extremum,
    states_of,
)
from .signal import ReversalSequence, require_valid


class AgentPopulation:
    """A finite set of rectangular agents stored as parallel arrays.

    Duplicate threshold pairs are allowed; their capacities simply add.
    Summation order is the fixed agent order, so outputs are reproducible.
    """

    def __init__(self, alpha, beta, nu):
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        if not (alpha.shape == beta.shape == nu.shape) or alpha.ndim != 1:
            raise ValueError("alpha, beta, nu must be 1-d arrays of equal length")
        for name, arr in (("alpha", alpha), ("beta", beta), ("nu", nu)):
            if not np.isfinite(arr).all():
                k = int(np.flatnonzero(~np.isfinite(arr))[0])
                raise ValueError(f"agent {k}: non-finite {name}")
        bad = np.flatnonzero(alpha < beta)
        if bad.size:
            k = int(bad[0])
            raise ValueError(
                f"agent {k}: alpha < beta ({alpha[k]!r} < {beta[k]!r})"
            )
        bad = np.flatnonzero(nu < 0)
        if bad.size:
            k = int(bad[0])
            raise ValueError(f"agent {k}: negative capacity {nu[k]!r}")
        self.alpha = alpha
        self.beta = beta
        self.nu = nu

    @classmethod
    def from_hysterons(cls, hysterons) -> "AgentPopulation":
        hs = list(hysterons)
        return cls(
            [h.alpha for h in hs], [h.beta for h in hs], [h.nu for h in hs]
        )

    def __len__(self) -> int:
        return int(self.alpha.size)

    @property
    def total_capacity(self) -> float:
        return float(self.nu.sum())

    def support_bounds(self) -> tuple[float, float]:
        """Smallest closed interval containing every threshold."""
        lo = float(min(self.beta.min(), self.alpha.min()))
        hi = float(max(self.alpha.max(), self.beta.max()))
        return lo, hi

    def simulator(self, start_u=None, memory: StaircaseMemory | None = None):
        if memory is not None:
            return PopulationSimulator.from_memory(self, memory)
        if start_u is None:
            raise ValueError("either start_u or memory is required")
        return PopulationSimulator(self, start_u)


class PopulationSimulator:
    """Mutable relay-state tracker for one input path over a population."""

    def __init__(self, pop: AgentPopulation, start_u, states=None):
        self.pop = pop
        self.current = float(start_u)
        if states is None:
            self.states = np.full(len(pop), -1.0)
        else:
            self.states = np.asarray(states, dtype=float).copy()
            if self.states.shape != (len(pop),):
                raise ValueError("states must have one entry per agent")

    @classmethod
    def from_memory(cls, pop: AgentPopulation, mem: StaircaseMemory):
        states = states_of(mem, pop.alpha, pop.beta).astype(float)
        return cls(pop, mem.current_u, states)

    def push(self, u) -> None:
        u = float(u)
        if u == self.current:
            return
        if u > self.current:
            self.states[self.pop.alpha <= u] = 1.0
        else:
            self.states[self.pop.beta >= u] = -1.0
        self.current = u

    def value(self) -> float:
        return float(self.pop.nu @ self.states)


def eval_direct(pop: AgentPopulation, seq: ReversalSequence, init=None) -> np.ndarray:
    """Aggregate output along a reversal sequence, one relay per agent.

    Returns an array of length ``len(seq) + 1``: entry 0 is the output in
    the initial state (all agents DOWN unless ``init`` provides per-agent
    states as +/-1 values), followed by the output after each reversal.
    """
    require_valid(seq)
    sim = PopulationSimulator(pop, seq.start_u, states=init)
    out = [sim.value()]
    for v in seq.extrema:
        sim.push(v)
        out.append(sim.value())
    return np.array(out)


class WeightGrid:
    """Cell-binned weight over the triangle beta0 <= beta <= alpha <= alpha0.

    ``cell_mass[i, j]`` is the capacity whose up-threshold falls in cell row
    i and down-threshold in cell column j; cells strictly above the diagonal
    must be empty. Queries treat each cell as a point mass at its center.
    The summed-area table is kept in extended precision so that region sums
    stay exact to ~1 ulp of the double-precision masses even at fine
    resolutions.
    """

    def __init__(self, beta0: float, alpha0: float, cell_mass):
        if not (math.isfinite(beta0) and math.isfinite(alpha0)) or alpha0 <= beta0:
            raise ValueError(f"invalid bounds ({beta0!r}, {alpha0!r})")
        cell_mass = np.asarray(cell_mass, dtype=float)
        if cell_mass.ndim != 2 or cell_mass.shape[0] != cell_mass.shape[1]:
            raise ValueError("cell_mass must be a square matrix")
        if not np.isfinite(cell_mass).all() or (cell_mass < 0).any():
            raise ValueError("cell masses must be finite and non-negative")
        n = cell_mass.shape[0]
        if n < 2:
            raise ValueError("grid needs at least 2 cells per axis")
        rows, cols = np.indices((n, n))
        if cell_mass[rows < cols].any():
            raise ValueError("cells with alpha < beta must carry zero mass")
        self.beta0 = float(beta0)
        self.alpha0 = float(alpha0)
        self.n = n
        self.cell_mass = cell_mass
        self.cell_width = (self.alpha0 - self.beta0) / n
        self.centers = self.beta0 + (np.arange(n) + 0.5) * self.cell_width
        self.prefix = self._build_prefix(cell_mass)
        self.total_mass = float(self.prefix[n, n])

    @staticmethod
    def _build_prefix(cell_mass: np.ndarray) -> np.ndarray:
        n = cell_mass.shape[0]
        prefix = np.zeros((n + 1, n + 1), dtype=np.longdouble)
        prefix[1:, 1:] = cell_mass.astype(np.longdouble).cumsum(0).cumsum(1)
        return prefix

    def prefix_is_consistent(self) -> bool:
        """Rebuild check: the stored table matches a fresh cumulative sum."""
        return bool(np.array_equal(self.prefix, self._build_prefix(self.cell_mass)))

    # Index cuts mirror the relay tie-breaks: a rise to v switches cells
    # whose center alpha is <= v; a fall to v leaves up only centers < v.
    def icut_up(self, v: float) -> int:
        return int(np.searchsorted(self.centers, v, side="right"))

    def jcut_down(self, v: float) -> int:
        return int(np.searchsorted(self.centers, v, side="left"))

    def rect_mass(self, i0: int, i1: int, j0: int, j1: int) -> float:
        """Mass of cell rows [i0, i1) x cols [j0, j1), empty ranges giving 0."""
        i0 = max(i0, 0)
        j0 = max(j0, 0)
        i1 = min(i1, self.n)
        j1 = min(j1, self.n)
        if i0 >= i1 or j0 >= j1:
            return 0.0
        p = self.prefix
        return float(p[i1, j1] - p[i0, j1] - p[i1, j0] + p[i0, j0])

    def contains(self, v: float) -> bool:
        return self.beta0 <= v <= self.alpha0

    def simulator(self, start_u=None, memory: StaircaseMemory | None = None):
        return GridSimulator(self, start_u=start_u, memory=memory)


class GridSimulator:
    """Staircase-memory tracker evaluating through the summed-area table."""

    def __init__(self, grid: WeightGrid, start_u=None, memory=None):
        self.grid = grid
        if memory is None:
            if start_u is None:
                raise ValueError("either start_u or memory is required")
            memory = initial_memory(start_u)
        self.mem = memory

    @property
    def current(self) -> float:
        return self.mem.current_u

    def push(self, u) -> None:
        if float(u) != self.mem.current_u:
            self.mem = push_extremum(self.mem, float(u))

    def value(self) -> float:
        return eval_geometric(self.grid, self.mem)


def from_agents(pop: AgentPopulation, n: int, bounds: tuple[float, float]) -> WeightGrid:
    """Bin a population into an n x n grid over ``bounds = (beta0, alpha0)``.

    Binning is conservative: the total grid mass equals the summed agent
    capacity. Agents must lie inside the bounds.
    """
    beta0, alpha0 = float(bounds[0]), float(bounds[1])
    if alpha0 <= beta0:
        raise ValueError(f"invalid bounds ({beta0!r}, {alpha0!r})")
    outside = np.flatnonzero(
        (pop.alpha > alpha0)
        | (pop.alpha < beta0)
        | (pop.beta < beta0)
        | (pop.beta > alpha0)
    )
    if outside.size:
        k = int(outside[0])
        raise ValueError(
            f"agent out of range: agent {k} with "
            f"(alpha={pop.alpha[k]!r}, beta={pop.beta[k]!r}) "
            f"outside bounds ({beta0!r}, {alpha0!r})"
        )
    width = (alpha0 - beta0) / n
    rows = np.clip(((pop.alpha - beta0) / width).astype(int), 0, n - 1)
    cols = np.clip(((pop.beta - beta0) / width).astype(int), 0, n - 1)
    cell_mass = np.zeros((n, n))
    np.add.at(cell_mass, (rows, cols), pop.nu)
    return WeightGrid(beta0, alpha0, cell_mass)


def uniform_grid(density: float, n: int, bounds: tuple[float, float]) -> WeightGrid:
    """Grid for a constant weight ``density`` over the support triangle.

    Diagonal cells carry half a cell of mass (the triangular sliver below
    alpha = beta), so the total is density * triangle area exactly.
    """
    beta0, alpha0 = float(bounds[0]), float(bounds[1])
    width = (alpha0 - beta0) / n
    cell = density * width * width
    mass = np.zeros((n, n))
    rows, cols = np.indices((n, n))
    mass[rows > cols] = cell
    mass[rows == cols] = 0.5 * cell
    return WeightGrid(beta0, alpha0, mass)


def _require_in_support(grid: WeightGrid, mem: StaircaseMemory) -> None:
    if mem.trend == INITIAL:
        return
    lo, hi = mem.extrema_bounds()
    if lo < grid.beta0 or hi > grid.alpha0:
        raise ValueError(
            f"out of triangle T: history spans [{lo!r}, {hi!r}] but the grid "
            f"supports [{grid.beta0!r}, {grid.alpha0!r}]"
        )


def _up_mass(grid: WeightGrid, mem: StaircaseMemory, row_lo: int = 0, col_hi=None) -> float:
    """Mass of the up-set, optionally clipped to rows >= row_lo, cols < col_hi.

    The up-set under a staircase is one rectangle of whole cells per stored
    vertex pair (columns between consecutive stored minima, rows up to the
    pair's maximum) plus, while rising, the sweep of the live link. All
    rectangles are resolved in one gather on the summed-area table, so the
    cost scales with the number of stored pairs, never the agent count.
    """
    if col_hi is None:
        col_hi = grid.n
    pairs = mem.vertex_pairs
    rising = mem.trend == RISING
    if not pairs and not rising:
        return 0.0
    if pairs:
        arr = np.asarray(pairs)
        rows = np.searchsorted(grid.centers, arr[:, 0], side="right")
        j_cuts = np.searchsorted(grid.centers, arr[:, 1], side="left")
        col_lo = np.concatenate(([0], j_cuts[:-1]))
        col_up = j_cuts
    else:
        rows = np.empty(0, dtype=int)
        col_lo = col_up = rows
    if rising:
        rows = np.append(rows, grid.icut_up(mem.current_u))
        col_lo = np.append(col_lo, col_up[-1] if col_up.size else 0)
        col_up = np.append(col_up, grid.n)
    rows = np.maximum(rows, row_lo)
    col_lo = np.minimum(col_lo, col_hi)
    col_up = np.minimum(col_up, col_hi)
    p = grid.prefix
    strips = p[rows, col_up] - p[row_lo, col_up] - p[rows, col_lo] + p[row_lo, col_lo]
    return float(strips.sum())


def eval_geometric(grid: WeightGrid, mem: StaircaseMemory) -> float:
    """Aggregate output for a staircase memory: up-mass minus down-mass."""
    _require_in_support(grid, mem)
    return 2.0 * _up_mass(grid, mem) - grid.total_mass


class Decomposition(NamedTuple):
    irreversible: float
    reversible: float


def decompose_classical(grid: WeightGrid, mem: StaircaseMemory) -> Decomposition:
    """Split the grid output at the memory's current input ``u``.

    The reversible part counts the cells whose state is forced by ``u``
    alone (up-thresholds at or below ``u`` minus down-thresholds at or above
    ``u``); the irreversible part is the signed mass of the bistable band,
    the only region where history matters. The two parts add back to
    ``eval_geometric`` exactly for any memory produced by an input path.
    """
    _require_in_support(grid, mem)
    u = mem.current_u
    a = grid.icut_up(u)
    b = grid.jcut_down(u)
    n = grid.n
    forced_up = grid.rect_mass(0, a, 0, n)
    forced_down = grid.rect_mass(0, n, b, n) - grid.rect_mass(0, a, b, n)
    reversible = forced_up - forced_down
    band_mass = grid.rect_mass(a, n, 0, b)
    up_in_band = _up_mass(grid, mem, row_lo=a, col_hi=b)
    irreversible = 2.0 * up_in_band - band_mass
    return Decomposition(irreversible=irreversible, reversible=reversible)


def decompose_direct(pop: AgentPopulation, mem: StaircaseMemory) -> Decomposition:
    """Exact population-level counterpart of :func:`decompose_classical`."""
    u = mem.current_u
    states = states_of(mem, pop.alpha, pop.beta).astype(float)
    band = (pop.beta < u) & (u < pop.alpha)
    irreversible = math.fsum(pop.nu[band] * states[band])
    reversible = math.fsum(pop.nu[pop.alpha <= u]) - math.fsum(pop.nu[pop.beta >= u])
    return Decomposition(irreversible=irreversible, reversible=reversible)


@dataclass(eq=False)
class LoopTrace:
    """Sampled ascending/descending branches of one input cycle.

    Both branches are tabulated on the same ascending input grid ``us``;
    ``f_ascending[k]`` and ``f_descending[k]`` are the outputs at ``us[k]``
    on the way up and on the way down.
    """

    u_minus: float
    u_plus: float
    us: np.ndarray
    f_ascending: np.ndarray
    f_descending: np.ndarray

    def chord(self) -> np.ndarray:
        """Vertical gap between the branches at each grid input."""
        return self.f_descending - self.f_ascending


def minor_loop(model, history: ReversalSequence, u_minus: float, u_plus: float,
               n_points: int = 101) -> LoopTrace:
    """Trace the steady cycle between ``u_minus`` and ``u_plus``.

    The history is applied first, the input is led into the cycle, and one
    full unrecorded cycle is run so the recorded branches are the repeating
    loop (the first traverse after an arbitrary entry can still be wiping
    out old vertices; from the second cycle on the loop retraces itself).
    ``model`` is anything with a ``simulator(start_u)`` -- a population, a
    weight grid, or their generalized counterparts.
    """
    if not (math.isfinite(u_minus) and math.isfinite(u_plus)):
        raise ValueError("cycle bounds must be finite")
    if u_minus >= u_plus:
        raise ValueError(f"empty cycle: [{u_minus!r}, {u_plus!r}]")
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    require_valid(history)

    sim = model.simulator(history.start_u)
    for v in history.extrema:
        sim.push(v)
    for v in (u_minus, u_plus, u_minus):
        sim.push(v)

    us = np.linspace(u_minus, u_plus, n_points)
    f_asc = np.empty(n_points)
    f_asc[0] = sim.value()
    for k in range(1, n_points):
        sim.push(us[k])
        f_asc[k] = sim.value()
    f_desc = np.empty(n_points)
    f_desc[-1] = f_asc[-1]
    for k in range(n_points - 2, -1, -1):
        sim.push(us[k])
        f_desc[k] = sim.value()
    return LoopTrace(
        u_minus=float(u_minus),
        u_plus=float(u_plus),
        us=us,
        f_ascending=f_asc,
        f_descending=f_desc,
    )


@dataclass(frozen=True)
class CongruencyReport:
    congruent: bool
    max_deviation: float


def _require_comparable(l1: LoopTrace, l2: LoopTrace) -> None:
    if (
        l1.u_minus != l2.u_minus
        or l1.u_plus != l2.u_plus
        or not np.array_equal(l1.us, l2.us)
    ):
        raise ValueError("incomparable loops: cycle bounds or input grids differ")


def check_congruency(l1: LoopTrace, l2: LoopTrace, tol: float = 1e-12) -> CongruencyReport:
    """Compare two loops up to a vertical translation.

    Both loops are anchored at their ascending start; the report carries
    the largest remaining branch deviation over both branches.
    """
    _require_comparable(l1, l2)
    shift1 = l1.f_ascending[0]
    shift2 = l2.f_ascending[0]
    d_asc = np.abs((l1.f_ascending - shift1) - (l2.f_ascending - shift2))
    d_desc = np.abs((l1.f_descending - shift1) - (l2.f_descending - shift2))
    dev = float(max(d_asc.max(), d_desc.max()))
    return CongruencyReport(congruent=dev <= tol, max_deviation=dev)


def vertical_chord(model, u_minus: float, u_plus: float, u: float) -> float:
    """Vertical gap of the steady cycle at input ``u``, from capacities alone.

    Twice the capacity of agents whose up-threshold lies in ``(u, u_plus]``
    and down-threshold in ``[u_minus, u)`` -- the agents that flip between
    the two branch passes. Boundary membership matches the relay
    tie-breaks, which is what makes this equal the sampled branch gap
    exactly. The answer does not depend on the history before the cycle.
    """
    if not (u_minus <= u <= u_plus):
        raise ValueError(
            f"outside cycle: u={u!r} not within [{u_minus!r}, {u_plus!r}]"
        )
    if isinstance(model, WeightGrid):
        return 2.0 * model.rect_mass(
            model.icut_up(u),
            model.icut_up(u_plus),
            model.jcut_down(u_minus),
            model.jcut_down(u),
        )
    pop = model
    mask = (
        (pop.alpha > u)
        & (pop.alpha <= u_plus)
        & (pop.beta >= u_minus)
        & (pop.beta < u)
    )
    return 2.0 * float(pop.nu[mask].sum())
