"""Dynamic programming for finite-horizon averages and discounted costs.

The finite-horizon recursion works on unnormalized sums S_T(y) = T * V_T(y),

    S_T(y) = min over admissible u of  k(y, u) + S_{T-1}(f(y, u)),   S_0 = 0,

so V_T is exact up to float addition.  The discounted iteration applies the
standard contraction for h(y) = min over u of (1 - alpha) k(y, u) + alpha
h(f(y, u)) and stops once the sup-norm change is at most tol * (1 - alpha),
which bounds the sup-norm error by tol.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .problem import Graph

__all__ = [
    "ValueFunction",
    "Trajectory",
    "PeriodicProcess",
    "InadmissibleAction",
    "NotPeriodic",
    "value_iteration_avg",
    "value_iteration_discounted",
    "greedy_policy",
    "rollout",
    "average_cost",
]

Policy = Union[np.ndarray, Callable[[int], int]]


class InadmissibleAction(ValueError):
    """Raised when a rollout policy picks an action not admissible in its state."""


class NotPeriodic(ValueError):
    """Raised when pairs meant to chain into a prefix plus closed cycle do not."""


@dataclass(frozen=True)
class ValueFunction:
    """State-indexed values with the parameters they were computed under.

    horizon is T for finite-horizon averages, None otherwise; alpha is the
    discount factor for discounted values, None otherwise.
    """

    values: np.ndarray
    horizon: int | None = None
    alpha: float | None = None

    def __call__(self, y: int) -> float:
        return float(self.values[y])


@dataclass(frozen=True)
class Trajectory:
    """A recorded admissible path: S steps, S + 1 states."""

    graph: Graph
    states: np.ndarray
    actions: np.ndarray
    pairs: np.ndarray
    costs: np.ndarray

    def __post_init__(self) -> None:
        if len(self.states) != len(self.pairs) + 1:
            raise ValueError("need one more state than steps")
        if len(self.pairs) == 0:
            raise ValueError("trajectory must have at least one step")

    @property
    def n_steps(self) -> int:
        return len(self.pairs)


def _check_chain(graph: Graph, pairs: np.ndarray, what: str) -> None:
    succ = graph.pair_succ[pairs[:-1]]
    nxt = graph.pair_state[pairs[1:]]
    if np.any(succ != nxt):
        raise NotPeriodic(f"{what}: consecutive pairs do not chain")


@dataclass(frozen=True)
class PeriodicProcess:
    """An eventually periodic process: a finite prefix into a closed cycle.

    Construction checks that prefix and cycle pairs chain state-to-state and
    that the cycle closes on itself, raising NotPeriodic otherwise.
    """

    graph: Graph
    prefix_pairs: np.ndarray
    cycle_pairs: np.ndarray

    def __post_init__(self) -> None:
        prefix = np.asarray(self.prefix_pairs, dtype=int)
        cycle = np.asarray(self.cycle_pairs, dtype=int)
        object.__setattr__(self, "prefix_pairs", prefix)
        object.__setattr__(self, "cycle_pairs", cycle)
        if cycle.size == 0:
            raise NotPeriodic("cycle must contain at least one pair")
        g = self.graph
        if cycle.size > 1:
            _check_chain(g, cycle, "cycle")
        if g.pair_succ[cycle[-1]] != g.pair_state[cycle[0]]:
            raise NotPeriodic("cycle does not close")
        if prefix.size:
            _check_chain(g, prefix, "prefix")
            if g.pair_succ[prefix[-1]] != g.pair_state[cycle[0]]:
                raise NotPeriodic("prefix does not lead into the cycle")

    @property
    def start_state(self) -> int:
        first = self.prefix_pairs[0] if self.prefix_pairs.size else self.cycle_pairs[0]
        return int(self.graph.pair_state[first])

    @property
    def period(self) -> int:
        return int(self.cycle_pairs.size)

    @property
    def mean_cycle_cost(self) -> float:
        return float(np.mean(self.graph.pair_cost[self.cycle_pairs]))

    def to_trajectory(self, n_periods: int = 1) -> Trajectory:
        """Unroll the prefix plus n_periods turns of the cycle."""
        if n_periods < 1:
            raise ValueError("need at least one period")
        pairs = np.concatenate([self.prefix_pairs, np.tile(self.cycle_pairs, n_periods)])
        g = self.graph
        states = np.concatenate([g.pair_state[pairs], [g.pair_succ[pairs[-1]]]])
        return Trajectory(
            graph=g,
            states=states,
            actions=g.pair_action[pairs],
            pairs=pairs,
            costs=g.pair_cost[pairs],
        )


def _segment_min(values: np.ndarray, graph: Graph) -> np.ndarray:
    """Per-state minimum of a pair-indexed vector."""
    return np.minimum.reduceat(values, graph.state_offset[:-1])


def _segment_argmin_pair(values: np.ndarray, per_state_min: np.ndarray, graph: Graph) -> np.ndarray:
    """Lowest pair index achieving the per-state minimum (lowest action wins ties)."""
    counts = np.diff(graph.state_offset)
    hit = values == np.repeat(per_state_min, counts)
    candidates = np.where(hit, np.arange(graph.n_pairs), graph.n_pairs)
    return np.minimum.reduceat(candidates, graph.state_offset[:-1])


def value_iteration_avg(
    graph: Graph, T: int, want_policy: bool = False
) -> ValueFunction | tuple[ValueFunction, np.ndarray]:
    """Finite-horizon average values V_T for every state.

    With want_policy=True also returns a (T, n_states) table of pair
    indices: row t is the cost-minimizing pair to use at time t when T - t
    steps remain, ties resolved to the lowest action index.
    """
    if T < 1:
        raise ValueError("horizon must be at least 1")
    S = np.zeros(graph.n_states)
    policy = np.empty((T, graph.n_states), dtype=int) if want_policy else None
    for remaining in range(1, T + 1):
        totals = graph.pair_cost + S[graph.pair_succ]
        S = _segment_min(totals, graph)
        if want_policy:
            policy[T - remaining] = _segment_argmin_pair(totals, S, graph)
    vf = ValueFunction(values=S / T, horizon=T)
    return (vf, policy) if want_policy else vf


def value_iteration_discounted(
    graph: Graph, alpha: float, tol: float = 1e-10
) -> ValueFunction:
    """Normalized discounted values h_alpha, accurate to tol in sup norm."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    h = np.zeros(graph.n_states)
    stop = tol * (1.0 - alpha)
    M = max(graph.cost_bound, 1.0)
    # Contraction gives change <= alpha^j * (1 - alpha) * M, so this cap
    # cannot bind unless the update loop is broken.
    cap = int(2.0 * (1.0 + np.log(M / tol) / -np.log(alpha))) + 1000
    stage = (1.0 - alpha) * graph.pair_cost
    for _ in range(cap):
        h_new = _segment_min(stage + alpha * h[graph.pair_succ], graph)
        change = np.max(np.abs(h_new - h))
        h = h_new
        if change <= stop:
            return ValueFunction(values=h, alpha=alpha)
    raise RuntimeError("discounted value iteration failed to contract")


def greedy_policy(graph: Graph, h: ValueFunction) -> np.ndarray:
    """Stationary policy minimizing the discounted one-step lookahead of h.

    Returns action indices per state, lowest action on ties.
    """
    if h.alpha is None:
        raise ValueError("greedy_policy needs a discounted value function")
    totals = (1.0 - h.alpha) * graph.pair_cost + h.alpha * h.values[graph.pair_succ]
    per_state = _segment_min(totals, graph)
    pair_choice = _segment_argmin_pair(totals, per_state, graph)
    return graph.pair_action[pair_choice]


def rollout(graph: Graph, y0: int, policy: Policy, steps: int) -> Trajectory:
    """Run a stationary policy from y0 for a fixed number of steps.

    policy is either an array of action indices per state or a callable
    state -> action index.  Raises InadmissibleAction when the chosen
    action is not available in the current state.
    """
    if steps < 1:
        raise ValueError("need at least one step")
    pick = (lambda y: int(policy[y])) if isinstance(policy, np.ndarray) else policy
    states = np.empty(steps + 1, dtype=int)
    pairs = np.empty(steps, dtype=int)
    y = int(y0)
    states[0] = y
    for t in range(steps):
        u = int(pick(y))
        g = graph.pair_index(y, u)
        if g < 0:
            raise InadmissibleAction(
                f"action {u} is not admissible in state {y} at step {t}"
            )
        pairs[t] = g
        y = int(graph.pair_succ[g])
        states[t + 1] = y
    return Trajectory(
        graph=graph,
        states=states,
        actions=graph.pair_action[pairs],
        pairs=pairs,
        costs=graph.pair_cost[pairs],
    )


def average_cost(traj: Trajectory) -> float:
    """Time-average running cost along a trajectory."""
    return float(np.mean(traj.costs))
