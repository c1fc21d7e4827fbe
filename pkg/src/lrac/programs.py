"""Linear programs for long-run average values, and cycle analysis.

Two finite programs bracket the long-run average optimal value from a
start state y0.  The primal one minimizes expected running cost over
stationary pair measures gamma that are reachable from y0, reachability
being witnessed by a nonnegative transfer flow xi:

    minimize   <k, gamma> + theta <1, xi>
    subject to gamma is a probability measure on admissible pairs,
               inflow(z) = marginal(z) for every state z,
               [z = y0] - marginal(z) + xi_inflow(z) - xi_outflow(z) = 0.

The dual program searches for a constant mu with a pair of potentials
(psi, eta) certifying that every admissible pair costs at least mu after
potential corrections, psi nondecreasing along the dynamics up to theta:

    maximize   mu
    subject to k(y,u) + psi(y0) - psi(y) + eta(f(y,u)) - eta(y) >= mu,
               psi(f(y,u)) - psi(y) >= -theta.

On a finite graph both optimal values agree with the minimum mean cost
over cycles reachable from y0, computed here directly by Karp's method.
The q-form program is the dual with mu eliminated, maximizing psi(y0); at
theta = 0 its value is the largest w(y0) over functions w nondecreasing
along the dynamics whose expected slack k - w is nonnegative on every
stationary measure, the test implemented by k_membership.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .dp import PeriodicProcess
from .measures import (
    FlowMeasure,
    MetricBasis,
    OccupationalMeasure,
    state_inflow,
    state_marginal,
    stationarity_residual,
)
from .problem import Graph
from . import simplex

__all__ = [
    "DualCertificate",
    "PrimalPair",
    "PrimalResult",
    "DualResult",
    "QFormResult",
    "ErgodicInnerResult",
    "VPerResult",
    "ProjectionResult",
    "PrimalInfeasible",
    "DualUnbounded",
    "solve_primal",
    "solve_dual",
    "solve_q_form",
    "sup_over_K",
    "ergodic_inner_lp",
    "k_membership",
    "v_per",
    "project_to_W",
    "pair_from_process",
    "pair_residuals",
    "reachable_states",
]


class PrimalInfeasible(RuntimeError):
    """Defensive: the measure program cannot be infeasible on a viable graph."""


class DualUnbounded(RuntimeError):
    """Defensive: certificate programs are bounded by weak duality."""


@dataclass(frozen=True)
class DualCertificate:
    """A dual feasible point: constant mu and state potentials psi, eta."""

    mu: float
    psi: np.ndarray
    eta: np.ndarray

    def to_dict(self) -> dict:
        return {
            "mu": float(self.mu),
            "psi": [float(v) for v in self.psi],
            "eta": [float(v) for v in self.eta],
        }


@dataclass(frozen=True)
class PrimalPair:
    """A primal feasible point: stationary measure plus transfer flow."""

    gamma: OccupationalMeasure
    xi: FlowMeasure


@dataclass(frozen=True)
class PrimalResult:
    value: float
    pair: PrimalPair
    cap_dual: float
    iterations: int
    residuals: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "gamma": [float(w) for w in self.pair.gamma.weights],
            "xi": [float(w) for w in self.pair.xi.weights],
            "cap_dual": float(self.cap_dual),
            "iterations": self.iterations,
            "residuals": self.residuals,
        }


@dataclass(frozen=True)
class DualResult:
    value: float
    cert: DualCertificate
    iterations: int
    residuals: dict[str, float]

    def to_dict(self) -> dict:
        out = {"value": float(self.value), "iterations": self.iterations}
        out.update(self.cert.to_dict())
        out["residuals"] = self.residuals
        return out


@dataclass(frozen=True)
class QFormResult:
    value: float
    psi: np.ndarray
    eta: np.ndarray
    iterations: int

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "psi": [float(v) for v in self.psi],
            "eta": [float(v) for v in self.eta],
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class ErgodicInnerResult:
    value: float
    gamma: OccupationalMeasure
    iterations: int


@dataclass(frozen=True)
class VPerResult:
    value: float
    process: PeriodicProcess

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "prefix_pairs": [int(g) for g in self.process.prefix_pairs],
            "cycle_pairs": [int(g) for g in self.process.cycle_pairs],
            "period": self.process.period,
        }


@dataclass(frozen=True)
class ProjectionResult:
    distance: float
    nearest: OccupationalMeasure
    iterations: int


def _incidence(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Marginal and inflow indicator matrices, each (n_states, n_pairs)."""
    n, P = graph.n_states, graph.n_pairs
    marg = np.zeros((n, P))
    inflow = np.zeros((n, P))
    marg[graph.pair_state, np.arange(P)] = 1.0
    inflow[graph.pair_succ, np.arange(P)] = 1.0
    return marg, inflow


def solve_primal(graph: Graph, y0: int, theta: float = 0.0) -> PrimalResult:
    """Minimum expected cost over stationary measures reachable from y0,
    the transfer flow priced at theta per unit.

    At theta = 0 the flow is free, so an explicit cap
    <1, xi> <= n_states * n_pairs (far above what any transfer needs)
    keeps the feasible region bounded; the cap's dual multiplier is
    reported and should be zero at any optimum.
    """
    if theta < 0.0:
        raise ValueError("theta must be nonnegative")
    n, P = graph.n_states, graph.n_pairs
    marg, inflow = _incidence(graph)
    capped = theta == 0.0
    n_vars = 2 * P + (1 if capped else 0)
    rows = 1 + 2 * n + (1 if capped else 0)
    A = np.zeros((rows, n_vars))
    b = np.zeros(rows)
    c = np.zeros(n_vars)
    c[:P] = graph.pair_cost
    c[P : 2 * P] = theta
    A[0, :P] = 1.0
    b[0] = 1.0
    A[1 : n + 1, :P] = inflow - marg
    A[n + 1 : 2 * n + 1, :P] = -marg
    A[n + 1 + y0, :P] += 1.0  # [z = y0] enters through the total mass of gamma
    A[n + 1 : 2 * n + 1, P : 2 * P] = inflow - marg
    if capped:
        A[2 * n + 1, P : 2 * P] = 1.0
        A[2 * n + 1, 2 * P] = 1.0
        b[2 * n + 1] = float(n * P)
    lp = simplex.LinearProgram(c=c, A=A, b=b)
    sol = simplex.solve(lp)
    if sol.status != "optimal":
        raise PrimalInfeasible(
            f"measure program for y0={y0}, theta={theta} returned {sol.status}"
        )
    gamma = OccupationalMeasure(graph=graph, weights=sol.x[:P])
    xi = FlowMeasure(graph=graph, weights=sol.x[P : 2 * P])
    return PrimalResult(
        value=float(sol.objective),
        pair=PrimalPair(gamma=gamma, xi=xi),
        cap_dual=float(sol.y[2 * n + 1]) if capped else 0.0,
        iterations=sol.iterations,
        residuals=simplex.kkt_residuals(lp, sol),
    )


def solve_dual(graph: Graph, y0: int, theta: float = 0.0) -> DualResult:
    """Best lower-bound constant mu with certifying potentials (psi, eta)."""
    if theta < 0.0:
        raise ValueError("theta must be nonnegative")
    n, P = graph.n_states, graph.n_pairs
    # variables: mu, psi (n), eta (n), then slacks for the two constraint blocks
    n_free = 1 + 2 * n
    n_vars = n_free + 2 * P
    A = np.zeros((2 * P, n_vars))
    b = np.zeros(2 * P)
    rows = np.arange(P)
    A[rows, 0] = -1.0
    np.add.at(A[:P], (rows, 1 + graph.pair_state), -1.0)
    A[rows, 1 + y0] += 1.0
    np.add.at(A[:P], (rows, 1 + n + graph.pair_succ), 1.0)
    np.add.at(A[:P], (rows, 1 + n + graph.pair_state), -1.0)
    A[rows, n_free + rows] = -1.0
    b[:P] = -graph.pair_cost
    np.add.at(A[P:], (rows, 1 + graph.pair_succ), 1.0)
    np.add.at(A[P:], (rows, 1 + graph.pair_state), -1.0)
    A[P + rows, n_free + P + rows] = -1.0
    b[P:] = -theta
    c = np.zeros(n_vars)
    c[0] = 1.0
    free = np.zeros(n_vars, dtype=bool)
    free[:n_free] = True
    lp = simplex.LinearProgram(c=c, A=A, b=b, free=free, sense="max")
    sol = simplex.solve(lp)
    if sol.status != "optimal":
        raise DualUnbounded(
            f"certificate program for y0={y0}, theta={theta} returned {sol.status}"
        )
    cert = DualCertificate(
        mu=float(sol.x[0]), psi=sol.x[1 : 1 + n].copy(), eta=sol.x[1 + n : 1 + 2 * n].copy()
    )
    return DualResult(
        value=float(sol.objective),
        cert=cert,
        iterations=sol.iterations,
        residuals=simplex.kkt_residuals(lp, sol),
    )


def solve_q_form(graph: Graph, y0: int, theta: float = 0.0) -> QFormResult:
    """Certificate program with the constant eliminated: maximize psi(y0)
    over psi nondecreasing along the dynamics up to theta, with eta
    absorbing cost slack, k - psi + eta(f) - eta >= 0 on every pair.
    """
    if theta < 0.0:
        raise ValueError("theta must be nonnegative")
    n, P = graph.n_states, graph.n_pairs
    n_free = 2 * n
    n_vars = n_free + 2 * P
    A = np.zeros((2 * P, n_vars))
    b = np.zeros(2 * P)
    rows = np.arange(P)
    np.add.at(A[:P], (rows, graph.pair_state), -1.0)
    np.add.at(A[:P], (rows, n + graph.pair_succ), 1.0)
    np.add.at(A[:P], (rows, n + graph.pair_state), -1.0)
    A[rows, n_free + rows] = -1.0
    b[:P] = -graph.pair_cost
    np.add.at(A[P:], (rows, graph.pair_succ), 1.0)
    np.add.at(A[P:], (rows, graph.pair_state), -1.0)
    A[P + rows, n_free + P + rows] = -1.0
    b[P:] = -theta
    c = np.zeros(n_vars)
    c[y0] = 1.0
    free = np.zeros(n_vars, dtype=bool)
    free[:n_free] = True
    lp = simplex.LinearProgram(c=c, A=A, b=b, free=free, sense="max")
    sol = simplex.solve(lp)
    if sol.status != "optimal":
        raise DualUnbounded(f"q-form program for y0={y0} returned {sol.status}")
    return QFormResult(
        value=float(sol.objective),
        psi=sol.x[:n].copy(),
        eta=sol.x[n : 2 * n].copy(),
        iterations=sol.iterations,
    )


def sup_over_K(graph: Graph, y0: int) -> float:
    """Largest w(y0) over the feasible set of k_membership.

    Computed as the q-form value at theta = 0: the eta search inside that
    program is exactly the nonnegative-expected-slack condition by finite
    duality.
    """
    return solve_q_form(graph, y0, 0.0).value


def ergodic_inner_lp(graph: Graph, w) -> ErgodicInnerResult:
    """Minimum of <k - w, gamma> over stationary probability measures.

    w may be a per-state array or a value function carrying one.
    """
    w = np.asarray(getattr(w, "values", w), dtype=float)
    if w.shape != (graph.n_states,):
        raise ValueError("w must assign a value to every state")
    n, P = graph.n_states, graph.n_pairs
    marg, inflow = _incidence(graph)
    A = np.zeros((1 + n, P))
    A[0] = 1.0
    A[1:] = inflow - marg
    b = np.zeros(1 + n)
    b[0] = 1.0
    c = graph.pair_cost - w[graph.pair_state]
    lp = simplex.LinearProgram(c=c, A=A, b=b)
    sol = simplex.solve(lp)
    if sol.status != "optimal":
        raise PrimalInfeasible(f"stationary-measure program returned {sol.status}")
    return ErgodicInnerResult(
        value=float(sol.objective),
        gamma=OccupationalMeasure(graph=graph, weights=sol.x),
        iterations=sol.iterations,
    )


def k_membership(graph: Graph, w, tol: float = 1e-7) -> bool:
    """Test membership of w in the certificate function class: w must be
    nondecreasing along the dynamics, within tol per pair, and k - w must
    have expectation >= -tol under every stationary measure.
    """
    w = np.asarray(getattr(w, "values", w), dtype=float)
    if w.shape != (graph.n_states,):
        raise ValueError("w must assign a value to every state")
    mono_violation = float(max(0.0, np.max(w[graph.pair_state] - w[graph.pair_succ])))
    if mono_violation > tol:
        return False
    return ergodic_inner_lp(graph, w).value >= -tol


def reachable_states(graph: Graph, y0: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Breadth-first reachability from y0.

    Returns (sorted reachable state indices, hop distance per state with -1
    for unreachable, discovering pair per state with -1 at y0 and
    unreachable states).  Neighbors are scanned in canonical pair order, so
    the discovery tree is deterministic.
    """
    n = graph.n_states
    dist = np.full(n, -1, dtype=int)
    pred_pair = np.full(n, -1, dtype=int)
    dist[y0] = 0
    queue = deque([int(y0)])
    while queue:
        y = queue.popleft()
        for g in graph.pairs_of_state(y):
            z = int(graph.pair_succ[g])
            if dist[z] < 0:
                dist[z] = dist[y] + 1
                pred_pair[z] = g
                queue.append(z)
    return np.flatnonzero(dist >= 0), dist, pred_pair


def v_per(graph: Graph, y0: int) -> VPerResult:
    """Minimum mean cost over cycles reachable from y0, with a witness.

    Karp's table over the reachable subgraph gives the optimal mean; the
    witness cycle is recovered from the predecessor chain of the length-n
    walk (every cycle inside such an extremal walk has the optimal mean),
    and a shortest admissible path provides the prefix.  The returned value
    is the exact mean of the witness cycle.
    """
    reach, dist, pred_pair = reachable_states(graph, y0)
    n_r = reach.size
    local = {int(s): i for i, s in enumerate(reach)}

    # Cheapest action per (source, target), first such pair winning ties.
    edge_best: dict[tuple[int, int], int] = {}
    for g in range(graph.n_pairs):
        s = int(graph.pair_state[g])
        if dist[s] < 0:
            continue
        key = (local[s], local[int(graph.pair_succ[g])])
        if key not in edge_best or graph.pair_cost[g] < graph.pair_cost[edge_best[key]]:
            edge_best[key] = g
    edges = sorted(edge_best.items())  # ((u, v), pair), lexicographic

    D = np.full((n_r + 1, n_r), np.inf)
    pred = np.full((n_r + 1, n_r), -1, dtype=int)
    D[0, local[int(y0)]] = 0.0
    for k in range(1, n_r + 1):
        for (u, v), g in edges:
            cand = D[k - 1, u] + graph.pair_cost[g]
            if cand < D[k, v]:
                D[k, v] = cand
                pred[k, v] = g

    best_v = -1
    best_val = np.inf
    for v in range(n_r):
        if not np.isfinite(D[n_r, v]):
            continue
        finite = np.flatnonzero(np.isfinite(D[:n_r, v]))
        ratios = (D[n_r, v] - D[finite, v]) / (n_r - finite)
        val = float(ratios.max())
        if val < best_val:
            best_val = val
            best_v = v
    if best_v < 0:  # cannot happen: some length-n_r walk exists under viability
        raise RuntimeError("no cycle reachable; graph violates viability")

    # Walk the predecessor chain of the extremal length-n_r walk and cut at
    # the first repeated vertex.
    verts = np.empty(n_r + 1, dtype=int)
    walk_pairs = np.empty(n_r + 1, dtype=int)
    verts[n_r] = best_v
    for k in range(n_r, 0, -1):
        g = int(pred[k, verts[k]])
        walk_pairs[k] = g
        verts[k - 1] = local[int(graph.pair_state[g])]
    seen: dict[int, int] = {}
    i = j = -1
    for idx in range(n_r + 1):
        v = int(verts[idx])
        if v in seen:
            i, j = seen[v], idx
            break
        seen[v] = idx
    cycle = [int(walk_pairs[k]) for k in range(i + 1, j + 1)]

    # Rotate the cycle to start at its state closest to y0, then attach the
    # breadth-first prefix.
    cycle_states = [int(graph.pair_state[g]) for g in cycle]
    start_pos = min(range(len(cycle)), key=lambda p: (dist[cycle_states[p]], cycle_states[p]))
    cycle = cycle[start_pos:] + cycle[:start_pos]
    start_state = int(graph.pair_state[cycle[0]])
    prefix: list[int] = []
    z = start_state
    while z != y0:
        g = int(pred_pair[z])
        prefix.append(g)
        z = int(graph.pair_state[g])
    prefix.reverse()

    process = PeriodicProcess(
        graph=graph,
        prefix_pairs=np.array(prefix, dtype=int),
        cycle_pairs=np.array(cycle, dtype=int),
    )
    value = process.mean_cycle_cost
    if abs(value - best_val) > 1e-6 * (1.0 + abs(best_val)):
        raise RuntimeError(
            f"cycle recovery drifted: table mean {best_val}, witness mean {value}"
        )
    return VPerResult(value=value, process=process)


def pair_from_process(process: PeriodicProcess) -> PrimalPair:
    """Explicit feasible point of the start-constrained measure program
    built from a periodic process.

    gamma spreads uniformly over the cycle pairs.  The transfer flow puts
    weight 1 on each prefix pair and (p - 1 - j) / p on the j-th cycle
    pair, which routes one unit of mass from the start state to gamma's
    marginal; the per-state balance then telescopes to zero.
    """
    graph = process.graph
    p = process.period
    gamma_w = np.zeros(graph.n_pairs)
    np.add.at(gamma_w, process.cycle_pairs, 1.0 / p)
    xi_w = np.zeros(graph.n_pairs)
    np.add.at(xi_w, process.prefix_pairs, 1.0)
    np.add.at(xi_w, process.cycle_pairs, (p - 1.0 - np.arange(p)) / p)
    return PrimalPair(
        gamma=OccupationalMeasure(graph=graph, weights=gamma_w),
        xi=FlowMeasure(graph=graph, weights=xi_w),
    )


def pair_residuals(pair: PrimalPair, y0: int) -> dict[str, float]:
    """Feasibility residuals of a (gamma, xi) point: stationarity of gamma
    and the per-state start-transfer balance."""
    balance = (
        -state_marginal(pair.gamma)
        + state_inflow(pair.xi)
        - state_marginal(pair.xi)
    )
    balance[y0] += 1.0
    return {
        "stationarity": stationarity_residual(pair.gamma),
        "transfer_balance": float(np.max(np.abs(balance))),
    }


def project_to_W(measure: OccupationalMeasure, basis: MetricBasis) -> ProjectionResult:
    """Distance from a measure to the stationary polytope, in the basis
    metric, together with a nearest stationary measure.

    Linearized as a program over (gamma, per-function gaps e_j >= 0): each
    pairing difference is boxed by e_j from both sides and the weighted sum
    of gaps is minimized.
    """
    graph = measure.graph
    n, P = graph.n_states, graph.n_pairs
    J = basis.size
    marg, inflow = _incidence(graph)
    target = basis.matrix @ measure.weights
    n_vars = P + J + 2 * J  # gamma, gaps, two slack blocks
    rows = 1 + n + 2 * J
    A = np.zeros((rows, n_vars))
    b = np.zeros(rows)
    A[0, :P] = 1.0
    b[0] = 1.0
    A[1 : n + 1, :P] = inflow - marg
    base = n + 1
    jj = np.arange(J)
    A[base + jj, :P] = basis.matrix
    A[base + jj, P + jj] = -1.0
    A[base + jj, P + J + jj] = 1.0
    b[base + jj] = target
    base = n + 1 + J
    A[base + jj, :P] = -basis.matrix
    A[base + jj, P + jj] = -1.0
    A[base + jj, P + 2 * J + jj] = 1.0
    b[base + jj] = -target
    c = np.zeros(n_vars)
    c[P : P + J] = basis.weights
    lp = simplex.LinearProgram(c=c, A=A, b=b)
    sol = simplex.solve(lp)
    if sol.status != "optimal":
        raise PrimalInfeasible(f"projection program returned {sol.status}")
    return ProjectionResult(
        distance=float(sol.objective),
        nearest=OccupationalMeasure(graph=graph, weights=sol.x[:P]),
        iterations=sol.iterations,
    )
