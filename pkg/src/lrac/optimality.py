"""Optimality checks for admissible processes against dual certificates.

A certificate (mu, psi, eta) feasible for the lower-bound program proves
that no process started at y0 beats mu on long-run average.  A process
matches that bound exactly when two pointwise conditions hold along it:
the certificate inequality is tight at every step,

    k(y(t), u(t)) - psi(y(t)) + eta(f(y(t), u(t))) - eta(y(t))
        = V(y0) - psi(y0),

and psi is flat along the visited states, psi(y(t)) = psi(y0).  Tightness
at every step is sufficient for optimality of the process; for processes
that are periodic from time zero it is also necessary once the
certificate itself is optimal.  The eta potential doubles as a relative
value function: greedy minimization of k + eta(f) recovers an optimal
feedback, and eta's drift accounts exactly for the gap between finite
horizon averages and the limit value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dp import PeriodicProcess, Trajectory, _segment_argmin_pair, _segment_min
from .problem import Graph
from .programs import DualCertificate

__all__ = [
    "InfeasibleCertificate",
    "NecessityReport",
    "certificate_residuals",
    "check_sufficient",
    "check_necessary_periodic",
    "extract_feedback",
    "cost_gap_identity",
]


class InfeasibleCertificate(ValueError):
    """The supplied (mu, psi, eta) violates the lower-bound constraints."""


def _value_at(V, y0: int) -> float:
    """Read V(y0) from a value function, a per-state array, or a scalar."""
    if np.isscalar(V):
        return float(V)
    if callable(V):
        return float(V(y0))
    return float(np.asarray(V, dtype=float)[y0])


def certificate_residuals(
    graph: Graph, y0: int, cert: DualCertificate, theta: float = 0.0
) -> dict[str, float]:
    """Worst constraint violations of a certificate, as nonnegative reals.

    pair_slack: how far k + psi(y0) - psi(y) + eta(f) - eta(y) - mu dips
    below zero anywhere on the graph.  monotone_slack: how far
    psi(f) - psi(y) dips below -theta.
    """
    psi, eta = cert.psi, cert.eta
    slack = (
        graph.pair_cost
        + psi[y0]
        - psi[graph.pair_state]
        + eta[graph.pair_succ]
        - eta[graph.pair_state]
        - cert.mu
    )
    mono = psi[graph.pair_succ] - psi[graph.pair_state] + theta
    return {
        "pair_slack": float(max(0.0, -np.min(slack))),
        "monotone_slack": float(max(0.0, -np.min(mono))),
    }


def _condition_residuals(
    graph: Graph, pairs: np.ndarray, y0: int, cert: DualCertificate, value: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-step residuals of the two optimality conditions along a pair
    sequence: tightness of the certificate inequality against V(y0), and
    flatness of psi."""
    psi, eta = cert.psi, cert.eta
    s = graph.pair_state[pairs]
    t = graph.pair_succ[pairs]
    tight = np.abs(
        graph.pair_cost[pairs] - psi[s] + eta[t] - eta[s] - (value - psi[y0])
    )
    flat = np.abs(psi[s] - psi[y0])
    return tight, flat


def check_sufficient(
    process: Trajectory,
    cert: DualCertificate,
    V,
    y0: int,
    tol: float = 1e-7,
) -> bool:
    """Whether the recorded steps of a trajectory satisfy both optimality
    conditions for the given certificate and value.

    True means the process attains the long-run average V(y0); tightness
    at every step makes the running cost telescope against eta.  Raises
    InfeasibleCertificate when the certificate itself violates the
    lower-bound constraints beyond tol, since the conditions certify
    nothing in that case.
    """
    graph = process.graph
    if int(process.states[0]) != int(y0):
        raise ValueError("trajectory does not start at y0")
    feas = certificate_residuals(graph, y0, cert)
    worst = max(feas["pair_slack"], feas["monotone_slack"])
    if worst > tol:
        raise InfeasibleCertificate(
            f"certificate violates the constraints by {worst:.3e}"
        )
    value = _value_at(V, y0)
    tight, flat = _condition_residuals(graph, process.pairs, y0, cert, value)
    return bool(tight.max() <= tol and flat.max() <= tol)


@dataclass(frozen=True)
class NecessityReport:
    """Outcome of testing the necessary conditions on a periodic process."""

    mean_cycle_cost: float
    value: float
    process_optimal: bool
    certificate_optimal: bool
    pure_periodic: bool
    conditions_hold: bool
    inconsistent: bool
    tight_residuals: tuple[float, ...]
    flat_residuals: tuple[float, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "mean_cycle_cost": self.mean_cycle_cost,
                "value": self.value,
                "process_optimal": self.process_optimal,
                "certificate_optimal": self.certificate_optimal,
                "pure_periodic": self.pure_periodic,
                "conditions_hold": self.conditions_hold,
                "inconsistent": self.inconsistent,
                "tight_residuals": list(self.tight_residuals),
                "flat_residuals": list(self.flat_residuals),
            }
        )


def check_necessary_periodic(
    process: PeriodicProcess,
    cert: DualCertificate,
    V,
    y0: int,
    tol: float = 1e-7,
) -> NecessityReport:
    """Test the necessary optimality conditions on a periodic process.

    The report records the mean cycle cost, whether it matches V(y0), and
    the per-step condition residuals over the prefix and one cycle.  For a
    process periodic from time zero, optimality of both the process and
    the certificate forces the conditions to hold; the inconsistent flag
    marks a violation of exactly that implication, so it stays False when
    the process needs a transient prefix or either side is suboptimal.
    """
    graph = process.graph
    value = _value_at(V, y0)
    mean = process.mean_cycle_cost
    pairs = np.concatenate([process.prefix_pairs, process.cycle_pairs])
    tight, flat = _condition_residuals(graph, pairs, y0, cert, value)
    conditions_hold = bool(tight.max() <= tol and flat.max() <= tol)
    process_optimal = abs(mean - value) <= tol
    certificate_optimal = abs(cert.mu - value) <= tol
    pure = process.prefix_pairs.size == 0 and int(process.start_state) == int(y0)
    return NecessityReport(
        mean_cycle_cost=float(mean),
        value=value,
        process_optimal=process_optimal,
        certificate_optimal=certificate_optimal,
        pure_periodic=pure,
        conditions_hold=conditions_hold,
        inconsistent=bool(
            process_optimal and certificate_optimal and pure and not conditions_hold
        ),
        tight_residuals=tuple(float(r) for r in tight),
        flat_residuals=tuple(float(r) for r in flat),
    )


def extract_feedback(graph: Graph, eta: np.ndarray) -> np.ndarray:
    """Greedy feedback from a relative value function: per state, the
    lowest-index action minimizing k(y, u) + eta(f(y, u))."""
    eta = np.asarray(getattr(eta, "values", eta), dtype=float)
    if eta.shape != (graph.n_states,):
        raise ValueError("eta must assign a value to every state")
    lookahead = graph.pair_cost + eta[graph.pair_succ]
    best_pairs = _segment_argmin_pair(lookahead, _segment_min(lookahead, graph), graph)
    return graph.pair_action[best_pairs]


def cost_gap_identity(
    process: Trajectory, eta: np.ndarray, V, y0: int, T: int
) -> float:
    """Residual of the drift identity linking finite averages to the limit:

        (1/T) (eta(y(T)) - eta(y0))  vs  V(y0) - (1/T) sum of costs.

    Zero (up to tolerance) whenever the optimality conditions hold along
    the first T steps.
    """
    if not 0 < T <= process.pairs.size:
        raise ValueError("T must lie within the recorded horizon")
    if int(process.states[0]) != int(y0):
        raise ValueError("trajectory does not start at y0")
    eta = np.asarray(getattr(eta, "values", eta), dtype=float)
    value = _value_at(V, y0)
    drift = (eta[process.states[T]] - eta[y0]) / T
    avg = float(np.sum(process.costs[:T])) / T
    return float(abs(drift - (value - avg)))
