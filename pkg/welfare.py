"""
Social optimum and non-atomic (Wardrop) equilibrium on LB networks.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from config import (
    DESCENT_MAX_ITER, DESCENT_STARTS, DESCENT_STEP_FRACTION, EPS_FP, EPS_W, FLOW_TOL,
    OPT_IMPROVEMENT_TOL, SEED, WARDROP_MAX_ROUNDS,
)
from errors import ConsistencyError
from game import local_flow_costs, response_breakpoints
from network import FlowProfile
from piecewise import minimize_piecewise_quadratic

logger = logging.getLogger(__name__)

_ARMIJO = 1e-4
_MIN_STEP = 1e-20


# ── Social optimum ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DescentSummary:
    starts: int
    best_total_cost: float
    max_deviation: float
    iterations: tuple


@dataclass(frozen=True, eq=False)
class SocialOutcome:
    flows: FlowProfile
    total_cost: float
    per_player: np.ndarray
    method: str = "closed_form"
    flows_unique: bool = True
    descent: DescentSummary = None

    def to_record(self):
        record = {
            "method": self.method,
            "total_cost": self.total_cost,
            "per_player": np.asarray(self.per_player).tolist(),
            "flows_unique": self.flows_unique,
            "link_flows": self.flows.x.tolist(),
        }
        if self.descent is not None:
            record["descent"] = {
                "starts": self.descent.starts,
                "best_total_cost": self.descent.best_total_cost,
                "max_deviation": self.descent.max_deviation,
            }
        return record


def path_total_cost(net, paths):
    """Summed player cost of an n x n path-flow matrix."""
    loads = paths.sum(axis=0)
    cross = paths[~np.eye(net.n, dtype=bool)]
    return float(loads @ np.atleast_1d(net.local_latency(loads))
                 + cross @ np.atleast_1d(net.cross_latency(cross)))


def path_marginal_costs(net, paths):
    """Gradient of path_total_cost; right derivatives at latency kinks."""
    loads = paths.sum(axis=0)
    local_mc = net.local_latency(loads) + loads * net.local_latency.slope(loads)
    cross = np.maximum(paths, 0.0)
    cross_mc = net.cross_latency(cross) + cross * net.cross_latency.slope(cross)
    grad = cross_mc + local_mc[None, :]
    np.fill_diagonal(grad, local_mc)
    return grad


def project_rows_to_simplex(v, total):
    """Euclidean projection of each row onto {x >= 0, sum(x) = total} (sort method)."""
    u = np.sort(v, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - total
    ind = np.arange(1, v.shape[1] + 1)
    cond = u - css / ind > 0
    rho = v.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(v.shape[0]), rho] / (rho + 1)
    return np.maximum(v - theta[:, None], 0.0)


def projected_descent(net, paths, max_iter=DESCENT_MAX_ITER):
    """Projected gradient descent on the summed cost over the path polytope.

    Backtracking halves the step from 0.1*r (reset to at most twice the
    last accepted step) until the Armijo condition holds.
    """
    top = DESCENT_STEP_FRACTION * net.r
    step = top
    cost = path_total_cost(net, paths)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        grad = path_marginal_costs(net, paths)
        while True:
            candidate = project_rows_to_simplex(paths - step * grad, net.r)
            diff = candidate - paths
            new_cost = path_total_cost(net, candidate)
            if new_cost <= cost + _ARMIJO * np.sum(grad * diff) or step < _MIN_STEP:
                break
            step *= 0.5
        moved = np.max(np.abs(diff))
        if new_cost <= cost:
            paths, cost = candidate, new_cost
        if moved < FLOW_TOL or step < _MIN_STEP:
            break
        step = min(top, 2 * step)
    return paths, cost, iterations


def _flows_unique(net):
    # zero cross cost at zero flow lets players swap flows without changing loads
    return not (net.cross_latency(0.0) == 0 and net.cross_latency.slope(0.0) == 0)


def social_optimum(net, verify=True, starts=DESCENT_STARTS, seed=SEED):
    """Pure-local routing, each player paying r*T_local(r).

    Identical convex local links carry a fixed total n*r, so equal loads with
    no cross flow minimize the sum. With ``verify`` a projected-descent run
    from ``starts`` random feasible points checks this; if descent beats the
    pure-local cost by more than 1e-8 the descent result is returned, tagged
    ``numeric``.
    """
    local = np.full(net.n, net.r)
    per_player = local_flow_costs(net, local)
    outcome = SocialOutcome(
        flows=FlowProfile.from_local_flows(net, local),
        total_cost=float(per_player.sum()),
        per_player=per_player,
        flows_unique=_flows_unique(net),
    )
    if not outcome.flows_unique:
        logger.info("cross links are free at zero flow; optimal flows are not unique")
    if not verify:
        return outcome

    rng = np.random.default_rng(seed)
    pure_local = net.r * np.eye(net.n)
    best_paths, best_cost = None, np.inf
    deviations, iterations = [], []
    for _ in range(starts):
        start = net.r * rng.dirichlet(np.ones(net.n), size=net.n)
        paths, cost, its = projected_descent(net, start)
        deviations.append(float(np.max(np.abs(paths - pure_local))))
        iterations.append(its)
        if cost < best_cost:
            best_paths, best_cost = paths, cost
    summary = DescentSummary(starts, best_cost, max(deviations), tuple(iterations))
    logger.info("descent verifier: best %.12g vs pure-local %.12g", best_cost, outcome.total_cost)

    if best_cost < outcome.total_cost - OPT_IMPROVEMENT_TOL:
        logger.warning("descent found a cheaper routing than pure-local; reporting it")
        profile = FlowProfile.from_paths(net, best_paths)
        costs = profile.x @ net.link_latencies(profile.link_loads())
        return SocialOutcome(profile, float(costs.sum()), costs, "numeric", outcome.flows_unique, summary)
    return SocialOutcome(outcome.flows, outcome.total_cost, per_player, "closed_form",
                         outcome.flows_unique, summary)


# ── Wardrop equilibrium ──────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class WardropOutcome:
    path_flows: np.ndarray
    min_latency: np.ndarray
    per_source_cost: np.ndarray
    rounds: int = 0
    path_latencies: np.ndarray = field(default=None, repr=False)

    @property
    def total_cost(self):
        return float(np.sum(self.per_source_cost))

    def to_record(self):
        return {
            "path_flows": self.path_flows.tolist(),
            "min_latency": self.min_latency.tolist(),
            "per_source_cost": self.per_source_cost.tolist(),
            "total_cost": self.total_cost,
            "rounds": self.rounds,
        }


def beckmann_potential(net, local):
    """sum over links of the integral of T_l from 0 to the link flow; shape (...,)."""
    p = np.asarray(local, dtype=float)
    y = (net.r - p) / (net.n - 1)
    load = p + y.sum(axis=-1, keepdims=True) - y
    return (np.asarray(net.local_latency.integral(load)).sum(axis=-1)
            + (net.n - 1) * np.asarray(net.cross_latency.integral(y)).sum(axis=-1))


def path_latencies(net, local):
    """n x n: [i, i] local path latency of source i, [i, j] via s_j."""
    y = (net.r - local) / (net.n - 1)
    load = local + y.sum() - y
    t_loc = np.atleast_1d(net.local_latency(load))
    lat = np.atleast_1d(net.cross_latency(y))[:, None] + t_loc[None, :]
    np.fill_diagonal(lat, t_loc)
    return lat


def wardrop_equilibrium(net, eps_w=EPS_W, eps_fp=EPS_FP, max_rounds=WARDROP_MAX_ROUNDS):
    """Non-atomic equilibrium by exact coordinate descent on the Beckmann potential.

    Each source's diversion is one scalar (its residual splits equally over
    its cross links); the 1-D potential is piecewise quadratic and minimized
    exactly. The variational inequality is checked afterwards and a
    violation raises ConsistencyError.
    """
    local = np.full(net.n, net.r)
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        change = 0.0
        for i in range(net.n):
            def f(points, i=i):
                states = np.repeat(local[None, :], len(points), axis=0)
                states[:, i] = points
                return beckmann_potential(net, states)
            best = minimize_piecewise_quadratic(f, 0.0, net.r, response_breakpoints(net, local, i))
            change = max(change, abs(best.argmin - local[i]))
            local[i] = best.argmin
        if change < eps_fp:
            break
    else:
        logger.warning("Wardrop coordinate descent hit %d rounds", max_rounds)

    y = (net.r - local) / (net.n - 1)
    paths = np.tile(y[:, None], (1, net.n))
    np.fill_diagonal(paths, local)
    lat = path_latencies(net, local)
    used = paths > FLOW_TOL
    min_latency = lat.min(axis=1)
    for i in range(net.n):
        worst_used = lat[i][used[i]].max()
        if worst_used - min_latency[i] > eps_w:
            raise ConsistencyError(
                f"Wardrop check failed for source {i + 1}: used path latency {worst_used:.12g} "
                f"exceeds minimum {min_latency[i]:.12g} by more than {eps_w}"
            )
    logger.info("Wardrop equilibrium after %d rounds: local flows %s", rounds, local)
    return WardropOutcome(paths, min_latency, local_flow_costs(net, local), rounds, lat)
