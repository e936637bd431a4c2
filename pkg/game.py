"""
Atomic splittable routing game on LB networks.

Player costs (actual and perceived under a degree-of-cooperation matrix),
exact best responses, round-robin best-response dynamics, the closed-form
symmetric selfish equilibrium, equilibrium verification, a brute-force
grid oracle and the load-taker altruistic profile.

Solvers work on the reduced state: the vector of local flows, with each
player's residual r - p_i split equally over its n - 1 cross links.
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from config import (
    CASCADE_PERIODS, CASCADE_RTOL, DOC_ROW_TOL, EPS_EQ, EPS_FP, EPS_TIE, FLOW_TOL, GAMMA_TOL, GRID_MERGE_TOL,
    MAX_ITER, ORACLE_MAX_PLAYERS, ORACLE_MAX_PROFILES, ORACLE_VERIFY_LIMIT, ROUNDS_PER_DELTA, SolverSettings,
)
from errors import ConfigurationError, DocMatrixError, ParameterRegimeError, ProfileError
from network import FlowProfile, regime_parameters, require_feasible
from piecewise import minimize_piecewise_quadratic

logger = logging.getLogger(__name__)


# ── Degree of cooperation ────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class DocMatrix:
    """alpha[i][k]: weight player i puts on player k's cost. Rows on the simplex."""

    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        if alpha.ndim != 2 or alpha.shape[0] != alpha.shape[1]:
            raise DocMatrixError(f"degree-of-cooperation matrix must be square, got shape {alpha.shape}")
        for i, row in enumerate(alpha):
            if np.any(row < -DOC_ROW_TOL):
                raise DocMatrixError(f"row {i + 1} has a negative weight: {row.tolist()}")
            if abs(row.sum() - 1.0) > DOC_ROW_TOL:
                raise DocMatrixError(f"row {i + 1} sums to {row.sum():.12g}, not 1")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self):
        return self.alpha.shape[0]

    def row(self, i):
        return self.alpha[i]

    def beta(self, i):
        """Total weight player i puts on the others."""
        return 1.0 - self.alpha[i, i]

    @property
    def is_selfish(self):
        return np.array_equal(self.alpha, np.eye(self.n))

    @classmethod
    def selfish(cls, n):
        return cls(np.eye(n))

    @classmethod
    def altruistic(cls, n, player, beta):
        """Selfish except ``player``: (1 - beta) on itself, beta spread evenly on the others."""
        if not 0 <= beta <= 1:
            raise DocMatrixError(f"beta must lie in [0, 1], got {beta}")
        alpha = np.eye(n)
        alpha[player] = beta / (n - 1)
        alpha[player, player] = 1.0 - beta
        return cls(alpha)

    @classmethod
    def equally_cooperative(cls, n):
        return cls(np.full((n, n), 1.0 / n))

    @classmethod
    def from_rows(cls, rows):
        return cls(np.asarray(rows, dtype=float))

    def __eq__(self, other):
        return isinstance(other, DocMatrix) and np.array_equal(self.alpha, other.alpha)

    __hash__ = None


# ── Costs ────────────────────────────────────────────────────────────────────

def local_flow_costs(net, local):
    """Actual cost of every player on the reduced state.

    ``local`` has shape (..., n); the result has the same shape. With
    y = (r - p)/(n - 1) and Y = sum(y), the load on l_k is p_k + Y - y_k and
    J_k = p_k T(X_k) + (n - 1) y_k T_c(y_k) + y_k (sum_j T(X_j) - T(X_k)).
    """
    p = np.asarray(local, dtype=float)
    y = (net.r - p) / (net.n - 1)
    load = p + y.sum(axis=-1, keepdims=True) - y
    t_loc = np.asarray(net.local_latency(load))
    t_cross = np.asarray(net.cross_latency(y))
    others = t_loc.sum(axis=-1, keepdims=True) - t_loc
    return p * t_loc + (net.n - 1) * y * t_cross + y * others


def player_costs(net, x):
    """Actual cost vector for a feasible profile: J_i = sum_l x_il T_l(x_l)."""
    require_feasible(net, x)
    return x.x @ net.link_latencies(x.link_loads())


def player_cost(net, x, i):
    return float(player_costs(net, x)[i])


def perceived_cost(net, x, doc, i):
    """sum_k alpha[i][k] * J_k(x)."""
    _check_doc(net, doc)
    return float(doc.row(i) @ player_costs(net, x))


def perceived_costs(net, x, doc):
    _check_doc(net, doc)
    return doc.alpha @ player_costs(net, x)


def _check_doc(net, doc):
    if doc.n != net.n:
        raise DocMatrixError(f"degree-of-cooperation matrix is {doc.n}x{doc.n} for an n={net.n} network")


def reduced_state(net, x):
    """Local-flow vector of a profile, a FlowProfile or an array of local flows."""
    if isinstance(x, FlowProfile):
        require_feasible(net, x)
        paths = net.path_flows(x)
        for i in range(net.n):
            cross = np.delete(paths[i], i)
            if np.ptp(cross) > FLOW_TOL:
                raise ProfileError(
                    f"player {i + 1} splits its cross flow unevenly; the LB solvers need equal splits"
                )
        return net.local_flows(x)
    local = np.asarray(x, dtype=float).copy()
    if local.shape != (net.n,):
        raise ProfileError(f"expected {net.n} local flows, got shape {local.shape}")
    if np.any(local < -FLOW_TOL) or np.any(local > net.r + FLOW_TOL):
        raise ProfileError(f"local flows must lie in [0, {net.r:.12g}], got {local.tolist()}")
    return np.clip(local, 0.0, net.r)


# ── Best response ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class BestResponse:
    player: int
    local_flow: float
    perceived_cost: float
    row: np.ndarray = field(repr=False, compare=False)
    ties: tuple = ()


def response_breakpoints(net, local, i):
    """Local flows of player i where some affected link crosses a kink.

    Moving p_i shifts the load on l_i with slope 1, the load on every other
    l_j and the flow on i's own cross links with slope -1/(n - 1).
    """
    n, r = net.n, net.r
    y = (r - local) / (n - 1)
    total = y.sum()
    points = []
    for k in net.local_latency.kink_points():
        points.append(k - (total - y[i]))
        for j in range(n):
            if j != i:
                without_i = local[j] + total - y[j] - y[i]
                points.append(r - (n - 1) * (k - without_i))
    for k in net.cross_latency.kink_points():
        points.append(r - (n - 1) * k)
    return points


def _objective(net, local, i, weights):
    def f(points):
        states = np.repeat(local[None, :], len(points), axis=0)
        states[:, i] = points
        return local_flow_costs(net, states) @ weights
    return f


def _respond(net, doc, i, local, eps_tie):
    f = _objective(net, local, i, doc.row(i))
    return minimize_piecewise_quadratic(f, 0.0, net.r, response_breakpoints(net, local, i), eps_tie)


def best_response(net, doc, i, opponents, eps_tie=EPS_TIE):
    """Exact minimizer of player i's perceived cost over its local flow in [0, r].

    ``opponents`` is a FlowProfile or a vector of local flows; entry i is
    ignored. Ties within ``eps_tie`` go to the largest local flow and are
    listed in ``ties``.
    """
    _check_doc(net, doc)
    local = reduced_state(net, opponents)
    best = _respond(net, doc, i, local, eps_tie)
    local[i] = best.argmin
    row = FlowProfile.from_local_flows(net, local).x[i].copy()
    return BestResponse(i, best.argmin, best.value, row, best.ties)


def stationary_local_flow(net, opponent_local, player=0):
    """Interior solution of the selfish two-player first-order condition.

    Valid while both local links are on their ascending segment
    T(x) = g x + h and the cross link is affine a x + b:
    p = [2(a + g2) r + g2 q + b + h2 - h1 - g1 (r - q)] / (2 (g1 + g2 + a)).
    Both local links share one latency here, so g1 = g2 and h1 = h2.
    """
    if net.n != 2:
        raise ConfigurationError("the stationary-point formula covers two-player networks")
    g = net.local_latency.gradient
    a, b = net.cross_latency.a, net.cross_latency.b
    q, r = float(opponent_local), net.r
    return (2 * (a + g) * r + g * q + b - g * (r - q)) / (2 * (2 * g + a))


# ── Results ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class TraceRound:
    round: int
    local_flows: tuple
    actual_costs: tuple


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    flows: FlowProfile
    actual_costs: np.ndarray
    perceived_costs: np.ndarray
    converged: bool
    iterations: int
    method: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def local_flows(self):
        return np.array([self.flows.x[i, i] for i in range(len(self.actual_costs))])

    @property
    def total_cost(self):
        return float(np.sum(self.actual_costs))

    def to_record(self):
        return {
            "method": self.method,
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "local_flows": self.local_flows.tolist(),
            "actual_costs": np.asarray(self.actual_costs).tolist(),
            "perceived_costs": np.asarray(self.perceived_costs).tolist(),
            "total_cost": self.total_cost,
            **self.diagnostics,
        }


def _result(net, doc, local, converged, iterations, method, **diagnostics):
    actual = local_flow_costs(net, np.asarray(local, dtype=float))
    return EquilibriumResult(
        flows=FlowProfile.from_local_flows(net, local),
        actual_costs=actual,
        perceived_costs=doc.alpha @ actual,
        converged=converged,
        iterations=iterations,
        method=method,
        diagnostics=diagnostics,
    )


# ── Dynamics ─────────────────────────────────────────────────────────────────

def round_budget(net):
    """Default round cap. Near the elbow knee a best response moves about
    delta, so reaching an equilibrium from pure-local routing takes on the
    order of r/delta rounds."""
    delta = getattr(net.local_latency, "delta", None)
    if not delta:
        return MAX_ITER
    return max(MAX_ITER, int(np.ceil(ROUNDS_PER_DELTA * net.r / delta)))


def _round(net, doc, local, order, eps_tie):
    """One round-robin pass from ``local``; returns (new local flows, largest move)."""
    local = local.copy()
    change = 0.0
    for i in order:
        new = _respond(net, doc, i, local, eps_tie).argmin
        change = max(change, abs(new - local[i]))
        local[i] = new
    return local, change


def _translates(net, doc, start, step, period, order, eps_tie):
    if start.min() < -FLOW_TOL or start.max() > net.r + FLOW_TOL:
        return False
    moved = start
    for _ in range(period):
        moved, _ = _round(net, doc, moved, order, eps_tie)
    return np.allclose(moved - start, step, rtol=CASCADE_RTOL, atol=FLOW_TOL)


def _cascade_jump(net, doc, local, step, period, order, eps_tie, budget):
    """Largest k <= budget such that ``period`` rounds from local + k*step
    still move the flows by exactly ``step``.

    Inside a cascade every block of rounds is the same translation, so the
    iterate after k blocks is local + k*step. Doubling, then bisection.
    """
    good, k = 0, 1
    while k <= budget and _translates(net, doc, local + k * step, step, period, order, eps_tie):
        good, k = k, 2 * k
    hi = min(k, budget + 1)
    while hi - good > 1:
        mid = (good + hi) // 2
        if _translates(net, doc, local + mid * step, step, period, order, eps_tie):
            good = mid
        else:
            hi = mid
    return good


def _repeating_step(history, eps_fp):
    """(step, period) when the last two blocks of rounds moved alike, else None."""
    for period in CASCADE_PERIODS:
        if len(history) < 2 * period + 1:
            continue
        step = history[-1] - history[-1 - period]
        before = history[-1 - period] - history[-1 - 2 * period]
        if np.max(np.abs(step)) >= eps_fp and np.allclose(step, before, rtol=CASCADE_RTOL, atol=FLOW_TOL):
            return step, period
    return None


def br_dynamics(net, doc, x0, max_iter=None, eps_fp=EPS_FP, order=None,
                eps_tie=EPS_TIE, keep_trace=True):
    """Round-robin best responses until a full round moves no flow by eps_fp.

    Returns (EquilibriumResult, trace). Round 0 of the trace is x0.
    ``max_iter=None`` uses ``round_budget(net)``. Non-convergence is
    reported through ``converged=False`` with the last iterate.

    Without a trace, a run of rounds that repeat the same translation (the
    delta-by-delta cascade down the elbow) is skipped in one jump; the
    skipped rounds still count toward ``iterations`` and the budget.
    """
    _check_doc(net, doc)
    order = SolverSettings(player_order=order).order_for(net.n)
    max_iter = round_budget(net) if max_iter is None else int(max_iter)
    local = reduced_state(net, x0)
    trace = []
    if keep_trace:
        trace.append(TraceRound(0, tuple(local), tuple(local_flow_costs(net, local))))

    history = deque([local], maxlen=2 * max(CASCADE_PERIODS) + 1)
    converged = False
    rounds = jumped = 0
    while rounds < max_iter:
        rounds += 1
        local, change = _round(net, doc, local, order, eps_tie)
        if keep_trace:
            trace.append(TraceRound(rounds, tuple(local), tuple(local_flow_costs(net, local))))
        logger.debug("round %d: local flows %s, max change %.3g", rounds, local, change)
        if change < eps_fp:
            converged = True
            break
        history.append(local)
        repeating = None if keep_trace else _repeating_step(history, eps_fp)
        if repeating is not None:
            step, period = repeating
            k = _cascade_jump(net, doc, local, step, period, order, eps_tie, (max_iter - rounds) // period)
            if k:
                local = local + k * step
                rounds += k * period
                jumped += k * period
                logger.debug("skipped %d cascade rounds to round %d", k * period, rounds)
            history.clear()
            history.append(local)

    if converged:
        logger.info("best-response dynamics converged after %d rounds (%d skipped)", rounds, jumped)
    else:
        logger.warning("best-response dynamics did not converge in %d rounds", max_iter)
    return _result(net, doc, local, converged, rounds, "br_dynamics", rounds_skipped=jumped), trace


# ── Closed form ──────────────────────────────────────────────────────────────

def selfish_ne_local_flow(net):
    """Symmetric selfish equilibrium local flow r/n + (n - 1) c / (n g), g = L/delta.

    Equals r/2 + zeta for two players, zeta = c delta / (2 L).
    """
    L, delta, c = regime_parameters(net)
    g = L / delta
    return net.r / net.n + (net.n - 1) * c / (net.n * g)


def zeta(net):
    L, delta, c = regime_parameters(net)
    return 0.5 * c * delta / L


def closed_form_selfish_ne(net):
    """Unique symmetric selfish equilibrium; cost r L + (r - p*) c per player."""
    p = selfish_ne_local_flow(net)
    result = _result(net, DocMatrix.selfish(net.n), np.full(net.n, p), True, 0, "closed_form",
                     zeta=zeta(net))
    return result


def closed_form_selfish_cost(net):
    L, _, c = regime_parameters(net)
    return net.r * L + (net.r - selfish_ne_local_flow(net)) * c


# ── Verification ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EquilibriumCheck:
    """Truthy when no player gains more than eps_eq by deviating."""

    passed: bool
    player: int = None
    deviation: float = None
    gain: float = 0.0
    gains: tuple = ()

    def __bool__(self):
        return self.passed


def verify_equilibrium(net, doc, x, eps_eq=EPS_EQ, eps_tie=EPS_TIE):
    """Check every player's exact best response against its current cost.

    On failure reports the first player (in index order) that can lower its
    perceived cost by more than eps_eq, with its best deviation and gain.
    """
    _check_doc(net, doc)
    local = reduced_state(net, x)
    current = local_flow_costs(net, local)
    gains = []
    failure = None
    for i in range(net.n):
        best = _respond(net, doc, i, local, eps_tie)
        gain = float(doc.row(i) @ current) - best.value
        gains.append(gain)
        if gain > eps_eq and failure is None:
            failure = (i, best.argmin, gain)
    if failure is None:
        return EquilibriumCheck(True, gains=tuple(gains))
    player, deviation, gain = failure
    logger.debug("player %d improves by %.3g moving to %.12g", player, gain, deviation)
    return EquilibriumCheck(False, player, deviation, gain, tuple(gains))


# ── Grid oracle ──────────────────────────────────────────────────────────────

def oracle_special_points(net):
    """Flows the oracle grid must contain exactly."""
    r = net.r
    points = [0.0, r, 0.5 * r]
    for k in net.local_latency.kink_points():
        points += [k, r - (net.n - 1) * (r - k)]
    delta = getattr(net.local_latency, "delta", None)
    if delta is not None:
        points += [r - delta, r - (net.n - 1) * delta]
    try:
        points.append(selfish_ne_local_flow(net))
    except ParameterRegimeError:
        pass
    return sorted(p for p in points if 0.0 <= p <= r)


def oracle_grid(net, grid_step):
    """Uniform grid on [0, r] merged with the special points."""
    r = net.r
    if not 0 < grid_step <= 0.25 * r:
        raise ConfigurationError(
            f"grid_step {grid_step} too coarse to place the special points; need 0 < grid_step <= r/4"
        )
    count = int(np.floor(r / grid_step + 1e-9))
    uniform = grid_step * np.arange(count + 1)
    specials = oracle_special_points(net)
    tagged = sorted([(float(u), False) for u in uniform] + [(s, True) for s in specials])
    merged = []
    for value, special in tagged:
        if merged and value - merged[-1][0] <= GRID_MERGE_TOL:
            if special and not merged[-1][1]:
                merged[-1] = (value, True)
            continue
        merged.append((value, special))
    grid = np.array([v for v, _ in merged])
    return grid


def _special_profiles(net):
    """Symmetric profiles at every special point plus each player's load-taker profile."""
    profiles = [np.full(net.n, p) for p in oracle_special_points(net)]
    if getattr(net.local_latency, "delta", None) is not None:
        try:
            profiles += [net.local_flows(load_taker_profile(net, i)) for i in range(net.n)]
        except ParameterRegimeError:
            pass
    return profiles


def _exact_regret(net, doc, local, eps_tie):
    """Largest perceived-cost gain any player gets from its exact best response."""
    return max(verify_equilibrium(net, doc, local, np.inf, eps_tie).gains)


def _least_regret_member(net, doc, points, screen, eps_tie):
    """Exact regret of the members with the smallest grid regret; returns (point, regret)."""
    best, best_regret = None, np.inf
    for k in np.argsort(screen, kind="stable")[:ORACLE_VERIFY_LIMIT]:
        regret = _exact_regret(net, doc, points[k], eps_tie)
        if regret < best_regret:
            best, best_regret = points[k], regret
    return best, best_regret


def grid_oracle_ne(net, doc, grid_step, eps_eq=EPS_EQ, eps_tie=EPS_TIE):
    """Brute-force equilibria on a local-flow grid (n <= 3).

    A grid profile survives the screen when no player can lower its perceived
    cost by more than eps_eq with a deviation on the grid. Grid-adjacent
    survivors form one group. A group is reported through the special
    profiles it contains that pass exact verification (symmetric special
    points, load-taker profiles); otherwise through its least-regret member,
    provided that member verifies exactly. Groups with no verified member are
    dropped. ``diagnostics['members']`` lists the whole group.
    """
    _check_doc(net, doc)
    if net.n > ORACLE_MAX_PLAYERS:
        raise ConfigurationError(f"grid oracle supports n <= {ORACLE_MAX_PLAYERS}, got n={net.n}")
    grid = oracle_grid(net, grid_step)
    size = len(grid) ** net.n
    if size > ORACLE_MAX_PROFILES:
        raise ConfigurationError(
            f"grid oracle would enumerate {size} profiles (limit {ORACLE_MAX_PROFILES}); raise grid_step"
        )
    logger.info("grid oracle: %d points per player, %d profiles", len(grid), size)

    mesh = np.stack(np.meshgrid(*([grid] * net.n), indexing="ij"), axis=-1)
    perceived = local_flow_costs(net, mesh) @ doc.alpha.T
    screen = np.zeros(mesh.shape[:-1])
    for i in range(net.n):
        own = perceived[..., i]
        screen = np.maximum(screen, own - own.min(axis=i, keepdims=True))
    indices = [tuple(int(v) for v in idx) for idx in np.argwhere(screen <= eps_eq)]

    adjacency = nx.Graph()
    adjacency.add_nodes_from(indices)
    members = set(indices)
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=net.n) if any(o)]
    for idx in indices:
        for o in offsets:
            other = tuple(a + b for a, b in zip(idx, o))
            if other in members:
                adjacency.add_edge(idx, other)

    specials = []
    for profile in _special_profiles(net):
        if any(np.allclose(profile, s, rtol=0, atol=FLOW_TOL) for s in specials):
            continue
        if verify_equilibrium(net, doc, profile, eps_eq, eps_tie):
            specials.append(profile)

    results, placed, dropped = [], [], 0
    for component in nx.connected_components(adjacency):
        group = sorted(component)
        points = np.array([grid[list(idx)] for idx in group])
        info = dict(grid_step=grid_step, cluster_size=len(points), members=[list(map(float, p)) for p in points])
        inside = [s for s in specials if np.any(np.all(np.abs(points - s) <= FLOW_TOL, axis=1))]
        if inside:
            placed += inside
            results += [_result(net, doc, s, True, 0, "grid_oracle", regret=_exact_regret(net, doc, s, eps_tie),
                                **info) for s in inside]
            continue
        rep, regret = _least_regret_member(net, doc, points, np.array([screen[idx] for idx in group]), eps_tie)
        if regret > eps_eq:
            dropped += 1
            continue
        results.append(_result(net, doc, rep, True, 0, "grid_oracle", regret=regret, **info))

    for s in specials:
        if not any(s is p for p in placed):
            results.append(_result(net, doc, s, True, 0, "grid_oracle", regret=_exact_regret(net, doc, s, eps_tie),
                                   grid_step=grid_step, cluster_size=1, members=[list(map(float, s))]))
    results.sort(key=lambda res: tuple(res.local_flows))
    logger.info("grid oracle found %d equilibria (%d grid profiles, %d groups failed exact verification)",
                len(results), len(indices), dropped)
    return results


# ── Altruism ─────────────────────────────────────────────────────────────────

def load_taker_profile(net, player):
    """Altruist at r; every other player at r - (n - 1) delta.

    The others' residual lands on the altruist's local link, leaving each of
    their own local links exactly at the knee.
    """
    delta = getattr(net.local_latency, "delta", None)
    if delta is None:
        raise ParameterRegimeError("local links Elbow{L, delta, r, offset}")
    local = np.full(net.n, net.r - (net.n - 1) * delta)
    local[player] = net.r
    if local.min() < 0:
        raise ParameterRegimeError("(n - 1) * delta <= r", f"n={net.n}, delta={delta:.12g}")
    return FlowProfile.from_local_flows(net, local)


def load_taker_verified(net, player, beta, eps_eq=EPS_EQ):
    doc = DocMatrix.altruistic(net.n, player, beta)
    return verify_equilibrium(net, doc, load_taker_profile(net, player), eps_eq)


def gamma_threshold(net, player=0, eps_eq=EPS_EQ, tol=GAMMA_TOL):
    """Smallest beta (to ``tol``) at which the load-taker profile verifies.

    Returns None when it fails even for the fully altruistic beta = 1.
    """
    if not load_taker_verified(net, player, 1.0, eps_eq):
        return None
    lo, hi = 0.0, 1.0
    if load_taker_verified(net, player, lo, eps_eq):
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if load_taker_verified(net, player, mid, eps_eq):
            hi = mid
        else:
            lo = mid
    logger.debug("load-taker threshold for player %d in (%.9f, %.9f]", player, lo, hi)
    return hi


def gamma_threshold_formula(net):
    """First-order threshold for the load-taker profile on regime networks.

    (1 - beta)(r g + n L - c) = beta (r g - n L)/(n - 1), g = L/delta.
    """
    L, delta, c = regime_parameters(net)
    g = L / delta
    own = net.r * g + net.n * L - c
    others = (net.r * g - net.n * L) / (net.n - 1)
    return own / (own + others)


# ── Uniqueness support ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class MonotonicityReport:
    samples: int
    total_flow_increasing: bool
    own_flow_increasing: bool
    own_cost_convex: bool


def marginal_cost_monotonicity(net, samples=200, seed=0):
    """Numerical check that a player's marginal link cost x T'(x) + T(x) is
    strictly increasing in total and own flow on the ascending local segment,
    and that each player's cost is convex in its own local flow.
    """
    rng = np.random.default_rng(seed)
    lat = net.local_latency
    onset = max(lat.kink_points(), default=0.0)
    top = onset + 2 * net.r

    def marginal(own, total):
        return np.asarray(lat(total)) + own * np.asarray(lat.slope(total))

    own = rng.uniform(0.0, net.r, samples)
    total = rng.uniform(onset, top, samples)
    bump = rng.uniform(1e-6, 1e-2, samples) * net.r
    total_ok = np.all(marginal(own, total + bump) > marginal(own, total))
    own_ok = np.all(marginal(own + bump, total + bump) > marginal(own, total))

    convex = True
    doc = DocMatrix.selfish(net.n)
    for _ in range(max(1, samples // 20)):
        local = rng.uniform(0.0, net.r, net.n)
        i = int(rng.integers(net.n))
        f = _objective(net, local, i, doc.row(i))
        a, b = np.sort(rng.uniform(0.0, net.r, 2))
        t = rng.uniform()
        mix = f(np.array([t * a + (1 - t) * b, a, b]))
        convex &= bool(mix[0] <= t * mix[1] + (1 - t) * mix[2] + 1e-9)
    return MonotonicityReport(samples, bool(total_ok), bool(own_ok), convex)


@dataclass(frozen=True)
class ConditionReport:
    """Numerical checks of the conditions behind equilibrium uniqueness."""

    additive: bool             # J_i is the sum of its per-link costs
    continuous: bool           # link latencies continuous and non-negative
    own_cost_convex: bool
    smooth_off_kinks: bool     # one-sided derivatives agree away from kinks
    finite: bool               # every feasible profile has finite costs
    marginal_increasing: bool

    @property
    def holds(self):
        return all((self.additive, self.continuous, self.own_cost_convex,
                    self.smooth_off_kinks, self.finite, self.marginal_increasing))


def cost_conditions(net, samples=200, seed=0):
    """Sampled checks of additivity, continuity, convexity, smoothness off the
    kinks, finiteness and increasing marginal costs for ``net``'s latencies."""
    rng = np.random.default_rng(seed)
    mono = marginal_cost_monotonicity(net, samples, seed)

    local = rng.uniform(0.0, net.r, (samples, net.n))
    reduced = local_flow_costs(net, local)
    checked = max(1, samples // 10)
    full = np.array([player_costs(net, FlowProfile.from_local_flows(net, p)) for p in local[:checked]])
    additive = np.allclose(reduced[:checked], full, rtol=1e-10, atol=1e-14)
    finite = bool(np.all(np.isfinite(reduced)))

    top = 2 * net.n * net.r
    h = 1e-9 * top
    continuous = smooth = True
    for lat in (net.local_latency, net.cross_latency):
        x = rng.uniform(0.0, top, samples)
        continuous &= bool(np.all(np.asarray(lat(x)) >= 0))
        for k in lat.kink_points():
            jump = abs(float(lat(k + h)) - float(lat(max(k - h, 0.0))))
            continuous &= jump <= 2 * h * float(lat.slope(k + h)) + 1e-12
        kinks = np.asarray(lat.kink_points(), dtype=float)
        away = x[np.all(np.abs(x[:, None] - kinks[None, :]) > 1e-4 * top, axis=1)] if kinks.size else x
        away = away[away > 1e-4 * top]
        step = 1e-7 * top
        central = (np.asarray(lat(away + step)) - np.asarray(lat(away - step))) / (2 * step)
        smooth &= bool(np.allclose(central, lat.slope(away), rtol=1e-5, atol=1e-8))

    return ConditionReport(bool(additive), continuous, mono.own_cost_convex, smooth, finite,
                           mono.total_flow_increasing and mono.own_flow_increasing)
