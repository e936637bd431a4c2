"""
Efficiency metrics: Price of Anarchy and Value of Unilateral Altruism.

Sweeps over the altruism weight beta and over the parameter-sequence index
m report progress through an optional ``callback(message, progress_pct)``.
"""

import logging
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from config import (
    ORACLE_MAX_PLAYERS, ORACLE_MAX_PROFILES, POA_FORMULA_TOL, VOU_BETA_POINTS, SolverSettings,
)
from errors import ConfigurationError, ConsistencyError, ParameterRegimeError
from game import (
    DocMatrix, br_dynamics, closed_form_selfish_cost, closed_form_selfish_ne, grid_oracle_ne,
    load_taker_profile, local_flow_costs, reduced_state, selfish_ne_local_flow,
    verify_equilibrium,
)
from network import make_paper_network, regime_parameters
from welfare import social_optimum, wardrop_equilibrium

logger = logging.getLogger(__name__)


def _oracle_step(net, settings):
    """Finest configured grid step the oracle can afford on ``net``, or None."""
    if net.n > ORACLE_MAX_PLAYERS:
        return None
    for step in (settings.grid_step, settings.coarse_grid_step):
        if (np.floor(net.r / step) + 1) ** net.n <= ORACLE_MAX_PROFILES / 2:
            return step
    return None


# ── Price of Anarchy ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class PoaReport:
    worst_ne_total_cost: float
    opt_total_cost: float
    poa: float
    closed_form_poa: float = None
    equilibria_checked: int = 1
    kind: str = "atomic"

    def to_record(self):
        return {
            "kind": self.kind,
            "worst_ne_total_cost": self.worst_ne_total_cost,
            "opt_total_cost": self.opt_total_cost,
            "poa": self.poa,
            "closed_form_poa": self.closed_form_poa,
            "equilibria_checked": self.equilibria_checked,
        }


def closed_form_poa(net):
    """1 + (r - p*) c / (r L); with two players 1 + (r/2 - zeta) c / (r L)."""
    L, _, c = regime_parameters(net)
    return 1.0 + (net.r - selfish_ne_local_flow(net)) * c / (net.r * L)


def price_of_anarchy(net, settings=None):
    """Worst verified selfish equilibrium over the social optimum.

    Candidates are the closed-form equilibrium and, for n <= 3, every grid
    oracle equilibrium that passes exact verification. The ratio must match
    the closed form within 1e-9.
    """
    settings = settings or SolverSettings()
    doc = DocMatrix.selfish(net.n)
    candidates = [closed_form_selfish_ne(net)]
    step = _oracle_step(net, settings)
    if step is not None:
        candidates += grid_oracle_ne(net, doc, step, settings.eps_eq, settings.eps_tie)
    worst = max(eq.total_cost for eq in candidates)
    opt = social_optimum(net, verify=False).total_cost
    poa = worst / opt
    expected = closed_form_poa(net)
    if abs(poa - expected) > POA_FORMULA_TOL:
        raise ConsistencyError(f"simulated PoA {poa:.12g} disagrees with closed form {expected:.12g}")
    logger.info("PoA %.12g over %d equilibria", poa, len(candidates))
    return PoaReport(worst, opt, poa, expected, len(candidates))


def wardrop_price_of_anarchy(net, settings=None):
    settings = settings or SolverSettings()
    outcome = wardrop_equilibrium(net, eps_w=settings.eps_w, eps_fp=settings.eps_fp)
    opt = social_optimum(net, verify=False).total_cost
    return PoaReport(outcome.total_cost, opt, outcome.total_cost / opt, 1.0, 1, "wardrop")


# ── Value of Unilateral Altruism ─────────────────────────────────────────────

@dataclass(frozen=True)
class VouReport:
    player: int
    selfish_best_cost: float
    altruistic_best_cost: float = None
    vou: float = None
    beta_at_best: float = None
    paper_lower_bound: float = None
    social_cost_at_best: float = None
    local_flows_at_best: tuple = None
    candidates: int = 0
    betas: tuple = field(default=(), repr=False)

    @property
    def available(self):
        return self.vou is not None

    def to_record(self):
        return {
            "player": self.player,
            "available": self.available,
            "selfish_best_cost": self.selfish_best_cost,
            "altruistic_best_cost": self.altruistic_best_cost,
            "vou": self.vou,
            "beta_at_best": self.beta_at_best,
            "paper_lower_bound": self.paper_lower_bound,
            "social_cost_at_best": self.social_cost_at_best,
            "local_flows_at_best": list(self.local_flows_at_best) if self.local_flows_at_best else None,
            "candidates": self.candidates,
            "betas_swept": len(self.betas),
        }


def default_beta_grid(n, points=VOU_BETA_POINTS):
    """``points`` evenly spaced betas on (0, 1] plus 1/n + 1e-6."""
    grid = np.linspace(0.0, 1.0, points + 1)[1:]
    return tuple(sorted(set(np.append(grid, [1.0 / n + 1e-6, 1.0]).round(15).tolist())))


def best_selfish_equilibrium(net, settings):
    """Verified selfish equilibria: the closed form on regime networks, else dynamics."""
    doc = DocMatrix.selfish(net.n)
    try:
        found = [closed_form_selfish_ne(net)]
    except ParameterRegimeError:
        logger.debug("selfish equilibrium: no closed form, running dynamics from pure-local")
        result, _ = br_dynamics(net, doc, np.full(net.n, net.r), settings.max_iter, settings.eps_fp,
                                settings.player_order, settings.eps_tie, keep_trace=False)
        found = [result]
    return [eq for eq in found if verify_equilibrium(net, doc, eq.flows, settings.eps_eq, settings.eps_tie)]


def _altruistic_candidates(net, doc, starts, settings):
    found = []
    for start in starts:
        result, _ = br_dynamics(net, doc, start, settings.vou_max_iter, settings.eps_fp,
                                settings.player_order, settings.eps_tie, keep_trace=False)
        found.append(result)
    step = _oracle_step(net, settings.with_overrides(grid_step=settings.coarse_grid_step))
    if step is not None:
        found += grid_oracle_ne(net, doc, step, settings.eps_eq, settings.eps_tie)
    return [eq for eq in found if verify_equilibrium(net, doc, eq.flows, settings.eps_eq, settings.eps_tie)]


def value_of_unilateral_altruism(net, player=0, beta_grid=None, settings=None, callback=None):
    """Best selfish-equilibrium cost of ``player`` over its best cost when altruistic.

    For each beta the player weighs itself by 1 - beta and the others by
    beta/(n - 1). Equilibria come from best-response dynamics started at
    pure-local routing and at the selfish equilibrium, plus the coarse grid
    oracle for n <= 3; only exactly verified ones count. When none verifies
    at any beta the report carries ``vou=None``.
    """
    settings = settings or SolverSettings()
    betas = tuple(float(b) for b in (beta_grid if beta_grid is not None else default_beta_grid(net.n)))
    if any(not 0 < b <= 1 for b in betas):
        raise ConfigurationError(f"betas must lie in (0, 1], got {list(betas)}")

    selfish = best_selfish_equilibrium(net, settings)
    if not selfish:
        raise ConsistencyError("no verified selfish equilibrium to compare against")
    selfish_eq = min(selfish, key=lambda eq: eq.actual_costs[player])
    selfish_cost = float(selfish_eq.actual_costs[player])
    starts = [np.full(net.n, net.r), selfish_eq.local_flows]

    best = None
    count = 0
    for k, beta in enumerate(betas):
        doc = DocMatrix.altruistic(net.n, player, beta)
        for eq in _altruistic_candidates(net, doc, starts, settings):
            count += 1
            cost = float(eq.actual_costs[player])
            if best is None or cost < best[0] - 1e-12:
                best = (cost, beta, eq)
        if callback:
            callback(f"[{k + 1}/{len(betas)}] beta={beta:.4f}", (k + 1) / len(betas))

    bound = None
    if net.n == 2:
        try:
            bound = closed_form_selfish_cost(net) / (2 * net.r * regime_parameters(net)[0])
        except ParameterRegimeError:
            pass

    if best is None:
        logger.warning("no verified altruistic equilibrium for player %d at any beta", player)
        return VouReport(player, selfish_cost, paper_lower_bound=bound, betas=betas)
    cost, beta, eq = best
    logger.info("VoU %.12g at beta=%.6f (%d candidates)", selfish_cost / cost, beta, count)
    return VouReport(
        player=player,
        selfish_best_cost=selfish_cost,
        altruistic_best_cost=cost,
        vou=selfish_cost / cost,
        beta_at_best=beta,
        paper_lower_bound=bound,
        social_cost_at_best=eq.total_cost,
        local_flows_at_best=tuple(float(v) for v in eq.local_flows),
        candidates=count,
        betas=betas,
    )


@dataclass(frozen=True)
class SpilloverReport:
    beta: float
    applicable: bool
    deltas: tuple = None
    selfish_costs: tuple = None
    altruistic_costs: tuple = None

    def to_record(self):
        return {
            "beta": self.beta,
            "applicable": self.applicable,
            "deltas": list(self.deltas) if self.deltas else None,
            "selfish_costs": list(self.selfish_costs) if self.selfish_costs else None,
            "altruistic_costs": list(self.altruistic_costs) if self.altruistic_costs else None,
        }


def altruism_benefit_spillover(net, player, beta, settings=None):
    """Per-player cost(selfish NE) - cost(load-taker equilibrium).

    Not applicable when the load-taker profile fails verification at ``beta``.
    """
    settings = settings or SolverSettings()
    doc = DocMatrix.altruistic(net.n, player, beta)
    profile = load_taker_profile(net, player)
    if not verify_equilibrium(net, doc, profile, settings.eps_eq, settings.eps_tie):
        logger.info("load-taker profile is not an equilibrium at beta=%s", beta)
        return SpilloverReport(beta, False)
    selfish = closed_form_selfish_ne(net).actual_costs
    altruistic = local_flow_costs(net, reduced_state(net, profile))
    return SpilloverReport(
        beta, True,
        deltas=tuple(float(v) for v in selfish - altruistic),
        selfish_costs=tuple(float(v) for v in selfish),
        altruistic_costs=tuple(float(v) for v in altruistic),
    )


# ── m sweep ──────────────────────────────────────────────────────────────────

SWEEP_COLUMNS = ["m", "delta_m", "c_m", "zeta_m", "poa", "closed_form_poa", "wardrop_poa",
                 "vou", "altruistic_best_cost", "beta_at_best"]


def _sweep_row(task):
    seq, m, n, betas, settings = task
    net = make_paper_network(seq, m, n)
    poa = price_of_anarchy(net, settings)
    wardrop = wardrop_price_of_anarchy(net, settings)
    vou = value_of_unilateral_altruism(net, 0, betas, settings)
    return {
        "m": m,
        "delta_m": seq.delta(m),
        "c_m": seq.c(m),
        "zeta_m": seq.zeta(m),
        "poa": poa.poa,
        "closed_form_poa": poa.closed_form_poa,
        "wardrop_poa": wardrop.poa,
        "vou": vou.vou,
        "altruistic_best_cost": vou.altruistic_best_cost,
        "beta_at_best": vou.beta_at_best,
    }


def m_sweep(seq, m_values, n=2, beta_grid=None, settings=None, callback=None):
    """One row per m, in the order of ``m_values``.

    With ``settings.workers > 1`` the rows are computed in a process pool;
    ``Pool.map`` keeps the input order.
    """
    settings = settings or SolverSettings()
    m_values = [int(m) for m in m_values]
    for m in m_values:
        seq.check(m)
    tasks = [(seq, m, n, beta_grid, settings) for m in m_values]
    if settings.workers > 1 and len(tasks) > 1:
        if callback:
            callback(f"Sweeping m={m_values} on {settings.workers} workers...", 0.0)
        with Pool(min(settings.workers, len(tasks))) as pool:
            rows = pool.map(_sweep_row, tasks)
    else:
        rows = []
        for k, task in enumerate(tasks):
            rows.append(_sweep_row(task))
            if callback:
                callback(f"[{k + 1}/{len(tasks)}] m={task[1]}", (k + 1) / len(tasks))
    if callback:
        callback("Sweep complete!", 1.0)
    return rows
