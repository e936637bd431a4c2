"""
Configuration for the load-balancing routing solvers.

Tolerances, default solver knobs and the canonical network parameters.
Scenario files and CLI flags override the knobs through SolverSettings.
"""

from dataclasses import dataclass, replace, fields

from errors import ConfigurationError

# --- Tolerances ---
FLOW_TOL = 1e-12          # conservation / non-negativity, flow units
EPS_FP = 1e-10            # best-response dynamics fixed point, flow units
EPS_EQ = 1e-9             # equilibrium verification, cost units
EPS_TIE = 1e-12           # best-response tie detection, cost units
EPS_W = 1e-9              # Wardrop variational inequality, latency units
OPT_IMPROVEMENT_TOL = 1e-8
POA_FORMULA_TOL = 1e-9
DOC_ROW_TOL = 1e-12

# --- Best-response dynamics ---
MAX_ITER = 100_000
ROUNDS_PER_DELTA = 4      # default round cap is max(MAX_ITER, ROUNDS_PER_DELTA * r / delta)
CASCADE_RTOL = 1e-6       # two rounds translate alike when their moves agree this closely
CASCADE_PERIODS = (1, 2)
VOU_MAX_ITER = 2_000

# --- Grid oracle ---
GRID_STEP = 1e-3
COARSE_GRID_STEP = 1e-2
ORACLE_MAX_PLAYERS = 3
ORACLE_MAX_PROFILES = 4_000_000
GRID_MERGE_TOL = 1e-12
ORACLE_VERIFY_LIMIT = 200   # group members checked exactly, smallest grid regret first

# --- Altruism sweeps ---
VOU_BETA_POINTS = 101
GAMMA_TOL = 1e-6

# --- Social optimum descent verifier ---
DESCENT_STARTS = 20
DESCENT_MAX_ITER = 10_000
DESCENT_STEP_FRACTION = 0.1
DESCENT_AGREEMENT_TOL = 1e-6

# --- Wardrop coordinate descent ---
WARDROP_MAX_ROUNDS = 10_000

# --- Canonical motivating network ---
CANONICAL_R = 1.0
CANONICAL_L = 0.1
CANONICAL_DELTA = 1e-3
CANONICAL_C = 1.0

# --- Canonical parameter sequence delta_m = delta0**m, c_m = c0**m ---
CANONICAL_DELTA0 = 0.1
CANONICAL_C0 = 2.0
SWEEP_M_VALUES = (2, 3, 4, 5, 6)
REPRODUCTION_PLAYER_COUNTS = (3, 5)

# --- Output ---
SIGNIFICANT_DIGITS = 12
SEED = 0
WORKERS = 1


@dataclass(frozen=True)
class SolverSettings:
    """Solver knobs shared by every task of a run."""

    eps_fp: float = EPS_FP
    eps_eq: float = EPS_EQ
    eps_tie: float = EPS_TIE
    eps_w: float = EPS_W
    max_iter: int = None     # None: round_budget(net)
    vou_max_iter: int = VOU_MAX_ITER
    player_order: tuple = None
    grid_step: float = GRID_STEP
    coarse_grid_step: float = COARSE_GRID_STEP
    descent_starts: int = DESCENT_STARTS
    seed: int = SEED
    workers: int = WORKERS

    def __post_init__(self):
        for name in ("eps_fp", "eps_eq", "eps_tie", "eps_w", "grid_step", "coarse_grid_step"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("max_iter", "vou_max_iter", "descent_starts", "workers"):
            if getattr(self, name) is not None and int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.player_order is not None:
            object.__setattr__(self, "player_order", tuple(int(i) for i in self.player_order))

    def with_overrides(self, **overrides):
        """Copy with every non-None override applied."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigurationError(f"unknown solver setting(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def order_for(self, n):
        """Round-robin player order for an n-player game."""
        if self.player_order is None:
            return tuple(range(n))
        if sorted(self.player_order) != list(range(n)):
            raise ConfigurationError(
                f"player_order {list(self.player_order)} is not a permutation of 0..{n - 1}"
            )
        return self.player_order
