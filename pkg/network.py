"""
Load-balancing (LB) network model.

Every source node s_i has a local link l_i to the common destination d and
a cross link l_i_j to every other source s_j, from where the rerouted flow
continues on l_j. All players have the same demand r.

Link order in flow matrices: the n local links first, then the cross links
(i, j), i != j, in lexicographic order.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np

from config import FLOW_TOL
from errors import ConfigurationError, ParameterRegimeError, ProfileError
from latency import Affine, Elbow

logger = logging.getLogger(__name__)

DESTINATION = "d"


def source_node(i):
    return f"s{i}"


@dataclass(frozen=True)
class ProfileCheck:
    """Outcome of a conservation check; truthy when the profile is feasible."""

    ok: bool
    violations: tuple = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True, eq=False)
class FlowProfile:
    """Per-player per-link flows, shape (players, links)."""

    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 2:
            raise ProfileError(f"flow matrix must be 2-D, got shape {x.shape}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @classmethod
    def from_paths(cls, net, paths):
        """From an n x n path matrix: paths[i][i] local, paths[i][j] via s_j."""
        paths = np.asarray(paths, dtype=float)
        if paths.shape != (net.n, net.n):
            raise ProfileError(f"path matrix must be {net.n}x{net.n}, got {paths.shape}")
        x = np.zeros((net.n, net.n_links))
        for i in range(net.n):
            for j in range(net.n):
                x[i, j] = paths[i, j]
                if j != i:
                    x[i, net.cross_index(i, j)] = paths[i, j]
        return cls(x)

    @classmethod
    def from_local_flows(cls, net, local):
        """Each player's residual r - local split equally over its cross links."""
        local = np.asarray(local, dtype=float)
        if local.shape != (net.n,):
            raise ProfileError(f"expected {net.n} local flows, got shape {local.shape}")
        cross = (net.r - local) / (net.n - 1)
        paths = np.tile(cross[:, None], (1, net.n))
        np.fill_diagonal(paths, local)
        return cls.from_paths(net, paths)

    def link_loads(self):
        """Total flow per link."""
        return self.x.sum(axis=0)

    def __eq__(self, other):
        return isinstance(other, FlowProfile) and np.array_equal(self.x, other.x)

    __hash__ = None


@dataclass(frozen=True)
class LbNetwork:
    """Symmetric n-source load-balancing network."""

    n: int
    r: float
    local_latency: object
    cross_latency: object

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"LB network needs n >= 2 players, got {self.n}")
        if not self.r > 0:
            raise ConfigurationError(f"demand r must be positive, got {self.r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "r", float(self.r))

    @property
    def n_links(self):
        return self.n * self.n

    def cross_index(self, i, j):
        """Column of cross link l_i_j in a flow matrix."""
        if i == j:
            raise ProfileError(f"no cross link from s{i} to itself")
        return self.n + i * (self.n - 1) + (j if j < i else j - 1)

    @cached_property
    def link_names(self):
        names = [f"l{i + 1}" for i in range(self.n)]
        names += [f"l{i + 1}_{j + 1}" for i in range(self.n) for j in range(self.n) if j != i]
        return tuple(names)

    @cached_property
    def graph(self):
        """Directed topology; each edge carries its column index and latency."""
        g = nx.DiGraph()
        g.add_node(DESTINATION)
        for i in range(self.n):
            g.add_edge(source_node(i), DESTINATION, index=i, name=self.link_names[i],
                       latency=self.local_latency)
        for i in range(self.n):
            for j in range(self.n):
                if i != j:
                    k = self.cross_index(i, j)
                    g.add_edge(source_node(i), source_node(j), index=k, name=self.link_names[k],
                               latency=self.cross_latency)
        return g

    def link_latencies(self, loads):
        """Latency per link for a vector of link loads."""
        loads = np.asarray(loads, dtype=float)
        return np.concatenate((
            np.atleast_1d(self.local_latency(loads[:self.n])),
            np.atleast_1d(self.cross_latency(loads[self.n:])),
        ))

    def local_flows(self, profile):
        return np.array([profile.x[i, i] for i in range(self.n)])

    def path_flows(self, profile):
        paths = np.zeros((self.n, self.n))
        for i in range(self.n):
            for j in range(self.n):
                paths[i, j] = profile.x[i, i] if i == j else profile.x[i, self.cross_index(i, j)]
        return paths

    def to_edge_list(self):
        """Equivalent general edge-list network."""
        edges = [(u, v, d["latency"], d["name"])
                 for u, v, d in sorted(self.graph.edges(data=True), key=lambda e: e[2]["index"])]
        players = [(source_node(i), DESTINATION, self.r) for i in range(self.n)]
        return EdgeListNetwork(edges, players)


@dataclass(frozen=True)
class ParamSequence:
    """delta_m = delta0**m, c_m = c0**m on a fixed (L, r)."""

    delta0: float
    c0: float
    L: float
    r: float

    def __post_init__(self):
        if not 0 < self.delta0 < 1:
            raise ConfigurationError(f"delta0 must lie in (0, 1), got {self.delta0}")
        if not self.c0 > 1:
            raise ConfigurationError(f"c0 must exceed 1, got {self.c0}")
        if not (self.L > 0 and self.r > 0):
            raise ConfigurationError(f"L and r must be positive, got L={self.L}, r={self.r}")

    def delta(self, m):
        return self.delta0 ** m

    def c(self, m):
        return self.c0 ** m

    def zeta(self, m):
        return 0.5 * self.c(m) * self.delta(m) / self.L

    def check(self, m):
        """Raise ParameterRegimeError unless c_m > L > delta_m > 0 and c_m < r*L/delta_m."""
        if int(m) != m or m < 1:
            raise ConfigurationError(f"sequence index m must be a positive integer, got {m}")
        check_regime_inequalities(self.L, self.delta(m), self.c(m), self.r, suffix="_m")

    def to_dict(self):
        return {"delta0": self.delta0, "c0": self.c0, "L": self.L, "r": self.r}


def check_regime_inequalities(L, delta, c, r, suffix=""):
    """c > L > delta > 0 and c < r*L/delta; the first violated one is named."""
    if not delta > 0:
        raise ParameterRegimeError(f"delta{suffix} > 0", f"delta={delta:.12g}")
    if not c > L:
        raise ParameterRegimeError(f"c{suffix} > L", f"c={c:.12g}, L={L:.12g}")
    if not c < r * L / delta:
        raise ParameterRegimeError(
            f"c{suffix} < r*L/delta{suffix}", f"c={c:.12g} >= r*L/delta={r * L / delta:.12g}"
        )
    if not L > delta:
        raise ParameterRegimeError(f"L > delta{suffix}", f"L={L:.12g}, delta={delta:.12g}")


def regime_parameters(net):
    """Raise ParameterRegimeError unless ``net`` has the closed-form structure.

    Local links Elbow{L, delta, r, 0} with the knee at the demand, cross links
    Affine{0, c}, and c > L > delta > 0, c < r*L/delta. Returns (L, delta, c).
    """
    local, cross = net.local_latency, net.cross_latency
    if not isinstance(local, Elbow) or local.offset != 0 or not np.isclose(local.r, net.r, rtol=0, atol=FLOW_TOL):
        raise ParameterRegimeError("local links Elbow{L, delta, r, 0} with knee at the demand")
    if not isinstance(cross, Affine) or cross.a != 0:
        raise ParameterRegimeError("cross links Affine{0, c}")
    check_regime_inequalities(local.L, local.delta, cross.b, net.r)
    return local.L, local.delta, cross.b


def make_lb_network(n, r, local, cross):
    return LbNetwork(n=n, r=r, local_latency=local, cross_latency=cross)


def make_paper_network(seq, m, n=2):
    """LB network with Elbow{L, delta_m, r, 0} local and Affine{0, c_m} cross links."""
    seq.check(m)
    logger.debug("sequence network m=%s: delta=%.12g c=%.12g", m, seq.delta(m), seq.c(m))
    return make_lb_network(
        n, seq.r,
        Elbow(L=seq.L, delta=seq.delta(m), r=seq.r, offset=0.0),
        Affine(a=0.0, b=seq.c(m)),
    )


def validate_profile(net, profile):
    """Conservation and non-negativity of every player's flow, within FLOW_TOL.

    Raises ProfileError on dimension mismatch; otherwise returns a
    ProfileCheck listing each failed constraint.
    """
    x = profile.x if isinstance(profile, FlowProfile) else np.asarray(profile, dtype=float)
    if x.shape != (net.n, net.n_links):
        raise ProfileError(
            f"flow matrix must be {net.n}x{net.n_links} for an n={net.n} LB network, got {x.shape}"
        )
    check = net.to_edge_list().validate(x)
    violations = list(check.violations)
    # two-hop paths only: a player may use cross links leaving its own source
    for i in range(net.n):
        for a in range(net.n):
            for b in range(net.n):
                if a != b and a != i and x[i, net.cross_index(a, b)] > FLOW_TOL:
                    violations.append(
                        f"player {i + 1}: flow {x[i, net.cross_index(a, b)]:.12g} on "
                        f"{net.link_names[net.cross_index(a, b)]}, which does not leave its source"
                    )
    return ProfileCheck(not violations, tuple(violations))


def require_feasible(net, profile):
    check = validate_profile(net, profile)
    if not check:
        raise ProfileError("infeasible flow profile", check.violations)
    return profile


class EdgeListNetwork:
    """General directed network with per-edge latencies.

    Supports feasibility checks and cost evaluation only; no solvers.
    """

    def __init__(self, edges, players):
        """
        Args:
            edges: iterable of (tail, head, latency) or (tail, head, latency, name).
            players: iterable of (source, destination, demand).
        """
        self.graph = nx.DiGraph()
        self.edges = []
        self.names = []
        for k, edge in enumerate(edges):
            tail, head, latency = edge[:3]
            name = edge[3] if len(edge) > 3 else f"e{k}"
            if self.graph.has_edge(tail, head):
                raise ConfigurationError(f"duplicate edge {tail}->{head}")
            self.graph.add_edge(tail, head, index=k, latency=latency)
            self.edges.append((tail, head, latency))
            self.names.append(name)
        self.players = [(s, t, float(d)) for s, t, d in players]
        for s, t, d in self.players:
            if s not in self.graph or t not in self.graph:
                raise ConfigurationError(f"player endpoints {s}->{t} not in the graph")
            if d <= 0:
                raise ConfigurationError(f"player demand must be positive, got {d}")

    @property
    def n_edges(self):
        return len(self.edges)

    def _matrix(self, x):
        x = np.asarray(x.x if isinstance(x, FlowProfile) else x, dtype=float)
        if x.shape != (len(self.players), self.n_edges):
            raise ProfileError(
                f"flow matrix must be {len(self.players)}x{self.n_edges}, got {x.shape}"
            )
        return x

    def validate(self, x):
        x = self._matrix(x)
        violations = []
        for p, (src, dst, demand) in enumerate(self.players):
            for k in np.flatnonzero(x[p] < -FLOW_TOL):
                violations.append(f"player {p + 1}: negative flow {x[p, k]:.12g} on {self.names[k]}")
            for node in self.graph.nodes:
                out_flow = sum(x[p, d["index"]] for _, _, d in self.graph.out_edges(node, data=True))
                in_flow = sum(x[p, d["index"]] for _, _, d in self.graph.in_edges(node, data=True))
                expected = demand if node == src else -demand if node == dst else 0.0
                gap = (out_flow - in_flow) - expected
                if abs(gap) <= FLOW_TOL:
                    continue
                if node == src:
                    kind = "demand shortfall" if gap < 0 else "demand excess"
                    violations.append(f"player {p + 1}: {kind} {abs(gap):.12g} at {node}")
                elif node == dst:
                    kind = "arrival shortfall" if gap > 0 else "arrival excess"
                    violations.append(f"player {p + 1}: {kind} {abs(gap):.12g} at {node}")
                else:
                    violations.append(f"player {p + 1}: flow imbalance {gap:.12g} at {node}")
        return ProfileCheck(not violations, tuple(violations))

    def link_loads(self, x):
        return self._matrix(x).sum(axis=0)

    def player_costs(self, x):
        """J_i = sum over links of x[i][l] * T_l(total flow on l)."""
        x = self._matrix(x)
        loads = x.sum(axis=0)
        latencies = np.array([float(lat(load)) for (_, _, lat), load in zip(self.edges, loads)])
        return x @ latencies
