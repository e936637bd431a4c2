"""
Scenario files and batch runs.

A scenario is a JSON document naming one network (explicit, or a parameter
sequence with an m range), a degree-of-cooperation setting, the tasks to run
and optional solver knobs. ``run_scenario`` writes one JSON record per task
(and per m for sequence networks), CSV tables for traces and sweeps, and a
``summary.json`` with the status of every task.
"""

import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from config import SolverSettings
from errors import (
    ConfigurationError, ParameterRegimeError, RoutingError, ScenarioError,
)
from export import trace_frame, write_record, write_table
from game import (
    DocMatrix, br_dynamics, closed_form_selfish_ne, gamma_threshold, gamma_threshold_formula,
    load_taker_profile, verify_equilibrium,
)
from latency import latency_from_dict
from metrics import (
    SWEEP_COLUMNS, altruism_benefit_spillover, m_sweep, price_of_anarchy,
    value_of_unilateral_altruism, wardrop_price_of_anarchy,
)
from network import ParamSequence, make_lb_network, make_paper_network
from welfare import social_optimum, wardrop_equilibrium

logger = logging.getLogger(__name__)

TASKS = ("nash", "trace", "opt", "wardrop", "poa", "vou", "spillover", "gamma", "sweep")
STARTS = ("pure_local", "selfish_ne", "load_taker")
DOC_KINDS = ("selfish", "altruistic", "matrix")


@dataclass(frozen=True)
class NetworkSpec:
    n: int
    r: float
    local: object
    cross: object

    def build(self):
        return make_lb_network(self.n, self.r, self.local, self.cross)


@dataclass(frozen=True)
class SequenceSpec:
    seq: ParamSequence
    m_from: int
    m_to: int
    n: int = 2

    @property
    def m_values(self):
        return tuple(range(self.m_from, self.m_to + 1))


@dataclass(frozen=True)
class DocSpec:
    kind: str = "selfish"
    player: int = 0
    beta: float = None
    betas: tuple = ()
    matrix: tuple = ()

    def build(self, n):
        if self.kind == "selfish":
            return DocMatrix.selfish(n)
        if self.kind == "altruistic":
            beta = self.beta if self.beta is not None else max(self.betas)
            return DocMatrix.altruistic(n, self.player, beta)
        return DocMatrix.from_rows(self.matrix)


@dataclass(frozen=True)
class Scenario:
    name: str
    doc: DocSpec
    tasks: tuple
    network: NetworkSpec = None
    sequence: SequenceSpec = None
    x0: object = "pure_local"
    solver: SolverSettings = field(default_factory=SolverSettings)

    @property
    def n(self):
        return self.network.n if self.network is not None else self.sequence.n

    def networks(self):
        """(m, network) pairs; m is None for an explicit network."""
        if self.network is not None:
            return [(None, self.network.build())]
        return [(m, make_paper_network(self.sequence.seq, m, self.sequence.n))
                for m in self.sequence.m_values]


# ── Parsing ──────────────────────────────────────────────────────────────────

def _line_of(text, key):
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


class _Reader:
    """Typed field access that raises ScenarioError naming the field and line."""

    def __init__(self, text):
        self.text = text

    def fail(self, path, message):
        raise ScenarioError(message, field=path, line=_line_of(self.text, path.split(".")[-1]))

    def obj(self, data, path):
        if not isinstance(data, dict):
            self.fail(path, "expected an object")
        return data

    def number(self, data, key, path, default=None, integer=False):
        if key not in data:
            if default is None:
                self.fail(f"{path}.{key}".lstrip("."), "missing required field")
            return default
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(f"{path}.{key}".lstrip("."), f"expected a number, got {value!r}")
        if integer:
            if int(value) != value:
                self.fail(f"{path}.{key}".lstrip("."), f"expected an integer, got {value!r}")
            return int(value)
        return float(value)


def parse_scenario(text):
    """Parse and validate scenario JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(e.msg, line=e.lineno) from e
    rd = _Reader(text)
    rd.obj(data, "scenario")
    known = {"name", "network", "sequence", "doc", "tasks", "x0", "solver", "seed"}
    for key in data:
        if key not in known:
            rd.fail(key, "unknown field")

    if ("network" in data) == ("sequence" in data):
        raise ScenarioError("give exactly one of 'network' or 'sequence'", field="network")
    network = sequence = None
    try:
        if "network" in data:
            net = rd.obj(data["network"], "network")
            for key in ("local", "cross"):
                if key not in net:
                    rd.fail(f"network.{key}", "missing required field")
            network = NetworkSpec(
                n=rd.number(net, "n", "network", integer=True),
                r=rd.number(net, "r", "network"),
                local=latency_from_dict(rd.obj(net["local"], "network.local")),
                cross=latency_from_dict(rd.obj(net["cross"], "network.cross")),
            )
            network.build()
        else:
            sq = rd.obj(data["sequence"], "sequence")
            seq = ParamSequence(*(rd.number(sq, k, "sequence") for k in ("delta0", "c0", "L", "r")))
            sequence = SequenceSpec(
                seq=seq,
                m_from=rd.number(sq, "m_from", "sequence", integer=True),
                m_to=rd.number(sq, "m_to", "sequence", integer=True),
                n=rd.number(sq, "n", "sequence", default=2, integer=True),
            )
            if not 1 <= sequence.m_from <= sequence.m_to:
                rd.fail("sequence.m_to", "need 1 <= m_from <= m_to")
            if sequence.n < 2:
                rd.fail("sequence.n", "need at least 2 players")
    except ConfigurationError as e:
        section = "network" if network is None and "network" in data else "sequence"
        rd.fail(section, str(e))
    n = network.n if network is not None else sequence.n

    doc = _parse_doc(rd, data.get("doc", {"kind": "selfish"}), n)

    tasks = data.get("tasks")
    if not isinstance(tasks, list) or not tasks:
        rd.fail("tasks", "expected a non-empty list of tasks")
    for task in tasks:
        if task not in TASKS:
            rd.fail("tasks", f"unknown task {task!r}; choose from {', '.join(TASKS)}")
    if "sweep" in tasks and sequence is None:
        rd.fail("tasks", "the sweep task needs a 'sequence' network")
    if len(set(tasks)) != len(tasks):
        rd.fail("tasks", "duplicate task")

    x0 = data.get("x0", "pure_local")
    if isinstance(x0, list):
        if len(x0) != n or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x0):
            rd.fail("x0", f"expected {n} local flows")
        x0 = tuple(float(v) for v in x0)
    elif x0 not in STARTS:
        rd.fail("x0", f"expected a list of local flows or one of {', '.join(STARTS)}")

    solver = _parse_solver(rd, data.get("solver", {}), data.get("seed"), n)

    name = data.get("name", "scenario")
    if not isinstance(name, str):
        rd.fail("name", "expected a string")
    return Scenario(name=name, doc=doc, tasks=tuple(tasks), network=network,
                    sequence=sequence, x0=x0, solver=solver)


def _parse_doc(rd, raw, n):
    raw = rd.obj(raw, "doc")
    kind = raw.get("kind", "selfish")
    if kind not in DOC_KINDS:
        rd.fail("doc.kind", f"expected one of {', '.join(DOC_KINDS)}")
    player = rd.number(raw, "player", "doc", default=0, integer=True)
    if not 0 <= player < n:
        rd.fail("doc.player", f"player index {player} out of range for n={n}")
    beta = raw.get("beta")
    if beta is not None:
        beta = rd.number(raw, "beta", "doc")
        if not 0 < beta <= 1:
            rd.fail("doc.beta", f"beta must lie in (0, 1], got {beta}")
    betas = raw.get("betas", [])
    if not isinstance(betas, list):
        rd.fail("doc.betas", "expected a list")
    for b in betas:
        if isinstance(b, bool) or not isinstance(b, (int, float)) or not 0 < b <= 1:
            rd.fail("doc.betas", f"beta must lie in (0, 1], got {b!r}")
    betas = tuple(float(b) for b in betas)
    if kind == "altruistic" and beta is None and not betas:
        rd.fail("doc.beta", "an altruistic doc needs 'beta' or 'betas'")
    matrix = ()
    if kind == "matrix":
        rows = raw.get("matrix")
        if not isinstance(rows, list) or len(rows) != n:
            rd.fail("doc.matrix", f"expected {n} rows")
        try:
            matrix = tuple(tuple(float(v) for v in row) for row in rows)
            DocMatrix.from_rows(matrix)
        except (TypeError, ValueError) as e:
            rd.fail("doc.matrix", str(e))
    return DocSpec(kind, player, beta, betas, matrix)


def _parse_solver(rd, raw, seed, n):
    raw = dict(rd.obj(raw, "solver"))
    if seed is not None:
        raw["seed"] = seed
    known = {f.name: f for f in fields(SolverSettings)}
    values = {}
    for key, value in raw.items():
        if key not in known:
            rd.fail(f"solver.{key}", "unknown solver setting")
        if key == "player_order":
            if value is not None and (not isinstance(value, list) or sorted(value) != list(range(n))):
                rd.fail("solver.player_order", f"expected a permutation of 0..{n - 1}")
            values[key] = tuple(value) if value is not None else None
        elif value is None and known[key].default is None:
            values[key] = None
        else:
            values[key] = rd.number(raw, key, "solver", integer=known[key].type is int)
    try:
        return SolverSettings(**values)
    except ConfigurationError as e:
        rd.fail("solver", str(e))


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file: {e}") from e
    return parse_scenario(text)


# ── Serialization ────────────────────────────────────────────────────────────

def scenario_to_dict(scenario):
    data = {"name": scenario.name}
    if scenario.network is not None:
        net = scenario.network
        data["network"] = {"n": net.n, "r": net.r, "local": net.local.to_dict(), "cross": net.cross.to_dict()}
    else:
        sq = scenario.sequence
        data["sequence"] = {**sq.seq.to_dict(), "m_from": sq.m_from, "m_to": sq.m_to, "n": sq.n}
    doc = scenario.doc
    data["doc"] = {"kind": doc.kind, "player": doc.player}
    if doc.beta is not None:
        data["doc"]["beta"] = doc.beta
    if doc.betas:
        data["doc"]["betas"] = list(doc.betas)
    if doc.matrix:
        data["doc"]["matrix"] = [list(row) for row in doc.matrix]
    data["tasks"] = list(scenario.tasks)
    data["x0"] = list(scenario.x0) if isinstance(scenario.x0, tuple) else scenario.x0
    solver = {f.name: getattr(scenario.solver, f.name) for f in fields(SolverSettings)}
    data["seed"] = solver.pop("seed")
    if solver["player_order"] is not None:
        solver["player_order"] = list(solver["player_order"])
    data["solver"] = solver
    return data


def dump_scenario(scenario):
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


# ── Running ──────────────────────────────────────────────────────────────────

def _start(scenario, net, doc):
    if isinstance(scenario.x0, tuple):
        return np.array(scenario.x0)
    if scenario.x0 == "selfish_ne":
        return closed_form_selfish_ne(net).local_flows
    if scenario.x0 == "load_taker":
        return np.diag(load_taker_profile(net, scenario.doc.player).x[:, :net.n]).copy()
    return np.full(net.n, net.r)


class TaskFailed(Exception):
    """A task ran but its result is not usable (e.g. dynamics did not converge)."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


def _task_nash(scenario, net, settings, out, suffix, plots):
    doc = scenario.doc.build(net.n)
    result, _ = br_dynamics(net, doc, _start(scenario, net, doc), settings.max_iter, settings.eps_fp,
                            settings.player_order, settings.eps_tie, keep_trace=False)
    check = verify_equilibrium(net, doc, result.flows, settings.eps_eq, settings.eps_tie)
    record = {"dynamics": result.to_record(), "verified": check.passed, "gains": list(check.gains)}
    if doc.is_selfish:
        try:
            record["closed_form"] = closed_form_selfish_ne(net).to_record()
        except ParameterRegimeError as e:
            record["closed_form"] = None
            record["closed_form_note"] = str(e)
    if not result.converged:
        raise TaskFailed(f"dynamics did not converge in {result.iterations} rounds", record)
    if not check:
        raise TaskFailed(f"player {check.player + 1} can gain {check.gain:.3g}", record)
    return record


def _task_trace(scenario, net, settings, out, suffix, plots):
    doc = scenario.doc.build(net.n)
    result, trace = br_dynamics(net, doc, _start(scenario, net, doc), settings.max_iter,
                                settings.eps_fp, settings.player_order, settings.eps_tie)
    frame = trace_frame(trace)
    write_table(out / f"trace{suffix}.csv", frame)
    if plots:
        from plots import trace_figure, write_figure
        write_figure(trace_figure(frame), out / f"trace{suffix}.html")
    record = {"final": result.to_record(), "rounds": len(trace) - 1, "table": f"trace{suffix}.csv"}
    if not result.converged:
        raise TaskFailed(f"dynamics did not converge in {result.iterations} rounds", record)
    return record


def _task_opt(scenario, net, settings, out, suffix, plots):
    return social_optimum(net, verify=True, starts=settings.descent_starts, seed=settings.seed).to_record()


def _task_wardrop(scenario, net, settings, out, suffix, plots):
    outcome = wardrop_equilibrium(net, eps_w=settings.eps_w, eps_fp=settings.eps_fp)
    return {**outcome.to_record(), "poa": wardrop_price_of_anarchy(net, settings).poa}


def _task_poa(scenario, net, settings, out, suffix, plots):
    return price_of_anarchy(net, settings).to_record()


def _task_vou(scenario, net, settings, out, suffix, plots):
    doc = scenario.doc
    betas = doc.betas or ((doc.beta,) if doc.beta is not None else None)
    report = value_of_unilateral_altruism(net, doc.player, betas, settings)
    if not report.available:
        raise TaskFailed("no verified altruistic equilibrium at any beta", report.to_record())
    return report.to_record()


def _task_spillover(scenario, net, settings, out, suffix, plots):
    doc = scenario.doc
    beta = doc.beta if doc.beta is not None else (max(doc.betas) if doc.betas else 1.0)
    return altruism_benefit_spillover(net, doc.player, beta, settings).to_record()


def _task_gamma(scenario, net, settings, out, suffix, plots):
    measured = gamma_threshold(net, scenario.doc.player, settings.eps_eq)
    try:
        formula = gamma_threshold_formula(net)
    except ParameterRegimeError:
        formula = None
    return {"player": scenario.doc.player, "measured_threshold": measured, "first_order_threshold": formula}


_RUNNERS = {
    "nash": _task_nash,
    "trace": _task_trace,
    "opt": _task_opt,
    "wardrop": _task_wardrop,
    "poa": _task_poa,
    "vou": _task_vou,
    "spillover": _task_spillover,
    "gamma": _task_gamma,
}


def run_scenario(path, out_dir, overrides=None, plots=False, callback=None):
    """Run every task of a scenario file and write the result bundle.

    Parse errors raise ScenarioError and regime violations of a sequence
    network raise ParameterRegimeError before anything is written. A task
    that fails is marked ``failed`` in ``summary.json``; the others still run.

    Returns the summary record.
    """
    scenario = load_scenario(path)
    settings = scenario.solver.with_overrides(**(overrides or {}))
    networks = scenario.networks()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    statuses = []
    per_net_tasks = [t for t in scenario.tasks if t != "sweep"]
    total = len(per_net_tasks) * len(networks) + ("sweep" in scenario.tasks)
    done = 0
    for task in per_net_tasks:
        for m, net in networks:
            suffix = "" if m is None else f"_m{m}"
            entry = {"task": task, "m": m, "file": f"{task}{suffix}.json"}
            try:
                record = _RUNNERS[task](scenario, net, settings, out, suffix, plots)
                entry["status"] = "ok"
            except TaskFailed as e:
                record = {**(e.record or {}), "error": str(e)}
                entry.update(status="failed", detail=str(e))
            except RoutingError as e:
                record = {"error": str(e)}
                entry.update(status="failed", detail=str(e))
            if entry["status"] == "failed":
                logger.warning("task %s%s failed: %s", task, suffix, entry["detail"])
            write_record(out / entry["file"], {"task": task, "m": m, **record})
            statuses.append(entry)
            done += 1
            if callback:
                callback(f"[{done}/{total}] {task}{suffix}: {entry['status']}", done / total)

    if "sweep" in scenario.tasks:
        entry = {"task": "sweep", "m": None, "file": "sweep.json"}
        betas = scenario.doc.betas or ((scenario.doc.beta,) if scenario.doc.beta is not None else None)
        try:
            rows = m_sweep(scenario.sequence.seq, scenario.sequence.m_values, scenario.sequence.n,
                           betas, settings)
            write_table(out / "sweep.csv", rows, SWEEP_COLUMNS)
            write_record(out / "sweep.json", {"task": "sweep", "rows": rows, "table": "sweep.csv"})
            if plots:
                from plots import sweep_figure, write_figure
                write_figure(sweep_figure(rows), out / "sweep.html")
            entry["status"] = "ok"
        except RoutingError as e:
            write_record(out / "sweep.json", {"task": "sweep", "error": str(e)})
            entry.update(status="failed", detail=str(e))
        statuses.append(entry)
        if callback:
            callback(f"[{total}/{total}] sweep: {entry['status']}", 1.0)

    summary = {
        "scenario": scenario.name,
        "tasks": statuses,
        "failed": sum(1 for s in statuses if s["status"] == "failed"),
    }
    write_record(out / "summary.json", summary)
    return summary
