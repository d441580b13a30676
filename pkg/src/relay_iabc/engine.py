"""Synchronous round executor, trace metrics and the validity/convergence checks."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np

from .adversary import ByzantineNode
from .config import Scenario, SimConfig, build_scenario
from .protocol import BaselineNode, Message, PhaseUpdate, RelayNode
from .signatures import KeyDirectory, keygen

CSV_HEADER = ["iteration", "algorithm", "min", "max", "mean", "stddev", "spread", "sig_rejections"]


class InvariantViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    algorithm: str
    min: float
    max: float
    mean: float
    stddev: float
    spread: float
    sig_rejections: int


@dataclass
class PhaseRecord:
    """One phase of one algorithm: honest states before/after and every node's update."""

    t: int
    honest_ids: tuple[int, ...]
    before: np.ndarray
    after: np.ndarray
    updates: list[PhaseUpdate]


@dataclass
class Audit:
    forged_sent: int = 0
    replayed_sent: int = 0
    rejections: int = 0
    future_dropped: int = 0
    # honest origins whose entry at a phase boundary was missing or not from that phase
    stale_at_boundary: int = 0


@dataclass
class SimTrace:
    config: SimConfig
    scenario: Scenario
    initial: np.ndarray
    rows: list[TraceRow] = field(default_factory=list)
    phases: dict[str, list[PhaseRecord]] = field(default_factory=dict)
    audits: dict[str, Audit] = field(default_factory=dict)

    @property
    def D(self) -> int:
        return self.scenario.D

    def algorithms(self) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r.algorithm not in seen:
                seen.append(r.algorithm)
        return seen

    def rows_for(self, algorithm: str) -> list[TraceRow]:
        return [r for r in self.rows if r.algorithm == algorithm]

    def phase_length(self, algorithm: str) -> int:
        return self.D if algorithm == "relay" else 1

    @property
    def convergence(self) -> dict[str, Optional[int]]:
        return {a: check_convergence(self, self.config.epsilon, a) for a in self.algorithms()}

    def to_csv(self, out: Optional[TextIO] = None) -> str:
        buf = out if out is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.iteration, r.algorithm, _f(r.min), _f(r.max), _f(r.mean),
                        _f(r.stddev), _f(r.spread), r.sig_rejections])
        return buf.getvalue() if out is None else ""


def _f(x: float) -> str:
    return format(x, ".17g")


def summarize(x: np.ndarray) -> tuple[float, float, float, float, float]:
    lo, hi = float(x.min()), float(x.max())
    return lo, hi, math.fsum(x.tolist()) / len(x), float(np.std(x)), hi - lo


def _row(t: int, alg: str, x: np.ndarray, rejections: int) -> TraceRow:
    lo, hi, mean, sd, spread = summarize(x)
    return TraceRow(t, alg, lo, hi, mean, sd, spread, rejections)


def run(config: SimConfig, record_phases: bool = False,
        scenario: Optional[Scenario] = None,
        initial_states: Optional[Sequence[float]] = None) -> SimTrace:
    """Execute the configured algorithm(s) for ``config.iterations`` iterations.

    Every iteration has two barriers: all messages are produced from the
    state at the start of the iteration, then all ingests are applied.
    Honest initial states are drawn uniformly from ``init_range`` unless
    ``initial_states`` (one per honest node, ascending id) is given.
    """
    sc = scenario if scenario is not None else build_scenario(config)
    part = sc.partition
    if initial_states is not None:
        x0 = np.array(initial_states, dtype=float)
        if x0.shape != (part.h,):
            raise ValueError(f"need {part.h} initial states, got {x0.shape}")
    else:
        lo, hi = config.init_range
        rng = np.random.default_rng(config.seed & ((1 << 64) - 1))
        x0 = rng.uniform(lo, hi, size=part.h)
    trace = SimTrace(config, sc, x0)
    algs = ("relay", "baseline") if config.algorithm == "both" else (config.algorithm,)
    for alg in algs:
        if alg == "relay":
            _run_relay(trace, record_phases)
        else:
            _run_baseline(trace, record_phases)
    return trace


def _adversaries(sc: Scenario, keys) -> dict[int, ByzantineNode]:
    cfg = sc.config
    honest = sc.partition.honest
    return {z: ByzantineNode(z, cfg.strategy_for(z), keys[z], cfg.seed, honest, cfg.m, cfg.init_range)
            for z in sorted(sc.partition.byzantine)}


def _run_relay(trace: SimTrace, record: bool) -> None:
    sc, cfg = trace.scenario, trace.config
    g, part, D = sc.graph, sc.partition, sc.D
    honest = part.honest
    keys = {i: keygen(cfg.seed, i) for i in range(cfg.m)}
    directory = KeyDirectory({i: k.verification_key for i, k in keys.items()})
    nodes = {i: RelayNode(i, cfg.m, part.b, keys[i], directory, D, float(x), cfg.default_value)
             for i, x in zip(honest, trace.initial)}
    adv = _adversaries(sc, keys)
    watchers = {z: [s for s in g.in_neighbors(z) if s in nodes]
                for z, a in adv.items() if a.kind in ("Forger", "Replayer")}
    last_seen: dict[tuple[int, int], Message] = {}
    audit = Audit()
    records: list[PhaseRecord] = []
    state = np.array([nodes[i].value for i in honest])

    for t in range(cfg.iterations):
        phase = t // D
        out = {i: nodes[i].outgoing() for i in honest}
        inboxes = {}
        for r in honest:
            inbox = []
            for s in g.in_neighbors(r):
                if s in nodes:
                    inbox.append((s, out[s]))
                else:
                    msg = adv[s].outgoing(t, r, phase)
                    if len(msg):
                        inbox.append((s, msg))
            inboxes[r] = inbox
        for z, senders in watchers.items():
            for s in senders:
                if last_seen.get((z, s)) is not out[s]:
                    adv[z].observe(out[s])
                    last_seen[(z, s)] = out[s]

        before = sum(n.rejections for n in nodes.values())
        for r in honest:
            nodes[r].ingest(inboxes[r])
        rejections = sum(n.rejections for n in nodes.values()) - before

        if (t + 1) % D == 0:
            updates = [nodes[i].phase_update() for i in honest]
            for u in updates:
                audit.stale_at_boundary += sum(1 for o, _, fresh in u.values
                                               if part.is_honest(o) and not fresh)
            new_state = np.array([u.new_value for u in updates])
            if record:
                records.append(PhaseRecord(phase, honest, state, new_state, updates))
            state = new_state
            directory.clear()
        trace.rows.append(_row(t, "relay", state, rejections))

    audit.forged_sent = sum(a.forged for a in adv.values())
    audit.replayed_sent = sum(a.replayed for a in adv.values())
    audit.rejections = sum(n.rejections for n in nodes.values())
    audit.future_dropped = sum(n.future_dropped for n in nodes.values())
    trace.audits["relay"] = audit
    if record:
        trace.phases["relay"] = records


def _run_baseline(trace: SimTrace, record: bool) -> None:
    sc, cfg = trace.scenario, trace.config
    g, part = sc.graph, sc.partition
    honest = part.honest
    keys = {i: keygen(cfg.seed, i) for i in range(cfg.m)}
    nodes = {i: BaselineNode(i, float(x), part.b) for i, x in zip(honest, trace.initial)}
    adv = _adversaries(sc, keys)
    audit = Audit()
    records: list[PhaseRecord] = []
    state = np.array(trace.initial, dtype=float)

    for t in range(cfg.iterations):
        sent = {i: nodes[i].value for i in honest}
        received = {}
        for r in honest:
            got = []
            for s in g.in_neighbors(r):
                if s in nodes:
                    got.append((s, sent[s]))
                else:
                    msg = adv[s].outgoing(t, r, t)
                    if len(msg):
                        got.append((s, msg.entries[0].payload.value))
            received[r] = got
        updates = [nodes[r].step(received[r], t) for r in honest]
        new_state = np.array([nodes[i].value for i in honest])
        if record:
            records.append(PhaseRecord(t, honest, state, new_state, updates))
        state = new_state
        trace.rows.append(_row(t, "baseline", state, 0))

    audit.forged_sent = sum(a.forged for a in adv.values())
    trace.audits["baseline"] = audit
    if record:
        trace.phases["baseline"] = records


def validity_violations(trace: SimTrace, algorithm: Optional[str] = None) -> list[tuple[str, int]]:
    """(algorithm, iteration) pairs whose honest interval escapes the interval at the previous phase end."""
    bad = []
    init_lo, init_hi = float(np.min(trace.initial)), float(np.max(trace.initial))
    for alg in ([algorithm] if algorithm else trace.algorithms()):
        L = trace.phase_length(alg)
        ref_lo, ref_hi = init_lo, init_hi
        for r in trace.rows_for(alg):
            if r.min < ref_lo or r.max > ref_hi:
                bad.append((alg, r.iteration))
            if (r.iteration + 1) % L == 0:
                ref_lo, ref_hi = r.min, r.max
    return bad


def check_validity(trace: SimTrace, algorithm: Optional[str] = None) -> bool:
    """Each phase's honest interval lies inside the previous phase's."""
    return not validity_violations(trace, algorithm)


def check_convergence(trace: SimTrace, epsilon: float, algorithm: str = "relay",
                      metric: str = "spread") -> Optional[int]:
    """First iteration whose ``metric`` (spread or stddev) drops below ``epsilon``."""
    for r in trace.rows_for(algorithm):
        if getattr(r, metric) < epsilon:
            return r.iteration
    return None


def initial_spread(trace: SimTrace) -> float:
    return float(np.max(trace.initial) - np.min(trace.initial))

