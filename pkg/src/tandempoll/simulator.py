"""Discrete-event simulation of the tandem polling network.

Two modes share one event loop:

* ``simulate_conditional`` starts from the snapshot a tagged customer sees
  (queue lengths plus server positions), runs until the tagged customer
  leaves station 2, and averages the tagged system time over replications;
* ``simulate_steady_state`` runs one long run and estimates the long-run
  mean system time (waiting inclusive of service) of a class via batch
  means, discarding a warm-up prefix.

Events are selected by minimum time with a fixed priority for (measure-zero)
ties: completions before arrivals, station 2 before station 1, class 1
before class 2.  Each replication draws from its own stream derived from
(seed, replication index) through numpy's SeedSequence spawning, so results
do not depend on execution order and parallel runs reproduce serial ones
bit for bit.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import ArrivalState, SystemParams, relabel_for_class2, validate_params

__all__ = [
    "SimConfig",
    "SimEstimate",
    "SteadyStateEstimate",
    "simulate_conditional",
    "simulate_steady_state",
    "write_trace",
]

_INF = math.inf


@dataclass(frozen=True)
class SimConfig:
    """Replication and horizon settings.

    Steady-state warm-up and horizon are counted in departures (system
    exits), not clock time: the loads of interest need long runs and a
    departure count is the natural unit for batch means.
    """

    replications: int = 800
    seed: int = 20240811
    warmup_departures: int = 10_000
    horizon_departures: int = 1_000_000
    batches: int = 20

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    stderr: float
    n: int
    seed: int


@dataclass(frozen=True)
class SteadyStateEstimate:
    mean: float
    stderr: float
    n: int
    seed: int
    # Little's-law diagnostics over the measurement window (all classes).
    time_avg_in_system: float
    throughput_mean_system_time: float


class _ExpStream:
    """Buffered unit-exponential draws from one Generator."""

    __slots__ = ("rng", "buf", "i")

    def __init__(self, rng: np.random.Generator, size: int = 8192):
        self.rng = rng
        self.buf = rng.exponential(size=size)
        self.i = 0

    def draw(self) -> float:
        if self.i >= self.buf.shape[0]:
            self.buf = self.rng.exponential(size=self.buf.shape[0])
            self.i = 0
        v = self.buf[self.i]
        self.i += 1
        return float(v)


class _Polling:
    """One realisation of the two-station exhaustive polling network."""

    def __init__(self, p: SystemParams, rng: np.random.Generator, trace=None):
        self.lam = p.lam
        self.mu = p.mu
        self.exp = _ExpStream(rng)
        # queues[j][c]: deque of (customer id, arrival time), j in {0,1} for
        # station 1/2 and c in {0,1} for class 1/2
        self.queues = [[deque(), deque()], [deque(), deque()]]
        self.serving = [-1, -1]          # class index in service, -1 = idle
        self.in_service = [None, None]   # (cid, arrival time)
        self.end = [_INF, _INF]          # completion times
        self.position = [0, 0]           # queue the server is polled at
        self.next_arrival = [_INF, _INF]
        self.t = 0.0
        self.next_cid = 0
        self.trace = trace
        # Little's-law accounting
        self.n_in_system = 0
        self.area = 0.0
        self.last_t = 0.0

    # -- helpers -----------------------------------------------------------

    def _new_cid(self) -> int:
        self.next_cid += 1
        return self.next_cid

    def _advance(self, t: float) -> None:
        self.area += self.n_in_system * (t - self.last_t)
        self.last_t = t
        self.t = t

    def _start(self, j: int, c: int) -> None:
        cust = self.queues[j][c].popleft()
        self.serving[j] = c
        self.in_service[j] = cust
        self.position[j] = c
        self.end[j] = self.t + self.exp.draw() / self.mu[c][j]
        self._emit("start", j, c, cust[0])

    def _pick_next(self, j: int) -> None:
        """Exhaustive polling: stay on the current queue while it has work,
        otherwise switch (zero switchover); idle at the last-served queue."""
        pos = self.position[j]
        if self.queues[j][pos]:
            self._start(j, pos)
        elif self.queues[j][1 - pos]:
            self._start(j, 1 - pos)
        else:
            self.serving[j] = -1
            self.in_service[j] = None
            self.end[j] = _INF

    def _emit(self, kind: str, station: int, c: int, cid: int) -> None:
        if self.trace is not None:
            q = self.queues
            self.trace.append((
                self.t, kind, station + 1, c + 1, cid,
                len(q[0][0]) + (1 if self.serving[0] == 0 else 0),
                len(q[0][1]) + (1 if self.serving[0] == 1 else 0),
                len(q[1][0]) + (1 if self.serving[1] == 0 else 0),
                len(q[1][1]) + (1 if self.serving[1] == 1 else 0),
                self.serving[0] + 1,
                self.serving[1] + 1,
            ))

    # -- initialisation ----------------------------------------------------

    def seed_snapshot(self, s: ArrivalState, tagged: bool) -> int:
        """Populate queues per the snapshot; returns the tagged customer id.

        Customers present at t = 0 carry arrival time 0.  Whoever is at the
        head of the queue indicated by the scenario starts a full fresh
        service (exponential services carry no age).
        """
        l11, l21, l12, l22 = s.la
        for _ in range(l12):
            self.queues[1][0].append((self._new_cid(), 0.0))
        for _ in range(l22):
            self.queues[1][1].append((self._new_cid(), 0.0))
        for _ in range(l11):
            self.queues[0][0].append((self._new_cid(), 0.0))
        for _ in range(l21):
            self.queues[0][1].append((self._new_cid(), 0.0))
        self.n_in_system = l11 + l21 + l12 + l22
        tagged_id = -1
        if tagged:
            tagged_id = self._new_cid()
            self.queues[0][0].append((tagged_id, 0.0))
            self.n_in_system += 1
        s1, s2 = s.servers
        self.position = [s1 - 1, s2 - 1]
        trace, self.trace = self.trace, None
        for j in (1, 0):
            self._pick_next(j)
        self.trace = trace
        self.schedule_arrivals()
        self._emit("init", 0, 0, tagged_id)
        return tagged_id

    def schedule_arrivals(self) -> None:
        for c in (0, 1):
            self.next_arrival[c] = self.t + self.exp.draw() / self.lam[c]

    # -- event loop --------------------------------------------------------

    def next_event(self) -> tuple[float, int]:
        """(time, kind): kind 0 = station-2 completion, 1 = station-1
        completion, 2 = class-1 arrival, 3 = class-2 arrival."""
        best_t, best_k = self.end[1], 0
        if self.end[0] < best_t:
            best_t, best_k = self.end[0], 1
        if self.next_arrival[0] < best_t:
            best_t, best_k = self.next_arrival[0], 2
        if self.next_arrival[1] < best_t:
            best_t, best_k = self.next_arrival[1], 3
        return best_t, best_k

    def step(self):
        """Process one event; returns (cid, system_time) on a departure,
        else None.  Trace rows are emitted after the event's state updates,
        so each row is a consistent post-event snapshot."""
        t, kind = self.next_event()
        self._advance(t)
        if kind == 0:
            cid, arr = self.in_service[1]
            c = self.serving[1]
            self.n_in_system -= 1
            self._pick_next(1)
            self._emit("depart", 1, c, cid)
            return cid, t - arr
        if kind == 1:
            cid, arr = self.in_service[0]
            c = self.serving[0]
            self.queues[1][c].append((cid, arr))
            if self.serving[1] == -1:
                self._pick_next(1)
            self._pick_next(0)
            self._emit("transfer", 0, c, cid)
            return None
        c = kind - 2
        cid = self._new_cid()
        self.queues[0][c].append((cid, t))
        self.n_in_system += 1
        self.next_arrival[c] = t + self.exp.draw() / self.lam[c]
        if self.serving[0] == -1:
            self._pick_next(0)
        self._emit("arrival", 0, c, cid)
        return None


def _rep_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def _one_conditional(args) -> float:
    s, p, seed, rep = args
    net = _Polling(p, _rep_rng(seed, rep))
    tagged_id = net.seed_snapshot(s, tagged=True)
    while True:
        out = net.step()
        if out is not None and out[0] == tagged_id:
            return out[1]


def simulate_conditional(
    s: ArrivalState,
    p: SystemParams,
    c: SimConfig = SimConfig(),
    n_jobs: int = 1,
    trace=None,
) -> SimEstimate:
    """Tagged-customer mean system time from snapshot ``s``.

    Each replication re-creates the snapshot, injects the tagged customer at
    the tail of its class queue at station 1, and runs until that customer
    departs station 2.  ``trace``, if a list is supplied, collects event
    rows from replication 0 (see ``write_trace``).
    """
    p = validate_params(p)
    s, p = relabel_for_class2(s, p)
    waits = np.empty(c.replications)
    if trace is not None:
        net = _Polling(p, _rep_rng(c.seed, 0), trace=trace)
        tagged_id = net.seed_snapshot(s, tagged=True)
        while True:
            out = net.step()
            if out is not None and out[0] == tagged_id:
                waits[0] = out[1]
                break
        first = 1
    else:
        first = 0
    jobs = [(s, p, c.seed, rep) for rep in range(first, c.replications)]
    if n_jobs > 1 and jobs:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            for (rep, w) in zip(range(first, c.replications), pool.map(_one_conditional, jobs, chunksize=64)):
                waits[rep] = w
    else:
        for rep, job in zip(range(first, c.replications), jobs):
            waits[rep] = _one_conditional(job)
    mean = float(waits.mean())
    stderr = float(waits.std(ddof=1) / math.sqrt(c.replications)) if c.replications > 1 else 0.0
    return SimEstimate(mean=mean, stderr=stderr, n=c.replications, seed=c.seed)


def simulate_steady_state(
    p: SystemParams,
    c: SimConfig = SimConfig(),
    measured_class: int = 1,
) -> SteadyStateEstimate:
    """Long-run mean system time of ``measured_class`` customers.

    One long replication started empty: the first ``warmup_departures``
    system exits are discarded, the next ``horizon_departures`` are kept,
    and the kept ones are split into ``batches`` batches for the standard
    error.  Little's-law quantities are accumulated over the kept window
    across both classes.
    """
    p = validate_params(p)
    net = _Polling(p, _rep_rng(c.seed, 0))
    net.schedule_arrivals()
    kept = []
    pooled_sum = 0.0
    pooled_n = 0
    departures = 0
    target = c.warmup_departures + c.horizon_departures
    area0 = time0 = None
    while departures < target:
        _, kind = net.next_event()
        if kind == 0:
            served_class = net.serving[1] + 1
            out = net.step()
            departures += 1
            if departures == c.warmup_departures:
                area0, time0 = net.area, net.last_t
            if departures > c.warmup_departures:
                pooled_sum += out[1]
                pooled_n += 1
                if served_class == measured_class:
                    kept.append(out[1])
        else:
            net.step()
    kept_arr = np.asarray(kept)
    nb = c.batches
    usable = (kept_arr.shape[0] // nb) * nb
    batches = kept_arr[:usable].reshape(nb, -1).mean(axis=1)
    mean = float(kept_arr.mean())
    stderr = float(batches.std(ddof=1) / math.sqrt(nb))
    if area0 is None:
        area0, time0 = 0.0, 0.0
    window = net.last_t - time0
    time_avg_n = (net.area - area0) / window if window > 0 else float("nan")
    lam_total = p.lam[0] + p.lam[1]
    return SteadyStateEstimate(
        mean=mean,
        stderr=stderr,
        n=kept_arr.shape[0],
        seed=c.seed,
        time_avg_in_system=time_avg_n,
        throughput_mean_system_time=lam_total * (pooled_sum / pooled_n if pooled_n else float("nan")),
    )


_TRACE_HEADER = "time|kind|station|class|cid|L11|L21|L12|L22|S1|S2"


def write_trace(rows, path) -> None:
    """Write trace rows collected by ``simulate_conditional`` as pipe-
    delimited text, one event per line."""
    with open(path, "w") as fh:
        fh.write(_TRACE_HEADER + "\n")
        for r in rows:
            fh.write("|".join(str(x) for x in r) + "\n")
