"""Domain types for the two-station, two-class tandem polling network.

The network has two customer classes (1, 2) arriving Poisson at station 1 and
flowing through station 2 before leaving.  Each station has a single server
that polls its two class queues cyclically with exhaustive service and zero
switchover time.  ``SystemParams`` carries the rates, ``ArrivalState`` the
snapshot an arriving (tagged) customer sees, and ``TruncationConfig`` the
numerical knobs used by the analytic machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import NonPositiveRate, UnstableSystem

# Scenario index -> (queue in service at station 1, queue in service at station 2)
SCENARIO_SERVERS = {1: (1, 1), 2: (1, 2), 3: (2, 1), 4: (2, 2)}

# Relabeling classes 1<->2 flips both server positions.
_RELABELED_SCENARIO = {1: 4, 2: 3, 3: 2, 4: 1}


@dataclass(frozen=True)
class SystemParams:
    """Arrival and service rates, with derived service times and loads.

    ``lam[i-1]`` is the arrival rate of class i at station 1 and
    ``mu[i-1][j-1]`` the service rate of class i at station j.
    """

    lam: tuple[float, float]
    mu: tuple[tuple[float, float], tuple[float, float]]

    @property
    def tau(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Mean service times, tau[i][j] = 1 / mu[i][j]."""
        return tuple(tuple(1.0 / m for m in row) for row in self.mu)

    def rho_class(self, i: int, j: int) -> float:
        """Offered load of class i at station j."""
        return self.lam[i - 1] / self.mu[i - 1][j - 1]

    def rho_station(self, j: int) -> float:
        """Total traffic intensity at station j."""
        return self.rho_class(1, j) + self.rho_class(2, j)

    @property
    def rho(self) -> tuple[float, float]:
        return (self.rho_station(1), self.rho_station(2))


@dataclass(frozen=True)
class ArrivalState:
    """Snapshot seen by the tagged customer at t = 0.

    ``la`` holds the queue lengths (L11, L21, L12, L22); ``m`` in {1..4}
    encodes which queue each server is busy with, and ``tagged_class`` is the
    class of the arriving customer.
    """

    la: tuple[int, int, int, int]
    m: int
    tagged_class: int = 1

    def __post_init__(self):
        if self.m not in SCENARIO_SERVERS:
            raise ValueError(f"scenario index m must be in 1..4, got {self.m}")
        if self.tagged_class not in (1, 2):
            raise ValueError(f"tagged_class must be 1 or 2, got {self.tagged_class}")
        if len(self.la) != 4 or any(x < 0 or x != int(x) for x in self.la):
            raise ValueError(f"la must be four non-negative integers, got {self.la}")

    @property
    def servers(self) -> tuple[int, int]:
        """(queue served at station 1, queue served at station 2)."""
        return SCENARIO_SERVERS[self.m]


@dataclass(frozen=True)
class TruncationConfig:
    """Numerical tolerances and truncation bounds for the analytic solvers."""

    n_max: int = 80
    eps: float = 1e-3
    series_tol: float = 1e-10
    quad_tol: float = 1e-8
    t_max_factor: float = 50.0
    max_depth: int = 50

    def __post_init__(self):
        if self.n_max < 10:
            raise ValueError("n_max must be >= 10")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        for name in ("series_tol", "quad_tol"):
            v = getattr(self, name)
            if not 0.0 < v <= 1e-4:
                raise ValueError(f"{name} must lie in (0, 1e-4]")


def validate_params(p: SystemParams) -> SystemParams:
    """Check positivity and stability of a parameter set.

    Returns the parameter object unchanged (derived quantities are computed
    on demand, so validation is idempotent).  Raises ``NonPositiveRate`` for
    bad rates and ``UnstableSystem`` when rho_j >= 1 at either station.
    """
    rates = list(p.lam) + [m for row in p.mu for m in row]
    if len(p.lam) != 2 or len(p.mu) != 2 or any(len(row) != 2 for row in p.mu):
        raise ValueError("expected 2 arrival rates and a 2x2 service rate matrix")
    for r in rates:
        if not (isinstance(r, (int, float)) and math.isfinite(r) and r > 0):
            raise NonPositiveRate(f"all rates must be positive and finite, got {r!r}")
    for j in (1, 2):
        if p.rho_station(j) >= 1.0:
            raise UnstableSystem(
                f"station {j} is unstable: rho_{j} = {p.rho_station(j):.6f} >= 1"
            )
    return p


def swap_class_labels(s: ArrivalState, p: SystemParams) -> tuple[ArrivalState, SystemParams]:
    """Exchange the class labels 1 <-> 2 everywhere.

    Queue lengths swap pairwise at each station (L11 <-> L21, L12 <-> L22),
    both server positions flip (m: 1<->4, 2<->3), the per-class rates swap,
    and the tagged class flips.  The map is an involution.
    """
    l11, l21, l12, l22 = s.la
    swapped = ArrivalState(
        la=(l21, l11, l22, l12),
        m=_RELABELED_SCENARIO[s.m],
        tagged_class=3 - s.tagged_class,
    )
    swapped_params = replace(
        p,
        lam=(p.lam[1], p.lam[0]),
        mu=(p.mu[1], p.mu[0]),
    )
    return swapped, swapped_params


def relabel_for_class2(s: ArrivalState, p: SystemParams) -> tuple[ArrivalState, SystemParams]:
    """Map a class-2 tagged customer onto the equivalent class-1 problem.

    The analysis is written for a class-1 tagged customer; a class-2 arrival
    is handled by relabeling the classes.  Class-1 inputs pass through
    unchanged.
    """
    if s.tagged_class == 1:
        return s, p
    return swap_class_labels(s, p)
