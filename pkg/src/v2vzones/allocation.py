"""RB apportionment and the per-zone swap-matching game with externalities."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np


def hare_niemeyer(loads, n_rbs: int) -> list[int]:
    """Largest-remainder apportionment of n_rbs across zones, proportional to load.

    Every zone gets at least one RB; leftover RBs go to the largest fractional
    remainders, ties to the lower zone index. All-zero loads fall back to an
    equal split with the remainder going to the lowest indices.
    """
    loads = [float(x) for x in loads]
    z = len(loads)
    if z == 0:
        raise ValueError("need at least one zone")
    if n_rbs < z:
        raise ValueError(f"cannot give {z} zones at least one RB each from {n_rbs}")
    if any(x < 0 for x in loads):
        raise ValueError("loads must be non-negative")
    total = sum(loads)
    if total <= 0:
        quotas = [n_rbs / z] * z
    else:
        quotas = [n_rbs * x / total for x in loads]
    awards = [int(math.floor(q)) for q in quotas]
    remainders = [q - a for q, a in zip(quotas, awards)]
    leftover = n_rbs - sum(awards)
    order = sorted(range(z), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        awards[i] += 1
    # minimum-1 repair: take from the largest award (ties to the higher index)
    while any(a == 0 for a in awards):
        needy = min(i for i, a in enumerate(awards) if a == 0)
        donor = max(range(z), key=lambda i: (awards[i], i))
        awards[donor] -= 1
        awards[needy] += 1
    return awards


def contiguous_pools(quotas) -> list[np.ndarray]:
    """Assign RB ids 0..N-1 to zones as contiguous ranges in zone order."""
    pools = []
    start = 0
    for q in quotas:
        pools.append(np.arange(start, start + q))
        start += q
    return pools


def zone_cost(load_sum: float, satisfied: int, size: int, alpha: float,
              beta: float, cost_cap: float = 1e9) -> float:
    """Per-zone cost: load^alpha / (satisfied fraction)^beta, capped when none satisfied."""
    if size < 1:
        raise ValueError("zone must contain at least one pair")
    if satisfied <= 0:
        return cost_cap
    return (load_sum ** alpha) / ((satisfied / size) ** beta)


@dataclass
class ZoneScore:
    load_sum: float
    satisfied: int
    size: int
    cost: float

    @property
    def utility(self) -> float:
        return -self.cost


@dataclass(frozen=True)
class ZoneProblem:
    """Window snapshot a zone's matching game is solved against.

    gains[i, j] is the linear power gain from the transmitter of pair j to the
    receiver of pair i; both indices are zone-local.
    """

    gains: np.ndarray
    influx_bps: np.ndarray
    n_rbs: int
    tx_power_w: float
    noise_w: float          # noise density times RB bandwidth
    bandwidth_hz: float
    target_sinr: float      # linear
    rho_cap: float = 1.0
    cost_cap: float = 1e9
    alpha: float = 1.0
    beta: float = 3.0

    @property
    def size(self) -> int:
        return int(self.gains.shape[0])

    def received_power(self) -> np.ndarray:
        return self.tx_power_w * self.gains

    def sinr(self, assign: np.ndarray) -> np.ndarray:
        """Per-pair SINR on its matched RB, with co-channel interference from assign."""
        pg = self.received_power()
        onehot = np.zeros((self.size, self.n_rbs))
        onehot[np.arange(self.size), assign] = 1.0
        per_rb = pg @ onehot                       # total received at rx i from RB-m users
        own = np.diag(pg)
        interference = per_rb[np.arange(self.size), assign] - own
        return own / (interference + self.noise_w)

    def loads(self, assign: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(per-pair matched-RB time load, satisfied mask); unsatisfied pairs load rho_cap."""
        gamma = self.sinr(assign)
        sat = gamma >= self.target_sinr
        r = self.bandwidth_hz * np.log2(1.0 + gamma)
        with np.errstate(divide="ignore"):
            rho = np.where(r > 0, self.influx_bps / np.where(r > 0, r, 1.0), np.inf)
        rho = np.where(sat & np.isfinite(rho), rho, self.rho_cap)
        return rho, sat

    def utilities(self, assign: np.ndarray) -> np.ndarray:
        """Pair utilities U = -rho under the given matching."""
        rho, _ = self.loads(assign)
        return -rho

    def rb_utility(self, assign: np.ndarray, rb: int) -> float:
        u = self.utilities(assign)
        return float(np.sum(u[assign == rb]))

    def zone_utility(self, assign: np.ndarray) -> float:
        rho, sat = self.loads(assign)
        return -zone_cost(float(np.sum(rho)), int(np.sum(sat)), self.size,
                          self.alpha, self.beta, self.cost_cap)

    def score(self, assign: np.ndarray) -> ZoneScore:
        rho, sat = self.loads(assign)
        cost = zone_cost(float(np.sum(rho)), int(np.sum(sat)), self.size,
                         self.alpha, self.beta, self.cost_cap)
        return ZoneScore(float(np.sum(rho)), int(np.sum(sat)), self.size, cost)


def swap(assign: np.ndarray, i: int, j: int) -> np.ndarray:
    """Exchange the RBs of pairs i and j, all other assignments unchanged."""
    if i == j:
        raise ValueError("cannot swap a pair with itself")
    out = assign.copy()
    out[i], out[j] = assign[j], assign[i]
    return out


@dataclass
class MatchResult:
    assign: np.ndarray
    utility: float
    evaluations: int
    accepted: int
    converged: bool
    utility_trace: list[float] = field(default_factory=list)


def solve_zone_matching(problem: ZoneProblem, rng: np.random.Generator,
                        count_max: int = 500, vacancy_moves: bool = False,
                        assign0: np.ndarray | None = None) -> MatchResult:
    """Random initial matching, then utility-improving swaps until stable.

    Candidate pair swaps (plus single-pair moves to emptier RBs when
    vacancy_moves is set) are scanned in shuffled round-robin passes; a swap is
    applied iff it strictly increases the zone utility. Terminates when a full
    pass accepts nothing or after count_max evaluations.
    """
    kz = problem.size
    if assign0 is None:
        assign = rng.integers(0, problem.n_rbs, size=kz)
    else:
        assign = np.asarray(assign0, dtype=int).copy()
    w = problem.zone_utility(assign)
    trace = [w]
    evals = 0
    accepted = 0
    converged = kz < 2 and not vacancy_moves
    pairs = list(itertools.combinations(range(kz), 2))

    while evals < count_max:
        candidates = list(pairs)
        if vacancy_moves:
            occ = np.bincount(assign, minlength=problem.n_rbs)
            for i in range(kz):
                for n in range(problem.n_rbs):
                    if occ[n] < occ[assign[i]] and n != assign[i]:
                        candidates.append((i, -1 - n))  # encoded single-pair move
        if not candidates:
            converged = True
            break
        order = rng.permutation(len(candidates))
        improved = False
        exhausted = False
        for idx in order:
            if evals >= count_max:
                exhausted = True
                break
            i, j = candidates[idx]
            if j >= 0:
                if assign[i] == assign[j]:
                    continue  # same-RB swap is the identity
                trial = swap(assign, i, j)
            else:
                trial = assign.copy()
                trial[i] = -1 - j
            evals += 1
            w_new = problem.zone_utility(trial)
            if w_new > w:
                assign = trial
                w = w_new
                trace.append(w)
                accepted += 1
                improved = True
        if not improved and not exhausted:
            converged = True
            break
        if exhausted:
            break
    else:
        converged = converged or not pairs
    return MatchResult(assign, w, evals, accepted, converged, trace)


def is_pairwise_stable(problem: ZoneProblem, assign: np.ndarray):
    """Check the four-player swap-stability conditions.

    Unstable iff some swap weakly improves both pairs and both RBs, strictly
    improves at least one of the four, and raises the zone utility. Returns
    (stable, witness) where witness is the offending (i, j) or None.
    """
    kz = problem.size
    u_before = problem.utilities(assign)
    w_before = problem.zone_utility(assign)
    rb_before = {n: float(np.sum(u_before[assign == n])) for n in set(assign.tolist())}
    for i, j in itertools.combinations(range(kz), 2):
        n_i, n_j = int(assign[i]), int(assign[j])
        if n_i == n_j:
            continue
        trial = swap(assign, i, j)
        u_after = problem.utilities(trial)
        players_before = [u_before[i], u_before[j], rb_before[n_i], rb_before[n_j]]
        players_after = [u_after[i], u_after[j],
                         float(np.sum(u_after[trial == n_i])),
                         float(np.sum(u_after[trial == n_j]))]
        weak = all(a >= b for a, b in zip(players_after, players_before))
        strict = any(a > b for a, b in zip(players_after, players_before))
        if weak and strict and problem.zone_utility(trial) > w_before:
            return False, (i, j)
    return True, None


def has_improving_swap(problem: ZoneProblem, assign: np.ndarray) -> bool:
    """Exhaustive audit: does any pairwise swap strictly raise the zone utility?"""
    w = problem.zone_utility(assign)
    for i, j in itertools.combinations(range(problem.size), 2):
        if assign[i] == assign[j]:
            continue
        if problem.zone_utility(swap(assign, i, j)) > w:
            return True
    return False


def brute_force_best(problem: ZoneProblem) -> tuple[float, np.ndarray]:
    """Optimal zone utility over all n_rbs^size matchings (small instances only)."""
    best_w = -math.inf
    best = None
    for combo in itertools.product(range(problem.n_rbs), repeat=problem.size):
        assign = np.asarray(combo, dtype=int)
        w = problem.zone_utility(assign)
        if w > best_w:
            best_w = w
            best = assign
    return best_w, best
