"""Classical baselines: PT-ICM for 2-body models, WalkSAT/WalkSATlm for CNF.

PT-ICM runs two independent replica families over a temperature ladder;
neighboring temperatures exchange configurations with probability
min(1, exp((b_i - b_j)(E_i - E_j))), and same-temperature pairs across the
families undergo Houdayer cluster moves, which exactly conserve the pair's
total energy.  Cluster moves need an interaction graph, so models with
3-body terms are rejected.

WalkSAT flips variables of uniformly chosen unsatisfied clauses: a random
variable with probability `noise_p`, otherwise the variant's greedy pick.
Enumeration mode alternates solving with blocking clauses until the exact
enumerator confirms the blocked formula UNSAT.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from fairmc.ising import IsingModel, SpinConfig, energy_of_bits
from fairmc.mcmc import ChainTrace, _TraceBuilder
from fairmc.sat import CnfFormula, add_blocking_clause, enumerate_solutions


class UnsupportedModelError(ValueError):
    """Cluster moves require an interaction graph: 2-body terms only."""


# ---------------------------------------------------------------------------
# PT-ICM


def geometric_beta_ladder(
    n_temps: int = 8, beta_min: float = 0.1, beta_max: float = 10.0
) -> tuple[float, ...]:
    return tuple(np.geomspace(beta_min, beta_max, n_temps).tolist())


@dataclass
class PtIcmConfig:
    replica_betas: tuple[float, ...] = field(default_factory=geometric_beta_ladder)
    sweeps_between_exchanges: int = 1
    icm_every: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        # a single temperature degenerates to a plain SSF chain (useful for
        # validation); real runs want >= 2
        betas = tuple(self.replica_betas)
        if len(betas) < 1:
            raise ValueError("need at least one temperature")
        if list(betas) != sorted(betas):
            raise ValueError("replica_betas must be ascending")
        self.replica_betas = betas


@dataclass
class PtIcmStats:
    """Exchange/cluster accounting emitted alongside the coldest trace."""

    rounds: int = 0
    exchange_attempts: int = 0
    exchange_accepts: int = 0
    icm_attempts: int = 0
    icm_moves: int = 0  # attempts with a nonempty cluster
    total_transitions: int = 0  # all replicas: sweeps*N + exchanges + icm
    coldest_transitions: int = 0  # coldest replica only


def _interaction_adjacency(model: IsingModel) -> list[list[int]]:
    if model.max_order > 2:
        raise UnsupportedModelError(
            "PT-ICM needs a pairwise interaction graph; model has "
            f"{model.max_order}-body terms"
        )
    adj: list[list[int]] = [[] for _ in range(model.n_sites)]
    for t in model.terms:
        if len(t.sites) == 2:
            i, j = t.sites
            adj[i].append(j)
            adj[j].append(i)
    return adj


def _houdayer_cluster(bits_a: int, bits_b: int, adj, start: int) -> int:
    """Mask of the start site's connected component inside the anti-aligned
    (overlap -1) domain of the two replicas."""
    diff = bits_a ^ bits_b
    cluster = 1 << start
    stack = [start]
    while stack:
        i = stack.pop()
        for j in adj[i]:
            jb = 1 << j
            if diff & jb and not cluster & jb:
                cluster |= jb
                stack.append(j)
    return cluster


def icm_move(
    replica_a: SpinConfig, replica_b: SpinConfig, model: IsingModel, rng
) -> tuple[SpinConfig, SpinConfig]:
    """Houdayer move: flip one anti-aligned cluster in both replicas.

    Flipping a whole overlap(-1) component changes E_a and E_b by opposite
    amounts, so E_a + E_b is invariant; with no anti-aligned site the move is
    a no-op.
    """
    adj = _interaction_adjacency(model)
    diff = replica_a.bits ^ replica_b.bits
    if diff == 0:
        return replica_a, replica_b
    sites = [i for i in range(model.n_sites) if diff >> i & 1]
    start = sites[int(rng.random() * len(sites)) % len(sites)]
    cluster = _houdayer_cluster(replica_a.bits, replica_b.bits, adj, start)
    return (
        SpinConfig(replica_a.bits ^ cluster, model.n_sites),
        SpinConfig(replica_b.bits ^ cluster, model.n_sites),
    )


def pt_icm_run(
    model: IsingModel,
    cfg: PtIcmConfig,
    steps: int,
    init: SpinConfig | None = None,
) -> tuple[ChainTrace, PtIcmStats]:
    """`steps` PT rounds; returns the coldest (largest-beta) replica's trace
    from the first family plus exchange/ICM statistics.

    Each round: SSF sweeps per replica, neighbor exchanges within each
    family, and (every icm_every rounds) one Houdayer move per temperature
    across the families.
    """
    adj = _interaction_adjacency(model)  # validates 2-body up front
    betas = cfg.replica_betas
    n_temps = len(betas)
    n = model.n_sites
    rng = random.Random(cfg.rng_seed)

    site_masks: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for mask, coeff in model.term_masks():
        for s in range(n):
            if mask >> s & 1:
                site_masks[s].append((mask, coeff))

    # two families x n_temps replicas
    bits = [[rng.getrandbits(n) for _ in range(n_temps)] for _ in range(2)]
    if init is not None:
        bits = [[init.bits for _ in range(n_temps)] for _ in range(2)]
    energies = [[energy_of_bits(model, z) for z in fam] for fam in bits]

    cold = n_temps - 1
    builder = _TraceBuilder(n, 1, cfg.rng_seed)
    ssf_tag = builder.tag_id("ssf")
    ex_tag = builder.tag_id("exchange")
    icm_tag = builder.tag_id("icm")
    stats = PtIcmStats()

    def sweep(fam, ti):
        z, e = bits[fam][ti], energies[fam][ti]
        beta = betas[ti]
        record = fam == 0 and ti == cold
        order = list(range(n))
        rng.shuffle(order)
        for site in order:
            d = 0.0
            for mask, coeff in site_masks[site]:
                d -= 2.0 * coeff * (1 - 2 * ((z & mask).bit_count() & 1))
            if d <= 0.0 or rng.random() < math.exp(-beta * d):
                z ^= 1 << site
                e += d
                if record:
                    builder.record(z, e, True, ssf_tag)
            elif record:
                builder.record(z, e, False, ssf_tag)
        bits[fam][ti], energies[fam][ti] = z, e

    for round_idx in range(steps):
        stats.rounds += 1
        for fam in (0, 1):
            for ti in range(n_temps):
                for _ in range(cfg.sweeps_between_exchanges):
                    sweep(fam, ti)
        stats.total_transitions += 2 * n_temps * cfg.sweeps_between_exchanges * n

        for fam in (0, 1):
            for ti in range(n_temps - 1):
                stats.exchange_attempts += 1
                stats.total_transitions += 1
                db = betas[ti] - betas[ti + 1]
                de = energies[fam][ti] - energies[fam][ti + 1]
                accepted = db * de >= 0.0 or rng.random() < math.exp(db * de)
                if accepted:
                    stats.exchange_accepts += 1
                    bits[fam][ti], bits[fam][ti + 1] = bits[fam][ti + 1], bits[fam][ti]
                    energies[fam][ti], energies[fam][ti + 1] = (
                        energies[fam][ti + 1],
                        energies[fam][ti],
                    )
                if fam == 0 and ti + 1 == cold:
                    builder.record(
                        bits[0][cold], energies[0][cold], accepted, ex_tag
                    )

        if cfg.icm_every > 0 and (round_idx + 1) % cfg.icm_every == 0:
            for ti in range(n_temps):
                stats.icm_attempts += 1
                stats.total_transitions += 1
                a = SpinConfig(bits[0][ti], n)
                b = SpinConfig(bits[1][ti], n)
                new_a, new_b = icm_move(a, b, model, rng)
                if new_a.bits != a.bits:
                    stats.icm_moves += 1
                    bits[0][ti], bits[1][ti] = new_a.bits, new_b.bits
                    energies[0][ti] = energy_of_bits(model, new_a.bits)
                    energies[1][ti] = energy_of_bits(model, new_b.bits)
                if ti == cold:
                    builder.record(
                        bits[0][cold], energies[0][cold], new_a.bits != a.bits, icm_tag
                    )

    trace = builder.build(steps)
    stats.coldest_transitions = trace.n_transitions
    return trace, stats


# ---------------------------------------------------------------------------
# WalkSAT


@dataclass
class WalkSatConfig:
    noise_p: float = 0.5
    max_flips: int = 10**6
    variant: str = "plain"  # "plain" | "lm"
    lm_weights: tuple[float, float] = (6.0, 1.0)
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.noise_p <= 1.0:
            raise ValueError("noise_p must be in [0, 1]")
        if self.variant not in ("plain", "lm"):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass
class WalkSatResult:
    solution: SpinConfig | None  # None = NOT_FOUND within the flip budget
    flips_used: int
    unsat_trace: list[int]  # unsatisfied-clause count after each flip

    @property
    def found(self) -> bool:
        return self.solution is not None


class _Assignment:
    """Incremental truth-count bookkeeping for flip scoring."""

    def __init__(self, formula: CnfFormula, bits: int):
        self.n = formula.n_vars
        self.bits = bits
        self.clauses = formula.clauses
        # occ[v] = [(clause index, literal is positive)]
        self.occ: list[list[tuple[int, bool]]] = [[] for _ in range(self.n)]
        self.true_count = [0] * len(self.clauses)
        for ci, c in enumerate(self.clauses):
            for lit in c.literals:
                self.occ[lit.variable].append((ci, not lit.negated))
                if (bits >> lit.variable & 1) == (0 if lit.negated else 1):
                    self.true_count[ci] += 1
        self.unsat = [ci for ci, tc in enumerate(self.true_count) if tc == 0]
        self.unsat_pos = {ci: i for i, ci in enumerate(self.unsat)}

    def lit_true(self, v: int, positive: bool) -> bool:
        return (self.bits >> v & 1) == (1 if positive else 0)

    def scores(self, v: int) -> tuple[int, int, int]:
        """(break, make1, make2) when flipping variable v."""
        brk = mk1 = mk2 = 0
        for ci, positive in self.occ[v]:
            tc = self.true_count[ci]
            if self.lit_true(v, positive):
                if tc == 1:
                    brk += 1
            else:
                if tc == 0:
                    mk1 += 1
                elif tc == 1:
                    mk2 += 1
        return brk, mk1, mk2

    def flip(self, v: int) -> None:
        for ci, positive in self.occ[v]:
            if self.lit_true(v, positive):
                self.true_count[ci] -= 1
                if self.true_count[ci] == 0:
                    self.unsat_pos[ci] = len(self.unsat)
                    self.unsat.append(ci)
            else:
                self.true_count[ci] += 1
                if self.true_count[ci] == 1:
                    pos = self.unsat_pos.pop(ci)
                    last = self.unsat[-1]
                    self.unsat[pos] = last
                    if last != ci:
                        self.unsat_pos[last] = pos
                    self.unsat.pop()
        self.bits ^= 1 << v


def _pick_variable(asg: _Assignment, clause_vars, cfg: WalkSatConfig, rng) -> int:
    if rng.random() < cfg.noise_p:
        return clause_vars[rng.randrange(len(clause_vars))]
    w1, w2 = cfg.lm_weights
    best, best_key = [], None
    for v in clause_vars:
        brk, mk1, mk2 = asg.scores(v)
        if cfg.variant == "plain":
            key = (brk - mk1,)  # net change in unsatisfied clauses
        else:
            key = (brk, -(w1 * mk1 + w2 * mk2))  # freebies first, then lmake
        if best_key is None or key < best_key:
            best, best_key = [v], key
        elif key == best_key:
            best.append(v)
    return best[rng.randrange(len(best))]


def walksat_run(
    formula: CnfFormula,
    cfg: WalkSatConfig,
    rng: random.Random | None = None,
    record_unsat: bool = False,
) -> WalkSatResult:
    """Stochastic local search from a uniform random assignment."""
    rng = rng or random.Random(cfg.rng_seed)
    asg = _Assignment(formula, rng.getrandbits(formula.n_vars))
    unsat_trace: list[int] = []
    for flips in range(cfg.max_flips + 1):
        if not asg.unsat:
            return WalkSatResult(SpinConfig(asg.bits, formula.n_vars), flips, unsat_trace)
        if flips == cfg.max_flips:
            break
        ci = asg.unsat[rng.randrange(len(asg.unsat))]
        v = _pick_variable(asg, asg.clauses[ci].variables(), cfg, rng)
        asg.flip(v)
        if record_unsat:
            unsat_trace.append(len(asg.unsat))
    return WalkSatResult(None, cfg.max_flips, unsat_trace)


@dataclass
class EnumerationResult:
    solutions: list[SpinConfig]
    total_flips: int  # includes the final failed run on the UNSAT remainder
    flips_at_solution: list[int]  # cumulative flips when each solution appeared
    complete: bool  # exact enumerator confirmed the blocked formula UNSAT

    @property
    def flips_to_last_solution(self) -> int:
        return self.flips_at_solution[-1] if self.flips_at_solution else 0


def walksat_enumerate(formula: CnfFormula, cfg: WalkSatConfig) -> EnumerationResult:
    """Enumerate solutions by repeated solving with blocking clauses.

    Terminates cleanly when a run exhausts its flip budget and the exact
    enumerator confirms the current formula UNSAT; if it is still
    satisfiable, the result is flagged incomplete rather than raised.
    """
    rng = random.Random(cfg.rng_seed)
    solutions: list[SpinConfig] = []
    flips_at: list[int] = []
    total = 0
    current = formula
    while True:
        res = walksat_run(current, cfg, rng=rng)
        total += res.flips_used
        if res.found:
            solutions.append(res.solution)
            flips_at.append(total)
            current = add_blocking_clause(current, res.solution)
        else:
            complete = len(enumerate_solutions(current)) == 0
            return EnumerationResult(solutions, total, flips_at, complete)
