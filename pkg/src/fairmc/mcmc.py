"""Metropolis-Hastings engine with pluggable proposal kernels.

Acceptance follows min(1, exp(-beta*dE) * Q(cur|cand)/Q(cand|cur)); kernels
that guarantee Q symmetry return no log-q values and the ratio drops out.
Three proposal families are provided:

* QeKernel    -- measure after short symmetric-unitary evolution from the
                 current basis state.  The evolution operator satisfies
                 U = U^T for every Trotter step, so |U_zz'| = |U_z'z| and the
                 proposal is exactly symmetric given the per-step draw of
                 (driver weight, time), which is made before proposing.
* MadeKernel  -- state-independent draws from a trained autoregressive net
                 (independence sampler; exact log-q both ways).
* single-spin-flip sweeps and the hybrid composite (one neural independence
  step followed by one N-flip sweep), which preserve the target because each
  sub-update does.

Step accounting: a neural or quantum-evolution update is 1 transition, a
sweep is N transitions, a hybrid step is N+1.  Traces record every transition
including rejections (the repeated state is what histograms must count).
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol, Union

import numpy as np

from fairmc import made as made_mod
from fairmc.ising import IsingModel, SpinConfig, Temperature, energy_of_bits
from fairmc.made import MadeNetwork
from fairmc.qsim import basis_state, evolve_fixed, measure_distribution

SYMMETRIC = None


@dataclass(frozen=True)
class Proposal:
    candidate: SpinConfig
    log_q_forward: float | None = SYMMETRIC
    log_q_reverse: float | None = SYMMETRIC


class ProposalKernel(Protocol):
    tag: str

    def propose(self, current: SpinConfig, rng) -> Proposal: ...


@dataclass
class ChainState:
    current: SpinConfig
    energy: float
    step_index: int = 0


@lru_cache(maxsize=256)
def _masks_of(model: IsingModel) -> tuple[tuple[int, float], ...]:
    return tuple(model.term_masks())


@lru_cache(maxsize=256)
def _site_masks_of(model: IsingModel) -> tuple[tuple[tuple[int, float], ...], ...]:
    tables: list[list[tuple[int, float]]] = [[] for _ in range(model.n_sites)]
    for mask, coeff in _masks_of(model):
        for s in range(model.n_sites):
            if mask >> s & 1:
                tables[s].append((mask, coeff))
    return tuple(tuple(t) for t in tables)


def chain_state(model: IsingModel, config: SpinConfig) -> ChainState:
    return ChainState(config, energy_of_bits(model, config.bits), 0)


# ---------------------------------------------------------------------------
# kernels


class UniformKernel:
    """Uniform independence proposals; trivially symmetric."""

    tag = "uniform"

    def __init__(self, n_sites: int):
        self.n_sites = n_sites

    def propose(self, current, rng) -> Proposal:
        if hasattr(rng, "getrandbits"):
            z = rng.getrandbits(self.n_sites)
        else:
            z = int(rng.integers(1 << self.n_sites))
        return Proposal(SpinConfig(z, self.n_sites))


class MadeKernel:
    """Independence sampler from a trained autoregressive network.

    The proposal ignores the current state; exact forward/reverse densities
    come from the network's log_prob, so the acceptance ratio is computable
    and detailed balance holds exactly.
    """

    tag = "made"

    def __init__(self, net: MadeNetwork):
        self.net = net

    def propose(self, current, rng) -> Proposal:
        candidate = made_mod.sample(self.net, rng)
        return Proposal(
            candidate,
            log_q_forward=made_mod.log_prob(self.net, candidate),
            log_q_reverse=made_mod.log_prob(self.net, current),
        )


def kernel_made(net: MadeNetwork) -> MadeKernel:
    return MadeKernel(net)


def proposal_floor(net: MadeNetwork) -> float:
    """Every state's proposal probability is at least EPS^N (clamped
    conditionals), which is what keeps independence chains irreducible."""
    return made_mod.EPS**net.n_inputs


@dataclass
class QeHyper:
    """Per-proposal draw ranges for the quantum-evolution kernel."""

    driver_weight_range: tuple[float, float] = (0.25, 0.6)
    time_range: tuple[float, float] = (2.0, 20.0)
    trotter_dt: float = 0.05


class QeKernel:
    """Propose by measuring exp(-iHt)|current> with a mixed Hamiltonian.

    H = (1-w) * alpha * H_P + w * H_d with (w, t) drawn fresh per proposal
    *before* evolving, so forward and reverse proposals share the same
    unitary and q(a|b) = q(b|a) exactly (U is complex-symmetric).
    """

    tag = "qe"

    def __init__(self, model: IsingModel, hyper: QeHyper | None = None):
        self.model = model
        self.hyper = hyper or QeHyper()

    def propose(self, current, rng) -> Proposal:
        lo, hi = self.hyper.driver_weight_range
        w = lo + (hi - lo) * rng.random()
        t0, t1 = self.hyper.time_range
        t = t0 + (t1 - t0) * rng.random()
        state = evolve_fixed(
            basis_state(self.model.n_sites, current.bits),
            self.model,
            w,
            t,
            dt=self.hyper.trotter_dt,
        )
        probs = measure_distribution(state).probs
        z = int(np.searchsorted(np.cumsum(probs), rng.random()))
        z = min(z, len(probs) - 1)
        return Proposal(SpinConfig(z, self.model.n_sites))


def kernel_qe_mcmc(model: IsingModel, hyper: QeHyper | None = None) -> QeKernel:
    return QeKernel(model, hyper)


# ---------------------------------------------------------------------------
# single steps


def _accept(log_ratio: float, rng) -> bool:
    return log_ratio >= 0.0 or rng.random() < math.exp(log_ratio)


def mh_step(
    chain: ChainState,
    model: IsingModel,
    t: Temperature,
    kernel: ProposalKernel,
    rng,
) -> ChainState:
    """One Metropolis-Hastings update; on rejection the state repeats."""
    prop = kernel.propose(chain.current, rng)
    cand_energy = energy_of_bits(model, prop.candidate.bits)
    log_ratio = -t.beta * (cand_energy - chain.energy)
    if prop.log_q_forward is not None:
        log_ratio += prop.log_q_reverse - prop.log_q_forward
    if _accept(log_ratio, rng):
        return ChainState(prop.candidate, cand_energy, chain.step_index + 1)
    return ChainState(chain.current, chain.energy, chain.step_index + 1)


def ssf_sweep(
    chain: ChainState, model: IsingModel, t: Temperature, rng
) -> ChainState:
    """N sequential single-spin-flip Metropolis updates in a fresh random
    site order; each flip uses the incremental energy difference."""
    site_masks = _site_masks_of(model)
    bits, e = chain.current.bits, chain.energy
    order = list(range(model.n_sites))
    rng.shuffle(order)
    beta = t.beta
    for site in order:
        d = 0.0
        for mask, coeff in site_masks[site]:
            d -= 2.0 * coeff * (1 - 2 * ((bits & mask).bit_count() & 1))
        if d <= 0.0 or rng.random() < math.exp(-beta * d):
            bits ^= 1 << site
            e += d
    return ChainState(SpinConfig(bits, model.n_sites), e, chain.step_index + 1)


def step_qaoa_hmc(
    chain: ChainState,
    model: IsingModel,
    t: Temperature,
    net: MadeNetwork,
    rng,
) -> ChainState:
    """Hybrid composite: one neural independence MH step, then one sweep.

    Both sub-updates preserve the Boltzmann distribution, hence so does the
    composition; the sweep explores the Hamming neighborhood of the proposed
    state, covering ground states the network under-represents.
    """
    after_made = mh_step(chain, model, t, MadeKernel(net), rng)
    return ssf_sweep(after_made, model, t, rng)


# ---------------------------------------------------------------------------
# chain traces


@dataclass
class ChainTrace:
    """Per-transition record of a chain run (append-only, thinned)."""

    n_sites: int
    states: np.ndarray  # uint64 packed bits, one per kept transition
    energies: np.ndarray
    accepted: np.ndarray
    tags: np.ndarray  # uint8 index into tag_legend
    transition_index: np.ndarray  # 1-based cumulative transition count
    tag_legend: tuple[str, ...]
    n_steps: int  # composite steps executed
    n_transitions: int
    thinning: int = 1
    rng_seed: int | None = None

    def __len__(self) -> int:
        return len(self.states)

    def configs(self) -> list[SpinConfig]:
        return [SpinConfig(int(z), self.n_sites) for z in self.states]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["step", "bitstring", "energy", "accepted", "kernel_tag"])
            for i in range(len(self.states)):
                w.writerow(
                    [
                        int(self.transition_index[i]),
                        SpinConfig(int(self.states[i]), self.n_sites).to_bitstring(),
                        f"{self.energies[i]:.12g}",
                        int(self.accepted[i]),
                        self.tag_legend[self.tags[i]],
                    ]
                )

    def save(self, path) -> None:
        np.savez_compressed(
            path,
            n_sites=self.n_sites,
            states=self.states,
            energies=self.energies,
            accepted=self.accepted,
            tags=self.tags,
            transition_index=self.transition_index,
            tag_legend=np.array(self.tag_legend),
            n_steps=self.n_steps,
            n_transitions=self.n_transitions,
            thinning=self.thinning,
            rng_seed=-1 if self.rng_seed is None else self.rng_seed,
        )

    @classmethod
    def load(cls, path) -> "ChainTrace":
        d = np.load(path, allow_pickle=False)
        seed = int(d["rng_seed"])
        return cls(
            n_sites=int(d["n_sites"]),
            states=d["states"],
            energies=d["energies"],
            accepted=d["accepted"],
            tags=d["tags"],
            transition_index=d["transition_index"],
            tag_legend=tuple(str(s) for s in d["tag_legend"]),
            n_steps=int(d["n_steps"]),
            n_transitions=int(d["n_transitions"]),
            thinning=int(d["thinning"]),
            rng_seed=None if seed == -1 else seed,
        )


class _TraceBuilder:
    def __init__(self, n_sites, thinning, rng_seed):
        self.n_sites = n_sites
        self.thinning = thinning
        self.rng_seed = rng_seed
        self.states: list[int] = []
        self.energies: list[float] = []
        self.accepted: list[bool] = []
        self.tags: list[int] = []
        self.tindex: list[int] = []
        self.legend: list[str] = []
        self._legend_ids: dict[str, int] = {}
        self.transitions = 0

    def tag_id(self, tag: str) -> int:
        if tag not in self._legend_ids:
            self._legend_ids[tag] = len(self.legend)
            self.legend.append(tag)
        return self._legend_ids[tag]

    def record(self, bits, e, acc, tag_id):
        self.transitions += 1
        if self.transitions % self.thinning == 0:
            self.states.append(bits)
            self.energies.append(e)
            self.accepted.append(acc)
            self.tags.append(tag_id)
            self.tindex.append(self.transitions)

    def build(self, n_steps) -> ChainTrace:
        return ChainTrace(
            n_sites=self.n_sites,
            states=np.array(self.states, dtype=np.uint64),
            energies=np.array(self.energies, dtype=np.float64),
            accepted=np.array(self.accepted, dtype=bool),
            tags=np.array(self.tags, dtype=np.uint8),
            transition_index=np.array(self.tindex, dtype=np.uint64),
            tag_legend=tuple(self.legend),
            n_steps=n_steps,
            n_transitions=self.transitions,
            thinning=self.thinning,
            rng_seed=self.rng_seed,
        )


@dataclass
class SsfSweepUpdate:
    """Composite update: one full sweep (N transitions) per step."""


@dataclass
class HybridUpdate:
    """One neural independence step plus one sweep (N+1 transitions)."""

    net: MadeNetwork


Update = Union[ProposalKernel, SsfSweepUpdate, HybridUpdate]

RANDOM_INIT = "random"


def run_chain(
    model: IsingModel,
    t: Temperature,
    update: Update,
    steps: int,
    init: SpinConfig | str = RANDOM_INIT,
    rng_seed: int = 0,
    thinning: int = 1,
) -> ChainTrace:
    """Run `steps` composite updates and record every transition.

    Deterministic for a fixed seed.  `init` is a SpinConfig or RANDOM_INIT
    for a uniform draw.  The trace keeps every `thinning`-th transition.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = random.Random(rng_seed)
    n = model.n_sites
    if init == RANDOM_INIT:
        bits = rng.getrandbits(n)
    elif isinstance(init, SpinConfig):
        if init.n != n:
            raise ValueError("init length does not match the model")
        bits = init.bits
    else:
        raise ValueError(f"bad init {init!r}")

    builder = _TraceBuilder(n, thinning, rng_seed)
    beta = t.beta
    site_masks = _site_masks_of(model)
    energy = energy_of_bits(model, bits)

    def do_sweep(bits, energy, tag_id):
        order = list(range(n))
        rng.shuffle(order)
        for site in order:
            d = 0.0
            for mask, coeff in site_masks[site]:
                d -= 2.0 * coeff * (1 - 2 * ((bits & mask).bit_count() & 1))
            if d <= 0.0 or rng.random() < math.exp(-beta * d):
                bits ^= 1 << site
                energy += d
                builder.record(bits, energy, True, tag_id)
            else:
                builder.record(bits, energy, False, tag_id)
        return bits, energy

    def do_kernel(kernel, tag_id, bits, energy):
        prop = kernel.propose(SpinConfig(bits, n), rng)
        cand_e = energy_of_bits(model, prop.candidate.bits)
        log_ratio = -beta * (cand_e - energy)
        if prop.log_q_forward is not None:
            log_ratio += prop.log_q_reverse - prop.log_q_forward
        if _accept(log_ratio, rng):
            bits, energy, acc = prop.candidate.bits, cand_e, True
        else:
            acc = False
        builder.record(bits, energy, acc, tag_id)
        return bits, energy

    if isinstance(update, SsfSweepUpdate):
        tag_id = builder.tag_id("ssf")
        for _ in range(steps):
            bits, energy = do_sweep(bits, energy, tag_id)
    elif isinstance(update, HybridUpdate):
        kernel = MadeKernel(update.net)
        made_tag = builder.tag_id("made")
        ssf_tag = builder.tag_id("ssf")
        for _ in range(steps):
            bits, energy = do_kernel(kernel, made_tag, bits, energy)
            bits, energy = do_sweep(bits, energy, ssf_tag)
    else:
        tag_id = builder.tag_id(getattr(update, "tag", "kernel"))
        for _ in range(steps):
            bits, energy = do_kernel(update, tag_id, bits, energy)

    return builder.build(steps)
