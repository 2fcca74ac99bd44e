"""Classical Ising energy functions with up to k-body interaction terms.

Energies have the form

    E(s) = offset + sum_t c_t * prod_{i in sites(t)} s_i,     s_i in {+1, -1}

Spin configurations are bit-packed into a single integer with the convention

    bit b_i = 1  <=>  s_i = -1,   i.e.  s_i = 1 - 2*b_i,

so bit i of the packed word is also the Boolean value x_i used by the SAT
mapping (x = (1 - s)/2).  All values are immutable; operations are pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_SITES = 64
MAX_BRUTEFORCE_SITES = 24

# tie tolerance for ground-state detection on non-integer models
DEGENERACY_ATOL = 1e-9


class DimensionError(ValueError):
    """Configuration length does not match the model."""


class CapacityError(ValueError):
    """Problem too large for exhaustive enumeration."""


@dataclass(frozen=True)
class SpinConfig:
    """Bit-packed assignment of n spins, bit i = 1 meaning s_i = -1."""

    bits: int
    n: int

    def __post_init__(self):
        if not 0 < self.n <= MAX_SITES:
            raise ValueError(f"n must be in 1..{MAX_SITES}, got {self.n}")
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError("bits out of range for n sites")

    @classmethod
    def from_spins(cls, spins: Sequence[int]) -> "SpinConfig":
        bits = 0
        for i, s in enumerate(spins):
            if s == -1:
                bits |= 1 << i
            elif s != 1:
                raise ValueError(f"spin values must be +1/-1, got {s}")
        return cls(bits, len(spins))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "SpinConfig":
        """Build from Boolean values x_i (x=1 <=> s=-1)."""
        packed = 0
        for i, b in enumerate(bits):
            if b:
                packed |= 1 << i
        return cls(packed, len(bits))

    def spin(self, site: int) -> int:
        return 1 - 2 * ((self.bits >> site) & 1)

    def bit(self, site: int) -> int:
        return (self.bits >> site) & 1

    def spins(self) -> np.ndarray:
        return 1 - 2 * self.bit_array()

    def bit_array(self) -> np.ndarray:
        z = np.uint64(self.bits)
        return ((z >> np.arange(self.n, dtype=np.uint64)) & np.uint64(1)).astype(np.int64)

    def flip(self, site: int) -> "SpinConfig":
        if not 0 <= site < self.n:
            raise IndexError(f"site {site} out of range for {self.n} sites")
        return SpinConfig(self.bits ^ (1 << site), self.n)

    def invert(self) -> "SpinConfig":
        return SpinConfig(self.bits ^ ((1 << self.n) - 1), self.n)

    def to_bitstring(self) -> str:
        """x_0 x_1 ... x_{n-1}, left to right."""
        return "".join(str((self.bits >> i) & 1) for i in range(self.n))

    @classmethod
    def from_bitstring(cls, s: str) -> "SpinConfig":
        return cls.from_bits([int(c) for c in s])

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class IsingTerm:
    """One k-body coupling: coefficient times the product of spins at `sites`."""

    sites: tuple[int, ...]
    coeff: float

    def __post_init__(self):
        if len(self.sites) == 0:
            raise ValueError("terms must touch at least one site (use the model offset)")
        if list(self.sites) != sorted(set(self.sites)):
            raise ValueError(f"sites must be strictly increasing, got {self.sites}")


@dataclass(frozen=True)
class IsingModel:
    """Immutable k-body Ising energy function in canonical (merged) form."""

    n_sites: int
    terms: tuple[IsingTerm, ...]
    offset: float = 0.0

    def __post_init__(self):
        if not 0 < self.n_sites <= MAX_SITES:
            raise ValueError(f"n_sites must be in 1..{MAX_SITES}")
        for t in self.terms:
            if t.sites[-1] >= self.n_sites:
                raise ValueError(f"term {t.sites} exceeds n_sites={self.n_sites}")

    @classmethod
    def from_terms(
        cls,
        n_sites: int,
        terms: Iterable[tuple[Sequence[int], float]],
        offset: float = 0.0,
    ) -> "IsingModel":
        """Merge duplicate site sets and drop exact zeros -> canonical form."""
        merged: dict[tuple[int, ...], float] = {}
        for sites, coeff in terms:
            key = tuple(sorted(sites))
            if len(set(key)) != len(key):
                raise ValueError(f"repeated site in term {sites}")
            merged[key] = merged.get(key, 0.0) + coeff
        canon = tuple(
            IsingTerm(sites, c)
            for sites, c in sorted(merged.items(), key=lambda kv: (len(kv[0]), kv[0]))
            if c != 0.0
        )
        return cls(n_sites, canon, offset)

    @property
    def max_order(self) -> int:
        return max((len(t.sites) for t in self.terms), default=0)

    def is_integer(self) -> bool:
        vals = [t.coeff for t in self.terms] + [self.offset]
        return all(abs(v - round(v)) < 1e-12 for v in vals)

    def term_masks(self) -> list[tuple[int, float]]:
        """(bit mask over sites, coefficient) per term, for popcount evaluation."""
        out = []
        for t in self.terms:
            mask = 0
            for s in t.sites:
                mask |= 1 << s
            out.append((mask, t.coeff))
        return out

    def to_json_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "offset": self.offset,
            "terms": [{"sites": list(t.sites), "coeff": t.coeff} for t in self.terms],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "IsingModel":
        return cls.from_terms(
            d["n_sites"],
            [(t["sites"], t["coeff"]) for t in d["terms"]],
            d.get("offset", 0.0),
        )

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=1)

    @classmethod
    def load(cls, path) -> "IsingModel":
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


@dataclass(frozen=True)
class Temperature:
    """Inverse temperature beta > 0."""

    beta: float

    def __post_init__(self):
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise ValueError(f"beta must be positive and finite, got {self.beta}")


def _check_dims(model: IsingModel, config: SpinConfig) -> None:
    if config.n != model.n_sites:
        raise DimensionError(f"config has {config.n} spins, model has {model.n_sites}")


def energy_of_bits(model: IsingModel, bits: int) -> float:
    """Energy of a raw bit-packed state (hot path for samplers)."""
    e = model.offset
    for mask, coeff in model.term_masks():
        # product of spins = (-1)^{popcount of down spins in the term}
        e += coeff * (1 - 2 * ((bits & mask).bit_count() & 1))
    return e


def energy(model: IsingModel, config: SpinConfig) -> float:
    """E(s) = offset + sum_t c_t * prod_{i in t} s_i."""
    _check_dims(model, config)
    return energy_of_bits(model, config.bits)


def flip_tables(model: IsingModel) -> list[list[tuple[int, float]]]:
    """Per-site list of (term mask, coeff) for the terms containing that site."""
    tables: list[list[tuple[int, float]]] = [[] for _ in range(model.n_sites)]
    for mask, coeff in model.term_masks():
        for s in range(model.n_sites):
            if mask >> s & 1:
                tables[s].append((mask, coeff))
    return tables


def delta_energy_flip(model: IsingModel, config: SpinConfig, site: int) -> float:
    """E(flip(config, site)) - E(config), touching only terms containing `site`."""
    _check_dims(model, config)
    if not 0 <= site < model.n_sites:
        raise IndexError(f"site {site} out of range")
    return delta_energy_flip_bits(model.term_masks(), config.bits, site)


def delta_energy_flip_bits(
    term_masks: Sequence[tuple[int, float]], bits: int, site: int
) -> float:
    """Flip delta from precomputed (mask, coeff) pairs; caller filters by site or not."""
    d = 0.0
    site_bit = 1 << site
    for mask, coeff in term_masks:
        if mask & site_bit:
            d -= 2.0 * coeff * (1 - 2 * ((bits & mask).bit_count() & 1))
    return d


def boltzmann_weight(model: IsingModel, config: SpinConfig, t: Temperature) -> float:
    """Unnormalized exp(-beta * E); the partition function is never computed."""
    return float(np.exp(-t.beta * energy(model, config)))


@lru_cache(maxsize=64)
def basis_energies(model: IsingModel) -> np.ndarray:
    """Energies of all 2^n basis states, indexed by the packed-bits integer.

    Requires n_sites <= MAX_BRUTEFORCE_SITES.  Cached per model because the
    statevector layers and brute-force enumeration both consume it.
    """
    n = model.n_sites
    if n > MAX_BRUTEFORCE_SITES:
        raise CapacityError(f"basis enumeration limited to {MAX_BRUTEFORCE_SITES} sites")
    z = np.arange(1 << n, dtype=np.uint64)
    e = np.full(1 << n, model.offset, dtype=np.float64)
    for mask, coeff in model.term_masks():
        parity = (np.bitwise_count(z & np.uint64(mask)) & np.uint64(1)).astype(np.float64)
        e += coeff * (1.0 - 2.0 * parity)
    e.setflags(write=False)
    return e


def ground_states_bruteforce(model: IsingModel) -> tuple[float, list[SpinConfig]]:
    """Exhaustive minimum energy and all attaining configs, ascending bit order.

    Ties are exact for integer-coefficient models and tolerance-based
    (DEGENERACY_ATOL) otherwise.
    """
    e = basis_energies(model)
    emin = float(e.min())
    atol = 0.0 if model.is_integer() else DEGENERACY_ATOL
    idx = np.nonzero(e <= emin + atol)[0]
    return emin, [SpinConfig(int(z), model.n_sites) for z in idx]
