"""Masked autoregressive distribution estimator over fixed-length bitstrings.

A small masked MLP factorizes q(b) = prod_i q(b_i | b_before_i) in a fixed
variable order; masks zero every connection that would violate the ordering,
so the factorization (and hence normalization) is exact by construction.
Conditionals are sigmoid outputs clamped to [EPS, 1-EPS], which floors every
state's probability at EPS^N > 0 and keeps independence-sampler chains
irreducible.

Implemented directly in numpy with analytic backprop: the network is tiny
(one hidden layer of width 4N by default) and this keeps training
bit-reproducible with no framework dependency.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from fairmc.ising import DimensionError, SpinConfig

EPS = 1e-7


class TrainingError(RuntimeError):
    """Loss became non-finite during training."""


@dataclass
class TrainConfig:
    epochs: int = 500
    batch_size: int = 64
    learning_rate: float = 1e-3
    hidden_sizes: tuple[int, ...] | None = None  # None -> one layer of width 4N
    rng_seed: int = 0
    plateau_epochs: int = 50
    plateau_tol: float = 1e-5

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise ValueError("epochs, batch_size and learning_rate must be positive")


class MadeNetwork:
    """Masked MLP; `weights[l]` maps layer l activations, masks fixed at build."""

    def __init__(self, n_inputs, hidden_sizes, variable_order=None, rng=None):
        if n_inputs < 1:
            raise ValueError("need at least one input")
        self.n_inputs = n_inputs
        self.hidden_sizes = tuple(hidden_sizes)
        self.variable_order = tuple(
            variable_order if variable_order is not None else range(n_inputs)
        )
        if sorted(self.variable_order) != list(range(n_inputs)):
            raise ValueError("variable_order must be a permutation of 0..N-1")

        # degree of input i = 1-based position in the ordering
        n = n_inputs
        in_deg = np.empty(n, dtype=np.int64)
        for pos, v in enumerate(self.variable_order):
            in_deg[v] = pos + 1
        self.degrees = [in_deg]
        for width in self.hidden_sizes:
            # cyclic degrees 1..N-1 (all 1s when N == 1: outputs see no input)
            span = max(n - 1, 1)
            self.degrees.append(np.arange(width, dtype=np.int64) % span + 1)
        self.degrees.append(in_deg)

        self.masks = []
        for l in range(len(self.degrees) - 1):
            prev, cur = self.degrees[l], self.degrees[l + 1]
            if l == len(self.degrees) - 2:
                m = cur[:, None] > prev[None, :]  # strict: output i ignores input i
            else:
                m = cur[:, None] >= prev[None, :]
            self.masks.append(m.astype(np.float64))

        rng = rng or np.random.default_rng()
        self.weights = []
        self.biases = []
        sizes = [n, *self.hidden_sizes, n]
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            scale = np.sqrt(2.0 / (fan_in + fan_out))
            self.weights.append(rng.normal(0.0, scale, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))

    # -- forward -----------------------------------------------------------

    def conditionals(self, x: np.ndarray) -> np.ndarray:
        """q(b_i = 1 | bits before i), clamped to [EPS, 1-EPS].  x: (..., N)."""
        h, _ = self._forward(np.atleast_2d(x))
        return h if x.ndim > 1 else h[0]

    def _forward(self, x):
        """Returns (clamped conditionals, per-layer activations for backprop)."""
        acts = [x]
        h = x
        for l in range(len(self.weights) - 1):
            h = np.tanh(h @ (self.weights[l] * self.masks[l]).T + self.biases[l])
            acts.append(h)
        logits = h @ (self.weights[-1] * self.masks[-1]).T + self.biases[-1]
        p = 1.0 / (1.0 + np.exp(-logits))
        return np.clip(p, EPS, 1.0 - EPS), acts

    # -- persistence ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "format": 1,
            "n_inputs": self.n_inputs,
            "hidden_sizes": list(self.hidden_sizes),
            "variable_order": list(self.variable_order),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "MadeNetwork":
        if d.get("format") != 1:
            raise ValueError(f"unknown checkpoint format {d.get('format')}")
        net = cls(d["n_inputs"], d["hidden_sizes"], d["variable_order"],
                  rng=np.random.default_rng(0))
        net.weights = [np.asarray(w, dtype=np.float64) for w in d["weights"]]
        net.biases = [np.asarray(b, dtype=np.float64) for b in d["biases"]]
        return net


def log_prob(net: MadeNetwork, config: SpinConfig) -> float:
    if config.n != net.n_inputs:
        raise DimensionError(f"config has {config.n} bits, net expects {net.n_inputs}")
    x = config.bit_array().astype(np.float64)
    q1 = net.conditionals(x)
    return float(np.sum(np.where(x > 0.5, np.log(q1), np.log1p(-q1))))


def log_prob_batch(net: MadeNetwork, bits: np.ndarray) -> np.ndarray:
    q1 = net.conditionals(bits)
    return np.sum(np.where(bits > 0.5, np.log(q1), np.log1p(-q1)), axis=-1)


def sample(net: MadeNetwork, rng) -> SpinConfig:
    """One ancestral draw; matches exp(log_prob) exactly, clamping included."""
    x = np.zeros(net.n_inputs)
    for v in net.variable_order:
        q1 = net.conditionals(x)[v]
        x[v] = 1.0 if rng.random() < q1 else 0.0
    return SpinConfig.from_bits(x.astype(np.int64))


def sample_batch(net: MadeNetwork, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, N) bit matrix of independent ancestral draws."""
    x = np.zeros((count, net.n_inputs))
    for v in net.variable_order:
        q1 = net.conditionals(x)[:, v]
        x[:, v] = (rng.random(count) < q1).astype(np.float64)
    return x


def exact_probabilities(net: MadeNetwork) -> np.ndarray:
    """exp(log_prob) for all 2^N states, indexed by packed bits (N <= 16)."""
    n = net.n_inputs
    if n > 16:
        raise ValueError("exhaustive evaluation limited to 16 inputs")
    z = np.arange(1 << n, dtype=np.uint64)
    bits = ((z[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1))
    return np.exp(log_prob_batch(net, bits.astype(np.float64)))


def _nll_and_grads(net, batch):
    """Mean negative log-likelihood and its analytic parameter gradients."""
    q1, acts = net._forward(batch)
    b = batch
    nll = -np.mean(np.sum(np.where(b > 0.5, np.log(q1), np.log1p(-q1)), axis=1))

    bsz = batch.shape[0]
    # d(nll)/d(logit) = (q - b)/bsz; zero where the clamp is active
    active = (q1 > EPS) & (q1 < 1.0 - EPS)
    delta = (q1 - b) * active / bsz

    grads_w, grads_b = [], []
    for l in reversed(range(len(net.weights))):
        grads_w.append((delta.T @ acts[l]) * net.masks[l])
        grads_b.append(delta.sum(axis=0))
        if l > 0:
            delta = (delta @ (net.weights[l] * net.masks[l])) * (1.0 - acts[l] ** 2)
    return nll, grads_w[::-1], grads_b[::-1]


def train(
    samples: Sequence[SpinConfig], cfg: TrainConfig
) -> tuple[MadeNetwork, list[float]]:
    """Fit by minibatch Adam on the mean NLL; returns (network, loss curve).

    The loss curve holds the full-dataset NLL after every epoch; the returned
    network is the best-epoch snapshot, so its final NLL never exceeds the
    initial one.  Training stops early once `plateau_epochs` epochs pass
    without improving the best NLL by more than `plateau_tol`.
    """
    if not samples:
        raise ValueError("need a nonempty training set")
    n = samples[0].n
    if any(s.n != n for s in samples):
        raise DimensionError("training samples must share one length")
    x_all = np.stack([s.bit_array().astype(np.float64) for s in samples])

    rng = np.random.default_rng(cfg.rng_seed)
    hidden = cfg.hidden_sizes if cfg.hidden_sizes is not None else (4 * n,)
    net = MadeNetwork(n, hidden, rng=rng)

    params = net.weights + net.biases
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, adam_eps = 0.9, 0.999, 1e-8
    step = 0

    def dataset_nll():
        return float(-np.mean(log_prob_batch(net, x_all)))

    curve = [dataset_nll()]
    best_nll = curve[0]
    best_snapshot = ([w.copy() for w in net.weights], [b.copy() for b in net.biases])
    best_epoch = 0

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(x_all))
        for lo in range(0, len(x_all), cfg.batch_size):
            batch = x_all[order[lo : lo + cfg.batch_size]]
            nll, gw, gb = _nll_and_grads(net, batch)
            if not np.isfinite(nll):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            step += 1
            for i, g in enumerate(gw + gb):
                m[i] = beta1 * m[i] + (1 - beta1) * g
                v[i] = beta2 * v[i] + (1 - beta2) * g * g
                mhat = m[i] / (1 - beta1**step)
                vhat = v[i] / (1 - beta2**step)
                params[i] -= cfg.learning_rate * mhat / (np.sqrt(vhat) + adam_eps)
        curve.append(dataset_nll())
        if curve[-1] < best_nll - cfg.plateau_tol:
            best_nll = curve[-1]
            best_snapshot = (
                [w.copy() for w in net.weights],
                [b.copy() for b in net.biases],
            )
            best_epoch = epoch
        elif epoch - best_epoch >= cfg.plateau_epochs:
            break

    net.weights, net.biases = best_snapshot
    return net, curve


def training_digest(samples: Sequence[SpinConfig]) -> str:
    h = hashlib.sha256()
    for s in samples:
        h.update(s.to_bitstring().encode())
    return h.hexdigest()[:16]


def save_checkpoint(net: MadeNetwork, path, *, config: TrainConfig | None = None,
                    digest: str = "") -> None:
    d = net.to_json_dict()
    d["train_config"] = vars(config) if config else None
    if d["train_config"] and d["train_config"]["hidden_sizes"] is not None:
        d["train_config"]["hidden_sizes"] = list(d["train_config"]["hidden_sizes"])
    d["training_data_digest"] = digest
    with open(path, "w") as f:
        json.dump(d, f)


def load_checkpoint(path) -> MadeNetwork:
    with open(path) as f:
        return MadeNetwork.from_json_dict(json.load(f))
