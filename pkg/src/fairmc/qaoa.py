"""QAOA parameter schedules, cost expectation, and classical optimization.

Two parameterizations are supported: free angles (2p parameters) and the
4-parameter linear schedule

    beta_l  = beta_slope  * (l/p) + beta_intcp
    gamma_l = gamma_slope * (l/p) + gamma_intcp,      l = 1..p,

whose optima concentrate strongly across instances, making instance-
independent "fixed angles" (component-wise medians) practical.

Returned parameters are sign-canonicalized so the summed effective time is
nonnegative; flipping the sign of every angle conjugates the state and leaves
both the measurement distribution and the expectation unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize as sciopt

from fairmc.ising import IsingModel, basis_energies
from fairmc.qsim import run_qaoa

FD_STEP = 1e-4
DEFAULT_STARTS = 10
START_BOX = 2.0  # multi-start initial points are uniform in [-2, 2]^d


class OptimizationError(RuntimeError):
    """Every optimization start produced non-finite values."""


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if len(self.gammas) != len(self.betas) or len(self.gammas) == 0:
            raise ValueError("need equal, nonempty gamma/beta tuples")

    @property
    def p(self) -> int:
        return len(self.gammas)


@dataclass(frozen=True)
class LinearSchedule:
    beta_slope: float
    beta_intcp: float
    gamma_slope: float
    gamma_intcp: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.beta_slope, self.beta_intcp, self.gamma_slope, self.gamma_intcp]
        )

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "LinearSchedule":
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]))


@dataclass(frozen=True)
class FixedAngles:
    """A linear schedule promoted to an instance-independent preset."""

    schedule: LinearSchedule


def expand(schedule: LinearSchedule, p: int) -> QaoaParams:
    """Evaluate the linear schedule at layer fractions l/p, l = 1..p."""
    if p < 1:
        raise ValueError("depth must be >= 1")
    fracs = np.arange(1, p + 1) / p
    betas = schedule.beta_slope * fracs + schedule.beta_intcp
    gammas = schedule.gamma_slope * fracs + schedule.gamma_intcp
    return QaoaParams(tuple(gammas.tolist()), tuple(betas.tolist()))


def expectation(model: IsingModel, params: QaoaParams) -> float:
    """<psi| H_P |psi> = sum_z |a_z|^2 E(z) for the circuit's output state."""
    state = run_qaoa(model, params.gammas, params.betas)
    return float(state.probabilities() @ basis_energies(model))


def effective_time(params: QaoaParams) -> float:
    """Total evolution time when each angle is read as a duration."""
    return float(sum(params.betas) + sum(params.gammas))


def _canonical_sign(x: np.ndarray, p: int, free: bool) -> np.ndarray:
    if free:
        total = x.sum()
    else:
        total = (x[0] + x[2]) * (p + 1) / 2 + p * (x[1] + x[3])
    return -x if total < 0 else x


def _central_diff_grad(fun, x, h=FD_STEP):
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def _multistart_minimize(fun, dim, starts, rng):
    best = None
    traces = None
    for start_idx in range(starts):
        x0 = rng.uniform(-START_BOX, START_BOX, size=dim)
        trace = [(x0.copy(), fun(x0))]
        if not np.isfinite(trace[0][1]):
            continue
        res = sciopt.minimize(
            fun,
            x0,
            jac=lambda x: _central_diff_grad(fun, x),
            method="BFGS",
            callback=lambda xk: trace.append((xk.copy(), fun(xk))),
        )
        if not np.isfinite(res.fun):
            continue
        trace.append((res.x.copy(), float(res.fun)))
        # strict < keeps the lowest start index on ties
        if best is None or res.fun < best[1]:
            best = (res.x, float(res.fun), start_idx)
            traces = trace
    if best is None:
        raise OptimizationError("all optimization starts diverged")
    return best[0], best[1], traces


def optimize(
    model: IsingModel,
    p: int,
    starts: int = DEFAULT_STARTS,
    rng: np.random.Generator | None = None,
) -> tuple[LinearSchedule, list]:
    """Minimize the cost expectation over the 4-dim linear-schedule space.

    Quasi-Newton (BFGS) with central-difference gradients, multi-start from
    `starts` random points.  Returns the best schedule and the trace of the
    winning start as (iterate, value) pairs.
    """
    if p < 1 or starts < 1:
        raise ValueError("need p >= 1 and starts >= 1")
    rng = rng or np.random.default_rng()

    def fun(x):
        return expectation(model, expand(LinearSchedule.from_array(x), p))

    x, _, trace = _multistart_minimize(fun, 4, starts, rng)
    return LinearSchedule.from_array(_canonical_sign(x, p, free=False)), trace


def optimize_free(
    model: IsingModel,
    p: int,
    starts: int = DEFAULT_STARTS,
    rng: np.random.Generator | None = None,
) -> tuple[QaoaParams, list]:
    """Same optimizer core over the unconstrained 2p angles (gammas, betas)."""
    if p < 1 or starts < 1:
        raise ValueError("need p >= 1 and starts >= 1")
    rng = rng or np.random.default_rng()

    def fun(x):
        return expectation(model, QaoaParams(tuple(x[:p]), tuple(x[p:])))

    x, _, trace = _multistart_minimize(fun, 2 * p, starts, rng)
    x = _canonical_sign(x, p, free=True)
    return QaoaParams(tuple(x[:p]), tuple(x[p:])), trace


def fixed_angles_from_set(schedules: Sequence[LinearSchedule]) -> FixedAngles:
    """Component-wise median over a set of per-instance optimized schedules."""
    if not schedules:
        raise ValueError("need at least one schedule")
    arr = np.stack([s.as_array() for s in schedules])
    return FixedAngles(LinearSchedule.from_array(np.median(arr, axis=0)))


def schedule_to_json(schedule: LinearSchedule, p: int, value: float) -> dict:
    return {
        "beta_slope": schedule.beta_slope,
        "beta_intcp": schedule.beta_intcp,
        "gamma_slope": schedule.gamma_slope,
        "gamma_intcp": schedule.gamma_intcp,
        "expectation": value,
        "p": p,
    }


def schedule_from_json(d: dict) -> LinearSchedule:
    return LinearSchedule(
        d["beta_slope"], d["beta_intcp"], d["gamma_slope"], d["gamma_intcp"]
    )


def save_schedule(schedule: LinearSchedule, p: int, value: float, path) -> None:
    with open(path, "w") as f:
        json.dump(schedule_to_json(schedule, p, value), f, indent=1)


def load_schedule(path) -> tuple[LinearSchedule, int]:
    with open(path) as f:
        d = json.load(f)
    return schedule_from_json(d), d["p"]
