"""Bundled five-site benchmark instances with degenerate ground manifolds.

Three two-body models with all nonzero fields/couplings equal to +1 or -1,
chosen so that long linear-schedule annealing strongly suppresses at least
one ground state while short anneals and the MCMC samplers stay near-fair.
Their degeneracies (3, 4 and 6) are verified by exhaustive enumeration in the
test suite.
"""

from __future__ import annotations

import json
from importlib import resources

from fairmc.ising import IsingModel

FIXTURE_NAMES = (
    "five_site_threefold",
    "five_site_fourfold",
    "five_site_sixfold",
)

# the anneal-time sweep is run on this one
SIXFOLD_FIXTURE = "five_site_sixfold"


def load_fixture(name: str) -> IsingModel:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; have {FIXTURE_NAMES}")
    path = resources.files("fairmc").joinpath(f"data/{name}.json")
    with path.open() as f:
        return IsingModel.from_json_dict(json.load(f))


def load_all() -> dict[str, IsingModel]:
    return {name: load_fixture(name) for name in FIXTURE_NAMES}
