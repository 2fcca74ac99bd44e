"""fairmc: fair sampling of degenerate ground states.

Hybrid quantum-classical MCMC samplers (quantum-evolution proposals and
QAOA-trained neural proposals) for low-temperature Boltzmann distributions of
k-body Ising models and random k-SAT solution spaces, together with the
classical baselines they are benchmarked against (PT-ICM, WalkSAT) and
fairness / solution-counting diagnostics.
"""

from fairmc.ising import IsingModel, IsingTerm, SpinConfig, Temperature

__all__ = ["IsingModel", "IsingTerm", "SpinConfig", "Temperature"]
__version__ = "0.1.0"
