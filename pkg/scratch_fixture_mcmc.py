"""Scratch: end-to-end MCMC validation of the three fixture candidates."""
import numpy as np

from fairmc.ising import IsingModel, Temperature, ground_states_bruteforce
from fairmc.made import TrainConfig, train
from fairmc.mcmc import HybridUpdate, kernel_made, kernel_qe_mcmc, run_chain
from fairmc.metrics import fairness, histogram, steps_to_enumerate
from fairmc.qaoa import effective_time, optimize_free
from fairmc.qsim import measure_distribution, run_qaoa, sample

CANDIDATES = {
    "six": IsingModel.from_terms(
        5, [((2,), 1.0), ((0, 1), -1.0), ((0, 2), 1.0), ((0, 3), -1.0),
            ((1, 2), -1.0)]
    ),
    "four": IsingModel.from_terms(
        5, [((3,), 1.0), ((0, 2), 1.0), ((0, 3), -1.0), ((0, 4), 1.0),
            ((1, 2), 1.0), ((1, 3), -1.0), ((1, 4), 1.0), ((2, 3), -1.0),
            ((2, 4), 1.0), ((3, 4), -1.0)]
    ),
    "three": IsingModel.from_terms(
        5, [((0,), 1.0), ((1,), 1.0), ((2,), -1.0), ((0, 4), 1.0),
            ((1, 3), -1.0), ((1, 4), -1.0), ((2, 3), -1.0), ((2, 4), 1.0),
            ((3, 4), -1.0)]
    ),
}

beta = Temperature(10.0)
for name, m in CANDIDATES.items():
    emin, gs = ground_states_bruteforce(m)
    print(f"=== {name}: ng={len(gs)} emin={emin}")

    params, _ = optimize_free(m, p=5, starts=10, rng=np.random.default_rng(1))
    t_eff = effective_time(params)
    state = run_qaoa(m, params.gammas, params.betas)
    qdist = measure_distribution(state)
    gs_probs = np.array([qdist.probs[s.bits] for s in gs])
    print(f"  qaoa: value_gs_probs={np.array2string(gs_probs, precision=4)} "
          f"T_eff={t_eff:.2f} gs_mass={gs_probs.sum():.3f}")

    train_samples = sample(state, 1000, np.random.default_rng(2))
    net, curve = train(train_samples, TrainConfig(rng_seed=3))
    print(f"  made trained: nll {curve[0]:.3f} -> {curve[-1]:.3f} "
          f"({len(curve) - 1} epochs)")

    for tag, update in (
        ("qe ", kernel_qe_mcmc(m)),
        ("nmc", kernel_made(net)),
        ("hmc", HybridUpdate(net)),
    ):
        steps = 1000 if tag != "hmc" else 167  # ~matched transition counts
        trace = run_chain(m, beta, update, steps, rng_seed=5)
        rep = fairness(histogram(trace, gs))
        s2e = steps_to_enumerate(trace, gs)
        print(f"  {tag}: all_found={rep.all_found} ratio={rep.max_min_ratio} "
              f"tvd={rep.tvd_to_uniform:.3f} steps_to_enum={s2e} "
              f"({trace.n_transitions} transitions)")
