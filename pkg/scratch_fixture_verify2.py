"""Scratch: test triangle-tail + verify finalists at T=1000 (true dt)."""
import numpy as np

from fairmc.ising import IsingModel, ground_states_bruteforce
from fairmc.qsim import linear_schedule, run_annealing, measure_distribution

def gs_profile(model):
    emin, states = ground_states_bruteforce(model)
    bits = [s.bits for s in states]
    sset = set(bits)
    degs = [sum((z ^ (1 << i)) in sset for i in range(5)) for z in bits]
    return emin, bits, degs

def anneal_probs(model, T, dt=None):
    st = run_annealing(model, linear_schedule(T), dt=dt)
    probs = measure_distribution(st).probs
    _, states = ground_states_bruteforce(model)
    return np.array([probs[s.bits] for s in states])

def full_report(name, m, long_T=1000.0):
    emin, bits, degs = gs_profile(m)
    ng = len(bits)
    print(f"--- {name}: ng={ng} emin={emin} degs={degs} bits={bits}")
    for T in (1.0, 2.0, 3.5, 5.0, 6.5, 8.0, 10.0, 30.0, 100.0):
        p = anneal_probs(m, T, dt=0.02)
        r = p / p.sum()
        print(f"  T={T:7.1f} gs_mass={p.sum():.4f} min_p={p.min():.6f} "
              f"ratio={r.max()/max(r.min(),1e-300):10.2f}")
    p = anneal_probs(m, long_T)  # spec default dt
    r = p / p.sum()
    print(f"  T={long_T:7.1f} gs_mass={p.sum():.4f} min_p={p.min():.6f} "
          f"ratio={r.max()/max(r.min(),1e-300):10.2f}  [dt=default]")

tri_tail = IsingModel.from_terms(
    5, [((0, 1), 1.0), ((0, 2), 1.0), ((1, 2), 1.0), ((0, 3), -1.0), ((3, 4), -1.0)]
)
full_report("triangle + FM tail", tri_tail)

free_spin_six = IsingModel.from_terms(
    5, [((0,), 1.0), ((0, 2), -1.0), ((0, 4), 1.0), ((1, 4), -1.0), ((2, 4), -1.0)]
)
full_report("free-spin sixfold hit", free_spin_six)
