"""Scratch: search 5-site {-1,0,+1} instances for fixture candidates.

Criteria:
  - degenerate ground manifold (one instance must have exactly 6)
  - linear-schedule annealing at large T strongly suppresses >=1 ground state
  - at short T (<=10) the ground-state distribution stays near-uniform
"""
import itertools
import numpy as np

from fairmc.ising import IsingModel, basis_energies, ground_states_bruteforce
from fairmc.qsim import linear_schedule, run_annealing, measure_distribution
from fairmc.metrics import histogram, fairness

rng = np.random.default_rng(20250809)

PAIRS = list(itertools.combinations(range(5), 2))


def random_instance():
    terms = []
    for (i, j) in PAIRS:
        c = rng.choice([-1.0, 0.0, 1.0], p=[0.35, 0.3, 0.35])
        if c != 0.0:
            terms.append(((i, j), float(c)))
    for i in range(5):
        c = rng.choice([-1.0, 0.0, 1.0], p=[0.2, 0.6, 0.2])
        if c != 0.0:
            terms.append(((i,), float(c)))
    return IsingModel.from_terms(5, terms)


def gs_graph_profile(model):
    emin, states = ground_states_bruteforce(model)
    bits = [s.bits for s in states]
    sset = set(bits)
    degs = []
    for z in bits:
        degs.append(sum((z ^ (1 << i)) in sset for i in range(5)))
    return emin, bits, degs


def anneal_gs_probs(model, T, dt=None):
    state = run_annealing(model, linear_schedule(T), dt=dt)
    probs = measure_distribution(state).probs
    _, states = ground_states_bruteforce(model)
    return np.array([probs[s.bits] for s in states])


def score_candidates(n_draw=4000):
    seen = set()
    shortlist = []
    for _ in range(n_draw):
        m = random_instance()
        key = (tuple((t.sites, t.coeff) for t in m.terms))
        if key in seen:
            continue
        seen.add(key)
        emin, bits, degs = gs_graph_profile(m)
        ng = len(bits)
        if not 3 <= ng <= 12:
            continue
        # want inequivalent local structure: degree spread or isolated states
        if max(degs) == min(degs):
            continue
        shortlist.append((m, ng, degs))
    print(f"{len(shortlist)} structural candidates")
    return shortlist


def evaluate(m, ng, T_long=60.0, dt=0.02):
    p_long = anneal_gs_probs(m, T_long, dt=dt)
    p_short = anneal_gs_probs(m, 8.0, dt=dt)
    restricted_long = p_long / p_long.sum()
    restricted_short = p_short / p_short.sum()
    return {
        "min_prob_long": p_long.min(),
        "ratio_long": restricted_long.max() / max(restricted_long.min(), 1e-300),
        "ratio_short": restricted_short.max() / max(restricted_short.min(), 1e-300),
        "gs_mass_long": p_long.sum(),
    }


def main():
    shortlist = score_candidates()
    results = []
    for m, ng, degs in shortlist[:250]:
        r = evaluate(m, ng)
        suppression = r["min_prob_long"] / (1.0 / ng)
        if r["ratio_short"] < 2.0 and r["ratio_long"] > 4.0:
            results.append((m, ng, degs, r, suppression))
    results.sort(key=lambda t: t[3]["ratio_long"], reverse=True)
    print(f"{len(results)} promising candidates\n")
    for m, ng, degs, r, sup in results[:25]:
        print(f"ng={ng} degs={degs} ratio_long={r['ratio_long']:.1f} "
              f"ratio_short={r['ratio_short']:.2f} sup={sup:.3f} "
              f"gs_mass={r['gs_mass_long']:.3f}")
        print("   terms:", [(t.sites, t.coeff) for t in m.terms])


if __name__ == "__main__":
    main()
