"""Scratch: deeper vetting of fixture candidates + frustrated ring check."""
import itertools
import numpy as np

from fairmc.ising import IsingModel, ground_states_bruteforce
from fairmc.qsim import linear_schedule, run_annealing, measure_distribution

rng = np.random.default_rng(777)
PAIRS = list(itertools.combinations(range(5), 2))


def gs_profile(model):
    emin, states = ground_states_bruteforce(model)
    bits = [s.bits for s in states]
    sset = set(bits)
    degs = [sum((z ^ (1 << i)) in sset for i in range(5)) for z in bits]
    return emin, bits, degs


def anneal_probs(model, T, dt=0.02):
    st = run_annealing(model, linear_schedule(T), dt=dt)
    probs = measure_distribution(st).probs
    _, states = ground_states_bruteforce(model)
    return np.array([probs[s.bits] for s in states])


def report(name, m):
    emin, bits, degs = gs_profile(m)
    ng = len(bits)
    print(f"--- {name}: ng={ng} emin={emin} degs={degs}")
    for T in (1.0, 5.0, 8.0, 10.0, 20.0, 60.0):
        p = anneal_probs(m, T)
        r = p / p.sum()
        print(f"  T={T:6.1f} gs_mass={p.sum():.4f} min_p={p.min():.5f} "
              f"ratio={r.max()/max(r.min(),1e-300):9.2f}")


ring = IsingModel.from_terms(
    5, [((0, 1), -1.0), ((1, 2), -1.0), ((2, 3), -1.0), ((3, 4), -1.0), ((0, 4), 1.0)]
)
report("frustrated ring (4 FM + 1 AFM)", ring)

cand_a = IsingModel.from_terms(
    5,
    [((2,), -1.0), ((4,), 1.0), ((0, 3), -1.0), ((0, 4), 1.0), ((1, 3), -1.0),
     ((1, 4), -1.0), ((2, 4), -1.0), ((3, 4), 1.0)],
)
report("candidate A (ng=6)", cand_a)


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


print("\nsearch: ng in (4, 8, 10), min deg >= 1, degree spread")
found = []
seen = set()
for _ in range(12000):
    m = random_instance()
    key = tuple((t.sites, t.coeff) for t in m.terms)
    if key in seen:
        continue
    seen.add(key)
    emin, bits, degs = gs_profile(m)
    ng = len(bits)
    if ng not in (4, 8, 10) or min(degs) < 1 or max(degs) == min(degs):
        continue
    p_long = anneal_probs(m, 60.0)
    r_long = p_long / p_long.sum()
    ratio_long = r_long.max() / max(r_long.min(), 1e-300)
    if ratio_long < 8.0 or p_long.min() > 0.15 / ng:
        continue
    p_short = anneal_probs(m, 8.0)
    r_short = p_short / p_short.sum()
    ratio_short = r_short.max() / r_short.min()
    if ratio_short > 1.9:
        continue
    found.append((ng, degs, ratio_long, ratio_short, m))
    if len(found) >= 12:
        break

for ng, degs, rl, rs, m in found:
    print(f"ng={ng} degs={degs} ratio_long={rl:.1f} ratio_short={rs:.2f}")
    print("   terms:", [(t.sites, t.coeff) for t in m.terms])
