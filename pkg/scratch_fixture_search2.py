"""Scratch: strict search for the sixfold fixture + two companions."""
import itertools
import numpy as np

from fairmc.ising import IsingModel, ground_states_bruteforce
from fairmc.qsim import linear_schedule, run_annealing, measure_distribution

PAIRS = list(itertools.combinations(range(5), 2))
SHORT_TS = (1.0, 2.0, 3.5, 5.0, 6.5, 8.0, 10.0)


def gs_profile(model):
    emin, states = ground_states_bruteforce(model)
    bits = [s.bits for s in states]
    sset = set(bits)
    degs = [sum((z ^ (1 << i)) in sset for i in range(5)) for z in bits]
    return emin, bits, degs


def anneal_ratio(model, T, dt=0.02):
    st = run_annealing(model, linear_schedule(T), dt=dt)
    probs = measure_distribution(st).probs
    _, states = ground_states_bruteforce(model)
    p = np.array([probs[s.bits] for s in states])
    r = p / p.sum()
    return p, r.max() / max(r.min(), 1e-300)


def random_instance(rng):
    terms = []
    for (i, j) in PAIRS:
        c = rng.choice([-1.0, 0.0, 1.0], p=[0.35, 0.3, 0.35])
        if c != 0.0:
            terms.append(((i, j), float(c)))
    for i in range(5):
        c = rng.choice([-1.0, 0.0, 1.0], p=[0.15, 0.7, 0.15])
        if c != 0.0:
            terms.append(((i,), float(c)))
    return IsingModel.from_terms(5, terms)


def hunt(target_ng, n_draw, seed, max_short_ratio=1.85, min_long_ratio=8.0,
         require_min_deg=1, max_hits=6):
    rng = np.random.default_rng(seed)
    seen = set()
    hits = []
    structural = 0
    for _ in range(n_draw):
        m = random_instance(rng)
        key = tuple((t.sites, t.coeff) for t in m.terms)
        if key in seen:
            continue
        seen.add(key)
        emin, bits, degs = gs_profile(m)
        if len(bits) != target_ng or max(degs) == min(degs):
            continue
        if min(degs) < require_min_deg:
            continue
        structural += 1
        p_long, ratio_long = anneal_ratio(m, 60.0)
        if ratio_long < min_long_ratio or p_long.min() > 0.1 / target_ng:
            continue
        short_ratios = []
        ok = True
        for T in SHORT_TS:
            _, r = anneal_ratio(m, T)
            short_ratios.append(r)
            if r > max_short_ratio:
                ok = False
                break
        if not ok:
            continue
        hits.append((m, degs, ratio_long, short_ratios))
        print(f"HIT ng={target_ng} degs={degs} ratio_long={ratio_long:.1f} "
              f"short={['%.2f' % r for r in short_ratios]}")
        print("    terms:", [(t.sites, t.coeff) for t in m.terms])
        if len(hits) >= max_hits:
            break
    print(f"[ng={target_ng}] {structural} structural, {len(hits)} hits")
    return hits


print("=== sixfold, min deg >= 1 ===")
hunt(6, 60000, 101)
