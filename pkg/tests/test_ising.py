import numpy as np
import pytest

from fairmc.ising import (
    CapacityError,
    DimensionError,
    IsingModel,
    SpinConfig,
    Temperature,
    basis_energies,
    boltzmann_weight,
    delta_energy_flip,
    energy,
    ground_states_bruteforce,
)


def random_model(rng, n, max_order=3, n_terms=None, integer=True):
    n_terms = n_terms or 2 * n
    terms = []
    for _ in range(n_terms):
        order = rng.integers(1, max_order + 1)
        sites = sorted(rng.choice(n, size=order, replace=False).tolist())
        coeff = float(rng.choice([-1, 1])) if integer else float(rng.normal())
        terms.append((sites, coeff))
    return IsingModel.from_terms(n, terms)


def energy_scalar_loop(model, config):
    """Independent oracle: plain per-term loop over explicit spin values."""
    spins = config.spins()
    e = model.offset
    for t in model.terms:
        p = 1
        for s in t.sites:
            p *= spins[s]
        e += t.coeff * p
    return float(e)


class TestSpinConfig:
    def test_pack_unpack_roundtrip(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 20))
            spins = rng.choice([-1, 1], size=n).tolist()
            c = SpinConfig.from_spins(spins)
            assert c.spins().tolist() == spins
            assert SpinConfig.from_bitstring(c.to_bitstring()) == c

    def test_convention_bit1_is_spin_down(self):
        c = SpinConfig(0b101, 3)
        assert c.spins().tolist() == [-1, 1, -1]
        assert c.bit_array().tolist() == [1, 0, 1]

    def test_flip(self):
        c = SpinConfig(0, 4)
        assert c.flip(2).spins().tolist() == [1, 1, -1, 1]
        with pytest.raises(IndexError):
            c.flip(4)

    def test_invert(self):
        c = SpinConfig(0b0011, 4)
        assert c.invert().bits == 0b1100


class TestEnergy:
    def test_ferromagnetic_aligned_pair(self):
        m = IsingModel.from_terms(2, [((0, 1), -1.0)])
        assert energy(m, SpinConfig.from_spins([1, 1])) == -1.0

    def test_empty_terms_gives_offset(self):
        m = IsingModel.from_terms(3, [], offset=2.5)
        for z in range(8):
            assert energy(m, SpinConfig(z, 3)) == 2.5

    def test_matches_scalar_loop_oracle_all_configs(self):
        rng = np.random.default_rng(1)
        m = random_model(rng, 5, max_order=3)
        for z in range(32):
            c = SpinConfig(z, 5)
            assert energy(m, c) == pytest.approx(energy_scalar_loop(m, c), abs=1e-12)

    def test_dimension_mismatch(self):
        m = IsingModel.from_terms(3, [((0, 1), 1.0)])
        with pytest.raises(DimensionError):
            energy(m, SpinConfig(0, 4))

    def test_duplicate_terms_merged(self):
        m = IsingModel.from_terms(2, [((0, 1), 1.0), ((1, 0), 2.0)])
        assert len(m.terms) == 1
        assert m.terms[0].coeff == 3.0
        # exact cancellation drops the term
        m2 = IsingModel.from_terms(2, [((0, 1), 1.0), ((0, 1), -1.0)])
        assert m2.terms == ()

    def test_basis_energies_match_pointwise(self):
        rng = np.random.default_rng(2)
        m = random_model(rng, 6, integer=False)
        e = basis_energies(m)
        for z in range(64):
            assert e[z] == pytest.approx(energy(m, SpinConfig(z, 6)), abs=1e-12)


class TestDeltaEnergy:
    def test_pair_flip(self):
        m = IsingModel.from_terms(2, [((0, 1), -1.0)])
        c = SpinConfig.from_spins([1, 1])
        assert delta_energy_flip(m, c, 0) == 2.0

    def test_term_without_site_contributes_zero(self):
        m = IsingModel.from_terms(3, [((1, 2), 5.0)])
        c = SpinConfig(0, 3)
        assert delta_energy_flip(m, c, 0) == 0.0

    def test_matches_full_recompute_all_sites_all_configs(self):
        rng = np.random.default_rng(3)
        m = random_model(rng, 8, max_order=3, n_terms=20)
        for z in range(256):
            c = SpinConfig(z, 8)
            e0 = energy(m, c)
            for site in range(8):
                assert delta_energy_flip(m, c, site) == energy(m, c.flip(site)) - e0

    def test_out_of_range_site(self):
        m = IsingModel.from_terms(2, [((0,), 1.0)])
        with pytest.raises(IndexError):
            delta_energy_flip(m, SpinConfig(0, 2), 5)


class TestBoltzmannWeight:
    def test_zero_energy_weight_one(self):
        m = IsingModel.from_terms(2, [])
        assert boltzmann_weight(m, SpinConfig(0, 2), Temperature(3.7)) == 1.0

    def test_definition(self):
        m = IsingModel.from_terms(1, [((0,), 1.5)])
        w = boltzmann_weight(m, SpinConfig(0, 1), Temperature(2.0))
        assert w == pytest.approx(np.exp(-2.0 * 1.5), rel=1e-15)

    def test_weight_ratio_identity(self):
        rng = np.random.default_rng(4)
        m = random_model(rng, 6, integer=False)
        t = Temperature(0.8)
        for _ in range(20):
            a = SpinConfig(int(rng.integers(64)), 6)
            b = SpinConfig(int(rng.integers(64)), 6)
            ratio = boltzmann_weight(m, b, t) / boltzmann_weight(m, a, t)
            expected = np.exp(-t.beta * (energy(m, b) - energy(m, a)))
            assert ratio == pytest.approx(expected, rel=1e-12)

    def test_beta_must_be_positive(self):
        with pytest.raises(ValueError):
            Temperature(0.0)
        with pytest.raises(ValueError):
            Temperature(float("inf"))


class TestGroundStates:
    def test_two_site_ferromagnet(self):
        m = IsingModel.from_terms(2, [((0, 1), -1.0)])
        emin, states = ground_states_bruteforce(m)
        assert emin == -1.0
        assert {s.bits for s in states} == {0b00, 0b11}

    def test_single_site_field(self):
        m = IsingModel.from_terms(1, [((0,), 1.0)])
        emin, states = ground_states_bruteforce(m)
        assert emin == -1.0
        assert [s.spins().tolist() for s in states] == [[-1]]

    def test_states_sorted_and_attain_minimum(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            m = random_model(rng, 7)
            emin, states = ground_states_bruteforce(m)
            assert states, "ground manifold is never empty"
            bits = [s.bits for s in states]
            assert bits == sorted(bits)
            for s in states:
                assert energy(m, s) == pytest.approx(emin, abs=1e-9)

    def test_capacity_guard(self):
        m = IsingModel.from_terms(25, [((0,), 1.0)])
        with pytest.raises(CapacityError):
            ground_states_bruteforce(m)


class TestInvariants:
    def test_spin_inversion_symmetry_even_models(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            terms = []
            for _ in range(10):
                sites = sorted(rng.choice(8, size=2, replace=False).tolist())
                terms.append((sites, float(rng.normal())))
            m = IsingModel.from_terms(8, terms)
            for _ in range(20):
                c = SpinConfig(int(rng.integers(256)), 8)
                assert energy(m, c) == pytest.approx(energy(m, c.invert()), abs=1e-12)

    def test_json_roundtrip(self, tmp_path):
        rng = np.random.default_rng(7)
        m = random_model(rng, 6, integer=False)
        p = tmp_path / "model.json"
        m.save(p)
        assert IsingModel.load(p) == m
