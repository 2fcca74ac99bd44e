import numpy as np
import pytest
from scipy import stats
from scipy.linalg import expm

from fairmc.ising import IsingModel, SpinConfig, basis_energies
from fairmc.qsim import (
    AnnealSchedule,
    OutputDistribution,
    StateVector,
    apply_mixer_layer,
    apply_phase_layer,
    basis_state,
    distribution_to_csv,
    evolve_fixed,
    linear_schedule,
    measure_distribution,
    problem_norm_ratio,
    run_annealing,
    run_qaoa,
    sample,
    uniform_state,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def dense_driver(n):
    """H_d = -sum_i sigma_x_i with qubit i on bit i of the index."""
    dim = 1 << n
    h = np.zeros((dim, dim))
    for i in range(n):
        op = np.array([[1.0]])
        # kron builds from the highest bit down, so append qubit 0 last
        for q in reversed(range(n)):
            op = np.kron(op, SX if q == i else np.eye(2))
        h -= op
    return h


def dense_problem(model):
    return np.diag(basis_energies(model))


def random_model(rng, n, n_terms=8):
    terms = []
    for _ in range(n_terms):
        order = int(rng.integers(1, 3))
        sites = sorted(rng.choice(n, size=order, replace=False).tolist())
        terms.append((sites, float(rng.normal())))
    return IsingModel.from_terms(n, terms)


def random_state(rng, n):
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(amps / np.linalg.norm(amps), n)


class TestPhaseLayer:
    def test_gamma_zero_identity(self):
        s = uniform_state(3)
        m = random_model(np.random.default_rng(0), 3)
        out = apply_phase_layer(s, m, 0.0)
        np.testing.assert_array_equal(out.amplitudes, s.amplitudes)

    def test_offset_only_is_global_phase(self):
        m = IsingModel.from_terms(2, [], offset=1.3)
        s = uniform_state(2)
        out = apply_phase_layer(s, m, 0.7)
        np.testing.assert_allclose(out.probabilities(), s.probabilities(), atol=1e-15)

    def test_matches_expm_oracle(self):
        rng = np.random.default_rng(1)
        m = random_model(rng, 3)
        s = random_state(rng, 3)
        gamma = 0.83
        expected = expm(-1j * gamma * dense_problem(m)) @ s.amplitudes
        out = apply_phase_layer(s, m, gamma)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-10)


class TestMixerLayer:
    def test_beta_zero_identity(self):
        s = uniform_state(3)
        out = apply_mixer_layer(s, 0.0)
        np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-15)

    def test_half_pi_flips_single_qubit(self):
        out = apply_mixer_layer(basis_state(1, 0), np.pi / 2)
        assert out.probabilities()[1] == pytest.approx(1.0, abs=1e-12)

    def test_matches_expm_oracle(self):
        rng = np.random.default_rng(2)
        s = random_state(rng, 3)
        beta = 0.41
        expected = expm(-1j * beta * dense_driver(3)) @ s.amplitudes
        out = apply_mixer_layer(s, beta)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-10)


class TestRunQaoa:
    def test_zero_angles_uniform(self):
        m = random_model(np.random.default_rng(3), 4)
        out = run_qaoa(m, [0.0], [0.0])
        np.testing.assert_allclose(out.probabilities(), np.full(16, 1 / 16), atol=1e-12)

    def test_norm_preserved(self):
        rng = np.random.default_rng(4)
        m = random_model(rng, 4)
        out = run_qaoa(m, rng.normal(size=3), rng.normal(size=3))
        assert abs(out.norm() - 1.0) < 1e-9

    def test_empty_params_rejected(self):
        m = random_model(np.random.default_rng(5), 2)
        with pytest.raises(ValueError):
            run_qaoa(m, [], [])

    def test_matches_unitary_product_oracle(self):
        rng = np.random.default_rng(6)
        m = random_model(rng, 4)
        gammas, betas = rng.normal(size=2), rng.normal(size=2)
        u = np.eye(16, dtype=complex)
        for g, b in zip(gammas, betas):
            u = expm(-1j * b * dense_driver(4)) @ expm(-1j * g * dense_problem(m)) @ u
        expected = u @ uniform_state(4).amplitudes
        out = run_qaoa(m, gammas, betas)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-10)


class TestEvolveFixed:
    def test_time_zero_identity(self):
        rng = np.random.default_rng(7)
        m = random_model(rng, 3)
        s = random_state(rng, 3)
        out = evolve_fixed(s, m, 0.4, 0.0)
        np.testing.assert_array_equal(out.amplitudes, s.amplitudes)

    def test_matches_expm_oracle(self):
        rng = np.random.default_rng(8)
        m = random_model(rng, 3)
        s = random_state(rng, 3)
        w, t = 0.45, 1.7
        alpha = problem_norm_ratio(m)
        h = (1 - w) * alpha * dense_problem(m) + w * dense_driver(3)
        expected = expm(-1j * t * h) @ s.amplitudes
        out = evolve_fixed(s, m, w, t)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-7)

    def test_proposal_magnitudes_symmetric(self):
        # coarse fixed-step evolution must still give |U_zz'| == |U_z'z|
        m = random_model(np.random.default_rng(9), 4)
        cols = []
        for z in range(16):
            out = evolve_fixed(basis_state(4, z), m, 0.5, 3.0, dt=0.25)
            cols.append(out.amplitudes)
        u = np.stack(cols, axis=1)
        np.testing.assert_allclose(np.abs(u), np.abs(u.T), atol=1e-8)

    def test_rejects_nonfinite_time(self):
        m = random_model(np.random.default_rng(10), 2)
        with pytest.raises(ValueError):
            evolve_fixed(uniform_state(2), m, 0.5, float("nan"))


class TestRunAnnealing:
    def test_zero_time_is_uniform(self):
        m = random_model(np.random.default_rng(11), 3)
        out = run_annealing(m, linear_schedule(0.0))
        np.testing.assert_allclose(out.probabilities(), np.full(8, 1 / 8), atol=1e-12)

    def test_pure_problem_hamiltonian_keeps_probabilities(self):
        m = random_model(np.random.default_rng(12), 3)
        sched = AnnealSchedule(2.0, lambda s: 0.0, lambda s: 1.0)
        out = run_annealing(m, sched)
        np.testing.assert_allclose(out.probabilities(), np.full(8, 1 / 8), atol=1e-9)

    def test_matches_expm_for_constant_hamiltonian(self):
        # constant A=B=1/2 makes the exact propagator a matrix exponential
        rng = np.random.default_rng(13)
        m = random_model(rng, 3)
        sched = AnnealSchedule(1.5, lambda s: 0.5, lambda s: 0.5)
        h = 0.5 * dense_driver(3) + 0.5 * dense_problem(m)
        expected = expm(-1j * 1.5 * h) @ uniform_state(3).amplitudes
        out = run_annealing(m, sched)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-7)

    def test_step_halving_consistency(self):
        m = random_model(np.random.default_rng(14), 5)
        coarse = run_annealing(m, linear_schedule(5.0), dt=0.01)
        fine = run_annealing(m, linear_schedule(5.0), dt=0.005)
        tvd = 0.5 * np.abs(coarse.probabilities() - fine.probabilities()).sum()
        assert tvd < 1e-6

    def test_norm_is_one(self):
        m = random_model(np.random.default_rng(15), 4)
        out = run_annealing(m, linear_schedule(3.0))
        assert abs(out.norm() - 1.0) < 1e-9


class TestMeasurement:
    def test_basis_state_delta(self):
        d = measure_distribution(basis_state(3, 5))
        assert d.probs[5] == 1.0
        assert d.probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_distribution_normalized(self):
        rng = np.random.default_rng(16)
        d = measure_distribution(random_state(rng, 6))
        assert d.probs.sum() == pytest.approx(1.0, abs=1e-9)

    def test_sampling_frequencies_chi2(self):
        rng = np.random.default_rng(17)
        m = random_model(rng, 4)
        state = run_qaoa(m, [0.4, 0.2], [0.3, 0.5])
        probs = measure_distribution(state).probs
        draws = sample(state, 100_000, rng)
        counts = np.bincount([s.bits for s in draws], minlength=16)
        _, p = stats.chisquare(counts, f_exp=probs * 100_000)
        assert p > 0.001

    def test_sample_returns_spin_configs(self):
        out = sample(basis_state(2, 3), 5, np.random.default_rng(0))
        assert all(isinstance(s, SpinConfig) and s.bits == 3 for s in out)

    def test_csv_dump(self, tmp_path):
        d = measure_distribution(basis_state(2, 1))
        path = tmp_path / "dist.csv"
        distribution_to_csv(d, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "bitstring,probability"
        assert lines[2].startswith("10,")  # z=1 -> bit 0 set -> "10.."


class TestDistributionType:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            OutputDistribution(np.array([0.5, 0.2]), 1)
