import pytest

from fairmc.fixtures import FIXTURE_NAMES, SIXFOLD_FIXTURE, load_all, load_fixture
from fairmc.ising import ground_states_bruteforce

EXPECTED_DEGENERACY = {
    "five_site_threefold": 3,
    "five_site_fourfold": 4,
    "five_site_sixfold": 6,
}


def test_three_fixtures_ship():
    assert len(FIXTURE_NAMES) == 3
    assert SIXFOLD_FIXTURE in FIXTURE_NAMES


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_degeneracies(name):
    model = load_fixture(name)
    assert model.n_sites == 5
    emin, states = ground_states_bruteforce(model)
    assert len(states) == EXPECTED_DEGENERACY[name]


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_coefficients_are_unit(name):
    model = load_fixture(name)
    for t in model.terms:
        assert t.coeff in (-1.0, 1.0)
        assert len(t.sites) <= 2


def test_load_all():
    assert set(load_all()) == set(FIXTURE_NAMES)


def test_unknown_fixture():
    with pytest.raises(KeyError):
        load_fixture("nope")
