import itertools
from fractions import Fraction

import pytest

from shieldperc.collision import max_pointmass
from shieldperc.errors import DomainError, ResourceLimitError
from shieldperc.walk_model import (evolve_difference_walk, exact_max_pointmass, h_transition,
                                   reference_level_marginals, tau4_upper, tau_closed_form,
                                   tau_distribution, tau_hat4_upper, tau_hat_closed_form,
                                   tau_hat_distribution)


def test_h_transition_values():
    assert h_transition(3, 2, 2) == Fraction(5, 9)
    for d in range(2, 9):
        assert h_transition(d, 0, 0) + h_transition(d, 0, 2) == 1
        assert sum(h_transition(d, 2, k) for k in (0, 2, 4)) == 1


def test_h_transition_from_two_by_enumeration():
    # start at e_1 - e_2 and try all d^2 ordered increment pairs
    for d in range(2, 7):
        start = [1, -1] + [0] * (d - 2)
        hist = {0: 0, 2: 0, 4: 0}
        for i, j in itertools.product(range(d), repeat=2):
            v = start.copy()
            v[i] += 1
            v[j] -= 1
            hist[sum(map(abs, v))] += 1
        for k, c in hist.items():
            assert h_transition(d, 2, k) == Fraction(c, d * d)
    assert h_transition(2, 2, 4) == Fraction(1, 4)


def test_h_transition_rejects_bad_levels():
    with pytest.raises(DomainError):
        h_transition(4, 4, 2)
    with pytest.raises(DomainError):
        h_transition(4, 0, 6)


def test_one_step_d2():
    wd = evolve_difference_walk(2, 1, exact=True)
    assert wd.level_marginal() == {0: Fraction(1, 2), 2: Fraction(1, 2)}


def test_absorbed_mass_d4():
    wd = evolve_difference_walk(4, 2, absorb_at_origin=True, exact=True)
    assert wd.absorbed_mass == Fraction(1, 4) + Fraction(3, 4) * Fraction(1, 16)


@pytest.mark.parametrize("d,steps", [(2, 8), (3, 6), (5, 5)])
def test_conservation(d, steps):
    for absorb in (False, True):
        ex = evolve_difference_walk(d, steps, absorb_at_origin=absorb, exact=True)
        assert ex.total() == 1
        fl = evolve_difference_walk(d, steps, absorb_at_origin=absorb)
        assert abs(fl.total() - 1) < 1e-12
        assert all(0 <= m <= 1 for m in fl.mass.values())


@pytest.mark.parametrize("d,n", [(2, 6), (3, 4)])
def test_canonical_matches_reference(d, n):
    ref = reference_level_marginals(d, n)
    for k in range(n + 1):
        got = evolve_difference_walk(d, k, exact=True).level_marginal()
        assert got == ref[k]


@pytest.mark.parametrize("d", range(2, 7))
def test_tau_closed_forms(d):
    dist = tau_distribution(d, 4, exact=True)
    for k in (1, 2, 3):
        assert dist.probs[k] == tau_closed_form(d, k)
    assert dist.probs[4] <= tau4_upper(d)
    fl = tau_distribution(d, 3)
    for k in (1, 2, 3):
        assert abs(fl.probs[k] - float(tau_closed_form(d, k))) < 1e-12


def test_tau_examples():
    dist = tau_distribution(4, 2)
    assert dist.probs[1] == pytest.approx(0.25, abs=1e-15)
    assert dist.probs[2] == pytest.approx(0.046875, abs=1e-15)
    assert tau_closed_form(3, 3) == Fraction(1, 9) * Fraction(5, 9) * Fraction(2, 3)
    assert tau4_upper(4) == Fraction(1, 16) * (Fraction(8, 16) ** 2 + Fraction(7, 16) * Fraction(4, 16)) * Fraction(3, 4)
    assert tau_distribution(2, 6, exact=True).total() <= 1


@pytest.mark.parametrize("d", range(4, 7))
def test_tau_below_pointmass(d):
    dist = tau_distribution(d, 8)
    for k, v in dist.probs.items():
        assert v <= max_pointmass(d, k) + 1e-15
    assert dist.tail_bound >= 0


@pytest.mark.parametrize("d", range(2, 7))
def test_tau_hat_closed_forms(d):
    dist = tau_hat_distribution(d, 4, exact=True)
    for k in (0, 1, 2, 3):
        assert dist.probs[k] == tau_hat_closed_form(d, k)
    assert dist.probs[4] <= tau_hat4_upper(d)


def test_tau_hat_examples():
    dist = tau_hat_distribution(5, 1)
    assert dist.probs[0] == pytest.approx(0.2)
    assert dist.probs[1] == 0
    assert tau_hat_closed_form(4, 2) == Fraction(1, 64) - Fraction(1, 256)
    assert tau_hat_closed_form(3, 3) == Fraction(2, 3) * Fraction(5, 9) * Fraction(1, 27)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_pointmass_nonincreasing(d):
    vals = [exact_max_pointmass(d, j) for j in range(9)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_pointmass_dominated_by_bound():
    assert exact_max_pointmass(3, 7) <= max_pointmass(3, 7)
    assert exact_max_pointmass(6, 3) == Fraction(1, 36)


def test_state_cap():
    with pytest.raises(ResourceLimitError, match="step"):
        evolve_difference_walk(6, 10, cap_states=50)
