import math
from fractions import Fraction

import numpy as np
import pytest

from nonlocal_lab import games
from nonlocal_lab.classical import DeterministicStrategy
from nonlocal_lab.derandomization import (
    AliasTable,
    PublicCoinFamily,
    chsh_mixture_family,
    hoeffding_tail,
    magic_square_family,
    max_input_error,
    newman_sample,
    newman_samples,
    sampled_max_error,
)
from nonlocal_lab.errors import InputError, NonNormalizedMixture
from nonlocal_lab.protocols import chsh_send_x_protocol, constant_protocol


def test_hoeffding_tail():
    assert abs(hoeffding_tail(100, 0.1) - 2 * math.exp(-2)) < 1e-15
    assert abs(hoeffding_tail(1, 1.0) - 2 * math.exp(-2)) < 1e-15
    assert abs(hoeffding_tail(10, 1e-9) - 2) < 1e-12
    with pytest.raises(InputError):
        hoeffding_tail(0, 0.1)
    with pytest.raises(InputError):
        hoeffding_tail(5, 0)


def test_newman_sample_count():
    assert newman_samples(3, 3, 0.05) == 1158


def test_max_input_error_examples():
    g = games.chsh()
    assert max_input_error(PublicCoinFamily(g, (1,), (chsh_send_x_protocol(),)))[0] == 0
    # the constant strategy loses only on (1, 1)
    const = DeterministicStrategy((0, 0), (0, 0))
    assert max_input_error(PublicCoinFamily(g, (1,), (const,))) == (1, (1, 1))
    # an always-wrong member at weight 1/4
    one = games.make_game(1, 1, 2, 2, {(0, 0): 1}, lambda x, y, a, b: a == 0)
    fam = PublicCoinFamily(
        one, (Fraction(1, 4), Fraction(3, 4)), (DeterministicStrategy((1,), (0,)), DeterministicStrategy((0,), (0,)))
    )
    assert max_input_error(fam) == (Fraction(1, 4), (0, 0))
    assert max_input_error(chsh_mixture_family())[0] == Fraction(1, 4)


def test_family_validation():
    s = DeterministicStrategy((0, 0), (0, 0))
    with pytest.raises(NonNormalizedMixture):
        PublicCoinFamily(games.chsh(), (Fraction(1, 2),), (s,))
    with pytest.raises(InputError):
        PublicCoinFamily(games.chsh(), (), ())


def test_protocol_members():
    fam = PublicCoinFamily(games.chsh(), (1,), (constant_protocol((2, 2, 2, 2)),))
    assert fam.errors[0, 1, 1] == 1 and fam.errors[0, 0, 0] == 0


def test_single_member_family_any_t():
    fam = PublicCoinFamily(games.chsh(), (1,), (DeterministicStrategy((0, 1), (1, 0)),))
    for t in (1, 7, 64):
        s = newman_sample(fam, t, seed=t)
        assert (s.family.input_errors() == fam.input_errors()).all()
        assert s.random_bits == math.ceil(math.log2(t))


def test_magic_square_sampling():
    fam = magic_square_family()
    eps, _ = max_input_error(fam)
    assert eps == Fraction(1, 4)
    t = newman_samples(3, 3, 0.05)
    s = newman_sample(fam, t, seed=0)
    assert len(s.indices) == t and s.random_bits == 11
    assert sampled_max_error(fam, s.indices) == max_input_error(s.family)[0]
    assert sampled_max_error(fam, s.indices) <= eps + Fraction(1, 20)


def test_exhaustive_mode_reproduces_errors():
    fam = magic_square_family()
    ex = newman_sample(fam, len(fam.members), exhaustive=True)
    assert (ex.family.input_errors() == fam.input_errors()).all()
    assert ex.random_bits == 2


def test_alias_table_frequencies():
    table = AliasTable([Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])
    draws = table.sample(np.random.default_rng(0), 60000)
    freq = np.bincount(draws, minlength=3) / len(draws)
    assert np.allclose(freq, [1 / 2, 1 / 3, 1 / 6], atol=0.01)


def test_sampling_is_seeded():
    fam = chsh_mixture_family()
    assert newman_sample(fam, 50, seed=3).indices == newman_sample(fam, 50, seed=3).indices
