import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from neighbourmult.seeding import derive_seed, member_seeds, rng_for


def test_same_inputs_same_seed():
    assert derive_seed(3, "pool", 500, 2) == derive_seed(3, "pool", 500, 2)


@given(st.integers(0, 2**63), st.text(max_size=8))
def test_seed_is_64_bit(master, key):
    s = derive_seed(master, key)
    assert 0 <= s < 2**64


def test_keys_are_typed():
    assert derive_seed(0, "3") != derive_seed(0, 3)


def test_key_order_matters():
    assert derive_seed(0, "a", "b") != derive_seed(0, "b", "a")


def test_member_seeds_prefix_stable():
    # growing the pool keeps the existing members' seeds
    assert member_seeds(5, 10, "x")[:4] == member_seeds(5, 4, "x")


def test_rng_for_reproducible():
    a = rng_for(9, "k").random(5)
    b = rng_for(9, "k").random(5)
    np.testing.assert_array_equal(a, b)
