import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bispectral.exceptions import CapacityError, DomainError, InvalidGroupError
from bispectral.groups import (
    act_on_signal,
    cayley_from_group,
    compose,
    inverse,
    is_latin_square,
    make_group,
    orbit,
    parse_group_spec,
    unique_orbit,
)

GROUPS = ["2", "3", "5", "8", "4,2", "2,2,2", "2,6", "3,3"]


def test_make_group_orders():
    assert make_group([8]).order == 8
    assert make_group("4,2").order == 8
    assert make_group("4x2").factors == (4, 2)
    assert make_group([2, 2, 2]).order == 8


@pytest.mark.parametrize("bad", [[0], [1], [-3], [], [2, 0], [4, 1]])
def test_make_group_rejects(bad):
    with pytest.raises(InvalidGroupError):
        make_group(bad)


def test_make_group_max_order():
    make_group([64, 64])
    with pytest.raises(CapacityError):
        make_group([64, 64], max_order=1000)


def test_parse_spec_garbage():
    with pytest.raises(InvalidGroupError):
        parse_group_spec("four")


def test_element_order_is_mixed_radix_last_fastest():
    G = make_group("4,2")
    assert [tuple(c) for c in G.coords[:4]] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_compose_examples():
    assert compose(1, 1, make_group([2])).index == 0
    G = make_group([4, 2])
    assert tuple(compose((3, 1), (1, 1), G).coords) == (0, 0)
    assert tuple(compose((3, 1), (2, 1), G).coords) == (1, 0)
    assert tuple(inverse((1, 1), G).coords) == (3, 1)
    Z5 = make_group([5])
    assert tuple(compose(3, 4, Z5).coords) == (2,)


def test_act_cyclic_example():
    G = make_group([4])
    assert list(act_on_signal(1, np.array(list("abcd")), G)) == list("dabc")


def test_act_klein_swaps_row_pairs():
    # entries indexed (0,0),(0,1),(1,0),(1,1); acting by (1,0) swaps the two halves
    G = make_group([2, 2])
    assert list(act_on_signal((1, 0), np.array(list("abcd")), G)) == list("cdab")
    assert list(act_on_signal((0, 1), np.array(list("abcd")), G)) == list("badc")


def test_act_length_mismatch():
    with pytest.raises(DomainError):
        act_on_signal(1, np.zeros(5), make_group([4]))


def test_cayley_small():
    assert cayley_from_group(make_group([2])).tolist() == [[0, 1], [1, 0]]
    assert cayley_from_group(make_group([3])).tolist() == [[0, 1, 2], [1, 2, 0], [2, 0, 1]]
    klein = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]
    assert cayley_from_group(make_group([2, 2])).tolist() == klein


def test_orbit_sizes():
    G = make_group([4])
    assert len(unique_orbit(np.ones(4), G)) == 1
    assert len(unique_orbit(np.array([1.0, 0, 1, 0]), G)) == 2
    assert len(unique_orbit(np.array([1.0, 2, 3, 4]), G)) == 4


@pytest.mark.parametrize("spec", GROUPS)
def test_group_axioms_exhaustive(spec):
    G = make_group(spec)
    T = cayley_from_group(G)
    e = G.identity.index
    n = G.order
    assert is_latin_square(T)
    assert np.all(T[e] == np.arange(n))
    assert np.all(T == T.T)
    a, b, c = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    assert np.all(T[T[a, b], c] == T[a, T[b, c]])
    assert np.all(T[np.arange(n), G.inverses] == e)


@settings(max_examples=1000, deadline=None)
@given(spec=st.sampled_from(GROUPS), data=st.data())
def test_action_laws(spec, data):
    G = make_group(spec)
    g = data.draw(st.integers(0, G.order - 1))
    h = data.draw(st.integers(0, G.order - 1))
    x = np.arange(G.order, dtype=float) ** 2
    gh = compose(g, h, G).index
    assert np.array_equal(act_on_signal(g, act_on_signal(h, x, G), G), act_on_signal(gh, x, G))
    assert np.array_equal(act_on_signal(G.identity.index, x, G), x)
    gi = inverse(g, G).index
    assert np.array_equal(act_on_signal(gi, act_on_signal(g, x, G), G), x)


def test_orbits_partition_binary_signals():
    # every binary signal on Z/6 belongs to exactly one orbit; sizes divide 6
    G = make_group([6])
    seen = {}
    for bits in itertools.product([0, 1], repeat=6):
        key = min(tuple(r) for r in orbit(np.array(bits), G))
        seen.setdefault(key, set()).add(bits)
    assert sum(len(v) for v in seen.values()) == 64
    for members in seen.values():
        assert 6 % len(members) == 0
        rep = np.array(next(iter(members)))
        assert {tuple(r) for r in orbit(rep, G)} == members


def test_batched_action():
    G = make_group("4,2")
    X = np.arange(24.0).reshape(3, 8)
    out = act_on_signal(5, X, G)
    for row, x in zip(out, X):
        assert np.array_equal(row, act_on_signal(5, x, G))
