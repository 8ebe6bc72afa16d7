import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bispectral.exceptions import DegenerateInputError, DomainError
from bispectral.groups import act_on_signal, make_group
from bispectral.spectral import (
    bispectrum,
    bispectrum_distance_to_orbit,
    character_table,
    full_bispectrum,
    gft,
    gft2,
    inverse_gft,
    normalized_bispectrum,
    orbit_scale,
    phase_scrambled,
    power_spectrum,
    random_generic_signal,
    scaled_orbit_distance,
    symmetry_partners,
    triple_correlation,
)

SPECS = ["2", "3", "4", "5", "8", "4,2", "2,2,2", "2,6", "3,3"]


def fft_oracle(x, group):
    """GFT via numpy's n-dimensional FFT on the mixed-radix reshaping."""
    return np.fft.fftn(np.reshape(x, group.factors)).ravel()


def brute_triple_correlation(x, n):
    out = np.zeros((n, n), dtype=complex)
    for s1 in range(n):
        for s2 in range(n):
            out[s1, s2] = sum(np.conj(x[g]) * x[(g + s1) % n] * x[(g + s2) % n] for g in range(n))
    return out


def test_character_table_examples():
    assert np.allclose(character_table(make_group([2])).matrix, [[1, 1], [1, -1]])
    assert np.allclose(character_table(make_group([4])).matrix[1], [1, -1j, -1, 1j])
    walsh = [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]]
    assert np.array_equal(character_table(make_group([2, 2])).matrix, walsh)


@pytest.mark.parametrize("spec", SPECS)
def test_character_table_unitary_and_closed(spec):
    G = make_group(spec)
    T = character_table(G)
    n = G.order
    assert np.allclose(T.matrix @ T.matrix.conj().T, n * np.eye(n), atol=1e-12)
    c = T.closure
    prod = T.matrix[:, None, :] * T.matrix[None, :, :]
    assert np.allclose(prod, T.matrix[c], atol=1e-12)
    # irreps are labelled like group elements, so the closure is the Cayley table
    assert np.array_equal(c, G.table)


@pytest.mark.parametrize("spec", SPECS)
def test_gft_matches_fft(spec, rng):
    G = make_group(spec)
    X = rng.standard_normal((5, G.order)) + 1j * rng.standard_normal((5, G.order))
    got = gft(X, character_table(G))
    want = np.array([fft_oracle(x, G) for x in X])
    assert np.allclose(got, want, atol=1e-12)


def test_gft_examples():
    T = character_table(make_group([4]))
    delta = np.array([1.0, 0, 0, 0])
    assert np.allclose(gft(delta, T), np.ones(4))
    assert np.allclose(gft(np.full(4, 2.5), T), [10, 0, 0, 0])
    shifted = gft(act_on_signal(1, delta, T.group), T)
    assert np.allclose(shifted, np.exp(-2j * np.pi * np.arange(4) / 4) * gft(delta, T))
    assert np.allclose(inverse_gft(np.ones(4), T), delta)
    assert np.allclose(inverse_gft([4, 0, 0, 0], T), np.ones(4))


def test_gft_length_mismatch():
    with pytest.raises(DomainError):
        gft(np.ones(3), character_table(make_group([4])))


@pytest.mark.parametrize("spec", SPECS)
def test_inverse_round_trip(spec, rng):
    T = character_table(make_group(spec))
    x = rng.standard_normal(T.order)
    assert np.allclose(inverse_gft(gft(x, T), T), x, atol=1e-12)


def test_power_spectrum_invariant_but_incomplete(rng):
    G = make_group([8])
    T = character_table(G)
    assert np.allclose(power_spectrum(gft(np.eye(8)[0], T)), 1)
    x = rng.standard_normal(8)
    for g in range(8):
        assert np.allclose(power_spectrum(gft(act_on_signal(g, x, G), T)), power_spectrum(gft(x, T)), atol=1e-10)
    y = phase_scrambled(x, T, rng)
    assert np.isrealobj(y)
    assert np.allclose(power_spectrum(gft(y, T)), power_spectrum(gft(x, T)), atol=1e-10)
    assert bispectrum_distance_to_orbit(x, y, G) > 0.1


def test_phase_scrambled_on_elementary_abelian_flips_signs(rng):
    G = make_group([2, 2, 2])
    T = character_table(G)
    x = rng.standard_normal(8)
    ys = [phase_scrambled(x, T, rng) for _ in range(10)]
    assert max(bispectrum_distance_to_orbit(x, y, G) for y in ys) > 0.1


def test_bispectrum_examples():
    T = character_table(make_group([4]))
    b = bispectrum(gft(np.array([1.0, 0, 0, 0]), T), T)
    assert np.allclose(b.values, 1)
    assert b.values.shape == (10,)
    c = 1.7
    full = full_bispectrum(gft(np.full(4, c), T), T)
    expected = np.zeros((4, 4))
    expected[0, 0] = c**3 * 4**3
    assert np.allclose(full, expected)


def test_bispectrum_packing_matches_full(rng):
    T = character_table(make_group("4,2"))
    fhat = gft(rng.standard_normal(8), T)
    b = bispectrum(fhat, T)
    full = full_bispectrum(fhat, T)
    assert np.allclose(b.full(), full)
    for i in range(8):
        for j in range(8):
            assert b[i, j] == pytest.approx(full[i, j])


def test_bispectrum_matches_fft_oracle(rng):
    n = 8
    x = rng.standard_normal(n)
    f = np.fft.fft(x)
    want = np.array([[f[i] * f[j] * np.conj(f[(i + j) % n]) for j in range(n)] for i in range(n)])
    T = character_table(make_group([n]))
    assert np.allclose(full_bispectrum(gft(x, T), T), want, atol=1e-10)


def test_normalized_examples(rng):
    T = character_table(make_group([4]))
    b = normalized_bispectrum(bispectrum(gft(np.eye(4)[0], T), T))
    assert np.allclose(b.values, 1 / np.sqrt(10))
    x = rng.standard_normal(4)
    for c in (0.01, 0.5, 3.0, 250.0):
        lhs = normalized_bispectrum(bispectrum(gft(c * x, T), T)).values
        rhs = normalized_bispectrum(bispectrum(gft(x, T), T)).values
        assert np.allclose(lhs, rhs, atol=1e-9)
    with pytest.raises(DegenerateInputError):
        normalized_bispectrum(bispectrum(gft(np.zeros(4), T), T))


def test_negative_scale_flips_normalized_bispectrum(rng):
    # beta(-x) = -beta(x): negative scalars are outside the positive-scale theorem
    T = character_table(make_group([2]))
    x = rng.standard_normal(2)
    pos = normalized_bispectrum(bispectrum(gft(x, T), T)).values
    neg = normalized_bispectrum(bispectrum(gft(-x, T), T)).values
    assert np.allclose(neg, -pos)
    assert not np.allclose(neg, pos)


def test_triple_correlation_examples():
    G = make_group([4])
    delta = np.eye(4)[0]
    a = triple_correlation(delta, G)
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    assert np.allclose(a, expected)
    assert np.allclose(a, brute_triple_correlation(delta, 4))
    assert np.allclose(triple_correlation(np.ones(5), make_group([5])), 5)


@pytest.mark.parametrize("n", [4, 8])
def test_triple_correlation_brute_force(n, rng):
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    assert np.allclose(triple_correlation(x, make_group([n])), brute_triple_correlation(x, n), atol=1e-10)


@pytest.mark.parametrize("spec", ["4", "8", "4,2", "2,2,2"])
def test_triple_correlation_duality(spec, rng):
    G = make_group(spec)
    T = character_table(G)
    x = rng.standard_normal(G.order)
    lhs = gft2(triple_correlation(x, G), T)
    assert np.allclose(lhs, full_bispectrum(gft(x, T), T), atol=1e-8)


@pytest.mark.parametrize("n", [8, 16])
def test_symmetry_identities(n, rng):
    T = character_table(make_group([n]))
    B = full_bispectrum(gft(rng.standard_normal(n), T), T)
    for k1 in range(n):
        for k2 in range(n):
            for (a, b), conj in symmetry_partners(k1, k2, n):
                want = np.conj(B[k1, k2]) if conj else B[k1, k2]
                assert abs(B[a, b] - want) <= 1e-10


def test_orbit_distance_examples(rng):
    G = make_group([8])
    x = rng.standard_normal(8)
    assert bispectrum_distance_to_orbit(x, act_on_signal(3, x, G), G) == pytest.approx(0, abs=1e-14)
    y = x.copy()
    y[2] += 100
    assert bispectrum_distance_to_orbit(x, y, G) > 1
    assert bispectrum_distance_to_orbit(x, rng.standard_normal(8), G) > 0


def test_scaled_orbit_distance_recovers_scale(rng):
    G = make_group("4,2")
    x = rng.standard_normal(8)
    d, c, g = scaled_orbit_distance(x, 2.5 * act_on_signal(5, x, G), G)
    assert d == pytest.approx(0, abs=1e-12)
    assert c == pytest.approx(2.5)
    assert g == 5


def test_orbit_scale(rng):
    G = make_group([8])
    T = character_table(G)
    x = rng.standard_normal(8)
    y = 4.0 * act_on_signal(2, x, G)
    assert orbit_scale(x, y, T) == pytest.approx(0.25, rel=1e-12)


def test_random_generic_signal(rng):
    T = character_table(make_group([8]))
    x = random_generic_signal(8, rng, threshold=1e-3, table=T)
    assert np.min(np.abs(gft(x, T))) > 1e-3


@settings(max_examples=200, deadline=None)
@given(
    spec=st.sampled_from(SPECS),
    g=st.integers(0, 100),
    seed=st.integers(0, 2**32 - 1),
)
def test_bispectrum_invariance_property(spec, g, seed):
    G = make_group(spec)
    T = character_table(G)
    x = np.random.default_rng(seed).standard_normal(G.order)
    g %= G.order
    a = bispectrum(gft(x, T), T).values
    b = bispectrum(gft(act_on_signal(g, x, G), T), T).values
    assert np.allclose(a, b, atol=1e-9 * max(1.0, np.abs(a).max()))


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 6, elements=st.floats(-1e3, 1e3)))
def test_gft_linear_and_invertible(x):
    T = character_table(make_group([6]))
    assert np.allclose(inverse_gft(gft(x, T), T), x, atol=1e-9)
    assert np.allclose(gft(2 * x, T), 2 * gft(x, T))
