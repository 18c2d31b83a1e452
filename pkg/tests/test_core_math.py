"""Tests for modular and ring arithmetic, the PRG and the samplers."""

import random

import numpy as np
import pytest

from he_compress.core_math import (
    floor_log2,
    mod_q,
    poly_add,
    poly_monomial,
    poly_neg,
    poly_negacyclic_mul,
    poly_negacyclic_mul_schoolbook,
    poly_scalar_mul,
    poly_sub,
    poly_zero,
    prg_expand,
    random_seed,
    round_half_up_div,
    sample_error,
    sample_uniform_vector,
    scalar_growth_bits,
)
from he_compress.errors import ParameterError
from he_compress.models import NoiseParams, Polynomial

SEED = bytes(range(16))


def _random_poly(N, q, rng):
    return Polynomial(tuple(rng.randrange(q) for _ in range(N)))


def test_mod_q_examples():
    assert mod_q(0, 64) == 0
    assert mod_q(-1, 64) == 63
    assert mod_q(529, 64) == 17


def test_mod_q_rejects_tiny_modulus():
    with pytest.raises(ParameterError):
        mod_q(5, 1)


def test_floor_log2():
    assert floor_log2(1) == 0
    assert floor_log2(8256) == 13
    assert floor_log2(10403) == 13
    assert floor_log2(1 << 3071) == 3071
    with pytest.raises(ParameterError):
        floor_log2(0)


def test_round_half_up_div_ties_go_up():
    assert round_half_up_div(17, 16) == 1
    assert round_half_up_div(8, 16) == 1
    assert round_half_up_div(7, 16) == 0
    assert round_half_up_div(63, 16) == 4


def test_negacyclic_identity():
    rng = random.Random(1)
    a = _random_poly(8, 97, rng)
    one = poly_monomial(0, 8, 97)
    assert poly_negacyclic_mul(a, one, 8, 97) == a


def test_negacyclic_wraps_with_sign_flip():
    # X·(1+X) = X + X² = X − 1 in Z_17[X]/(X²+1)
    assert poly_negacyclic_mul(Polynomial((1, 1)), Polynomial((0, 1)), 2, 17) == Polynomial((16, 1))


@pytest.mark.parametrize("N", [4, 8, 16, 32, 64])
@pytest.mark.parametrize("q", [97, 65537, 2**27])
def test_negacyclic_matches_schoolbook(N, q):
    rng = random.Random(N * q)
    for _ in range(5):
        a, b = _random_poly(N, q, rng), _random_poly(N, q, rng)
        assert poly_negacyclic_mul(a, b, N, q) == poly_negacyclic_mul_schoolbook(a, b, N, q)


@pytest.mark.parametrize("N", [4, 16, 64])
def test_negacyclic_commutes_and_distributes(N):
    q = 2**27
    rng = random.Random(N)
    a, b, c = (_random_poly(N, q, rng) for _ in range(3))
    assert poly_negacyclic_mul(a, b, N, q) == poly_negacyclic_mul(b, a, N, q)
    left = poly_negacyclic_mul(a, poly_add(b, c, q), N, q)
    right = poly_add(poly_negacyclic_mul(a, b, N, q), poly_negacyclic_mul(a, c, N, q), q)
    assert left == right


def test_multiplying_by_x_n_times_negates():
    N, q = 8, 97
    a = _random_poly(N, q, random.Random(3))
    x = poly_monomial(1, N, q)
    result = a
    for _ in range(N):
        result = poly_negacyclic_mul(result, x, N, q)
    assert result == poly_neg(a, q)


def test_poly_monomial_reduces_past_degree_n():
    assert poly_monomial(4, 4, 97) == Polynomial((96, 0, 0, 0))
    assert poly_monomial(9, 4, 97, c=2) == Polynomial((0, 2, 0, 0))
    assert poly_monomial(5, 4, 97, c=2) == Polynomial((0, 95, 0, 0))
    assert poly_monomial(8, 4, 97) == Polynomial((1, 0, 0, 0))


def test_negacyclic_rejects_bad_operands():
    with pytest.raises(ParameterError):
        poly_negacyclic_mul(Polynomial((1, 2, 3)), Polynomial((1, 2, 3)), 3, 17)
    with pytest.raises(ParameterError):
        poly_negacyclic_mul(Polynomial((1, 2)), Polynomial((1, 2, 3, 4)), 4, 17)


def test_poly_add_sub():
    assert poly_add(Polynomial((5,)), Polynomial((60,)), 64) == Polynomial((1,))
    a = Polynomial((1, 2, 3, 4))
    assert poly_add(a, poly_zero(4), 64) == a
    assert poly_sub(a, a, 64) == poly_zero(4)
    assert poly_sub(Polynomial((0,)), Polynomial((1,)), 64) == Polynomial((63,))
    assert poly_scalar_mul(a, 16, 64) == Polynomial((16, 32, 48, 0))


def test_poly_add_length_mismatch():
    with pytest.raises(ParameterError):
        poly_add(Polynomial((1, 2)), Polynomial((1,)), 64)
    with pytest.raises(ParameterError):
        poly_sub(Polynomial((1, 2)), Polynomial((1,)), 64)


def test_prg_expand_empty_and_deterministic():
    assert prg_expand(SEED, 0, 64) == ()
    assert prg_expand(SEED, 5, 2**64) == prg_expand(SEED, 5, 2**64)
    assert prg_expand(SEED, 5, 2**64) != prg_expand(bytes(16), 5, 2**64)


def test_prg_expand_prefix_stable():
    # Longer expansions extend shorter ones for a power-of-two q (no rejections).
    assert prg_expand(SEED, 100, 2**27)[:10] == prg_expand(SEED, 10, 2**27)


def test_prg_expand_range_with_rejection():
    values = prg_expand(SEED, 2000, 97)
    assert len(values) == 2000
    assert all(0 <= v < 97 for v in values)


def test_prg_expand_rejects_bad_seed():
    with pytest.raises(ParameterError):
        prg_expand(b"short", 4, 64)
    with pytest.raises(ParameterError):
        prg_expand(SEED, -1, 64)


def test_prg_expand_mean_is_uniform():
    q = 2**64
    count = 100_000
    values = np.array(prg_expand(SEED, count, q), dtype=np.float64)
    expected = (q - 1) / 2
    sigma_of_mean = q / np.sqrt(12) / np.sqrt(count)
    assert abs(values.mean() - expected) < 3 * sigma_of_mean


def test_random_seed_is_sixteen_bytes():
    rng = random.Random(9)
    seed = random_seed(rng)
    assert len(seed) == 16
    assert seed != random_seed(rng)


def test_sample_error_respects_bound():
    noise = NoiseParams(3.2, 20)
    rng = random.Random(11)
    assert all(abs(sample_error(noise, rng)) <= 20 for _ in range(10_000))


def test_sample_error_degenerate_sigma_is_zero():
    noise = NoiseParams(0.01, 1)
    rng = random.Random(12)
    assert {sample_error(noise, rng) for _ in range(200)} == {0}


def test_sample_error_stddev():
    noise = NoiseParams(3.2, 20)
    rng = random.Random(13)
    samples = np.array([sample_error(noise, rng) for _ in range(100_000)])
    assert 3.0 <= samples.std() <= 3.4
    assert abs(samples.mean()) < 0.1


def test_sample_uniform_vector_range():
    rng = random.Random(14)
    assert len(sample_uniform_vector(1, 64, rng)) == 1
    values = sample_uniform_vector(630, 2**64, rng)
    assert len(values) == 630
    assert all(0 <= v < 2**64 for v in values)
    with pytest.raises(ParameterError):
        sample_uniform_vector(0, 64, rng)


def test_sample_uniform_vector_chi_square():
    rng = random.Random(15)
    values = sample_uniform_vector(100_000, 2**64, rng)
    counts = np.bincount(np.array([v >> 60 for v in values]), minlength=16)
    expected = len(values) / 16
    chi_square = float(((counts - expected) ** 2 / expected).sum())
    # df = 15, α = 0.001
    assert chi_square < 37.697


def test_scalar_growth_bits():
    assert [scalar_growth_bits(k) for k in (0, 1, 2, 3, 4, 5, 8, 9)] == [0, 0, 1, 2, 2, 3, 3, 4]
    assert scalar_growth_bits(-4) == 2
