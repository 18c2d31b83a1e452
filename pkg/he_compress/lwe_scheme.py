"""
The toy LWE cryptosystem: keygen, encryption, decryption, seed-compressed fresh
ciphertexts and the linear operations the demo server applies.
"""

import random
from collections.abc import Sequence

from he_compress.core_math import prg_expand, random_seed, round_half_up_div, sample_error, sample_uniform_vector, scalar_growth_bits
from he_compress.errors import MessageRangeError, ParameterError
from he_compress.models import LweCiphertext, LweParams, LweSecretKey, SeededLweCiphertext


def _check_message(mu: int, p: int) -> None:
    if not 0 <= mu < p:
        raise MessageRangeError(f"message {mu} outside Z_{p}")


def _check_key(sk: LweSecretKey, params: LweParams) -> None:
    if len(sk.coeffs) != params.n:
        raise ParameterError(f"secret key has {len(sk.coeffs)} coefficients, params expect n={params.n}")


def _check_ciphertext(ct: LweCiphertext, params: LweParams) -> None:
    if len(ct.a) != params.n:
        raise ParameterError(f"ciphertext mask has length {len(ct.a)}, params expect n={params.n}")


def _inner(a: Sequence[int], s: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, s))


def lwe_keygen(params: LweParams, rng: random.Random) -> LweSecretKey:
    """Secret key uniform in Z_q^n."""
    return LweSecretKey(sample_uniform_vector(params.n, params.q, rng))


def lwe_encrypt_with_mask(sk: LweSecretKey, mu: int, params: LweParams, a: Sequence[int], e: int) -> LweCiphertext:
    """b = <a, sk> + Δ·μ + e mod q for a caller-chosen mask a and error e."""
    _check_message(mu, params.p)
    _check_key(sk, params)
    if len(a) != params.n:
        raise ParameterError(f"mask has length {len(a)}, params expect n={params.n}")
    q = params.q
    mask = tuple(x % q for x in a)
    b = (_inner(mask, sk.coeffs) + params.delta * mu + e) % q
    return LweCiphertext(mask, b, params.fresh_noise_budget_bits)


def lwe_encrypt(sk: LweSecretKey, mu: int, params: LweParams, rng: random.Random) -> LweCiphertext:
    _check_message(mu, params.p)
    a = sample_uniform_vector(params.n, params.q, rng)
    return lwe_encrypt_with_mask(sk, mu, params, a, sample_error(params.noise, rng))


def lwe_phase(sk: LweSecretKey, ct: LweCiphertext, params: LweParams) -> int:
    """μ* = b − <a, sk> mod q, the value decryption rounds."""
    _check_key(sk, params)
    _check_ciphertext(ct, params)
    return (ct.b - _inner(ct.a, sk.coeffs)) % params.q


def lwe_decrypt(sk: LweSecretKey, ct: LweCiphertext, params: LweParams) -> int:
    """⌊μ*/Δ⌉ mod p. The trailing mod p maps a negative-noise μ=0 back to 0."""
    return round_half_up_div(lwe_phase(sk, ct, params), params.delta) % params.p


def lwe_encrypt_seeded(sk: LweSecretKey, mu: int, params: LweParams, seed: bytes | None, rng: random.Random) -> SeededLweCiphertext:
    """Encrypt with a = PRG(seed); only (seed, b) is kept. A seed is drawn from rng when none is given."""
    if seed is None:
        seed = random_seed(rng)
    _check_message(mu, params.p)
    a = prg_expand(seed, params.n, params.q)
    ct = lwe_encrypt_with_mask(sk, mu, params, a, sample_error(params.noise, rng))
    return SeededLweCiphertext(seed, ct.b, ct.noise_budget_bits)


def lwe_expand_seeded(sct: SeededLweCiphertext, params: LweParams) -> LweCiphertext:
    return LweCiphertext(prg_expand(sct.seed, params.n, params.q), sct.b % params.q, sct.noise_budget_bits)


def lwe_add(ct1: LweCiphertext, ct2: LweCiphertext, params: LweParams) -> LweCiphertext:
    _check_ciphertext(ct1, params)
    _check_ciphertext(ct2, params)
    q = params.q
    a = tuple((x + y) % q for x, y in zip(ct1.a, ct2.a))
    budget = min(ct1.noise_budget_bits, ct2.noise_budget_bits) - 1
    return LweCiphertext(a, (ct1.b + ct2.b) % q, budget)


def lwe_sub(ct1: LweCiphertext, ct2: LweCiphertext, params: LweParams) -> LweCiphertext:
    _check_ciphertext(ct1, params)
    _check_ciphertext(ct2, params)
    q = params.q
    a = tuple((x - y) % q for x, y in zip(ct1.a, ct2.a))
    budget = min(ct1.noise_budget_bits, ct2.noise_budget_bits) - 1
    return LweCiphertext(a, (ct1.b - ct2.b) % q, budget)


def lwe_plain_mul(ct: LweCiphertext, k: int, params: LweParams) -> LweCiphertext:
    """k ⊠ ct for a plaintext scalar k in Z_p."""
    _check_message(k, params.p)
    _check_ciphertext(ct, params)
    q = params.q
    return LweCiphertext(tuple(x * k % q for x in ct.a), ct.b * k % q, ct.noise_budget_bits - scalar_growth_bits(k))


def lwe_weighted_sum(cts: Sequence[LweCiphertext], weights: Sequence[tuple[int, int]], params: LweParams) -> LweCiphertext:
    """Σ w·cts[i] over the (index, weight) pairs; the demo server's processing step."""
    if not weights:
        raise ParameterError("weighted sum needs at least one (index, weight) pair")
    total: LweCiphertext | None = None
    for index, weight in weights:
        if not 0 <= index < len(cts):
            raise ParameterError(f"input index {index} out of range for {len(cts)} ciphertexts")
        term = lwe_plain_mul(cts[index], weight, params)
        total = term if total is None else lwe_add(total, term, params)
    return total
