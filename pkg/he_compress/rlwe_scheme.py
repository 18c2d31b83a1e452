"""
The toy RLWE cryptosystem over R_q = Z_q[X]/(X^N+1).

Mirrors lwe_scheme: keygen, encryption with caller-chosen or sampled randomness,
coefficientwise decryption, seed-compressed fresh ciphertexts, linear operations,
and a per-coefficient extraction oracle that computes one decrypted coefficient
without a full polynomial product.
"""

import random
from collections.abc import Sequence

from he_compress.core_math import (
    poly_add,
    poly_neg,
    poly_negacyclic_mul,
    poly_scalar_mul,
    poly_sub,
    prg_expand,
    random_seed,
    round_half_up_div,
    sample_error_vector,
    sample_uniform_vector,
    scalar_growth_bits,
)
from he_compress.errors import CoefficientIndexError, MessageRangeError, ParameterError
from he_compress.models import Polynomial, RlweCiphertext, RlweParams, RlweSecretKey, SeededRlweCiphertext


def _check_message(mu: Polynomial, params: RlweParams) -> None:
    if len(mu) != params.N:
        raise ParameterError(f"plaintext has {len(mu)} coefficients, params expect N={params.N}")
    for i, c in enumerate(mu):
        if not 0 <= c < params.p:
            raise MessageRangeError(f"plaintext coefficient {i} = {c} outside Z_{params.p}")


def _check_key(sk: RlweSecretKey, params: RlweParams) -> None:
    if len(sk.s) != params.N:
        raise ParameterError(f"secret key has {len(sk.s)} coefficients, params expect N={params.N}")


def _check_ciphertext(ct: RlweCiphertext, params: RlweParams) -> None:
    if len(ct.a) != params.N or len(ct.b) != params.N:
        raise ParameterError(f"ciphertext polynomials have lengths {len(ct.a)}/{len(ct.b)}, params expect N={params.N}")


def rlwe_keygen(params: RlweParams, rng: random.Random) -> RlweSecretKey:
    return RlweSecretKey(Polynomial(sample_uniform_vector(params.N, params.q, rng)))


def rlwe_encrypt_with_mask(sk: RlweSecretKey, mu: Polynomial, params: RlweParams, a: Polynomial, e: Sequence[int]) -> RlweCiphertext:
    """B = A·S + Δ·μ + E mod R_q for a caller-chosen A and E."""
    _check_message(mu, params)
    _check_key(sk, params)
    if len(a) != params.N or len(e) != params.N:
        raise ParameterError(f"mask/error must have length N={params.N}")
    q = params.q
    mask = Polynomial(tuple(c % q for c in a))
    product = poly_negacyclic_mul(mask, sk.s, params.N, q)
    b = tuple((x + params.delta * m + err) % q for x, m, err in zip(product.coeffs, mu.coeffs, e))
    return RlweCiphertext(mask, Polynomial(b), params.fresh_noise_budget_bits)


def rlwe_encrypt(sk: RlweSecretKey, mu: Polynomial, params: RlweParams, rng: random.Random) -> RlweCiphertext:
    _check_message(mu, params)
    a = Polynomial(sample_uniform_vector(params.N, params.q, rng))
    return rlwe_encrypt_with_mask(sk, mu, params, a, sample_error_vector(params.noise, params.N, rng))


def rlwe_phase(sk: RlweSecretKey, ct: RlweCiphertext, params: RlweParams) -> Polynomial:
    """μ*(X) = B(X) − A(X)·S(X) mod R_q."""
    _check_key(sk, params)
    _check_ciphertext(ct, params)
    return poly_sub(ct.b, poly_negacyclic_mul(ct.a, sk.s, params.N, params.q), params.q)


def rlwe_decrypt(sk: RlweSecretKey, ct: RlweCiphertext, params: RlweParams) -> Polynomial:
    phase = rlwe_phase(sk, ct, params)
    return Polynomial(tuple(round_half_up_div(c, params.delta) % params.p for c in phase.coeffs))


def rlwe_encrypt_seeded(sk: RlweSecretKey, mu: Polynomial, params: RlweParams, seed: bytes | None, rng: random.Random) -> SeededRlweCiphertext:
    """Encrypt with A = PRG(seed) and keep only (seed, B)."""
    if seed is None:
        seed = random_seed(rng)
    _check_message(mu, params)
    a = Polynomial(prg_expand(seed, params.N, params.q))
    ct = rlwe_encrypt_with_mask(sk, mu, params, a, sample_error_vector(params.noise, params.N, rng))
    return SeededRlweCiphertext(seed, ct.b, ct.noise_budget_bits)


def rlwe_expand_seeded(sct: SeededRlweCiphertext, params: RlweParams) -> RlweCiphertext:
    if len(sct.b) != params.N:
        raise ParameterError(f"seeded ciphertext has {len(sct.b)} coefficients, params expect N={params.N}")
    a = Polynomial(prg_expand(sct.seed, params.N, params.q))
    return RlweCiphertext(a, Polynomial(tuple(c % params.q for c in sct.b)), sct.noise_budget_bits)


def rlwe_coeff_phase(sk: RlweSecretKey, ct: RlweCiphertext, k: int, params: RlweParams) -> int:
    """Coefficient k of the phase: B[k] − Σ_{i<=k} A[k−i]·S[i] + Σ_{i>k} A[N+k−i]·S[i] mod q."""
    _check_key(sk, params)
    _check_ciphertext(ct, params)
    N = params.N
    if not 0 <= k < N:
        raise CoefficientIndexError(f"coefficient index {k} outside [0, {N})")
    a, s = ct.a.coeffs, sk.s.coeffs
    low = sum(a[k - i] * s[i] for i in range(k + 1))
    high = sum(a[N + k - i] * s[i] for i in range(k + 1, N))
    return (ct.b[k] - low + high) % params.q


def rlwe_extract_coeff_plain(sk: RlweSecretKey, ct: RlweCiphertext, k: int, params: RlweParams) -> int:
    """Decrypt coefficient k alone; equals rlwe_decrypt(sk, ct, params)[k]."""
    return round_half_up_div(rlwe_coeff_phase(sk, ct, k, params), params.delta) % params.p


def rlwe_add(ct1: RlweCiphertext, ct2: RlweCiphertext, params: RlweParams) -> RlweCiphertext:
    _check_ciphertext(ct1, params)
    _check_ciphertext(ct2, params)
    q = params.q
    budget = min(ct1.noise_budget_bits, ct2.noise_budget_bits) - 1
    return RlweCiphertext(poly_add(ct1.a, ct2.a, q), poly_add(ct1.b, ct2.b, q), budget)


def rlwe_sub(ct1: RlweCiphertext, ct2: RlweCiphertext, params: RlweParams) -> RlweCiphertext:
    _check_ciphertext(ct1, params)
    _check_ciphertext(ct2, params)
    q = params.q
    budget = min(ct1.noise_budget_bits, ct2.noise_budget_bits) - 1
    return RlweCiphertext(poly_add(ct1.a, poly_neg(ct2.a, q), q), poly_add(ct1.b, poly_neg(ct2.b, q), q), budget)


def rlwe_plain_mul(ct: RlweCiphertext, k: int, params: RlweParams) -> RlweCiphertext:
    """Multiply by a constant plaintext k in Z_p."""
    if not 0 <= k < params.p:
        raise MessageRangeError(f"scalar {k} outside Z_{params.p}")
    _check_ciphertext(ct, params)
    q = params.q
    return RlweCiphertext(poly_scalar_mul(ct.a, k, q), poly_scalar_mul(ct.b, k, q), ct.noise_budget_bits - scalar_growth_bits(k))


def rlwe_weighted_sum(cts: Sequence[RlweCiphertext], weights: Sequence[tuple[int, int]], params: RlweParams) -> RlweCiphertext:
    if not weights:
        raise ParameterError("weighted sum needs at least one (index, weight) pair")
    total: RlweCiphertext | None = None
    for index, weight in weights:
        if not 0 <= index < len(cts):
            raise ParameterError(f"input index {index} out of range for {len(cts)} ciphertexts")
        term = rlwe_plain_mul(cts[index], weight, params)
        total = term if total is None else rlwe_add(total, term, params)
    return total
