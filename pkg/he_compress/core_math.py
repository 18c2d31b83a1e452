"""
Modular and negacyclic polynomial arithmetic, PRG expansion and sampling.

Residues are Python ints in [0, q). Randomized functions take a caller-owned
``random.Random``-compatible handle (``random.SystemRandom()`` outside tests).
"""

import math
import random

import gmpy2
from Cryptodome.Cipher import ChaCha20
from Cryptodome.Hash import SHA256

from he_compress.errors import ParameterError
from he_compress.models import SEED_BYTES, NoiseParams, Polynomial

# Domain separation for the PRG key derivation. Changing this changes every
# seed-expanded mask, so it is versioned.
_PRG_DOMAIN = b"he-compress/prg/v1"
_PRG_NONCE = bytes(8)

# Beyond this many standard deviations exp(-x^2/2) is 0 in double precision.
_GAUSSIAN_CUTOFF = 40.0


def mod_q(x: int, q: int) -> int:
    """Canonical representative of x in [0, q)."""
    if q < 2:
        raise ParameterError(f"modulus must be >= 2, got {q}")
    return x % q


def floor_log2(x: int) -> int:
    """floor(log2(x)) for a positive integer, computed exactly."""
    if x < 1:
        raise ParameterError(f"floor_log2 needs a positive integer, got {x}")
    return x.bit_length() - 1


def round_half_up_div(x: int, d: int) -> int:
    """⌊x/d⌉ with ties rounded up, for x >= 0 and d >= 1."""
    return (2 * x + d) // (2 * d)


def _check_pair(a: Polynomial, b: Polynomial) -> None:
    if len(a) != len(b):
        raise ParameterError(f"polynomial length mismatch: {len(a)} vs {len(b)}")


def poly_zero(N: int) -> Polynomial:
    return Polynomial((0,) * N)


def poly_monomial(j: int, N: int, q: int, c: int = 1) -> Polynomial:
    """c·X^j reduced into Z_q[X]/(X^N+1); every wrap past X^N flips the sign."""
    wraps, position = divmod(j, N)
    sign = -1 if wraps % 2 else 1
    coeffs = [0] * N
    coeffs[position] = mod_q(sign * c, q)
    return Polynomial(tuple(coeffs))


def poly_add(a: Polynomial, b: Polynomial, q: int) -> Polynomial:
    _check_pair(a, b)
    return Polynomial(tuple((x + y) % q for x, y in zip(a.coeffs, b.coeffs)))


def poly_sub(a: Polynomial, b: Polynomial, q: int) -> Polynomial:
    _check_pair(a, b)
    return Polynomial(tuple((x - y) % q for x, y in zip(a.coeffs, b.coeffs)))


def poly_neg(a: Polynomial, q: int) -> Polynomial:
    return Polynomial(tuple(-x % q for x in a.coeffs))


def poly_scalar_mul(a: Polynomial, k: int, q: int) -> Polynomial:
    return Polynomial(tuple(x * k % q for x in a.coeffs))


def _check_ring_operands(a: Polynomial, b: Polynomial, N: int) -> None:
    if N < 1 or N & (N - 1):
        raise ParameterError(f"ring degree must be a power of two, got {N}")
    if len(a) != N or len(b) != N:
        raise ParameterError(f"operands must have length N={N}, got {len(a)} and {len(b)}")


def poly_negacyclic_mul_schoolbook(a: Polynomial, b: Polynomial, N: int, q: int) -> Polynomial:
    """O(N^2) product in Z_q[X]/(X^N+1). Reference implementation for small rings and tests."""
    _check_ring_operands(a, b, N)
    result = [0] * N
    for i, ai in enumerate(a.coeffs):
        if not ai:
            continue
        for j, bj in enumerate(b.coeffs):
            k = i + j
            if k < N:
                result[k] += ai * bj
            else:
                result[k - N] -= ai * bj
    return Polynomial(tuple(x % q for x in result))


def poly_negacyclic_mul(a: Polynomial, b: Polynomial, N: int, q: int) -> Polynomial:
    """Product in Z_q[X]/(X^N+1), coefficient k = Σ_{i+j=k} a_i b_j − Σ_{i+j=N+k} a_i b_j mod q.

    Evaluated by Kronecker substitution: both operands are packed into one big
    integer each (fixed-width little-endian slots wide enough that no slot of the
    full product overflows), multiplied once with GMP, and unpacked. The result is
    exactly the schoolbook result.
    """
    _check_ring_operands(a, b, N)
    slot_bytes = ((N * (q - 1) ** 2).bit_length() + 8) // 8

    def pack(poly: Polynomial) -> gmpy2.mpz:
        raw = b"".join((c % q).to_bytes(slot_bytes, "little") for c in poly.coeffs)
        return gmpy2.mpz(int.from_bytes(raw, "little"))

    product = int(pack(a) * pack(b)).to_bytes(2 * N * slot_bytes, "little")
    full = [int.from_bytes(product[k * slot_bytes : (k + 1) * slot_bytes], "little") for k in range(2 * N)]
    return Polynomial(tuple((full[k] - full[k + N]) % q for k in range(N)))


def random_seed(rng: random.Random) -> bytes:
    """Draw a fresh 128-bit PRG seed."""
    return rng.getrandbits(SEED_BYTES * 8).to_bytes(SEED_BYTES, "little")


def prg_expand(seed: bytes, count: int, q: int) -> tuple[int, ...]:
    """Deterministically expand a 128-bit seed into `count` uniform residues in [0, q).

    Keystream: ChaCha20 keyed with SHA-256(domain || seed), zero nonce. Each residue
    is a little-endian chunk of ceil(bitlen(q-1)/8) bytes masked to bitlen(q-1)
    bits; chunks >= q are rejected so there is no modulo bias.
    """
    if count < 0:
        raise ParameterError(f"count must be >= 0, got {count}")
    if q < 2:
        raise ParameterError(f"modulus must be >= 2, got {q}")
    if len(seed) != SEED_BYTES:
        raise ParameterError(f"seed must be {SEED_BYTES} bytes, got {len(seed)}")
    if count == 0:
        return ()

    bits = (q - 1).bit_length()
    chunk = (bits + 7) // 8
    mask = (1 << bits) - 1
    key = SHA256.new(_PRG_DOMAIN + seed).digest()
    cipher = ChaCha20.new(key=key, nonce=_PRG_NONCE)

    out: list[int] = []
    while len(out) < count:
        stream = cipher.encrypt(bytes((count - len(out)) * chunk))
        for offset in range(0, len(stream), chunk):
            value = int.from_bytes(stream[offset : offset + chunk], "little") & mask
            if value < q:
                out.append(value)
    return tuple(out)


def sample_error(noise: NoiseParams, rng: random.Random) -> int:
    """Discrete Gaussian of width sigma, rejection-sampled on [-bound, bound]."""
    while True:
        x = rng.randrange(-noise.bound, noise.bound + 1)
        ratio = x / noise.sigma
        if abs(ratio) > _GAUSSIAN_CUTOFF:
            continue
        if rng.random() < math.exp(-0.5 * ratio * ratio):
            return x


def sample_error_vector(noise: NoiseParams, count: int, rng: random.Random) -> tuple[int, ...]:
    return tuple(sample_error(noise, rng) for _ in range(count))


def sample_uniform_vector(n: int, q: int, rng: random.Random) -> tuple[int, ...]:
    """n independent uniform residues in [0, q)."""
    if n < 1:
        raise ParameterError(f"vector length must be >= 1, got {n}")
    return tuple(rng.randrange(q) for _ in range(n))


def scalar_growth_bits(k: int) -> int:
    """Bits of noise growth from multiplying by |k|: ceil(log2 |k|), 0 for |k| <= 1."""
    return max(abs(k) - 1, 0).bit_length()
