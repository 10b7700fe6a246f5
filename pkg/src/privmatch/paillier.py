"""Paillier cryptosystem with signed fixed-point plaintexts.

The generator is fixed at g = N + 1, so encryption reduces to
(1 + m*N) * r^N mod N^2. Plaintexts are signed integers (coordinates rounded
to whole meters); a negative v is encoded as N - |v| and anything above N/2
decodes as negative. Arithmetic uses gmpy2 for bignum speed.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property

import gmpy2
import numpy as np


class KeyMismatchError(Exception):
    """Ciphertexts under different public keys were combined."""


@dataclass(frozen=True)
class PublicKey:
    n: int

    @cached_property
    def nsquare(self) -> int:
        return self.n * self.n

    @cached_property
    def fingerprint(self) -> str:
        return hashlib.sha256(str(self.n).encode()).hexdigest()[:16]

    @cached_property
    def _mpz_n(self):
        return gmpy2.mpz(self.n)

    @cached_property
    def _mpz_nsquare(self):
        return gmpy2.mpz(self.nsquare)


@dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    lam: int  # lcm(p-1, q-1)
    mu: int  # lam^-1 mod n
    p: int = 0
    q: int = 0

    @cached_property
    def _crt(self):
        """Precomputed CRT constants for fast decryption/exponentiation.

        Decryption mod p uses exponent p-1 over modulus p^2 (and likewise
        for q), which is a quarter of the work of the single lam exponent
        over N^2; the halves are then recombined with Garner's formula.
        """
        if not self.p or not self.q:
            return None
        p, q = gmpy2.mpz(self.p), gmpy2.mpz(self.q)
        psq, qsq = p * p, q * q
        n = self.public._mpz_n

        def _l(x, prime):
            return (x - 1) // prime

        hp = gmpy2.invert(_l(gmpy2.powmod(1 + n, p - 1, psq), p) % p, p)
        hq = gmpy2.invert(_l(gmpy2.powmod(1 + n, q - 1, qsq), q) % q, q)
        q_inv = gmpy2.invert(q, p)
        return p, q, psq, qsq, hp, hq, q_inv


@dataclass(frozen=True)
class Ciphertext:
    value: int
    pk_fingerprint: str

    def serialize(self) -> bytes:
        raw = self.value.to_bytes((self.value.bit_length() + 7) // 8 or 1, "big")
        return len(raw).to_bytes(4, "big") + raw

    @staticmethod
    def deserialize(data: bytes, pk: PublicKey) -> "Ciphertext":
        if len(data) < 4:
            raise ValueError("truncated ciphertext")
        length = int.from_bytes(data[:4], "big")
        if len(data) != 4 + length:
            raise ValueError("ciphertext length mismatch")
        return Ciphertext(int.from_bytes(data[4:], "big"), pk.fingerprint)


def serialize_int(value: int) -> bytes:
    """Length-prefixed big-endian encoding shared by all protocol payloads."""
    raw = value.to_bytes((value.bit_length() + 7) // 8 or 1, "big")
    return len(raw).to_bytes(4, "big") + raw


def _random_prime(bits: int, rng: np.random.Generator) -> int:
    while True:
        candidate = int.from_bytes(rng.bytes((bits + 7) // 8), "big")
        candidate &= (1 << bits) - 1
        candidate |= 1 << (bits - 1)
        p = int(gmpy2.next_prime(candidate))
        if p.bit_length() == bits:
            return p


def keygen(bits: int, rng: np.random.Generator) -> KeyPair:
    if bits < 16:
        raise ValueError("key size below 16 bits")
    half = bits // 2
    while True:
        p = _random_prime(half, rng)
        q = _random_prime(bits - half, rng)
        if p == q:
            continue
        n = p * q
        if math.gcd(n, (p - 1) * (q - 1)) != 1:
            continue
        lam = math.lcm(p - 1, q - 1)
        mu = int(gmpy2.invert(lam, n))
        return KeyPair(PublicKey(n), lam, mu, p, q)


def encode(value: int, pk: PublicKey) -> int:
    # Signed range (-N/2, N/2]; values outside decode ambiguously.
    if not -(pk.n // 2) < value <= pk.n // 2:
        raise ValueError("plaintext magnitude too large for this key")
    return value % pk.n


def decode(residue: int, pk: PublicKey) -> int:
    return residue - pk.n if residue > pk.n // 2 else residue


def encrypt(value: int, pk: PublicKey, rng: np.random.Generator,
            keys: KeyPair | None = None) -> Ciphertext:
    return encrypt_raw(encode(value, pk), pk, rng, keys)


def _pow_n(r: int, pk: PublicKey, keys: KeyPair | None):
    """r^N mod N^2, split over p^2 and q^2 when the factorization is known."""
    crt = keys._crt if keys is not None else None
    if crt is None:
        return gmpy2.powmod(r, pk._mpz_n, pk._mpz_nsquare)
    p, q, psq, qsq, _, _, _ = crt
    n = pk._mpz_n
    xp = gmpy2.powmod(r, n, psq)
    xq = gmpy2.powmod(r, n, qsq)
    # Garner recombination over the coprime moduli p^2 and q^2.
    h = (gmpy2.invert(qsq, psq) * (xp - xq)) % psq
    return (xq + qsq * h) % pk._mpz_nsquare


def encrypt_raw(m: int, pk: PublicKey, rng: np.random.Generator,
                keys: KeyPair | None = None) -> Ciphertext:
    """Encrypt a residue already reduced mod N (no signed-range check).

    ``keys`` is a pure speed hint: the holder of the secret key can run the
    modular exponentiation on the half-size factors. The ciphertext value is
    identical either way.
    """
    if not 0 <= m < pk.n:
        raise ValueError("residue out of range")
    nsq = pk._mpz_nsquare
    while True:
        r = _random_below(pk.n, rng)
        if r > 0 and math.gcd(r, pk.n) == 1:
            break
    c = ((1 + m * pk._mpz_n) * _pow_n(r, pk, keys)) % nsq
    return Ciphertext(int(c), pk.fingerprint)


def decrypt(c: Ciphertext, keys: KeyPair) -> int:
    pk = keys.public
    if c.pk_fingerprint != pk.fingerprint:
        raise KeyMismatchError("ciphertext was produced under a different key")
    crt = keys._crt
    if crt is None:
        u = gmpy2.powmod(c.value, keys.lam, pk._mpz_nsquare)
        residue = (int(u - 1) // pk.n * keys.mu) % pk.n
        return decode(residue, pk)
    p, q, psq, qsq, hp, hq, q_inv = crt
    mp = (((gmpy2.powmod(c.value, p - 1, psq) - 1) // p) * hp) % p
    mq = (((gmpy2.powmod(c.value, q - 1, qsq) - 1) // q) * hq) % q
    residue = int((mq + q * ((q_inv * (mp - mq)) % p)) % pk._mpz_n)
    return decode(residue, pk)


def _check_same_key(a: Ciphertext, b: Ciphertext) -> None:
    if a.pk_fingerprint != b.pk_fingerprint:
        raise KeyMismatchError("operands encrypted under different keys")


def hom_add(a: Ciphertext, b: Ciphertext, pk: PublicKey) -> Ciphertext:
    _check_same_key(a, b)
    if a.pk_fingerprint != pk.fingerprint:
        raise KeyMismatchError("operands do not match the given public key")
    return Ciphertext(int(a.value * b.value % pk._mpz_nsquare), a.pk_fingerprint)


def hom_neg(a: Ciphertext, pk: PublicKey) -> Ciphertext:
    return hom_scale(a, -1, pk)


def hom_scale(a: Ciphertext, scalar: int, pk: PublicKey) -> Ciphertext:
    """Homomorphic multiplication by a public integer scalar."""
    if a.pk_fingerprint != pk.fingerprint:
        raise KeyMismatchError("operand does not match the given public key")
    exponent = scalar % pk.n
    return Ciphertext(int(gmpy2.powmod(a.value, exponent, pk._mpz_nsquare)),
                      a.pk_fingerprint)


def _random_below(n: int, rng: np.random.Generator) -> int:
    nbytes = (n.bit_length() + 7) // 8
    while True:
        candidate = int.from_bytes(rng.bytes(nbytes + 8), "big") % n
        return candidate
