"""Two-party secure arithmetic between the proxies.

Proxy A holds ciphertexts and the public key only; proxy B holds the secret
key. Secure multiplication follows the blind/decrypt/unblind pattern: A
additively blinds both operands with fresh uniform randomness, B decrypts
and multiplies the blinded values, and A strips the cross terms
homomorphically. B's view is statistically independent of the operands.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import paillier
from .paillier import Ciphertext, KeyMismatchError, KeyPair, PublicKey


class ProtocolError(Exception):
    pass


@dataclass
class ProxyA:
    """Holds the public key and an rng for blinding randomness."""

    pk: PublicKey
    rng: np.random.Generator


@dataclass
class ProxyB:
    """Holds the key pair; the only party able to decrypt."""

    keys: KeyPair
    rng: np.random.Generator

    @property
    def pk(self) -> PublicKey:
        return self.keys.public

    def decrypted_values(self):
        """Residues this proxy decrypted mid-protocol (for leakage analysis)."""
        if not hasattr(self, "_seen"):
            self._seen = []
        return self._seen


def _record(transcript, sender, receiver, kind, payload: bytes) -> None:
    if transcript is not None:
        transcript.record(sender, receiver, kind, payload)


def sec_mul(party_a: ProxyA, party_b: ProxyB, ea: Ciphertext, eb: Ciphertext,
            transcript=None, a_name: str = "proxy_a", b_name: str = "proxy_b") -> Ciphertext:
    """Return E(a*b) to proxy A without revealing a or b to proxy B."""
    pk = party_a.pk
    if pk.fingerprint != party_b.pk.fingerprint:
        raise KeyMismatchError("proxies hold different keys")
    if ea.pk_fingerprint != pk.fingerprint or eb.pk_fingerprint != pk.fingerprint:
        raise ProtocolError("operands not encrypted under the proxy key")

    # Round 1: A blinds both operands and sends them to B.
    r_a = paillier._random_below(pk.n, party_a.rng)
    r_b = paillier._random_below(pk.n, party_a.rng)
    blinded_a = paillier.hom_add(ea, paillier.encrypt_raw(r_a, pk, party_a.rng), pk)
    blinded_b = paillier.hom_add(eb, paillier.encrypt_raw(r_b, pk, party_a.rng), pk)
    _record(transcript, a_name, b_name, "ciphertext", blinded_a.serialize())
    _record(transcript, a_name, b_name, "ciphertext", blinded_b.serialize())

    # Round 2: B decrypts, multiplies the blinded residues, replies encrypted.
    alpha = paillier.decrypt(blinded_a, party_b.keys) % pk.n
    beta = paillier.decrypt(blinded_b, party_b.keys) % pk.n
    party_b.decrypted_values().extend((alpha, beta))
    product = paillier.encrypt_raw((alpha * beta) % pk.n, pk, party_b.rng,
                                   keys=party_b.keys)
    _record(transcript, b_name, a_name, "ciphertext", product.serialize())

    # A strips the cross terms: ab = (a+ra)(b+rb) - a*rb - b*ra - ra*rb.
    result = paillier.hom_add(product, paillier.hom_scale(ea, -r_b, pk), pk)
    result = paillier.hom_add(result, paillier.hom_scale(eb, -r_a, pk), pk)
    correction = paillier.encrypt_raw((-r_a * r_b) % pk.n, pk, party_a.rng)
    return paillier.hom_add(result, correction, pk)


def secure_distance(party_a: ProxyA, party_b: ProxyB,
                    ew: tuple[Ciphertext, Ciphertext],
                    et: tuple[Ciphertext, Ciphertext],
                    transcript=None) -> Ciphertext:
    """E of the squared Euclidean distance between two encrypted points.

    Coordinate differences are formed homomorphically, squared with
    ``sec_mul``, and summed homomorphically; the result is exact integer
    square-meters.
    """
    pk = party_a.pk
    dx = paillier.hom_add(ew[0], paillier.hom_neg(et[0], pk), pk)
    dy = paillier.hom_add(ew[1], paillier.hom_neg(et[1], pk), pk)
    sq_x = sec_mul(party_a, party_b, dx, dx, transcript)
    sq_y = sec_mul(party_a, party_b, dy, dy, transcript)
    return paillier.hom_add(sq_x, sq_y, pk)
