"""Deterministic stand-ins for the committee's cryptography.

The quorum logic, not the cryptography, is what this package exercises:
the threshold scheme appends a marker to the plaintext and hands out
per-member share tags that anyone can recheck; signatures are keyed
digests of (member, payload).  Both honor the real contracts (F+1 shares
decrypt, F+1 signatures finalize) and can be swapped for real schemes.
"""

from __future__ import annotations

import hashlib
import struct


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def pack_fee(fee: float) -> bytes:
    return struct.pack(">d", fee)


def tx_hash(ciphertext: bytes, fee: float) -> bytes:
    """H = Hash(ciphertext || declared fee); recomputable by anyone."""
    return sha256(ciphertext + pack_fee(fee))


ENC_MARKER = b"\x00TBENC1"


class MockThresholdScheme:
    """Threshold decryption contract with no secrecy.

    encrypt() appends a marker; combine() strips it once `threshold`
    distinct valid shares are present.  Unmarked ciphertexts (delayed-inbox
    messages travel in the clear) decrypt as a no-op.
    """

    def __init__(self, threshold: int) -> None:
        if threshold < 1:
            raise ValueError("threshold must be at least 1")
        self.threshold = threshold

    def encrypt(self, plaintext: bytes) -> bytes:
        return plaintext + ENC_MARKER

    @staticmethod
    def is_encrypted(ciphertext: bytes) -> bool:
        return ciphertext.endswith(ENC_MARKER)

    @staticmethod
    def share(member: int, h: bytes) -> bytes:
        return sha256(b"share|" + struct.pack(">H", member) + h)

    @classmethod
    def verify_share(cls, member: int, h: bytes, share: bytes) -> bool:
        return share == cls.share(member, h)

    def combine(self, ciphertext: bytes, h: bytes, shares: dict[int, bytes]) -> bytes | None:
        """Plaintext if enough valid shares are present, else None."""
        valid = sum(1 for member, tag in shares.items() if self.verify_share(member, h, tag))
        if valid < self.threshold:
            return None
        if self.is_encrypted(ciphertext):
            return ciphertext[: -len(ENC_MARKER)]
        return ciphertext


def sign_digest(member: int, digest: bytes) -> bytes:
    return sha256(b"sig|" + struct.pack(">H", member) + digest)


def verify_signature(member: int, digest: bytes, sig: bytes) -> bool:
    return sig == sign_digest(member, digest)
