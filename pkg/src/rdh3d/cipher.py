"""Keyed ChaCha20 bit streams and XOR encryption of magnitude words.

Key material is derived as sha256(passphrase); the stream nonce is
sha256(role label) truncated to 96 bits with the block counter starting
at 0, so the encryption and hiding streams are independent even under a
shared passphrase. Stream bits are consumed MSB-first from the byte
stream in vertex-major, axis-major (x, y, z), MSB-to-LSB order: the bit
XORed into (vertex i, axis j, plane u) sits at stream position
(i*3 + j)*l + (l-1-u), a pure function of the key and the address.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

from .errors import ConfigError

_WORD_DTYPES = {8: ">u1", 16: ">u2", 32: ">u4", 64: ">u8"}


class KeyRole(enum.Enum):
    ENCRYPT = "encrypt"  # Ke: mesh encryption/decryption
    HIDE = "hide"        # Kw: payload hiding/extraction


def chacha_stream(key: bytes, label: str, n_bytes: int) -> bytes:
    """Raw ChaCha20 keystream for a 32-byte key under a nonce label."""
    if n_bytes <= 0:
        return b""
    nonce = hashlib.sha256(label.encode("utf-8")).digest()[:12]
    # first 4 bytes of the library nonce are the initial block counter
    cipher = Cipher(algorithms.ChaCha20(key, bytes(4) + nonce), mode=None)
    return cipher.encryptor().update(bytes(n_bytes))


@dataclass(frozen=True)
class KeyMaterial:
    key_bytes: bytes
    role: KeyRole

    def __post_init__(self):
        if len(self.key_bytes) != 32:
            raise ConfigError("key material must be exactly 32 bytes")

    @classmethod
    def from_passphrase(cls, passphrase: str, role: KeyRole) -> "KeyMaterial":
        return cls(hashlib.sha256(passphrase.encode("utf-8")).digest(), role)

    def keystream_bytes(self, n_bytes: int) -> bytes:
        return chacha_stream(self.key_bytes, self.role.value, n_bytes)

    def keystream_bits(self, n_bits: int) -> np.ndarray:
        """First n_bits stream bits, MSB-first within each byte."""
        if n_bits < 0:
            raise ValueError("bit count must be nonnegative")
        if n_bits == 0:
            return np.empty(0, dtype=np.uint8)
        raw = self.keystream_bytes((n_bits + 7) // 8)
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:n_bits]


def keystream(key: KeyMaterial, count: int) -> np.ndarray:
    """Deterministic bit vector of the key's stream (see module docstring)."""
    return key.keystream_bits(count)


def _require_role(key: KeyMaterial, role: KeyRole, op: str):
    if key.role is not role:
        raise ConfigError(
            f"{op} requires a key with role {role.value!r}, got {key.role.value!r}"
        )


def stream_words(key: KeyMaterial, n_words: int, l: int) -> np.ndarray:
    """Keystream as n_words l-bit words (big-endian per word), uint64.

    Word w covers stream bits [w*l, (w+1)*l) MSB-first, which matches
    the per-bit addressing order exactly because l is a whole number of
    bytes.
    """
    if l not in _WORD_DTYPES:
        raise ConfigError(f"unsupported word length l={l}")
    raw = key.keystream_bytes(n_words * (l // 8))
    return np.frombuffer(raw, dtype=_WORD_DTYPES[l]).astype(np.uint64)


def _xor_magnitudes(q, key: KeyMaterial):
    words = stream_words(key, 3 * q.n_vertices, q.l).reshape(q.n_vertices, 3)
    out = q.copy()
    out.magnitudes = q.magnitudes ^ words
    return out


def encrypt_mesh(q, ke: KeyMaterial):
    """XOR every magnitude's l bits with the Ke stream; signs/faces untouched."""
    _require_role(ke, KeyRole.ENCRYPT, "mesh encryption")
    return _xor_magnitudes(q, ke)


def decrypt_mesh(q, ke: KeyMaterial):
    """Inverse of encrypt_mesh (XOR involution)."""
    _require_role(ke, KeyRole.ENCRYPT, "mesh decryption")
    return _xor_magnitudes(q, ke)


def crypt_payload(bits: np.ndarray, kw: KeyMaterial) -> np.ndarray:
    """Self-inverse XOR of a payload bit vector with the Kw stream."""
    _require_role(kw, KeyRole.HIDE, "payload encryption")
    bits = np.asarray(bits, dtype=np.uint8)
    return bits ^ kw.keystream_bits(bits.size)
