"""Payload embedding into n-MSB slots, extraction, and lossless recovery.

Embedding replaces the top n bits of every non-excluded embedded
vertex's x, y, z magnitude (vertices in C order, payload bits MSB-first)
with Kw-encrypted payload; the low l-n bits survive untouched:

    new_word = sum(s_k * 2^(l-k), k=1..n) + old_word mod 2^(l-n)

Extraction reads those slots straight out of the marked container with
no mesh decryption (Kw only); recovery decrypts with Ke and re-predicts
the overwritten planes from each vertex's reference ring, which is exact
for every vertex whose measured prefix length reached n.
"""

from __future__ import annotations

import numpy as np

from .cipher import KeyMaterial, KeyRole, _require_role, decrypt_mesh
from .container import MarkedContainer
from .errors import CapacityError, ConfigError, ContainerError
from .partition import Partition, _gather_ranges, partition as compute_partition
from .predictor import PredictionReport, _segment_sums
from .quantize import QuantizedMesh


def _msb_weights(n: int) -> np.ndarray:
    return (np.int64(1) << np.arange(n - 1, -1, -1, dtype=np.int64)).astype(np.int64)


def _groups_to_words(bits: np.ndarray, n: int) -> np.ndarray:
    """(k, 3, n) bit groups -> (k, 3) integers, MSB-first."""
    return bits.reshape(-1, 3, n).astype(np.int64) @ _msb_weights(n)


def _words_to_groups(vals: np.ndarray, n: int) -> np.ndarray:
    """(k, 3) integers -> flat bit vector, MSB-first per n-bit group."""
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((vals.astype(np.int64)[..., None] >> shifts) & 1).astype(np.uint8).ravel()


def _container_partition(c: MarkedContainer) -> Partition:
    from .mesh_io import Mesh

    part = compute_partition(Mesh(np.zeros((c.n_vertices, 3)), c.faces))
    if part.n_embedded != c.excluded.size:
        raise ContainerError(
            f"excluded bitmap covers {c.excluded.size} vertices but the face "
            f"list implies {part.n_embedded} embedded vertices"
        )
    return part


def embed(enc: QuantizedMesh, part: Partition, rep: PredictionReport, n: int,
          payload: np.ndarray, kw: KeyMaterial) -> MarkedContainer:
    """Write a Kw-encrypted payload into the n-MSB slots of an encrypted mesh.

    Payload shorter than capacity is padded with further Kw stream bits;
    the true bit count travels in the container header.
    """
    _require_role(kw, KeyRole.HIDE, "payload embedding")
    if not 1 <= n <= enc.l:
        raise ConfigError(f"embedding length n={n} outside [1, {enc.l}]")
    if (rep.m, rep.l) != (enc.m, enc.l):
        raise ConfigError(
            f"prediction report was made for m={rep.m}, mesh has m={enc.m}"
        )
    if rep.ts.size != part.n_embedded:
        raise ConfigError("prediction report does not match the partition")

    excluded = rep.excluded_mask(n)
    included0 = (part.embedded - 1)[~excluded]
    capacity = 3 * n * included0.size

    payload = np.asarray(payload, dtype=np.uint8).ravel()
    if payload.size > capacity:
        raise CapacityError(
            f"payload of {payload.size} bits exceeds capacity of {capacity} bits "
            f"(n={n}, {included0.size} embeddable vertices)",
            capacity_bits=capacity,
        )

    slots = kw.keystream_bits(capacity)
    slots = slots.copy()
    slots[:payload.size] ^= payload

    mags = enc.magnitudes.copy()
    if included0.size:
        vals = _groups_to_words(slots, n).astype(np.uint64)
        low_mask = np.uint64((1 << (enc.l - n)) - 1)
        shift = np.uint64(enc.l - n)
        mags[included0] = (mags[included0] & low_mask) | (vals << shift)

    return MarkedContainer(
        m=enc.m, l=enc.l, n=n, payload_bits=int(payload.size),
        signs=enc.signs.copy(), excluded=excluded.astype(np.uint8),
        magnitudes=mags, faces=enc.faces.copy(),
    )


def extract(c: MarkedContainer, kw: KeyMaterial) -> np.ndarray:
    """Read the payload back out of a marked container; needs Kw only.

    The embedded set is recomputed from the face list, excluded vertices
    are skipped via the header bitmap, and no mesh decryption happens
    (this is what makes the scheme separable).
    """
    _require_role(kw, KeyRole.HIDE, "payload extraction")
    part = _container_partition(c)
    payload_bits = c.payload_bits
    if payload_bits > c.capacity_bits():
        raise ContainerError(
            f"declared payload of {payload_bits} bits exceeds capacity"
        )
    included0 = (part.embedded - 1)[c.excluded == 0]
    if payload_bits == 0:
        return np.empty(0, dtype=np.uint8)
    shift = np.uint64(c.l - c.n)
    vals = c.magnitudes[included0] >> shift
    bits = _words_to_groups(vals, c.n)[:payload_bits]
    return bits ^ kw.keystream_bits(payload_bits)


def recover(c: MarkedContainer, ke: KeyMaterial) -> QuantizedMesh:
    """Decrypt and ring-predict back to the exact original quantized mesh.

    Reference and excluded vertices are exact after decryption alone;
    each non-excluded embedded vertex gets its n MSBs re-predicted per
    axis by majority vote over its (fully recovered) reference ring.
    """
    _require_role(ke, KeyRole.ENCRYPT, "mesh recovery")
    part = _container_partition(c)
    marked = QuantizedMesh(c.magnitudes, c.signs, c.m, c.l, c.faces)
    dec = decrypt_mesh(marked, ke)

    inc_pos = np.nonzero(c.excluded == 0)[0]
    if inc_pos.size == 0:
        return dec

    targets0 = (part.embedded - 1)[inc_pos]
    starts = part.ring_offsets[inc_pos]
    lengths = part.ring_offsets[inc_pos + 1] - starts
    ring0 = _gather_ranges(part.ring_flat, starts, lengths) - 1
    offsets = np.zeros(inc_pos.size + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])

    l, n = c.l, c.n
    words = dec.magnitudes.astype(np.int64)
    low_mask = np.uint64((1 << (l - n)) - 1)
    out = dec.magnitudes
    for axis in range(3):
        ring_words = words[ring0, axis]
        pred_val = np.zeros(inc_pos.size, dtype=np.int64)
        for k in range(1, n + 1):
            ones = _segment_sums((ring_words >> (l - k)) & 1, offsets)
            pred = (2 * ones > lengths).astype(np.int64)  # 0 wins ties
            pred_val |= pred << (n - k)
        out[targets0, axis] = (out[targets0, axis] & low_mask) | (
            pred_val.astype(np.uint64) << np.uint64(l - n)
        )
    return dec


def payload_to_bits(data: bytes) -> np.ndarray:
    """File bytes -> bit vector, MSB-first within each byte."""
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bits_to_payload(bits: np.ndarray) -> bytes:
    """Bit vector -> bytes, zero-padding a trailing partial byte."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()
