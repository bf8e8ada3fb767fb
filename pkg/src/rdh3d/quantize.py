"""Fixed-point integer mapping of mesh coordinates and bit-plane helpers.

Coordinates (all |v| < 1) are mapped to sign-magnitude form: an l-bit
nonnegative magnitude floor(|v| * 10^m) plus a separate sign bit. Only
the magnitude words take part in encryption and embedding; sign bits
travel in the clear in the container header.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

M_MIN, M_MAX = 2, 9


@dataclass
class QuantizedMesh:
    magnitudes: np.ndarray  # (N, 3) uint64, each < 10^m and < 2^l
    signs: np.ndarray       # (N, 3) uint8, 1 = negative
    m: int
    l: int
    faces: np.ndarray       # (M, 3) int64, 1-based, copied from the source Mesh

    def __post_init__(self):
        self.magnitudes = np.asarray(self.magnitudes, dtype=np.uint64).reshape(-1, 3)
        self.signs = np.asarray(self.signs, dtype=np.uint8).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)

    @property
    def n_vertices(self) -> int:
        return self.magnitudes.shape[0]

    def signed_ints(self) -> np.ndarray:
        """Signed integer coordinates, e.g. -2020 for magnitude 2020 / sign 1."""
        return np.where(self.signs == 1, -1, 1) * self.magnitudes.astype(np.int64)

    def copy(self) -> "QuantizedMesh":
        return QuantizedMesh(
            self.magnitudes.copy(), self.signs.copy(), self.m, self.l, self.faces.copy()
        )

    def __eq__(self, other):
        if not isinstance(other, QuantizedMesh):
            return NotImplemented
        return (
            self.m == other.m
            and self.l == other.l
            and np.array_equal(self.magnitudes, other.magnitudes)
            and np.array_equal(self.signs, other.signs)
            and np.array_equal(self.faces, other.faces)
        )


def bit_length(m: int) -> int:
    """Storage width in bits for magnitudes at precision m."""
    if not 1 <= m <= 33:
        raise ConfigError(f"precision m={m} outside supported range [1, 33]")
    if m <= 2:
        return 8
    if m <= 4:
        return 16
    if m <= 9:
        return 32
    return 64


def _exact_floor_scaled(values: np.ndarray, m: int) -> np.ndarray:
    """floor(values * 10^m) evaluated exactly on each float64 value.

    A plain float multiply can land one unit low near decimal boundaries
    (0.29 * 100 == 28.999999999999996), which would break the < 10^-m
    round-trip bound, so candidates near an integer are recomputed with
    integer arithmetic on the float's exact binary value.
    """
    scale = 10**m
    scaled = values * float(scale)
    cand = np.floor(scaled)
    frac = scaled - cand
    out = cand.astype(np.uint64)
    # True product differs from the float product by < 3e-7 here, so only
    # candidates this close to an integer boundary can be wrong.
    unsure = np.nonzero((frac < 1e-6) | (frac > 1.0 - 1e-6))[0]
    flat = values.ravel() if values.ndim else values
    for idx in unsure:
        num, den = float(flat[idx]).as_integer_ratio()
        out.ravel()[idx] = num * scale // den
    return out


def quantize(mesh, m: int) -> QuantizedMesh:
    """Map float coordinates to sign-magnitude integers at precision m."""
    if not M_MIN <= m <= M_MAX:
        raise ConfigError(f"precision m={m} outside supported range [{M_MIN}, {M_MAX}]")
    verts = mesh.vertices
    finite = np.isfinite(verts)
    if not finite.all():
        bad = int(np.nonzero(~finite.all(axis=1))[0][0]) + 1
        raise DomainError(f"vertex {bad} has a non-finite coordinate")
    mags_ok = np.abs(verts) < 1.0
    if not mags_ok.all():
        bad = int(np.nonzero(~mags_ok.all(axis=1))[0][0]) + 1
        raise DomainError(
            f"vertex {bad} has |coordinate| >= 1; inputs must be normalized below 1"
        )
    flat = np.abs(verts).ravel()
    mags = _exact_floor_scaled(flat, m).reshape(verts.shape)
    signs = (verts < 0).astype(np.uint8)
    return QuantizedMesh(mags, signs, m, bit_length(m), mesh.faces.copy())


def dequantize(q: QuantizedMesh):
    """Inverse map: coordinate = (-1)^sign * magnitude / 10^m."""
    from .mesh_io import Mesh

    scale = float(10**q.m)
    coords = q.magnitudes.astype(np.float64) / scale
    coords = np.where(q.signs == 1, -coords, coords)
    return Mesh(coords, q.faces.copy())


def bits_of(word: int, l: int) -> np.ndarray:
    """Binary expansion, index 0 = LSB, index l-1 = MSB."""
    word = int(word)
    if not 0 <= word < (1 << l):
        raise ValueError(f"word {word} does not fit in {l} bits")
    return ((word >> np.arange(l, dtype=np.uint64)) & 1).astype(np.uint8)


def word_of(bits) -> int:
    """Inverse of bits_of: recompose sum(bits[u] * 2^u)."""
    word = 0
    for u, b in enumerate(bits):
        if b:
            word |= 1 << u
    return word
