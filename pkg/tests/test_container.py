from __future__ import annotations

import numpy as np
import pytest

from rdh3d import (
    ContainerError,
    MarkedContainer,
    Mesh,
    container_mesh,
    partition,
    quantize,
    read_container,
    write_container,
)
from rdh3d.container import MAGIC

from conftest import random_mesh


def make_container(seed: int, m: int = 4, payload_fill: float = 0.5) -> MarkedContainer:
    """A structurally valid container straight from mesh data."""
    rng = np.random.default_rng(seed)
    mesh = random_mesh(seed, n_max=40)
    q = quantize(mesh, m)
    part = partition(mesh)
    k = part.n_embedded
    n = int(rng.integers(1, q.l + 1))
    excluded = rng.integers(0, 2, size=k).astype(np.uint8)
    capacity = 3 * n * int((excluded == 0).sum())
    payload_bits = int(capacity * payload_fill)
    mags = rng.integers(0, 2**q.l, size=(mesh.n_vertices, 3)).astype(np.uint64)
    return MarkedContainer(
        m=m, l=q.l, n=n, payload_bits=payload_bits, signs=q.signs,
        excluded=excluded, magnitudes=mags, faces=mesh.faces,
    )


class TestRoundTrip:
    @pytest.mark.parametrize("seed", range(30))
    def test_object_and_byte_identity(self, seed):
        c = make_container(seed, m=2 + seed % 8)
        data = write_container(c)
        back = read_container(data)
        assert back == c
        assert write_container(back) == data

    def test_empty_payload_container_valid(self):
        c = make_container(3, payload_fill=0.0)
        assert c.payload_bits == 0
        assert read_container(write_container(c)) == c

    def test_empty_mesh_container(self):
        c = MarkedContainer(
            m=4, l=16, n=1, payload_bits=0,
            signs=np.empty((0, 3), dtype=np.uint8),
            excluded=np.empty(0, dtype=np.uint8),
            magnitudes=np.empty((0, 3), dtype=np.uint64),
            faces=np.empty((0, 3), dtype=np.int64),
        )
        assert read_container(write_container(c)) == c


class TestRejection:
    def test_bad_magic(self):
        data = bytearray(write_container(make_container(0)))
        data[:4] = b"JUNK"
        with pytest.raises(ContainerError, match="magic"):
            read_container(bytes(data))

    def test_version_mismatch(self):
        data = bytearray(write_container(make_container(0)))
        data[4] = 9
        with pytest.raises(ContainerError, match="version"):
            read_container(bytes(data))

    def test_inconsistent_m_l(self):
        data = bytearray(write_container(make_container(0, m=4)))
        data[6] = 32  # l byte contradicts m=4
        with pytest.raises(ContainerError, match="inconsistent"):
            read_container(bytes(data))

    def test_m_out_of_supported_range(self):
        data = bytearray(write_container(make_container(0, m=4)))
        data[5] = 12  # would imply 64-bit words; pipeline supports m in [2, 9]
        with pytest.raises(ContainerError, match="precision"):
            read_container(bytes(data))

    def test_n_zero_rejected(self):
        data = bytearray(write_container(make_container(0)))
        data[7] = 0
        with pytest.raises(ContainerError, match="embedding length"):
            read_container(bytes(data))

    def test_every_truncation_rejected(self):
        data = write_container(make_container(1))
        for cut in range(len(data)):
            with pytest.raises(ContainerError):
                read_container(data[:cut])

    def test_trailing_bytes_rejected(self):
        data = write_container(make_container(2))
        with pytest.raises(ContainerError):
            read_container(data + b"\x00")

    def test_nonzero_bitmap_padding_rejected(self):
        c = make_container(4)
        if (3 * c.n_vertices) % 8 == 0:
            c.signs = c.signs[:-1]  # force padding to exist (breaks N anyway)
        data = bytearray(write_container(make_container(4)))
        # sign bitmap starts at byte 24; flip a padding bit if there is one
        n_sign_bits = 3 * read_container(bytes(data)).n_vertices
        if n_sign_bits % 8:
            pad_byte = 24 + n_sign_bits // 8
            data[pad_byte] |= 1
            with pytest.raises(ContainerError, match="padding"):
                read_container(bytes(data))

    def test_payload_over_capacity_rejected(self):
        c = make_container(5)
        c.payload_bits = c.capacity_bits() + 1
        data = write_container(c)
        with pytest.raises(ContainerError, match="capacity"):
            read_container(data)

    def test_excluded_bitmap_length_mismatch(self):
        c = make_container(6)
        grown = MarkedContainer(
            m=c.m, l=c.l, n=c.n, payload_bits=0, signs=c.signs,
            excluded=np.zeros(c.excluded.size + 8, dtype=np.uint8),
            magnitudes=c.magnitudes, faces=c.faces,
        )
        with pytest.raises(ContainerError, match="embedded"):
            read_container(write_container(grown))

    def test_face_index_out_of_range(self):
        c = make_container(7)
        c.faces = c.faces.copy()
        c.faces[0, 0] = c.n_vertices + 5
        with pytest.raises(ContainerError, match="face index"):
            read_container(write_container(c))

    def test_magnitude_too_wide_refused_on_write(self):
        c = make_container(8)
        c.magnitudes = c.magnitudes.copy()
        c.magnitudes[0, 0] = np.uint64(2**c.l)
        with pytest.raises(ContainerError, match="word length"):
            write_container(c)


def test_header_layout():
    c = make_container(9)
    data = write_container(c)
    assert data[:4] == MAGIC
    assert data[4] == 1
    assert data[5] == c.m
    assert data[6] == c.l
    assert data[7] == c.n
    assert int.from_bytes(data[8:12], "little") == c.n_vertices
    assert int.from_bytes(data[12:16], "little") == c.n_faces
    assert int.from_bytes(data[16:24], "little") == c.payload_bits
    expected_len = (
        24
        + (3 * c.n_vertices + 7) // 8
        + (c.excluded.size + 7) // 8
        + 3 * c.n_vertices * (c.l // 8)
        + 12 * c.n_faces
    )
    assert len(data) == expected_len


def test_magnitudes_packed_big_endian():
    mesh = Mesh(np.array([[0.1, 0.2, 0.3]]), np.empty((0, 3)))
    q = quantize(mesh, 4)
    c = MarkedContainer(
        m=4, l=16, n=1, payload_bits=0, signs=q.signs,
        excluded=np.empty(0, dtype=np.uint8),
        magnitudes=np.array([[0x0B48, 0x0001, 0xFFFF]], dtype=np.uint64),
        faces=np.empty((0, 3), dtype=np.int64),
    )
    data = write_container(c)
    body = data[24 + 1:]  # header + 1 sign byte
    assert body[:6] == bytes.fromhex("0b48" "0001" "ffff")


def test_container_mesh_signed_integers():
    c = make_container(10)
    exported = container_mesh(c)
    signed = np.where(c.signs == 1, -1.0, 1.0) * c.magnitudes.astype(np.float64)
    assert np.array_equal(exported.vertices, signed)
    assert np.array_equal(exported.faces, c.faces)
