from __future__ import annotations

import numpy as np
import pytest

from rdh3d import KeyMaterial, KeyRole, Mesh

# Local patch of a cow-shaped mesh: 8 vertices, 6 triangles around
# vertex 1, whose one-ring is exactly {2, 3, 4, 5, 7, 8}. Vertex 6
# appears in no face.
COW_VERTICES = np.array([
    [0.180757, 0.034214, 0.193897],
    [0.118210, 0.059086, 0.189724],
    [0.092150, 0.029539, 0.197267],
    [0.137215, 0.043615, 0.201492],
    [0.136288, 0.065522, 0.187564],
    [0.160892, 0.015154, 0.200969],
    [0.155264, 0.057931, 0.192310],
    [0.148673, 0.021459, 0.186577],
])
COW_FACES = np.array([
    [1, 2, 8],
    [7, 8, 1],
    [5, 7, 1],
    [1, 5, 4],
    [3, 4, 1],
    [2, 1, 3],
])


def cow_off_text() -> str:
    lines = ["OFF", f"{len(COW_VERTICES)} {len(COW_FACES)} 0"]
    for x, y, z in COW_VERTICES:
        lines.append(f"{float(x)!r} {float(y)!r} {float(z)!r}")
    for i, j, k in COW_FACES:
        lines.append(f"3 {i - 1} {j - 1} {k - 1}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def cow_mesh() -> Mesh:
    return Mesh(COW_VERTICES.copy(), COW_FACES.copy())


@pytest.fixture
def cow_off() -> str:
    return cow_off_text()


@pytest.fixture
def tetra_mesh() -> Mesh:
    """Complete graph on four vertices (every pair shares a face)."""
    verts = np.array([
        [0.1, 0.2, 0.3],
        [-0.4, 0.5, -0.6],
        [0.7, -0.8, 0.9],
        [0.11, 0.22, -0.33],
    ])
    faces = np.array([[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]])
    return Mesh(verts, faces)


def random_mesh(seed: int, n_min: int = 4, n_max: int = 500,
                smooth: bool | None = None, isolated: bool = True) -> Mesh:
    """Deterministic random triangle soup.

    smooth=True clusters coordinates around a shared base so high bit
    planes agree across the mesh (deep prediction prefixes); the default
    alternates by seed. isolated=True may leave some vertices unused.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    if smooth is None:
        smooth = bool(seed % 2)
    if smooth:
        base = rng.uniform(-0.8, 0.8, size=3)
        verts = np.clip(base + rng.normal(0.0, 3e-4, size=(n, 3)), -0.999999, 0.999999)
    else:
        verts = rng.uniform(-0.999999, 0.999999, size=(n, 3))
    n_faces = int(rng.integers(1, max(2, 2 * n)))
    faces = rng.integers(1, n + 1, size=(n_faces, 3))
    if not isolated and n >= 3:
        # force every vertex into at least one face
        ids = np.arange(1, n + 1)
        filler = np.column_stack([ids, np.roll(ids, 1), np.roll(ids, 2)])
        faces = np.vstack([faces, filler])
    return Mesh(verts.astype(np.float64), faces.astype(np.int64))


def grid_mesh(side: int, scale: float = 0.9) -> Mesh:
    """Smooth (side x side) height-field surface, 2*(side-1)^2 triangles."""
    u = np.linspace(-scale, scale, side)
    xx, yy = np.meshgrid(u, u)
    zz = 0.4 * np.sin(3 * xx) * np.cos(2 * yy)
    verts = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])
    idx = np.arange(side * side).reshape(side, side)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, :-1].ravel()
    d = idx[1:, 1:].ravel()
    faces = np.vstack([
        np.column_stack([a, b, c]),
        np.column_stack([b, d, c]),
    ]) + 1
    return Mesh(verts, faces)


@pytest.fixture
def ke() -> KeyMaterial:
    return KeyMaterial.from_passphrase("test-encryption-pass", KeyRole.ENCRYPT)


@pytest.fixture
def kw() -> KeyMaterial:
    return KeyMaterial.from_passphrase("test-hiding-pass", KeyRole.HIDE)


class ZeroKey:
    """Stand-in key whose stream is all zero bits (identity XOR)."""

    role = KeyRole.ENCRYPT

    def __init__(self, role: KeyRole = KeyRole.ENCRYPT):
        self.role = role

    def keystream_bytes(self, n_bytes: int) -> bytes:
        return bytes(n_bytes)

    def keystream_bits(self, n_bits: int) -> np.ndarray:
        return np.zeros(n_bits, dtype=np.uint8)
