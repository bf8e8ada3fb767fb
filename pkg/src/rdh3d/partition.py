"""Embedded/reference vertex split driven by face traversal order.

Vertices are visited in the order they first appear while scanning the
face list top to bottom, left to right within a face. A vertex that is
in neither set joins the embedded set C, and every vertex sharing a
face with it joins the reference set R. The result is a maximal
independent set (in traversal order) for C, so no two payload-carrying
vertices are adjacent and every C ring lies entirely in R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Partition:
    """Deterministic function of the face list; all vertex ids 1-based.

    Rings are stored flattened: ring of embedded[i] is
    ring_flat[ring_offsets[i]:ring_offsets[i+1]], deduplicated and
    sorted ascending.
    """

    embedded: np.ndarray      # (K,) traversal order
    reference: np.ndarray     # sorted ascending
    unassigned: np.ndarray    # vertices in no face, sorted ascending
    ring_flat: np.ndarray     # concatenated rings, C-major
    ring_offsets: np.ndarray  # (K+1,)

    @property
    def n_embedded(self) -> int:
        return self.embedded.shape[0]

    def ring(self, i: int) -> np.ndarray:
        """Ring of the i-th embedded vertex (position in C order)."""
        return self.ring_flat[self.ring_offsets[i]:self.ring_offsets[i + 1]]

    def rings(self) -> dict[int, np.ndarray]:
        return {int(v): self.ring(i) for i, v in enumerate(self.embedded)}

    def ring_sizes(self) -> np.ndarray:
        return np.diff(self.ring_offsets)


def _adjacency(n_vertices: int, faces0: np.ndarray):
    """CSR one-ring adjacency (0-based): sharing any face, self excluded."""
    if faces0.size == 0:
        off = np.zeros(n_vertices + 1, dtype=np.int64)
        return np.empty(0, dtype=np.int64), off
    u = faces0[:, [0, 1, 0, 2, 1, 2]].ravel().astype(np.int64)
    v = faces0[:, [1, 0, 2, 0, 2, 1]].ravel().astype(np.int64)
    keep = u != v  # degenerate faces must not make a vertex its own neighbor
    codes = np.unique(u[keep] * np.int64(n_vertices) + v[keep])
    u_sorted = codes // n_vertices
    v_sorted = codes % n_vertices
    offsets = np.searchsorted(u_sorted, np.arange(n_vertices + 1, dtype=np.int64))
    return v_sorted, offsets


def _gather_ranges(flat, starts, lengths):
    """Concatenate flat[starts[i]:starts[i]+lengths[i]] without a Python loop."""
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=flat.dtype)
    out_off = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=out_off[1:])
    pos = np.arange(total, dtype=np.int64)
    pos += np.repeat(starts - out_off[:-1], lengths)
    return flat[pos]


def partition(mesh) -> Partition:
    """Greedy C/R sweep. Empty face lists leave every vertex unassigned."""
    n = mesh.n_vertices
    faces0 = mesh.faces - 1
    adj_flat, adj_off = _adjacency(n, faces0)

    order = faces0.ravel()
    if order.size:
        # first-appearance order over the face stream
        _, first_pos = np.unique(order, return_index=True)
        visit = order[np.sort(first_pos)]
    else:
        visit = order

    UNSEEN, IN_C, IN_R = 0, 1, 2
    status = np.zeros(n, dtype=np.uint8)
    embedded0 = []
    for vtx in visit.tolist():
        if status[vtx] == UNSEEN:
            status[vtx] = IN_C
            embedded0.append(vtx)
            status[adj_flat[adj_off[vtx]:adj_off[vtx + 1]]] = IN_R

    emb = np.asarray(embedded0, dtype=np.int64)
    in_any_face = np.zeros(n, dtype=bool)
    in_any_face[order] = True

    starts = adj_off[emb] if emb.size else np.empty(0, dtype=np.int64)
    lengths = (adj_off[emb + 1] - adj_off[emb]) if emb.size else np.empty(0, dtype=np.int64)
    ring_flat = _gather_ranges(adj_flat, starts, lengths)
    ring_offsets = np.zeros(emb.size + 1, dtype=np.int64)
    np.cumsum(lengths, out=ring_offsets[1:])

    return Partition(
        embedded=emb + 1,
        reference=np.nonzero(status == IN_R)[0].astype(np.int64) + 1,
        unassigned=np.nonzero(~in_any_face)[0].astype(np.int64) + 1,
        ring_flat=ring_flat + 1,
        ring_offsets=ring_offsets,
    )
