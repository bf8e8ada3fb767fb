"""Triangle mesh parsing and serialization for ASCII OFF, OBJ and PLY.

Vertex and face order are preserved exactly; coordinates are printed in
shortest round-trip decimal form, so parse(write(mesh)) reproduces the
numeric model bit for bit even though the text bytes may differ from the
original file.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CoordinateSyntaxError,
    FaceIndexError,
    MalformedHeaderError,
    MeshParseError,
    NonTriangleFaceError,
)

FORMATS = ("off", "obj", "ply")

_PLY_FLOAT_TYPES = {"float", "double", "float32", "float64"}


@dataclass
class Mesh:
    """Plaintext carrier: float coordinates plus 1-based triangle faces."""

    vertices: np.ndarray  # (N, 3) float64
    faces: np.ndarray     # (M, 3) int64, 1-based

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    def validate(self):
        if self.faces.size:
            lo = int(self.faces.min())
            hi = int(self.faces.max())
            if lo < 1 or hi > self.n_vertices:
                raise FaceIndexError(
                    f"face index out of range: {lo if lo < 1 else hi} "
                    f"(valid range 1..{self.n_vertices})"
                )

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices) and np.array_equal(
            self.faces, other.faces
        )


def _check_format(fmt: str) -> str:
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise ValueError(f"unknown mesh format {fmt!r}, expected one of {FORMATS}")
    return fmt


def parse_mesh(data: bytes | str, fmt: str) -> Mesh:
    """Parse raw file content in the named format.

    Raises a MeshParseError subclass naming the offending line on
    malformed headers, non-numeric coordinates, out-of-range face
    indices, and non-triangle faces.
    """
    fmt = _check_format(fmt)
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MeshParseError(f"not an ASCII mesh file: {exc}") from None
    else:
        text = data
    if fmt == "off":
        return _parse_off(text)
    if fmt == "obj":
        return _parse_obj(text)
    return _parse_ply(text)


def write_mesh(mesh: Mesh, fmt: str) -> str:
    """Serialize a mesh; output re-parses to an identical Mesh."""
    fmt = _check_format(fmt)
    mesh.validate()
    if fmt == "off":
        return _write_off(mesh)
    if fmt == "obj":
        return _write_obj(mesh)
    return _write_ply(mesh)


def read_mesh_file(path, fmt: str | None = None) -> Mesh:
    fmt = fmt or format_from_path(path)
    with open(path, "rb") as fh:
        return parse_mesh(fh.read(), fmt)


def write_mesh_file(path, mesh: Mesh, fmt: str | None = None):
    fmt = fmt or format_from_path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(write_mesh(mesh, fmt))


def format_from_path(path) -> str:
    suffix = str(path).rsplit(".", 1)[-1].lower()
    if suffix not in FORMATS:
        raise ValueError(f"cannot infer mesh format from {path!r}")
    return suffix


def _fmt_coord(x: float) -> str:
    # repr of a Python float is the shortest string that round-trips.
    return repr(float(x))


def _meaningful_lines(text: str, skip_prefixes=("#",)):
    """Yield (line_number, stripped_line), skipping blanks and comments."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(skip_prefixes):
            continue
        yield lineno, line


def _parse_floats(tokens, lineno, what):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise CoordinateSyntaxError(f"non-numeric {what}: {tokens!r}", lineno) from None


def _parse_counted_face(tokens, lineno):
    """Parse 'c i j k ...' face rows (OFF/PLY body), returning 0-based indices."""
    try:
        count = int(tokens[0])
    except ValueError:
        raise MeshParseError(f"face row does not start with a count: {tokens[0]!r}", lineno) from None
    if count != 3 or len(tokens) != 4:
        raise NonTriangleFaceError(
            f"only triangle faces are supported, got {len(tokens) - 1} values "
            f"with declared count {count}",
            lineno,
        )
    try:
        return [int(t) for t in tokens[1:]], lineno
    except ValueError:
        raise MeshParseError(f"non-integer face index in {tokens[1:]!r}", lineno) from None


def _finish_mesh(vertices, faces_zero_based, face_lines):
    n = len(vertices)
    for (i, j, k), lineno in zip(faces_zero_based, face_lines):
        for idx in (i, j, k):
            if idx < 0 or idx >= n:
                raise FaceIndexError(
                    f"face index {idx} out of range 0..{n - 1}", lineno
                )
    verts = np.array(vertices, dtype=np.float64).reshape(-1, 3)
    faces = np.array(faces_zero_based, dtype=np.int64).reshape(-1, 3) + 1
    return Mesh(verts, faces)


def _parse_off(text: str) -> Mesh:
    lines = _meaningful_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise MalformedHeaderError("empty OFF file") from None
    if header != "OFF":
        raise MalformedHeaderError(f"expected 'OFF' header, got {header!r}", lineno)
    try:
        lineno, counts = next(lines)
    except StopIteration:
        raise MalformedHeaderError("missing OFF counts line") from None
    parts = counts.split()
    if len(parts) != 3:
        raise MalformedHeaderError(f"expected 'N M E' counts, got {counts!r}", lineno)
    try:
        n_verts, n_faces, _n_edges = (int(p) for p in parts)
    except ValueError:
        raise MalformedHeaderError(f"non-integer counts: {counts!r}", lineno) from None

    vertices = []
    for _ in range(n_verts):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise MeshParseError(
                f"unexpected end of file: expected {n_verts} vertex rows, got {len(vertices)}"
            ) from None
        tokens = line.split()
        if len(tokens) != 3:
            raise CoordinateSyntaxError(
                f"expected 3 coordinates, got {len(tokens)}", lineno
            )
        vertices.append(_parse_floats(tokens, lineno, "coordinate"))

    faces, face_lines = [], []
    for _ in range(n_faces):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise MeshParseError(
                f"unexpected end of file: expected {n_faces} face rows, got {len(faces)}"
            ) from None
        idx, lineno = _parse_counted_face(line.split(), lineno)
        faces.append(idx)
        face_lines.append(lineno)

    for lineno, line in lines:
        raise MeshParseError(f"unexpected trailing content: {line!r}", lineno)
    return _finish_mesh(vertices, faces, face_lines)


_OBJ_IGNORED = {
    "vn", "vt", "vp", "o", "g", "s", "usemtl", "mtllib", "l", "p", "mg",
}


def _parse_obj(text: str) -> Mesh:
    vertices = []
    faces, face_lines = [], []
    for lineno, line in _meaningful_lines(text):
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "v":
            if len(tokens) != 4:
                raise CoordinateSyntaxError(
                    f"expected 'v x y z', got {len(tokens) - 1} values", lineno
                )
            vertices.append(_parse_floats(tokens[1:], lineno, "coordinate"))
        elif keyword == "f":
            refs = tokens[1:]
            if len(refs) != 3:
                raise NonTriangleFaceError(
                    f"only triangle faces are supported, got {len(refs)} vertices",
                    lineno,
                )
            idx = []
            for ref in refs:
                head = ref.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError:
                    raise MeshParseError(
                        f"non-integer face index in {ref!r}", lineno
                    ) from None
                if i < 1:
                    raise FaceIndexError(
                        f"face index {i} is not a positive 1-based index", lineno
                    )
                idx.append(i - 1)
            faces.append(idx)
            face_lines.append(lineno)
        elif keyword in _OBJ_IGNORED:
            continue
        else:
            raise MeshParseError(f"unsupported OBJ keyword {keyword!r}", lineno)
    return _finish_mesh(vertices, faces, face_lines)


def _parse_ply(text: str) -> Mesh:
    lines = _meaningful_lines(text, skip_prefixes=("comment", "obj_info"))
    try:
        lineno, magic = next(lines)
    except StopIteration:
        raise MalformedHeaderError("empty PLY file") from None
    if magic != "ply":
        raise MalformedHeaderError(f"expected 'ply' magic, got {magic!r}", lineno)
    try:
        lineno, fmt_line = next(lines)
    except StopIteration:
        raise MalformedHeaderError("missing PLY format line") from None
    fmt_tokens = fmt_line.split()
    if fmt_tokens[:1] != ["format"]:
        raise MalformedHeaderError(f"expected 'format' line, got {fmt_line!r}", lineno)
    if fmt_tokens[1:] != ["ascii", "1.0"]:
        raise MalformedHeaderError(
            f"only ASCII 1.0 PLY is supported, got {fmt_line!r} "
            "(binary PLY is rejected)",
            lineno,
        )

    # Header walk: only vertex and face elements are allowed.
    elements = []  # (name, count) in declaration order
    n_verts = n_faces = None
    current = None
    vertex_props = []
    saw_end = False
    for lineno, line in lines:
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "element":
            if len(tokens) != 3:
                raise MalformedHeaderError(f"bad element line {line!r}", lineno)
            name = tokens[1]
            try:
                count = int(tokens[2])
            except ValueError:
                raise MalformedHeaderError(f"bad element count {tokens[2]!r}", lineno) from None
            if name == "vertex":
                n_verts = count
            elif name == "face":
                n_faces = count
            else:
                raise MalformedHeaderError(
                    f"unsupported element {name!r}: only vertex and face", lineno
                )
            elements.append((name, count))
            current = name
        elif keyword == "property":
            if current == "vertex":
                if tokens[1] == "list":
                    raise MalformedHeaderError("list property on vertex element", lineno)
                if len(tokens) != 3 or tokens[1] not in _PLY_FLOAT_TYPES:
                    raise MalformedHeaderError(
                        f"unsupported vertex property {line!r}", lineno
                    )
                vertex_props.append(tokens[2])
            elif current == "face":
                if tokens[1] != "list" or tokens[-1] not in ("vertex_index", "vertex_indices"):
                    raise MalformedHeaderError(
                        f"unsupported face property {line!r}", lineno
                    )
            else:
                raise MalformedHeaderError("property before any element", lineno)
        elif keyword == "end_header":
            saw_end = True
            break
        else:
            raise MalformedHeaderError(f"unsupported header line {line!r}", lineno)
    if not saw_end:
        raise MalformedHeaderError("missing end_header")
    if n_verts is None:
        raise MalformedHeaderError("missing 'element vertex' declaration")
    if vertex_props != ["x", "y", "z"]:
        raise MalformedHeaderError(
            f"vertex properties must be exactly x, y, z; got {vertex_props}"
        )

    vertices = []
    faces, face_lines = [], []
    for name, count in elements:
        for _ in range(count):
            try:
                lineno, line = next(lines)
            except StopIteration:
                raise MeshParseError(
                    f"unexpected end of file in {name} data"
                ) from None
            tokens = line.split()
            if name == "vertex":
                if len(tokens) != 3:
                    raise CoordinateSyntaxError(
                        f"expected 3 coordinates, got {len(tokens)}", lineno
                    )
                vertices.append(_parse_floats(tokens, lineno, "coordinate"))
            else:
                idx, lineno = _parse_counted_face(tokens, lineno)
                faces.append(idx)
                face_lines.append(lineno)

    for lineno, line in lines:
        raise MeshParseError(f"unexpected trailing content: {line!r}", lineno)
    return _finish_mesh(vertices, faces, face_lines)


def _vertex_rows(mesh: Mesh):
    for x, y, z in mesh.vertices:
        yield f"{_fmt_coord(x)} {_fmt_coord(y)} {_fmt_coord(z)}"


def _write_off(mesh: Mesh) -> str:
    out = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} 0"]
    out.extend(_vertex_rows(mesh))
    for i, j, k in mesh.faces:
        out.append(f"3 {i - 1} {j - 1} {k - 1}")
    return "\n".join(out) + "\n"


def _write_obj(mesh: Mesh) -> str:
    out = [f"v {row}" for row in _vertex_rows(mesh)]
    for i, j, k in mesh.faces:
        out.append(f"f {i} {j} {k}")
    return "\n".join(out) + "\n" if out else ""


def _write_ply(mesh: Mesh) -> str:
    out = [
        "ply",
        "format ascii 1.0",
        f"element vertex {mesh.n_vertices}",
        "property double x",
        "property double y",
        "property double z",
        f"element face {mesh.n_faces}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    out.extend(_vertex_rows(mesh))
    for i, j, k in mesh.faces:
        out.append(f"3 {i - 1} {j - 1} {k - 1}")
    return "\n".join(out) + "\n"
