"""Command-line surface: analyze, encrypt, embed, extract, recover,
metrics, bench.

Exit codes: 0 success, 2 usage/configuration, 3 mesh parse or domain
error, 4 capacity overflow, 5 corrupt container. Passphrases come from
--ke-pass / --kw-pass or the RDH3D_KE_PASS / RDH3D_KW_PASS environment
variables (flags win) and are never written to any output file.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .bench import bench_corpus, default_payload, mean_bpv_by_m, run_pipeline, write_csv
from .cipher import KeyMaterial, KeyRole, encrypt_mesh
from .codec import bits_to_payload, embed, extract, payload_to_bits, recover
from .container import (
    MarkedContainer,
    container_mesh,
    read_container_file,
    write_container_file,
)
from .errors import (
    CapacityError,
    ConfigError,
    ContainerError,
    DomainError,
    MeshParseError,
)
from .mesh_io import FORMATS, read_mesh_file, write_mesh, write_mesh_file
from .metrics import FidelityReport, hausdorff, snr
from .partition import partition
from .predictor import PredictionReport, analyze, choose_n
from .quantize import dequantize, quantize

KE_ENV = "RDH3D_KE_PASS"
KW_ENV = "RDH3D_KW_PASS"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CAPACITY = 4
EXIT_CORRUPT = 5


def _passphrase(flag_value, env_name, flag_name) -> str:
    value = flag_value if flag_value is not None else os.environ.get(env_name)
    if not value:
        raise ConfigError(f"missing passphrase: pass {flag_name} or set {env_name}")
    return value


def _ke(args) -> KeyMaterial:
    return KeyMaterial.from_passphrase(
        _passphrase(args.ke_pass, KE_ENV, "--ke-pass"), KeyRole.ENCRYPT
    )


def _kw(args) -> KeyMaterial:
    return KeyMaterial.from_passphrase(
        _passphrase(args.kw_pass, KW_ENV, "--kw-pass"), KeyRole.HIDE
    )


def _kw_pass(args) -> str:
    return _passphrase(args.kw_pass, KW_ENV, "--kw-pass")


def _load_mesh(path, fmt):
    return read_mesh_file(path, fmt)


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    mesh = _load_mesh(args.mesh, args.format)
    q = quantize(mesh, args.m)
    part = partition(mesh)
    rep = analyze(q, part)
    doc = rep.to_json_dict()
    doc["chosen_n"] = choose_n(rep, args.n)
    doc["n_vertices"] = mesh.n_vertices
    doc["n_faces"] = mesh.n_faces
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_encrypt(args) -> int:
    mesh = _load_mesh(args.mesh, args.format)
    q = quantize(mesh, args.m)
    part = partition(mesh)
    enc = encrypt_mesh(q, _ke(args))
    # No payload yet: every embedded vertex is marked excluded, so
    # recovery of this container is plain decryption.
    c = MarkedContainer(
        m=q.m, l=q.l, n=1, payload_bits=0, signs=enc.signs,
        excluded=np.ones(part.n_embedded, dtype=np.uint8),
        magnitudes=enc.magnitudes, faces=enc.faces,
    )
    write_container_file(args.out, c)
    if args.export_off:
        with open(args.export_off, "w") as fh:
            fh.write(write_mesh(container_mesh(c), "off"))
    return EXIT_OK


def cmd_embed(args) -> int:
    c = read_container_file(args.container)
    with open(args.report) as fh:
        rep = PredictionReport.from_json_dict(json.load(fh))
    if (rep.m, rep.l) != (c.m, c.l):
        raise ConfigError(
            f"report is for m={rep.m} but container was encrypted at m={c.m}"
        )
    from .quantize import QuantizedMesh

    enc = QuantizedMesh(c.magnitudes, c.signs, c.m, c.l, c.faces)
    from .mesh_io import Mesh

    part = partition(Mesh(np.zeros((c.n_vertices, 3)), c.faces))
    n = choose_n(rep, args.n)
    kw = _kw(args)
    if args.payload:
        with open(args.payload, "rb") as fh:
            payload = payload_to_bits(fh.read())
    else:
        payload = default_payload(_kw_pass(args), rep.capacity(n))
    marked = embed(enc, part, rep, n, payload, kw)
    write_container_file(args.out, marked)
    if args.export_off:
        with open(args.export_off, "w") as fh:
            fh.write(write_mesh(container_mesh(marked), "off"))
    return EXIT_OK


def cmd_extract(args) -> int:
    c = read_container_file(args.container)
    bits = extract(c, _kw(args))
    with open(args.out, "wb") as fh:
        fh.write(bits_to_payload(bits))
    return EXIT_OK


def cmd_recover(args) -> int:
    c = read_container_file(args.container)
    q = recover(c, _ke(args))
    mesh = dequantize(q)
    write_mesh_file(args.out, mesh, args.format)
    return EXIT_OK


def cmd_metrics(args) -> int:
    mesh_a = _load_mesh(args.mesh_a, args.format)
    mesh_b = _load_mesh(args.mesh_b, args.format)
    report = FidelityReport(
        hausdorff=hausdorff(mesh_a, mesh_b, method=args.method),
        snr_db=snr(mesh_a, mesh_b, noise_ref=args.snr_noise_ref),
        embedding_rate=0.0,
        embedded_bits=0,
    )
    if args.container:
        c = read_container_file(args.container)
        report.embedded_bits = c.payload_bits
        report.embedding_rate = c.payload_bits / mesh_a.n_vertices
    _emit(json.dumps(report.to_json_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def _parse_int_range(text: str) -> list[int]:
    values: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part.lstrip("-"):
            lo, hi = part.split("-", 1)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    if not values:
        raise ConfigError(f"empty range {text!r}")
    return values


def cmd_bench(args) -> int:
    m_values = _parse_int_range(args.m)
    n_values: list[int | None]
    if args.n.strip() == "auto":
        n_values = [None]
    else:
        n_values = list(_parse_int_range(args.n))
    ke_pass = _passphrase(args.ke_pass, KE_ENV, "--ke-pass")
    kw_pass = _passphrase(args.kw_pass, KW_ENV, "--kw-pass")
    rows, failures = bench_corpus(
        args.corpus, m_values, n_values, ke_pass, kw_pass,
        hausdorff_method=args.method, jobs=args.jobs,
    )
    with open(args.out, "w", newline="") as fh:
        write_csv(rows, fh)
    for m, bpv in mean_bpv_by_m(rows).items():
        print(f"mean bpv at m={m}: {bpv:.4f}")
    print(f"{len(rows)} rows written to {args.out}; {len(failures)} failures")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdh3d",
        description="Separable reversible data hiding in encrypted 3D triangle meshes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=FORMATS, default=None,
                       help="mesh format (default: inferred from extension)")

    p = sub.add_parser("analyze", help="prediction analysis and capacity curve")
    p.add_argument("mesh")
    p.add_argument("--m", type=int, required=True, help="precision exponent, 2..9")
    p.add_argument("--n", type=int, default=None, help="requested embedding length")
    add_format(p)
    p.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("encrypt", help="quantize and encrypt a mesh into a container")
    p.add_argument("mesh")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--ke-pass", default=None)
    add_format(p)
    p.add_argument("--out", required=True, help="output .rdh3d container")
    p.add_argument("--export-off", default=None,
                   help="also write the encrypted integer mesh as OFF")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("embed", help="embed a payload into an encrypted container")
    p.add_argument("container")
    p.add_argument("--report", required=True, help="analyze JSON for the same mesh/m")
    p.add_argument("--payload", default=None,
                   help="payload file (default: random bits filling capacity)")
    p.add_argument("--n", type=int, default=None,
                   help="embedding length (default: capacity-optimal)")
    p.add_argument("--kw-pass", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--export-off", default=None,
                   help="also write the marked integer mesh as OFF")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="extract the payload (needs Kw only)")
    p.add_argument("container")
    p.add_argument("--kw-pass", default=None)
    p.add_argument("--out", required=True, help="output payload file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("recover", help="recover the original mesh (needs Ke only)")
    p.add_argument("container")
    p.add_argument("--ke-pass", default=None)
    p.add_argument("--out", required=True, help="output mesh file")
    add_format(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("metrics", help="fidelity metrics between two meshes")
    p.add_argument("mesh_a")
    p.add_argument("mesh_b")
    p.add_argument("--snr-noise-ref", choices=("mean", "original"), default="mean")
    p.add_argument("--method", choices=("brute", "kdtree"), default="brute")
    p.add_argument("--container", default=None,
                   help="fill embedding fields from this container")
    add_format(p)
    p.add_argument("--out", default=None, help="JSON path (default: stdout)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="pipeline sweep over a mesh corpus -> CSV")
    p.add_argument("corpus", help="directory of .off/.obj/.ply files")
    p.add_argument("--m", default="4", help="precision values, e.g. 4 or 2-9 or 3,5")
    p.add_argument("--n", default="auto", help="'auto' or values, e.g. 16 or 1-32")
    p.add_argument("--ke-pass", default=None)
    p.add_argument("--kw-pass", default=None)
    p.add_argument("--method", choices=("brute", "kdtree"), default="brute",
                   help="hausdorff evaluation")
    p.add_argument("--jobs", type=int, default=1, help="parallel mesh workers")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MeshParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ContainerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
