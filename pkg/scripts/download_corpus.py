#!/usr/bin/env python3
"""Best-effort fetcher for the public benchmark meshes used by `rdh3d bench`.

Network access is optional: the bench harness runs on any directory of
.off/.obj/.ply files, so this script only saves you the manual download.
The classic Princeton Shape Benchmark server has been intermittent for
years; known mirrors are tried in order and failures are reported, not
fatal.
"""

from __future__ import annotations

import argparse
import sys
import tarfile
import urllib.request
from pathlib import Path

SOURCES = [
    # (description, url, archive member suffix filter)
    ("Princeton Shape Benchmark (db0 subset)",
     "https://shape.cs.princeton.edu/benchmark/download/psb_v1.zip", ".off"),
    ("Stanford bunny (zipper reconstruction)",
     "http://graphics.stanford.edu/pub/3Dscanrep/bunny.tar.gz", ".ply"),
]


def fetch(url: str, dest: Path, timeout: float) -> Path:
    target = dest / url.rsplit("/", 1)[-1]
    print(f"fetching {url} ...")
    with urllib.request.urlopen(url, timeout=timeout) as resp, open(target, "wb") as fh:
        fh.write(resp.read())
    return target


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("dest", nargs="?", default="corpus",
                        help="directory to place mesh files in")
    parser.add_argument("--timeout", type=float, default=30.0)
    args = parser.parse_args()
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)

    got_any = False
    for name, url, suffix in SOURCES:
        try:
            archive = fetch(url, dest, args.timeout)
        except Exception as exc:
            print(f"  {name}: unavailable ({exc})", file=sys.stderr)
            continue
        if archive.suffix in (".gz", ".tgz") or archive.name.endswith(".tar.gz"):
            with tarfile.open(archive) as tar:
                for member in tar.getmembers():
                    if member.isfile() and member.name.endswith(suffix):
                        member.name = Path(member.name).name
                        tar.extract(member, dest)
                        got_any = True
            archive.unlink()
        else:
            got_any = True
        print(f"  {name}: done")

    if not got_any:
        print(
            "\nNo source reachable. Place your own .off/.obj/.ply files in "
            f"{dest}/ and point `rdh3d bench` at it.",
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
