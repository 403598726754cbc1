#!/usr/bin/env python3
"""Download the ego-Facebook social graph used by the large benchmark runs.

Writes data/facebook_combined.txt (88234 edges over 4039 vertices) and
verifies those counts before declaring success. The file's sha256 is printed
so it can be pinned in data/MANIFEST.md. Everything else in data/ is a small
fixture committed with the repository; only this graph is fetched.
"""

import gzip
import hashlib
import sys
import urllib.request
from pathlib import Path

URL = "https://snap.stanford.edu/data/facebook_combined.txt.gz"
EXPECTED_VERTICES = 4039
EXPECTED_EDGES = 88234


def main() -> int:
    out_dir = Path(__file__).resolve().parent.parent / "data"
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / "facebook_combined.txt"
    if target.exists():
        print(f"{target} already present; delete it to re-download")
        return 0
    print(f"downloading {URL}")
    with urllib.request.urlopen(URL, timeout=120) as response:
        payload = gzip.decompress(response.read())

    edges = set()
    max_id = -1
    for lineno, line in enumerate(payload.decode().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) != 2:
            print(f"unexpected line {lineno}: {text!r}", file=sys.stderr)
            return 1
        u, v = int(parts[0]), int(parts[1])
        edges.add((min(u, v), max(u, v)))
        max_id = max(max_id, u, v)
    vertices = max_id + 1
    if vertices != EXPECTED_VERTICES or len(edges) != EXPECTED_EDGES:
        print(f"downloaded graph has {vertices} vertices and {len(edges)} "
              f"edges; expected {EXPECTED_VERTICES}/{EXPECTED_EDGES}",
              file=sys.stderr)
        return 1

    target.write_bytes(payload)
    digest = hashlib.sha256(payload).hexdigest()
    print(f"wrote {target} ({vertices} vertices, {len(edges)} edges)")
    print(f"sha256 {digest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
