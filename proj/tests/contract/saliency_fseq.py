#!/usr/bin/env python3
"""Saliency FSEQ interface check.

Writes a channel-1 (float32 saliency) FSEQ the way an external saliency
producer would, with a per-frame max-normalized Gaussian blob sweeping left to
right through the road band, and feeds it to the sfcevent CLI unchanged.

Usage: saliency_fseq.py <path-to-sfcevent>
"""

import csv
import math
import struct
import subprocess
import sys
import tempfile
from pathlib import Path

WIDTH, HEIGHT = 104, 78
FRAMES = 40
SIGMA = 8.0


def blob_frame(cx, cy):
    values = []
    for y in range(HEIGHT):
        for x in range(WIDTH):
            d2 = (x + 0.5 - cx) ** 2 + (y + 0.5 - cy) ** 2
            values.append(math.exp(-d2 / (2 * SIGMA * SIGMA)))
    peak = max(values)
    return [v / peak for v in values]


def write_saliency(path, frames, channel=1):
    with open(path, "wb") as f:
        f.write(b"FSQ1")
        f.write(struct.pack("<5I", WIDTH, HEIGHT, len(frames), channel, 0))
        for frame in frames:
            f.write(struct.pack(f"<{len(frame)}f", *frame))


def run(cli, *args):
    return subprocess.run([cli, *args], capture_output=True, text=True)


def require(cond, message):
    if not cond:
        print(f"FAIL: {message}")
        sys.exit(1)


def main():
    cli = sys.argv[1]
    with tempfile.TemporaryDirectory(prefix="sfcevent_contract_") as tmp:
        tmp = Path(tmp)
        cy = 0.55 * HEIGHT
        frames = [blob_frame(-10 + t * (WIDTH + 20) / (FRAMES - 1), cy) for t in range(FRAMES)]
        sal = tmp / "saliency.fseq"
        write_saliency(sal, frames)
        require(sal.stat().st_size == 24 + 4 * WIDTH * HEIGHT * FRAMES, "unexpected file size")

        r = run(cli, "cnn-features", "--saliency", str(sal), "-o", str(tmp / "features.csv"))
        require(r.returncode == 0, f"cnn-features exited {r.returncode}: {r.stderr}")
        lines = (tmp / "features.csv").read_text().splitlines()
        require(lines[0] == "# variant=cnn", "features header")
        rows = list(csv.DictReader(lines[1:]))
        require(len(rows) == FRAMES, f"{len(rows)} feature rows for {FRAMES} frames")
        active = 0
        for row in rows:
            values = [float(row[f"f{c}"]) for c in range(1, 7)]
            nonzero = [v for v in values if v != 0.0]
            require(len(nonzero) <= 1, f"frame {row['frame']} has several active cells")
            active += len(nonzero)
        require(active >= 6, "blob never activated the grid")

        for out in ("a", "b"):
            r = run(cli, "run", "--variant", "cnn", "--saliency", str(sal), "--scenario-id", "blob",
                    "--out-dir", str(tmp / out))
            require(r.returncode == 0, f"run exited {r.returncode}: {r.stderr}")
        events_a = (tmp / "a" / "events.csv").read_text()
        require(events_a == (tmp / "b" / "events.csv").read_text(), "reruns differ")
        events = list(csv.DictReader(events_a.splitlines()))
        require(len(events) == 1, f"expected one event, got {len(events)}")
        require(events[0]["direction"] == "left_to_right", f"direction {events[0]['direction']}")
        require(events[0]["variant"] == "cnn", "variant column")

        # Out-of-range saliency is rejected by the reader.
        bad = [list(f) for f in frames]
        bad[3][0] = 1.5
        write_saliency(tmp / "bad.fseq", bad)
        r = run(cli, "cnn-features", "--saliency", str(tmp / "bad.fseq"), "-o", str(tmp / "bad.csv"))
        require(r.returncode == 2, f"out-of-range saliency exited {r.returncode}")

    print("PASS: saliency FSEQ written outside the library drives the CNN pipeline")


if __name__ == "__main__":
    main()
