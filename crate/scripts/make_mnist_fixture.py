#!/usr/bin/env python3
"""Build the small MNIST IDX fixture used by the CLI acceptance tests.

Source: the `mnist` npm package (10,000 MNIST digits stored as per-class JSON
arrays of pixel intensities scaled to [0, 1] with three decimals). Scaling by
255 and rounding recovers the original bytes exactly.

Usage:
    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/make_mnist_fixture.py package/src/digits crates/cli/tests/data

Keeps every 6 and 9 plus the first OTHERS images of each remaining digit, then
interleaves classes round-robin so label filtering is exercised.
"""
import json
import os
import struct
import sys

OTHERS = 50
PIXELS = 28 * 28


def main(src, dst):
    per_class = []
    for digit in range(10):
        with open(os.path.join(src, f"{digit}.json")) as fh:
            raw = json.load(fh)["data"]
        count = len(raw) // PIXELS
        if digit not in (6, 9):
            count = min(count, OTHERS)
        imgs = [
            bytes(int(round(v * 255)) for v in raw[k * PIXELS:(k + 1) * PIXELS])
            for k in range(count)
        ]
        per_class.append(imgs)

    images, labels = [], []
    depth = max(len(c) for c in per_class)
    for k in range(depth):
        for digit, imgs in enumerate(per_class):
            if k < len(imgs):
                images.append(imgs[k])
                labels.append(digit)

    os.makedirs(dst, exist_ok=True)
    with open(os.path.join(dst, "mnist-subset-images-idx3-ubyte"), "wb") as fh:
        fh.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            fh.write(img)
    with open(os.path.join(dst, "mnist-subset-labels-idx1-ubyte"), "wb") as fh:
        fh.write(struct.pack(">II", 0x801, len(labels)))
        fh.write(bytes(labels))
    kept = sum(1 for l in labels if l in (6, 9))
    print(f"wrote {len(images)} images ({kept} of digits 6/9)")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
