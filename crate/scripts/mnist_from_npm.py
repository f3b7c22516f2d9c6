#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the npm `mnist` package into IDX files.

Usage: mnist_from_npm.py <package/src/digits> <out_dir> [--train N]

Writes train-images-idx3-ubyte / train-labels-idx1-ubyte (first N samples after a
seeded shuffle) and t10k-images-idx3-ubyte / t10k-labels-idx1-ubyte (the rest).
"""
import json
import random
import struct
import sys
from pathlib import Path


def write_idx(out, images, labels, prefix):
    with open(out / f"{prefix}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))
    with open(out / f"{prefix}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def main():
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    n_train = 8000
    if "--train" in sys.argv:
        n_train = int(sys.argv[sys.argv.index("--train") + 1])
    samples = []
    for digit in range(10):
        data = json.load(open(src / f"{digit}.json"))["data"]
        for i in range(len(data) // 784):
            px = [min(255, max(0, round(v * 255))) for v in data[i * 784:(i + 1) * 784]]
            samples.append((px, digit))
    random.Random(0).shuffle(samples)
    out.mkdir(parents=True, exist_ok=True)
    train, test = samples[:n_train], samples[n_train:]
    write_idx(out, [s[0] for s in train], [s[1] for s in train], "train")
    write_idx(out, [s[0] for s in test], [s[1] for s in test], "t10k")
    print(f"wrote {len(train)} train / {len(test)} test samples to {out}")


if __name__ == "__main__":
    main()
