#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the npm `mnist` package into IDX files.

The package carries 10,000 MNIST digits as 28x28 floats in [0,1], grouped by
label. Samples are interleaved round-robin across labels, then split into a
train pair (first 8000) and a test pair (remaining 2000).

usage: mnist_from_npm.py <package/src/digits dir> <output dir>
"""
import json
import os
import struct
import sys


def write_idx(path, magic, dims, payload):
    with open(path, "wb") as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(bytes(payload))


def main():
    src, out = sys.argv[1], sys.argv[2]
    per_label = []
    for d in range(10):
        with open(os.path.join(src, f"{d}.json")) as f:
            raw = json.load(f)["data"]
        n = len(raw) // 784
        per_label.append([raw[i * 784:(i + 1) * 784] for i in range(n)])

    images, labels = [], []
    k = 0
    while any(k < len(p) for p in per_label):
        for d in range(10):
            if k < len(per_label[d]):
                images.append(per_label[d][k])
                labels.append(d)
        k += 1

    def to_bytes(img):
        return [min(255, max(0, int(v * 255.0 + 0.5))) for v in img]

    n_train = 8000
    os.makedirs(out, exist_ok=True)
    for name, lo, hi in (("train", 0, n_train), ("t10k", n_train, len(images))):
        pix = []
        for img in images[lo:hi]:
            pix.extend(to_bytes(img))
        write_idx(os.path.join(out, f"{name}-images-idx3-ubyte"), 0x00000803,
                  [hi - lo, 28, 28], pix)
        write_idx(os.path.join(out, f"{name}-labels-idx1-ubyte"), 0x00000801,
                  [hi - lo], labels[lo:hi])


if __name__ == "__main__":
    main()
