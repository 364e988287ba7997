#!/usr/bin/env python3
"""Build a 3000-image, 10-class, 32x32 proxy corpus in IDX format.

The source is the 5000-sample MNIST subset bundled with the mlxtend wheel
(500 per class, 28x28). The first 300 samples of each class are kept, padded
by 2 pixels on every side to 32x32, and stored dark-on-light so that the
training pipeline's inversion step yields light strokes on a dark background,
as with scanned numeral corpora.

Usage: make_proxy_corpus.py [--wheel PATH] [--out-prefix data/proxy]
Without --wheel the wheel is fetched with `pip download mlxtend --no-deps`.
"""

import argparse
import glob
import gzip
import struct
import subprocess
import tempfile
import zipfile

PER_CLASS = 300
CLASSES = 10
SRC = 28
DST = 32


def fetch_wheel(tmp):
    subprocess.run(["pip", "download", "mlxtend", "--no-deps", "-q", "-d", tmp], check=True)
    return glob.glob(f"{tmp}/mlxtend-*.whl")[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel")
    ap.add_argument("--out-prefix", default="data/proxy")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or fetch_wheel(tmp)
        raw = zipfile.ZipFile(wheel).read("mlxtend/data/data/mnist_5k.csv.gz")
    rows = gzip.decompress(raw).decode().strip().split("\n")

    kept = {c: [] for c in range(CLASSES)}
    for line in rows:
        vals = [int(v) for v in line.split(",")]
        label = vals[-1]
        if len(kept[label]) < PER_CLASS:
            kept[label].append(vals[:-1])

    # Interleave classes so any prefix of the file is roughly balanced.
    images, labels = [], []
    for i in range(PER_CLASS):
        for c in range(CLASSES):
            pix = kept[c][i]
            img = bytearray([255] * (DST * DST))
            pad = (DST - SRC) // 2
            for r in range(SRC):
                for col in range(SRC):
                    img[(r + pad) * DST + col + pad] = 255 - pix[r * SRC + col]
            images.append(bytes(img))
            labels.append(c)

    n = len(images)
    with open(args.out_prefix + "-images.idx", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, DST, DST))
        for img in images:
            f.write(img)
    with open(args.out_prefix + "-labels.idx", "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(bytes(labels))
    print(f"wrote {n} samples to {args.out_prefix}-{{images,labels}}.idx")


if __name__ == "__main__":
    main()
