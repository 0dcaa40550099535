#!/usr/bin/env python3
"""Write a 5000-image MNIST subset as IDX files.

The images come from the 5k MNIST sample bundled with the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, 500 images per digit, class-sorted).
Rows are written in a fixed shuffled order so that any prefix is roughly
class-balanced.

    python3 tools/make_mnist_subset.py [--wheel PATH] [--out data/mnist5k]
"""
import argparse
import glob
import gzip
import os
import random
import struct
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def find_wheel(explicit):
    if explicit:
        return explicit
    tmp = tempfile.mkdtemp(prefix="mlxtend-")
    subprocess.run([sys.executable, "-m", "pip", "download", "mlxtend==0.24.0",
                    "--no-deps", "-d", tmp], check=True)
    return glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel")
    ap.add_argument("--out", default=os.path.join("data", "mnist5k"))
    ap.add_argument("--seed", type=int, default=20221)
    args = ap.parse_args()

    with zipfile.ZipFile(find_wheel(args.wheel)) as z:
        text = gzip.decompress(z.read(MEMBER)).decode()

    rows = []
    for line in text.strip().split("\n"):
        vals = line.split(",")
        pixels = bytes(int(float(v)) for v in vals[:-1])
        rows.append((pixels, int(float(vals[-1]))))
    assert all(len(p) == 784 for p, _ in rows)

    random.Random(args.seed).shuffle(rows)

    os.makedirs(args.out, exist_ok=True)
    n = len(rows)
    with open(os.path.join(args.out, "images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for p, _ in rows:
            f.write(p)
    with open(os.path.join(args.out, "labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(bytes(lbl for _, lbl in rows))
    print(f"wrote {n} images to {args.out}")


if __name__ == "__main__":
    main()
