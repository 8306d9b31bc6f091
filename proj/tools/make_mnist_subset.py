#!/usr/bin/env python3
"""Write the 5000-sample MNIST subset bundled with mlxtend as IDX files.

The subset holds 500 training digits per class (28x28, uint8), sorted by
class. Usage:

    pip download --no-deps mlxtend -d /tmp/wheels
    python3 tools/make_mnist_subset.py /tmp/wheels/mlxtend-*.whl data/
"""
import gzip
import io
import struct
import sys
import zipfile
from pathlib import Path

import numpy as np


def main() -> None:
    wheel, out_dir = Path(sys.argv[1]), Path(sys.argv[2])
    with zipfile.ZipFile(wheel) as zf:
        raw = gzip.decompress(zf.read("mlxtend/data/data/mnist_5k.csv.gz"))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",", dtype=np.int64)
    pixels = table[:, :-1].astype(np.uint8)
    labels = table[:, -1].astype(np.uint8)
    n = pixels.shape[0]
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "mnist5k-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        f.write(pixels.tobytes())
    with open(out_dir / "mnist5k-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(labels.tobytes())


if __name__ == "__main__":
    main()
