"""Converter check on a small Planetoid-format fixture with a shuffled test index.
usage: test_cora_to_bundle.py <converter> <gia_cli>"""

import collections
import pickle
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def write_fixture(raw, n=30, d=5, classes=3):
    rng = np.random.default_rng(0)
    x = sp.csr_matrix((rng.random((n, d)) < 0.4).astype(np.float32))
    y = np.eye(classes)[np.arange(n) % classes]
    y[4] = 0  # one unlabeled node
    test = np.array([27, 25, 29, 26, 28])
    graph = collections.defaultdict(list)
    for u in range(n - 1):
        graph[u].append(u + 1)
        graph[u + 1].append(u)
    graph[3].append(3)
    graph[40 % n].append(41 % n)
    parts = {"allx": x[:25], "ally": y[:25], "x": x[:10], "y": y[:10], "tx": x[test], "ty": y[test],
             "graph": dict(graph)}
    for k, v in parts.items():
        with open(raw / f"ind.fake.{k}", "wb") as f:
            pickle.dump(v, f)
    np.savetxt(raw / "ind.fake.test.index", test, fmt="%d")
    return x.toarray(), y


def main(converter, cli):
    with tempfile.TemporaryDirectory() as tmp:
        raw, out = Path(tmp) / "raw", Path(tmp) / "bundle"
        raw.mkdir()
        x, y = write_fixture(raw)
        subprocess.run([sys.executable, converter, raw, out, "--name", "fake", "--feature-range=-1,1"], check=True)
        keep = y.sum(axis=1) > 0
        n = int(keep.sum())
        features = np.fromfile(out / "features.bin", "<f4").reshape(n, -1)
        assert np.array_equal(features, 2 * x[keep] - 1), "features"
        assert np.array_equal(np.loadtxt(out / "labels.txt", dtype=int), y[keep].argmax(1)), "labels"
        edges = np.loadtxt(out / "edges.txt", dtype=int)
        assert len(edges) == 27 and (edges[:, 0] < edges[:, 1]).all(), "edges"
        subprocess.run([cli, "train", "--graph", out, "--epochs", "3", "--out", Path(tmp) / "model"], check=True)
    print("converter ok")


if __name__ == "__main__":
    main(*sys.argv[1:3])
