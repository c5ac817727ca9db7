#!/usr/bin/env python3
"""Convert Planetoid raw citation files (ind.<name>.{x,tx,allx,y,ty,ally,graph,test.index})
into a gia graph bundle directory."""

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_pickle(path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def load_planetoid(raw, name):
    parts = {k: load_pickle(raw / f"ind.{name}.{k}") for k in ("x", "tx", "allx", "y", "ty", "ally", "graph")}
    test_index = np.loadtxt(raw / f"ind.{name}.test.index", dtype=np.int64).reshape(-1)

    # citeseer has test ids with no features; they become zero rows
    lo, hi = test_index.min(), test_index.max()
    tx, ty = parts["tx"], parts["ty"]
    if hi - lo + 1 != len(test_index):
        full = hi - lo + 1
        tx_ext = sp.lil_matrix((full, tx.shape[1]))
        tx_ext[test_index - lo] = tx
        ty_ext = np.zeros((full, ty.shape[1]))
        ty_ext[test_index - lo] = ty
        tx, ty = tx_ext, ty_ext

    x = sp.vstack([parts["allx"], tx]).tolil()
    y = np.vstack([parts["ally"], ty])
    order = np.sort(test_index)
    x[test_index] = x[order]
    y[test_index] = y[order]
    x = x.tocsr().astype(np.float32)

    n = x.shape[0]
    edges = set()
    for u, nbrs in parts["graph"].items():
        for v in nbrs:
            if u != v and u < n and v < n:
                edges.add((min(u, v), max(u, v)))
    labels = y.argmax(axis=1)
    unlabeled = y.sum(axis=1) == 0
    return x, labels, unlabeled, sorted(edges)


def largest_component(n, edges):
    a = sp.coo_matrix((np.ones(len(edges)), ([e[0] for e in edges], [e[1] for e in edges])), shape=(n, n))
    _, comp = sp.csgraph.connected_components(a, directed=False)
    return comp == np.bincount(comp).argmax()


def stratified_split(labels, fractions, seed):
    rng = np.random.default_rng(seed)
    train, val, test = [], [], []
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        a = int(round(fractions[0] * len(idx)))
        b = a + int(round(fractions[1] * len(idx)))
        train += idx[:a].tolist()
        val += idx[a:b].tolist()
        test += idx[b:].tolist()
    return sorted(train), sorted(val), sorted(test)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("raw", type=Path, help="directory holding the ind.<name>.* files")
    p.add_argument("out", type=Path)
    p.add_argument("--name", default="cora")
    p.add_argument("--lcc", action="store_true", help="keep only the largest connected component")
    p.add_argument("--split", default="0.6,0.1,0.3", help="train,val,test fractions, stratified by class")
    p.add_argument("--feature-range", default="0,1", help="map binary features {0,1} to lo,hi")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    x, labels, unlabeled, edges = load_planetoid(args.raw, args.name)
    keep = ~unlabeled
    if args.lcc:
        keep &= largest_component(x.shape[0], edges)
    old = np.flatnonzero(keep)
    remap = -np.ones(x.shape[0], dtype=np.int64)
    remap[old] = np.arange(len(old))
    edges = [(remap[u], remap[v]) for u, v in edges if keep[u] and keep[v]]
    x = x[old].toarray()
    labels = labels[old]

    lo, hi = (float(v) for v in args.feature_range.split(","))
    x = (lo + (hi - lo) * x).astype("<f4")
    fractions = [float(v) for v in args.split.split(",")]
    if len(fractions) != 3 or abs(sum(fractions) - 1) > 1e-9:
        sys.exit("--split needs three fractions summing to 1")
    train, val, test = stratified_split(labels, fractions, args.seed)

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    n, d = x.shape
    classes = int(labels.max()) + 1
    meta = {"n": n, "d": d, "C": classes, "edge_count": len(edges), "feature_dtype": "f32le"}
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    (out / "edges.txt").write_text("".join(f"{u} {v}\n" for u, v in edges))
    (out / "features.bin").write_bytes(x.tobytes(order="C"))
    (out / "labels.txt").write_text("".join(f"{int(y)}\n" for y in labels))
    (out / "splits.json").write_text(json.dumps({"train": train, "val": val, "test": test}) + "\n")
    print(f"{args.name}: n={n} edges={len(edges)} d={d} C={classes} train/val/test={len(train)}/{len(val)}/{len(test)}")


if __name__ == "__main__":
    main()
