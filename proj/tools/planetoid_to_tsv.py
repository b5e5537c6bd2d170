#!/usr/bin/env python3
"""Convert the Planetoid citation files (ind.<name>.{x,y,tx,ty,allx,ally,graph}
and ind.<name>.test.index) into the TSV directory layout read by adagnn.

    planetoid_to_tsv.py --raw RAW_DIR --name cora --out data/cora

Follows the usual GCN preprocessing: test rows are reordered by test.index,
and for citeseer the isolated test ids missing from tx/ty are padded with
zero features. Nodes without a one-hot label get class 0 and sit in no mask.
Split: train = first len(y) nodes, val = next 500, test = test.index.
"""

import argparse
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph")


def load_raw(raw: Path, name: str):
    objs = {}
    for part in PARTS:
        path = raw / f"ind.{name}.{part}"
        if not path.exists():
            sys.exit(f"missing {path}")
        # The distributed files are Python 2 pickles; only load trusted copies.
        with open(path, "rb") as f:
            objs[part] = pickle.load(f, encoding="latin1")
    index_path = raw / f"ind.{name}.test.index"
    if not index_path.exists():
        sys.exit(f"missing {index_path}")
    test_index = [int(line) for line in index_path.read_text().split()]
    return objs, test_index


def assemble(objs, test_index, name: str):
    x, y, tx, ty, allx, ally, graph = (objs[p] for p in PARTS)
    tx = sp.csr_matrix(tx)
    allx = sp.csr_matrix(allx)
    ty = np.asarray(ty)
    ally = np.asarray(ally)
    test_sorted = np.sort(test_index)

    if name == "citeseer":
        full = range(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = sp.lil_matrix((len(full), tx.shape[1]))
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        tx = tx_ext.tocsr()
        ty_ext = np.zeros((len(full), ty.shape[1]))
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        ty = ty_ext

    features = sp.vstack((allx, tx)).tolil()
    features[test_index, :] = features[test_sorted, :]
    features = features.tocsr()
    onehot = np.vstack((ally, ty))
    onehot[test_index, :] = onehot[test_sorted, :]

    n = features.shape[0]
    labels = np.where(onehot.sum(axis=1) > 0, onehot.argmax(axis=1), 0)

    edges = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v and u < n and v < n:
                edges.add((min(u, v), max(u, v)))

    n_train = len(np.asarray(y))
    split = {}
    for i in range(n_train):
        split[i] = "train"
    for i in range(n_train, min(n_train + 500, n)):
        split.setdefault(i, "val")
    for i in test_sorted.tolist():
        split.setdefault(int(i), "test")
    return features, labels, sorted(edges), split


def write(out: Path, features, labels, edges, split):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "features.tsv", "w") as f:
        f.write(f"# dim={features.shape[1]}\n")
        for r in range(features.shape[0]):
            row = features.getrow(r)
            order = np.argsort(row.indices)
            cells = " ".join(f"{row.indices[k]}:{row.data[k]:.17g}" for k in order if row.data[k] != 0)
            f.write(f"{r}\t{cells}\n")
    with open(out / "labels.tsv", "w") as f:
        for r, c in enumerate(labels):
            f.write(f"{r}\t{int(c)}\n")
    with open(out / "edges.tsv", "w") as f:
        for u, v in edges:
            f.write(f"{u}\t{v}\n")
    with open(out / "split.tsv", "w") as f:
        for i in sorted(split):
            f.write(f"{i}\t{split[i]}\n")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--raw", required=True, type=Path, help="directory holding the ind.<name>.* files")
    ap.add_argument("--name", required=True, choices=["cora", "citeseer", "pubmed"])
    ap.add_argument("--out", required=True, type=Path)
    args = ap.parse_args(argv)

    objs, test_index = load_raw(args.raw, args.name)
    features, labels, edges, split = assemble(objs, test_index, args.name)
    write(args.out, features, labels, edges, split)
    counts = {k: sum(1 for s in split.values() if s == k) for k in ("train", "val", "test")}
    print(f"{args.name}: N={features.shape[0]} F={features.shape[1]} C={int(labels.max()) + 1} "
          f"edges={len(edges)} train/val/test={counts['train']}/{counts['val']}/{counts['test']}")


if __name__ == "__main__":
    main()
