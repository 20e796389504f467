"""Writes tests/data/hdbscan_fixture.json: point sets with reference HDBSCAN
labels from scikit-learn (EOM selection, min_samples = min_cluster_size).

Labels come from scikit-learn's own linkage and tree routines, with MST edges
of equal weight kept in Prim order (stable sort). The public estimator sorts
with an unstable quicksort, so tied edges can produce a different hierarchy."""
import json
import pathlib

import numpy as np
from sklearn.cluster._hdbscan import _linkage, _tree

rng = np.random.default_rng(20240917)
cases = []


def reference_labels(x, mcs):
    d = np.linalg.norm(x[:, None] - x[None], axis=2)
    core = np.sort(d, axis=1)[:, mcs - 1]
    mreach = np.maximum(d, np.maximum(core[:, None], core[None]))
    mst = _linkage.mst_from_mutual_reachability(mreach)
    mst = mst[np.argsort(mst["distance"], kind="stable")]
    return _tree.tree_to_labels(_linkage.make_single_linkage(mst), min_cluster_size=mcs)[0]


def add(name, x, sizes):
    for mcs in sizes:
        labels = reference_labels(x, mcs)
        cases.append({"name": f"{name}_mcs{mcs}", "mcs": mcs, "points": x.tolist(), "labels": labels.tolist()})


centers = np.array([[0.0, 0.0], [4.0, 0.5], [1.0, 5.0]])
blobs = np.vstack([c + rng.normal(0.0, s, size=(n, 2)) for c, s, n in zip(centers, [0.4, 0.8, 0.3], [60, 50, 40])])
add("blobs2d", blobs, [5, 15])

dirs = rng.normal(size=(5, 8))
unit = np.vstack([d + rng.normal(0.0, 0.35, size=(40, 8)) for d in dirs])
unit /= np.linalg.norm(unit, axis=1, keepdims=True)
add("sphere8d", unit, [10, 25])

add("uniform", rng.uniform(size=(80, 3)), [5])

out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "hdbscan_fixture.json"
out.write_text(json.dumps({"cases": cases}))
print(out, len(cases))
