"""Least-squares regression tree grown greedily top-down."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SupervisedDataset

# candidates within this fraction of the node SSE of the best one count as tied
_TIE_RTOL = 1e-9


@dataclass
class TreeNode:
    value: float
    n: int
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": self.value, "n": self.n}
        return {
            "value": self.value,
            "n": self.n,
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "feature" not in d:
            return cls(d["value"], d["n"])
        return cls(d["value"], d["n"], d["feature"], d["threshold"], cls.from_dict(d["left"]), cls.from_dict(d["right"]))


@dataclass
class TreeModel:
    root: TreeNode
    feature_names: tuple[str, ...]
    max_depth: int
    minimal_gain: float
    minimal_leaf_size: int

    def predict(self, data) -> np.ndarray:
        X = data.X if isinstance(data, SupervisedDataset) else np.atleast_2d(np.asarray(data, dtype=float))
        out = np.empty(X.shape[0])
        for i, x in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if x[node.feature] <= node.threshold else node.right
            out[i] = node.value
        return out

    def depth(self) -> int:
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def leaves(self) -> list[TreeNode]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack += [node.right, node.left]
        return out

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "max_depth": self.max_depth,
            "minimal_gain": self.minimal_gain,
            "minimal_leaf_size": self.minimal_leaf_size,
            "root": self.root.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeModel":
        return cls(TreeNode.from_dict(d["root"]), tuple(d["feature_names"]), d["max_depth"], d["minimal_gain"], d["minimal_leaf_size"])


def _leaf_value(y: np.ndarray) -> float:
    # a pure leaf returns its label exactly, untouched by mean rounding
    return float(y[0]) if np.all(y == y[0]) else float(np.mean(y))


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Lowest child-SSE split; ties go to the lowest feature, then lowest threshold."""
    n = len(y)
    yc = y - y.mean()
    candidates = []  # (sse, feature, threshold)
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="mergesort")
        xs, ys = X[order, f], yc[order]
        csum, csq = np.cumsum(ys), np.cumsum(ys * ys)
        i = np.arange(min_leaf - 1, n - min_leaf)
        if i.size == 0:
            continue
        i = i[xs[i] < xs[i + 1]]
        if i.size == 0:
            continue
        nl = i + 1.0
        nr = n - nl
        sl = csum[i]
        sr = csum[-1] - sl
        sse = (csq[i] - sl * sl / nl) + ((csq[-1] - csq[i]) - sr * sr / nr)
        thr = (xs[i] + xs[i + 1]) / 2
        thr = np.where(thr < xs[i + 1], thr, xs[i])
        candidates += zip(sse.tolist(), [f] * i.size, thr.tolist())
    if not candidates:
        return None
    best = min(c[0] for c in candidates)
    tol = _TIE_RTOL * float(np.sum(yc * yc))
    tied = [c for c in candidates if c[0] <= best + tol]
    return min(tied, key=lambda c: (c[1], c[2]))


def _grow(X, y, depth, params) -> TreeNode:
    max_depth, minimal_gain, min_leaf = params
    node = TreeNode(_leaf_value(y), len(y))
    if depth >= max_depth or len(y) < 2 * min_leaf or np.all(y == y[0]):
        return node
    split = _best_split(X, y, min_leaf)
    if split is None:
        return node
    child_sse, feature, threshold = split
    node_sse = float(np.sum((y - y.mean()) ** 2))
    if node_sse <= 0 or (node_sse - child_sse) < minimal_gain * node_sse:
        return node
    mask = X[:, feature] <= threshold
    node.feature, node.threshold = feature, threshold
    node.left = _grow(X[mask], y[mask], depth + 1, params)
    node.right = _grow(X[~mask], y[~mask], depth + 1, params)
    return node


def fit_tree(
    data: SupervisedDataset,
    max_depth: int = 25,
    minimal_gain: float = 0.15,
    minimal_leaf_size: int = 2,
) -> TreeModel:
    """Fit a regression tree with the least-squares split criterion.

    A node is split only when the best split removes at least
    ``minimal_gain`` of the node's sum of squared deviations (a relative
    threshold). Split thresholds are midpoints between consecutive distinct
    feature values; rows with ``x <= threshold`` go left.
    """
    if len(data) == 0:
        raise ValueError("cannot fit a tree on an empty dataset")
    if max_depth < 0 or minimal_leaf_size < 1 or minimal_gain < 0:
        raise ValueError("invalid tree parameters")
    root = _grow(data.X, data.y, 0, (max_depth, minimal_gain, minimal_leaf_size))
    return TreeModel(root, data.feature_names, max_depth, minimal_gain, minimal_leaf_size)
