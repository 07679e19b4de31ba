"""Numba kernels for tree construction and ensemble prediction.

All randomness inside a tree comes from a SplitMix64 stream seeded with the
tree's child seed, so a tree's output depends only on (data, seed) — never
on thread scheduling.  Class counts use 64-bit integers and the Gini scan
uses an incremental sum-of-squares update, keeping the arithmetic identical
across runs and worker counts.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX_M1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_M2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _splitmix64(state):
    state = state + _MIX_GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX_M1
    z = (z ^ (z >> np.uint64(27))) * _MIX_M2
    z = z ^ (z >> np.uint64(31))
    return z, state


@njit(cache=True, nogil=True)
def build_tree(X, y, n_classes, seed, mtry, max_depth, min_leaf, min_split):
    """Grow one tree on a bootstrap resample of (X, y).

    Returns pre-order node arrays.  ``feature[i] == -1`` marks a leaf whose
    sparse class counts live in ``leaf_classes``/``leaf_counts`` over the
    span ``[left[i], right[i])``.
    """
    n, d = X.shape
    state = seed

    samples = np.empty(n, np.int64)
    for i in range(n):
        z, state = _splitmix64(state)
        samples[i] = np.int64(z % np.uint64(n))

    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    leaf_classes = np.empty(n if n < cap else cap, np.int64)
    leaf_counts = np.empty(leaf_classes.shape[0], np.int64)
    n_leaf_entries = 0

    # stack rows: start, end, depth, parent, is_left
    stack = np.empty((cap, 5), np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = n
    stack[top, 2] = 0
    stack[top, 3] = -1
    stack[top, 4] = 0
    top += 1

    counts = np.zeros(n_classes, np.int64)
    left_counts = np.zeros(n_classes, np.int64)
    right_counts = np.zeros(n_classes, np.int64)
    vals = np.empty(n, np.float64)
    part = np.empty(n, np.int64)
    feat_order = np.empty(d, np.int64)

    node_count = 0
    while top > 0:
        top -= 1
        s = stack[top, 0]
        e = stack[top, 1]
        depth = stack[top, 2]
        parent = stack[top, 3]
        is_left = stack[top, 4]

        nid = node_count
        node_count += 1
        if parent >= 0:
            if is_left == 1:
                left[parent] = nid
            else:
                right[parent] = nid

        m = e - s
        counts[:] = 0
        for i in range(s, e):
            counts[y[samples[i]]] += 1
        total_sumsq = np.int64(0)
        max_count = np.int64(0)
        for k in range(n_classes):
            c = counts[k]
            total_sumsq += c * c
            if c > max_count:
                max_count = c

        stop = (
            max_count == m
            or m < min_split
            or m < 2 * min_leaf
            or (max_depth >= 0 and depth >= max_depth)
        )

        best_score = -1.0
        best_f = np.int64(-1)
        best_thr = 0.0
        if not stop:
            baseline = total_sumsq / m
            for j in range(d):
                feat_order[j] = j
            for t in range(mtry):
                z, state = _splitmix64(state)
                k = t + np.int64(z % np.uint64(d - t))
                tmp = feat_order[t]
                feat_order[t] = feat_order[k]
                feat_order[k] = tmp
                f = feat_order[t]

                for i in range(m):
                    vals[i] = X[samples[s + i], f]
                order = np.argsort(vals[:m])

                for k2 in range(n_classes):
                    left_counts[k2] = 0
                    right_counts[k2] = counts[k2]
                lsum = np.int64(0)
                rsum = total_sumsq
                lcnt = np.int64(0)
                for i in range(m - 1):
                    yi = y[samples[s + order[i]]]
                    lsum += 2 * left_counts[yi] + 1
                    left_counts[yi] += 1
                    rsum += 1 - 2 * right_counts[yi]
                    right_counts[yi] -= 1
                    lcnt += 1
                    v = vals[order[i]]
                    vnext = vals[order[i + 1]]
                    if v == vnext:
                        continue
                    if lcnt < min_leaf or (m - lcnt) < min_leaf:
                        continue
                    score = lsum / lcnt + rsum / (m - lcnt)
                    if score > baseline and score > best_score:
                        best_score = score
                        best_f = f
                        thr = v + (vnext - v) / 2.0
                        if thr >= vnext:  # adjacent floats: keep split exact
                            thr = v
                        best_thr = thr

        if best_f < 0:
            # leaf: record sparse class counts
            feature[nid] = -1
            left[nid] = n_leaf_entries
            for k in range(n_classes):
                if counts[k] > 0:
                    leaf_classes[n_leaf_entries] = k
                    leaf_counts[n_leaf_entries] = counts[k]
                    n_leaf_entries += 1
            right[nid] = n_leaf_entries
            continue

        feature[nid] = best_f
        threshold[nid] = best_thr
        # stable partition of samples[s:e] around the split
        nl = 0
        for i in range(s, e):
            if X[samples[i], best_f] <= best_thr:
                part[nl] = samples[i]
                nl += 1
        nr = nl
        for i in range(s, e):
            if not (X[samples[i], best_f] <= best_thr):
                part[nr] = samples[i]
                nr += 1
        for i in range(m):
            samples[s + i] = part[i]

        # right pushed first so the left child is processed next (pre-order)
        stack[top, 0] = s + nl
        stack[top, 1] = e
        stack[top, 2] = depth + 1
        stack[top, 3] = nid
        stack[top, 4] = 0
        top += 1
        stack[top, 0] = s
        stack[top, 1] = s + nl
        stack[top, 2] = depth + 1
        stack[top, 3] = nid
        stack[top, 4] = 1
        top += 1

    return (
        feature[:node_count].copy(),
        threshold[:node_count].copy(),
        left[:node_count].copy(),
        right[:node_count].copy(),
        leaf_classes[:n_leaf_entries].copy(),
        leaf_counts[:n_leaf_entries].copy(),
    )


@njit(cache=True, nogil=True)
def predict_proba_rows(
    Xq,
    roots,
    feature,
    threshold,
    left,
    right,
    leaf_classes,
    leaf_counts,
    n_classes,
    out,
):
    """Soft-vote probabilities: mean of per-leaf count distributions.

    Trees are always accumulated in index order, so results do not depend
    on how rows are chunked across threads.
    """
    nq = Xq.shape[0]
    n_trees = roots.shape[0]
    for q in range(nq):
        for t in range(n_trees):
            nid = roots[t]
            while feature[nid] >= 0:
                if Xq[q, feature[nid]] <= threshold[nid]:
                    nid = left[nid]
                else:
                    nid = right[nid]
            lo = left[nid]
            hi = right[nid]
            total = np.int64(0)
            for idx in range(lo, hi):
                total += leaf_counts[idx]
            for idx in range(lo, hi):
                out[q, leaf_classes[idx]] += leaf_counts[idx] / total
        for k in range(n_classes):
            out[q, k] /= n_trees
