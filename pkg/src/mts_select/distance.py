"""Per-feature pairwise distances: DTW for series, |a-b| for scalars, 0/1 for tokens.

DTW uses the standard O(len(s) * len(t)) dynamic program with steps
(i+1, j), (i, j+1), (i+1, j+1) and element cost |s_i - t_j|. The recurrence is
evaluated along anti-diagonals so many pairs with the same grid shape can be
swept in one vectorized pass; every cell is cost + min(up, left, diag), which
makes the result bit-identical regardless of evaluation order or batching.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset, FeatureKind, fingerprint
from .errors import InputError

# Cap on elements per batched DP buffer (~32 MB of float64).
_BATCH_ELEMENTS = 1 << 22


@dataclass
class DistanceMatrix:
    feature_id: int
    values: np.ndarray  # n x n, symmetric, zero diagonal, nonnegative


def _check_sequence(x, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{what}: sequence must be nonempty and one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what}: non-finite value in sequence")
    return arr


def _band_mask(a: int, b: int, window: int | None) -> np.ndarray | None:
    """True where |i - j| exceeds the warp window (cells to exclude)."""
    if window is None:
        return None
    w = max(int(window), abs(a - b))
    ii = np.arange(a)[:, None]
    jj = np.arange(b)[None, :]
    return np.abs(ii - jj) > w


def _dtw_batch(costs: np.ndarray) -> np.ndarray:
    """Minimum warp-path cost for a (pairs, a, b) stack of cost grids."""
    p, a, b = costs.shape
    acc = np.full((p, a + 1, b + 1), np.inf)
    acc[:, 0, 0] = 0.0
    for k in range(2, a + b + 1):
        lo = max(1, k - b)
        hi = min(a, k - 1)
        ii = np.arange(lo, hi + 1)
        jj = k - ii
        best = np.minimum(
            np.minimum(acc[:, ii - 1, jj], acc[:, ii, jj - 1]), acc[:, ii - 1, jj - 1]
        )
        acc[:, ii, jj] = costs[:, ii - 1, jj - 1] + best
    return acc[:, a, b]


def dtw(s, t, window: int | None = None) -> float:
    """DTW distance between two finite real sequences.

    window limits the warp band to |i - j| <= max(window, |len(s) - len(t)|);
    None (the default) leaves the path unconstrained.
    """
    s = _check_sequence(s, "dtw first argument")
    t = _check_sequence(t, "dtw second argument")
    costs = np.abs(s[:, None] - t[None, :])[None, :, :]
    mask = _band_mask(len(s), len(t), window)
    if mask is not None:
        costs = costs.copy()
        costs[0][mask] = np.inf
    return float(_dtw_batch(costs)[0])


def scalar_distance(a: float, b: float) -> float:
    a, b = float(a), float(b)
    if not (np.isfinite(a) and np.isfinite(b)):
        raise InputError("scalar distance requires finite inputs")
    return abs(a - b)


def categorical_distance(a: str, b: str) -> float:
    """0 iff the tokens are exactly equal (case-sensitive), else 1."""
    return 0.0 if a == b else 1.0


def znormalize(x: np.ndarray) -> np.ndarray:
    """Zero-mean unit-variance copy; constant series map to all zeros."""
    x = np.asarray(x, dtype=np.float64)
    sd = float(x.std())
    if sd == 0.0:
        return np.zeros_like(x)
    return (x - x.mean()) / sd


def _timeseries_matrix(series: list[np.ndarray], window: int | None) -> np.ndarray:
    n = len(series)
    out = np.zeros((n, n), dtype=np.float64)
    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for i in range(n):
        for j in range(i + 1, n):
            groups.setdefault((len(series[i]), len(series[j])), []).append((i, j))
    for (a, b), pairs in groups.items():
        mask = _band_mask(a, b, window)
        chunk = max(1, _BATCH_ELEMENTS // ((a + 1) * (b + 1)))
        for start in range(0, len(pairs), chunk):
            block = pairs[start : start + chunk]
            left = np.stack([series[i] for i, _ in block])
            right = np.stack([series[j] for _, j in block])
            costs = np.abs(left[:, :, None] - right[:, None, :])
            if mask is not None:
                costs[:, mask] = np.inf
            dist = _dtw_batch(costs)
            for (i, j), d in zip(block, dist):
                out[i, j] = d
    return out


def distance_matrix(
    ds: Dataset,
    feature_id: int,
    window: int | None = None,
    znorm: bool = False,
) -> DistanceMatrix:
    """Pairwise distances between all segments under the feature's metric.

    Only the upper triangle is computed; the lower triangle mirrors it exactly,
    so the matrix is bitwise symmetric with a zero diagonal.
    """
    if not 0 <= feature_id < ds.m:
        raise InputError(f"feature id {feature_id} out of range [0, {ds.m})")
    desc = ds.descriptors[feature_id]
    n = ds.n
    if desc.kind is FeatureKind.TIMESERIES:
        series = []
        for seg in ds.segments:
            x = _check_sequence(seg.values[feature_id], f"feature {desc.name!r} segment {seg.id}")
            series.append(znormalize(x) if znorm else x)
        upper = _timeseries_matrix(series, window)
    elif desc.kind is FeatureKind.SCALAR:
        upper = np.zeros((n, n), dtype=np.float64)
        for i, seg_i in enumerate(ds.segments):
            for j in range(i + 1, n):
                try:
                    upper[i, j] = scalar_distance(seg_i.values[feature_id], ds.segments[j].values[feature_id])
                except InputError as exc:
                    raise InputError(f"feature {desc.name!r} segments ({i}, {j}): {exc}") from None
    else:
        upper = np.zeros((n, n), dtype=np.float64)
        for i, seg_i in enumerate(ds.segments):
            for j in range(i + 1, n):
                upper[i, j] = categorical_distance(seg_i.values[feature_id], ds.segments[j].values[feature_id])
    values = upper + upper.T
    return DistanceMatrix(feature_id=feature_id, values=values)


def cache_signature(ds: Dataset, window: int | None, znorm: bool) -> str:
    """Directory key combining dataset content and metric parameters."""
    import hashlib

    text = f"{fingerprint(ds)}|window={window}|znorm={znorm}"
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:32]


def _write_matrix(path: Path, values: np.ndarray) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for row in values:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")
    os.replace(tmp, path)


def _read_matrix(path: Path, n: int) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split(",")])
    values = np.array(rows, dtype=np.float64)
    if values.shape != (n, n):
        raise InputError(f"cached matrix {path} has shape {values.shape}, expected {(n, n)}")
    return values


def cached_distance_matrix(
    ds: Dataset,
    feature_id: int,
    cache_dir,
    window: int | None = None,
    znorm: bool = False,
) -> DistanceMatrix:
    """distance_matrix() with a per-feature CSV cache under cache_dir.

    Layout: <cache_dir>/<signature>/M_<feature_id>.csv, full n x n matrix with
    round-trip-exact decimal reals. Writes are atomic (tmp file + rename).
    """
    if cache_dir is None:
        return distance_matrix(ds, feature_id, window=window, znorm=znorm)
    sig_dir = Path(cache_dir) / cache_signature(ds, window, znorm)
    path = sig_dir / f"M_{feature_id}.csv"
    if path.is_file():
        return DistanceMatrix(feature_id=feature_id, values=_read_matrix(path, ds.n))
    result = distance_matrix(ds, feature_id, window=window, znorm=znorm)
    sig_dir.mkdir(parents=True, exist_ok=True)
    _write_matrix(path, result.values)
    return result
