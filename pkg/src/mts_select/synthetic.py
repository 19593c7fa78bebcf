"""Synthetic planted-structure datasets for tests and benchmarks.

Informative time-series features carry a class-dependent level plus a
class-dependent sinusoid, with unit Gaussian noise on top; noise features are
pure unit Gaussian noise. Series lengths vary across features (but not within
one feature) to exercise mixed sampling rates. Classes are assigned
round-robin, so they are balanced.
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset, FeatureDescriptor, FeatureKind, Segment
from .errors import InputError
from .seeding import child_rng

_LEVEL_GAP = 4.0


def _series_length(feature_index: int) -> int:
    return 24 + 3 * (feature_index % 5)


def generate(
    n: int,
    classes: int,
    informative: int,
    noise: int,
    seed: int = 0,
    duplicates: tuple[int, ...] = (),
) -> Dataset:
    """Build a planted dataset with n segments and informative + noise features.

    duplicates lists feature indices to copy bit-identically; copies are
    appended after the noise features, named "<source>_copy<i>".
    """
    if informative < 1:
        raise InputError("need at least one informative feature")
    if noise < 0:
        raise InputError("noise feature count must be nonnegative")
    if classes < 2:
        raise InputError("need at least two classes")
    if n < 2 * classes:
        raise InputError(f"need at least {2 * classes} segments for {classes} classes")

    class_tokens = [f"c{c}" for c in range(classes)]
    labels = [class_tokens[i % classes] for i in range(n)]
    label_index = np.array([i % classes for i in range(n)])

    descriptors: list[FeatureDescriptor] = []
    columns: list[list] = []
    for f in range(informative + noise):
        is_informative = f < informative
        name = f"sig{f}" if is_informative else f"noise{f - informative}"
        descriptors.append(FeatureDescriptor(len(descriptors), name, FeatureKind.TIMESERIES))
        length = _series_length(f)
        rng = child_rng(seed, "feature", name)
        t = np.arange(length) / length
        col = []
        for i in range(n):
            eps = rng.standard_normal(length)
            if is_informative:
                c = int(label_index[i])
                level = _LEVEL_GAP * ((c + f) % classes)
                freq = 1 + (f + 2 * c) % 3
                col.append(level + np.sin(2.0 * np.pi * freq * t) + eps)
            else:
                col.append(eps)
        columns.append(col)

    for idx, src in enumerate(duplicates):
        if not 0 <= src < len(columns):
            raise InputError(f"cannot duplicate feature {src}: no such feature")
        name = f"{descriptors[src].name}_copy{idx}"
        descriptors.append(FeatureDescriptor(len(descriptors), name, FeatureKind.TIMESERIES))
        columns.append([x.copy() for x in columns[src]])

    segments = tuple(
        Segment(i, tuple(columns[j][i] for j in range(len(columns))), labels[i])
        for i in range(n)
    )
    return Dataset(
        descriptors=tuple(descriptors),
        segments=segments,
        classes=tuple(class_tokens),
        train_ids=tuple(range(n)),
        test_ids=(),
    )
