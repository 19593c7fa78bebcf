import numpy as np
import pytest

from mts_select.dataset import Dataset, FeatureDescriptor, FeatureKind, Segment


def make_dataset(feature_specs, labels, train_ids=None, test_ids=None) -> Dataset:
    """Assemble a dataset from (name, kind, list-of-values) feature specs."""
    n = len(labels)
    descriptors = []
    for j, (name, kind, values) in enumerate(feature_specs):
        assert len(values) == n
        descriptors.append(FeatureDescriptor(j, name, FeatureKind(kind)))
    segments = []
    for i in range(n):
        values = []
        for name, kind, col in feature_specs:
            v = col[i]
            if FeatureKind(kind) is FeatureKind.TIMESERIES:
                v = np.asarray(v, dtype=np.float64)
            elif FeatureKind(kind) is FeatureKind.SCALAR:
                v = float(v)
            values.append(v)
        segments.append(Segment(i, tuple(values), labels[i]))
    classes = []
    for lab in labels:
        if lab not in classes:
            classes.append(lab)
    if train_ids is None:
        train_ids = tuple(range(n))
        test_ids = ()
    return Dataset(
        descriptors=tuple(descriptors),
        segments=tuple(segments),
        classes=tuple(classes),
        train_ids=tuple(train_ids),
        test_ids=tuple(test_ids or ()),
    )


@pytest.fixture
def scalar_dataset():
    return make_dataset(
        [("a", "scalar", [0.0, 1.0, 3.0])],
        ["x", "x", "y"],
    )
