"""Metrics tests"""
import numpy as np
import pandas as pd
import pytest
from ssclab import metrics
from ssclab.metrics import ConfusionMatrix
from ssclab.voxel import GridSpec, VoxelLabelGrid
from ssclab.exception import ArgumentError, UndefinedMetricError


def _grid(labels, num_classes=20):
    labels = np.asarray(labels, dtype=np.uint16).reshape(-1, 1, 1)
    spec = GridSpec().with_dims(labels.shape)
    if num_classes != spec.num_classes:
        spec = GridSpec(spec.origin, spec.extent, spec.dims, num_classes)
    return VoxelLabelGrid(spec, labels)


def test_accumulate_perfect():
    g = _grid([0, 1, 2, 2, 5])
    cm = metrics.accumulate(g, g)
    assert np.count_nonzero(cm.counts - np.diag(np.diag(cm.counts))) == 0
    assert metrics.miou(cm) == 1.0


def test_accumulate_all_ignored():
    gt = _grid([255, 255, 255])
    cm = metrics.accumulate(_grid([1, 2, 3]), gt)
    assert cm.total() == 0


def test_three_voxel_example():
    cm = metrics.accumulate(_grid([1, 1, 2]), _grid([1, 2, 2]))
    assert cm.counts[1, 1] == 1 and cm.counts[2, 1] == 1 and cm.counts[2, 2] == 1
    assert cm.total() == 3
    assert metrics.class_iou(cm, 1) == 0.5
    assert metrics.class_iou(cm, 2) == 0.5
    assert metrics.miou(cm) == 0.5


def test_absent_class_handling():
    cm = metrics.accumulate(_grid([1, 1, 2]), _grid([1, 2, 2]))
    assert np.isnan(metrics.class_iou(cm, 3))
    assert metrics.miou(cm, absent_as_zero=True) == pytest.approx(1.0 / 19)
    assert metrics.miou(cm, class_set=[1, 2, 3], absent_as_zero=True) == pytest.approx(1.0 / 3)


def test_miou_undefined():
    cm = metrics.accumulate(_grid([0, 0]), _grid([0, 0]))
    with pytest.raises(UndefinedMetricError):
        metrics.miou(cm)


def test_accumulate_dims_mismatch():
    with pytest.raises(ArgumentError):
        metrics.accumulate(_grid([1, 2]), _grid([1, 2, 3]))
    with pytest.raises(ArgumentError):
        metrics.accumulate(_grid([1, 2], 12), _grid([1, 2]))


def test_accumulate_additive(rng):
    spec = GridSpec().with_dims((8, 6, 4))
    for _ in range(20):
        pred = rng.integers(0, 20, size=spec.dims)
        gt = rng.choice(list(range(20)) + [255], size=spec.dims)
        whole = metrics.accumulate(VoxelLabelGrid(spec, pred), VoxelLabelGrid(spec, gt))
        half = spec.with_dims((4, 6, 4))
        a = metrics.accumulate(VoxelLabelGrid(half, pred[:4]), VoxelLabelGrid(half, gt[:4]))
        b = metrics.accumulate(VoxelLabelGrid(half, pred[4:]), VoxelLabelGrid(half, gt[4:]))
        np.testing.assert_array_equal(a.merge(b).counts, whole.counts)
        assert whole.total() == int(np.count_nonzero(gt != 255))


def test_iou_range(rng):
    for _ in range(20):
        cm = ConfusionMatrix.zeros(5).add(rng.integers(0, 5, size=50), rng.integers(0, 5, size=50))
        ious = metrics.class_ious(cm)
        ious = ious[~np.isnan(ious)]
        assert np.all((ious >= 0) & (ious <= 1))


def test_completion_iou_examples():
    assert metrics.completion_iou(_grid([1, 0, 0]), _grid([2, 3, 0])) == 0.5
    g = _grid([0, 4, 9, 0])
    assert metrics.completion_iou(g, g) == 1.0
    assert metrics.completion_iou(_grid([0, 0, 0]), _grid([1, 1, 0])) == 0.0
    # nothing occupied on either side: prediction and ground truth coincide
    assert metrics.completion_iou(_grid([0, 0]), _grid([0, 0])) == 1.0
    assert metrics.completion_iou(_grid([0, 0]), _grid([255, 0])) == 1.0


def test_completion_iou_ignores_gt_ignore():
    assert metrics.completion_iou(_grid([1, 1, 0]), _grid([1, 255, 0])) == 1.0


def test_completion_iou_binary_oracle(rng):
    spec = GridSpec().with_dims((6, 5, 4))
    for _ in range(100):
        pred = VoxelLabelGrid(spec, rng.choice([0, 0, 0, 0, 1, 5, 7], size=spec.dims))
        gt = VoxelLabelGrid(spec, rng.choice([0, 0, 0, 0, 1, 5, 255], size=spec.dims))
        valid = gt.labels != 255
        p = (pred.labels != 0)[valid]
        g = (gt.labels != 0)[valid]
        union = np.count_nonzero(p | g)
        expected = np.count_nonzero(p & g) / union if union > 0 else 1.0
        assert metrics.completion_iou(pred, gt) == expected
        assert metrics.occupancy_iou(metrics.binary_confusion(pred, gt)) == expected


def test_occupancy_iou():
    assert metrics.occupancy_iou(ConfusionMatrix(np.array([[5, 1], [1, 2]]))) == 0.5
    assert metrics.occupancy_iou(ConfusionMatrix(np.array([[7, 0], [0, 0]]))) == 1.0
    with pytest.raises(ArgumentError):
        metrics.occupancy_iou(ConfusionMatrix.zeros(3))


def test_confusion_matrix_invalid():
    with pytest.raises(ArgumentError):
        ConfusionMatrix(np.zeros((2, 3)))
    with pytest.raises(ArgumentError):
        ConfusionMatrix(-np.ones((2, 2)))
    with pytest.raises(ArgumentError):
        ConfusionMatrix.zeros(2).merge(ConfusionMatrix.zeros(3))


def test_report():
    cm = metrics.accumulate(_grid([1, 1, 2], 4), _grid([1, 2, 2], 4))
    df = metrics.report(cm, ['car', 'bicycle', 'person'], completion=1.0)
    assert isinstance(df, pd.DataFrame)
    assert list(df.columns) == ['mIoU', 'completion', 'car', 'bicycle', 'person']
    assert df['mIoU'][0] == pytest.approx(50.0)
    assert df['car'][0] == pytest.approx(50.0)
    assert np.isnan(df['person'][0])
    text = metrics.format_report(df)
    assert 'mIoU=0.500000' in text.splitlines()
    assert 'person=nan' in text.splitlines()
    assert 'completion=1.000000' in text.splitlines()


def test_report_include_empty():
    cm = metrics.accumulate(_grid([0, 1, 2], 3), _grid([0, 1, 2], 3))
    df = metrics.report(cm, ['a', 'b'], include_empty=True)
    assert list(df.columns) == ['mIoU', 'completion', 'empty', 'a', 'b']
    assert df['mIoU'][0] == pytest.approx(100.0)


def test_report_name_count():
    cm = ConfusionMatrix.zeros(4)
    with pytest.raises(ArgumentError):
        metrics.report(cm, ['a', 'b'])
