"""Semantic scene completion metrics: confusion matrix, per-class IoU, mIoU and the
class-agnostic completion IoU.
"""
from dataclasses import dataclass
import numpy as np
import pandas as pd
from . import log
from .exception import ArgumentError, UndefinedMetricError


@dataclass
class ConfusionMatrix:
    """C x C voxel counts, rows = ground truth, columns = prediction"""
    counts: np.ndarray

    @staticmethod
    def zeros(num_classes):
        return ConfusionMatrix(np.zeros((num_classes, num_classes), dtype=np.int64))

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ArgumentError('Confusion matrix must be C x C')
        if np.any(self.counts < 0):
            raise ArgumentError('Confusion matrix counts must be >= 0')

    @property
    def num_classes(self):
        return self.counts.shape[0]

    def total(self):
        return int(self.counts.sum())

    def merge(self, other):
        if self.num_classes != other.num_classes:
            raise ArgumentError('Cannot merge confusion matrices of {} and {} classes'.format(
                self.num_classes, other.num_classes))
        return ConfusionMatrix(self.counts + other.counts)

    def add(self, pred, gt, ignore_label=255):
        """Count label pairs of flat arrays, skipping ignored ground truth"""
        pred = np.asarray(pred, dtype=np.int64).reshape(-1)
        gt = np.asarray(gt, dtype=np.int64).reshape(-1)
        if pred.shape != gt.shape:
            raise ArgumentError('Prediction and ground truth sizes differ')
        C = self.num_classes
        valid = gt != ignore_label
        if np.any((gt[valid] < 0) | (gt[valid] >= C)) or np.any((pred[valid] < 0) | (pred[valid] >= C)):
            raise ArgumentError('Label outside [0, {}) in evaluated voxels'.format(C))
        count = np.bincount(C * gt[valid] + pred[valid], minlength=C * C)
        return ConfusionMatrix(self.counts + count.reshape(C, C))


def accumulate(pred, gt, cm=None):
    """Add every voxel whose ground truth is not ignored to the confusion matrix"""
    if pred.spec.dims != gt.spec.dims:
        raise ArgumentError('Prediction dims {} differ from ground truth dims {}'.format(pred.spec.dims, gt.spec.dims))
    if pred.spec.num_classes != gt.spec.num_classes:
        raise ArgumentError('Prediction and ground truth class counts differ')
    if cm is None:
        cm = ConfusionMatrix.zeros(gt.spec.num_classes)
    elif cm.num_classes != gt.spec.num_classes:
        raise ArgumentError('Confusion matrix has {} classes, grids have {}'.format(cm.num_classes, gt.spec.num_classes))
    return cm.add(pred.labels, gt.labels, gt.spec.ignore_label)


def _tp_fp_fn(cm):
    tp = np.diag(cm.counts).astype(np.float64)
    fp = cm.counts.sum(axis=0) - tp
    fn = cm.counts.sum(axis=1) - tp
    return tp, fp, fn


def class_ious(cm):
    """IoU of every class; NaN where the class is absent from both prediction and truth"""
    tp, fp, fn = _tp_fp_fn(cm)
    union = tp + fp + fn
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(union > 0, tp / np.where(union > 0, union, 1), np.nan)


def class_iou(cm, i):
    if not 0 <= i < cm.num_classes:
        raise ArgumentError('Class {} outside [0, {})'.format(i, cm.num_classes))
    return float(class_ious(cm)[i])


def miou(cm, class_set=None, empty_label=0, absent_as_zero=False):
    """Mean IoU over ``class_set`` (default: every class but the empty one).

    Absent classes are left out of the mean unless ``absent_as_zero`` counts them as 0.
    """
    if class_set is None:
        class_set = [c for c in range(cm.num_classes) if c != empty_label]
    ious = class_ious(cm)[list(class_set)]
    if absent_as_zero:
        ious = np.nan_to_num(ious, nan=0.0)
    present = ious[~np.isnan(ious)]
    if len(present) == 0:
        raise UndefinedMetricError('Every evaluated class is absent')
    return float(np.mean(present))


def occupancy_iou(binary):
    """IoU of the occupied class of a 2-class (empty, occupied) confusion matrix.

    With no occupied voxel on either side prediction and truth coincide, giving 1.0.
    """
    if binary.num_classes != 2:
        raise ArgumentError('Expected a 2-class confusion matrix, got {} classes'.format(binary.num_classes))
    iou = class_iou(binary, 1)
    if np.isnan(iou):
        log.debug('No occupied voxel in prediction or ground truth')
        return 1.0
    return iou


def completion_iou(pred, gt):
    """IoU of the occupied (non-empty) class after binarizing both grids"""
    if pred.spec.dims != gt.spec.dims:
        raise ArgumentError('Prediction dims {} differ from ground truth dims {}'.format(pred.spec.dims, gt.spec.dims))
    return occupancy_iou(binary_confusion(pred, gt))


def binary_confusion(pred, gt):
    """2-class confusion matrix (0 = empty, 1 = occupied) over non-ignored voxels"""
    valid = gt.labels != gt.spec.ignore_label
    return ConfusionMatrix.zeros(2).add(pred.occupied_mask()[valid].astype(np.int64),
                                        gt.occupied_mask()[valid].astype(np.int64))


def report(cm, class_names, completion=None, empty_label=0, absent_as_zero=False, include_empty=False):
    """One-row DataFrame with mIoU, completion IoU and per-class IoU (in %).

    ``class_names`` names the semantic classes in label order, without the empty class.
    """
    names = list(class_names)
    classes = [c for c in range(cm.num_classes) if c != empty_label]
    if include_empty:
        names = ['empty'] + names
        classes = [empty_label] + classes
    if len(names) != len(classes):
        raise ArgumentError('Expected {} class names, got {}'.format(len(classes), len(names)))
    ious = class_ious(cm)[classes]
    if absent_as_zero:
        ious = np.nan_to_num(ious, nan=0.0)
    row = {'mIoU': miou(cm, classes, empty_label, absent_as_zero),
           'completion': np.nan if completion is None else completion}
    row.update(zip(names, ious))
    return pd.DataFrame([row], columns=['mIoU', 'completion'] + names).mul(100.0)


def format_report(df):
    """Plain-text table followed by a key=value listing"""
    table = df.to_string(index=False, float_format=lambda v: '{:.1f}'.format(v), na_rep='-')
    pairs = ['{}={:.6f}'.format(k, v / 100.0) if not np.isnan(v) else '{}=nan'.format(k)
             for k, v in df.iloc[0].items()]
    return table + '\n' + '\n'.join(pairs)
