"""Scoring detections against ground truth: matching, ROC curves, AUC."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .postprocess import ScoreCurve


@dataclass(frozen=True)
class MatchReport:
    """Outcome of assigning alarms to ground-truth change points.

    matched_alarm[i] is the first alarm credited to ground-truth stamp i,
    or -1 when none landed within the tolerance.
    """

    n_gt: int
    n_alarms: int
    n_correct: int
    tolerance: int
    matched_alarm: np.ndarray

    @property
    def tpr(self) -> float:
        if self.n_gt == 0:
            raise ValueError("no ground truth")
        return self.n_correct / self.n_gt

    @property
    def fpr(self) -> float:
        """Fraction of alarms not credited to any change point; 0 when
        there are no alarms at all."""
        if self.n_alarms == 0:
            return 0.0
        return (self.n_alarms - self.n_correct) / self.n_alarms


@dataclass(frozen=True)
class RocCurve:
    """Operating points per threshold plus the terminal (1, 1) point.

    points has one row (tau, fpr, tpr) per threshold; auc integrates the
    monotone closure of these points (prefixed by (0,0), suffixed by (1,1))
    by the trapezoid rule.
    """

    points: np.ndarray
    auc: float


def _nearest_gt(gt: np.ndarray, alarms: np.ndarray) -> np.ndarray:
    """Index of the closest ground-truth stamp per alarm; ties break to the
    earlier stamp."""
    pos = np.searchsorted(gt, alarms)
    left = np.clip(pos - 1, 0, gt.size - 1)
    right = np.clip(pos, 0, gt.size - 1)
    pick_left = np.abs(alarms - gt[left]) <= np.abs(gt[right] - alarms)
    return np.where(pick_left, left, right)


def match_alarms(ground_truth, alarms, tolerance: int) -> MatchReport:
    """Assign each alarm to its nearest ground-truth stamp; a stamp counts
    as detected when some alarm assigned to it lies within the tolerance."""
    gt = np.sort(np.asarray(ground_truth, dtype=np.int64).ravel())
    al = np.sort(np.asarray(alarms, dtype=np.int64).ravel())
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    matched = np.full(gt.size, -1, dtype=np.int64)
    if gt.size and al.size:
        nearest = _nearest_gt(gt, al)
        within = np.abs(al - gt[nearest]) <= tolerance
        for alarm, idx in zip(al[within], nearest[within]):
            if matched[idx] < 0:
                matched[idx] = alarm
    n_correct = int(np.count_nonzero(matched >= 0))
    return MatchReport(gt.size, al.size, n_correct, tolerance, matched)


def roc_auc(scores: ScoreCurve, ground_truth, tolerance: int) -> RocCurve:
    """ROC over thresholds 0 and every distinct positive score.

    At threshold tau the alarm set is every stamp scoring strictly above
    tau, so the largest threshold always yields the empty set and (0, 0).
    """
    gt = np.asarray(ground_truth, dtype=np.int64).ravel()
    if gt.size == 0:
        raise ValueError("no ground truth")
    positive = np.unique(scores.values[scores.values > 0])
    taus = np.concatenate([[0.0], positive])
    points = np.empty((taus.size, 3))
    for i, tau in enumerate(taus):
        alarms = scores.stamps[scores.values > tau]
        report = match_alarms(gt, alarms, tolerance)
        points[i] = (tau, report.fpr, report.tpr)
    ops = {(fpr, tpr) for _, fpr, tpr in points}
    ops.add((1.0, 1.0))
    ops.add((0.0, 0.0))
    path = sorted(ops)
    auc = math.fsum((x2 - x1) * (y1 + y2) / 2.0
                    for (x1, y1), (x2, y2) in zip(path[:-1], path[1:]))
    return RocCurve(points, auc)


def corpus_auc(aucs) -> tuple[float, float]:
    """Mean AUC and its standard error (sample std / sqrt(n); 0 for n=1)."""
    vals = np.asarray(aucs, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("no AUC values")
    mean = float(vals.mean())
    if vals.size == 1:
        return mean, 0.0
    return mean, float(vals.std(ddof=1) / math.sqrt(vals.size))
