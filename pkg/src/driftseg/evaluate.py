"""Scoring detected changepoints against a known truth.

Predictions are matched one-to-one to true changes within a tolerance
window, then summarised as precision, recall, and their harmonic mean (F1).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameterError

#: default matching window, in observations on either side
DEFAULT_TOLERANCE = 2


@dataclass(frozen=True)
class EvalReport:
    """Match counts and scores for one prediction/truth pair."""

    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f1: float
    tolerance: int

    def to_dict(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tolerance": self.tolerance,
        }


def _check_positions(name: str, positions) -> list[int]:
    out = [int(p) for p in positions]
    for i in range(1, len(out)):
        if out[i] <= out[i - 1]:
            raise InvalidParameterError(
                f"{name} must be strictly increasing (offending entry {out[i]})"
            )
    return out


def match_changepoints(predicted, truth, tolerance: int = DEFAULT_TOLERANCE) -> EvalReport:
    """Score predictions against the truth with one-to-one matching.

    Each prediction, taken left to right, claims the nearest still-unmatched
    true change within ``tolerance`` observations; distance ties go to the
    earlier true change.  Empty-against-empty counts as a perfect score, and
    a degenerate ratio (0/0) is taken as 1 so that only actual misses and
    false alarms lower a score.

    Parameters
    ----------
    predicted, truth : sequence of int
        Strictly increasing change positions.
    tolerance : int
        Maximum absolute distance for a match, ``>= 0``.

    Returns
    -------
    EvalReport
    """
    if tolerance < 0:
        raise InvalidParameterError(f"tolerance must be >= 0, got {tolerance}")
    pred = _check_positions("predicted", predicted)
    true = _check_positions("truth", truth)
    taken = [False] * len(true)
    tp = 0
    for p in pred:
        best_j = -1
        best_d = tolerance + 1
        for j, t in enumerate(true):
            if taken[j]:
                continue
            d = abs(t - p)
            if d < best_d:
                best_d = d
                best_j = j
        if best_j >= 0:
            taken[best_j] = True
            tp += 1
    fp = len(pred) - tp
    fn = len(true) - tp
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0.0 else 2.0 * precision * recall / (precision + recall)
    return EvalReport(
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        precision=precision,
        recall=recall,
        f1=f1,
        tolerance=tolerance,
    )
