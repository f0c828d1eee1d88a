"""Score matrices, view averaging, sum-rule fusion, and the oracle bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MisalignedMembersError, OrphanViewError

ROW_SUM_TOL = 1e-6


@dataclass
class ScoreMatrix:
    """Per-sample class-probability rows keyed by sample id."""

    row_ids: tuple[str, ...]
    scores: np.ndarray  # (n_samples, n_classes) float64

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.ndim != 2 or self.scores.shape[0] != len(self.row_ids):
            raise ValueError("scores must be (n_rows, n_classes) matching row_ids")
        if len(self.row_ids):
            if self.scores.min() < 0:
                raise ValueError("probability rows must be non-negative")
            sums = self.scores.sum(axis=1)
            if np.abs(sums - 1.0).max() > ROW_SUM_TOL:
                raise ValueError("probability rows must sum to 1")

    @property
    def n_classes(self) -> int:
        return self.scores.shape[1]

    def argmax(self) -> np.ndarray:
        """Predicted class per row; ties break toward the lowest index."""
        return self.scores.argmax(axis=1)


@dataclass(frozen=True)
class EnsembleSpec:
    name: str
    members: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        if len(set(self.members)) != len(self.members):
            raise ValueError("ensemble members must be distinct")


def average_views(view_scores: ScoreMatrix, grouping: dict[str, str]) -> ScoreMatrix:
    """Mean of the view rows of each protein, protein order = first appearance.

    Raises :class:`OrphanViewError` for views absent from the grouping.
    """
    order: list[str] = []
    buckets: dict[str, list[int]] = {}
    for i, view_id in enumerate(view_scores.row_ids):
        pid = grouping.get(view_id)
        if pid is None:
            raise OrphanViewError(f"view {view_id!r} maps to no protein")
        if pid not in buckets:
            buckets[pid] = []
            order.append(pid)
        buckets[pid].append(i)
    rows = np.vstack([view_scores.scores[buckets[pid]].mean(axis=0) for pid in order])
    return ScoreMatrix(tuple(order), rows)


def _check_aligned(members: list[ScoreMatrix]) -> None:
    if not members:
        raise MisalignedMembersError("no members")
    first = members[0]
    for m in members[1:]:
        if m.row_ids != first.row_ids or m.n_classes != first.n_classes:
            raise MisalignedMembersError("members must share row ids and class count")


def sum_rule_fuse(members: list[ScoreMatrix]) -> ScoreMatrix:
    """Sum-rule fusion normalized back to probability rows (the member mean)."""
    _check_aligned(members)
    fused = members[0].scores.copy()
    for m in members[1:]:
        fused = fused + m.scores
    fused /= len(members)
    return ScoreMatrix(members[0].row_ids, fused)


def oracle_accuracy(members: list[ScoreMatrix], labels: np.ndarray) -> float:
    """Fraction of samples some member classifies correctly (selection bound)."""
    _check_aligned(members)
    labels = np.asarray(labels)
    if labels.shape != (len(members[0].row_ids),):
        raise MisalignedMembersError("labels must align with member rows")
    hit = np.zeros(len(labels), dtype=bool)
    for m in members:
        hit |= m.argmax() == labels
    return float(hit.mean())
