"""Stratified cross-validation, macro one-vs-rest AUC, and report building."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyDatasetError, MissingPredictionError, SingleClassError
from .fusion import ScoreMatrix

AUC_METHOD = "macro one-vs-rest AUC, Mann-Whitney with midrank ties"


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: dict[str, int]  # protein_id -> fold index
    seed: int

    def fold_of(self, protein_id: str) -> int:
        return self.assignment[protein_id]

    def members(self, fold: int) -> list[str]:
        return [pid for pid, f in self.assignment.items() if f == fold]


def stratified_kfold(labels: dict[str, int], k: int = 10, seed: int = 0) -> FoldPlan:
    """Deal each class round-robin to folds after a seeded shuffle.

    Per-class fold counts differ by at most one; classes smaller than k leave
    some folds without that class.  Assignment is at protein granularity, so
    all views of a protein share its fold.
    """
    if not labels:
        raise EmptyDatasetError("no proteins to assign")
    rng = np.random.default_rng(seed)
    assignment: dict[str, int] = {}
    by_class: dict[int, list[str]] = {}
    for pid in sorted(labels):
        by_class.setdefault(labels[pid], []).append(pid)
    for cls in sorted(by_class):
        ids = by_class[cls]
        order = rng.permutation(len(ids))
        for slot, idx in enumerate(order):
            assignment[ids[idx]] = slot % k
    return FoldPlan(k=k, assignment=assignment, seed=seed)


def auc_binary(scores: np.ndarray, positives: np.ndarray) -> float:
    """Mann-Whitney AUC with midranks for ties; in [0, 1]."""
    n_pos = int(positives.sum())
    n_neg = len(positives) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("need both positives and negatives")
    ranks = rankdata(scores, method="average")
    r_pos = float(ranks[positives].sum())
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auc_macro_ovr(scores: ScoreMatrix, labels: np.ndarray) -> float:
    """Unweighted mean of per-class one-vs-rest AUCs over classes present,
    reported as a percentage."""
    labels = np.asarray(labels)
    present = np.unique(labels)
    if len(present) < 2:
        raise SingleClassError("AUC needs at least two classes present")
    per_class = [
        auc_binary(scores.scores[:, c], labels == c) for c in present
    ]
    return 100.0 * float(np.mean(per_class))


@dataclass
class EvalReport:
    name: str
    accuracy: float
    auc: float | None
    confusion: np.ndarray  # rows = true class
    per_fold: list["EvalReport"] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"report: {self.name}",
            f"auc method: {AUC_METHOD}",
            f"accuracy: {self.accuracy:.4f}",
            f"auc: {'n/a' if self.auc is None else f'{self.auc:.2f}'}",
            "confusion (rows = true class):",
        ]
        for row in self.confusion:
            lines.append("  " + " ".join(f"{v:5d}" for v in row))
        for fold in self.per_fold:
            auc_s = "n/a" if fold.auc is None else f"{fold.auc:.2f}"
            lines.append(f"  {fold.name}: accuracy={fold.accuracy:.4f} auc={auc_s}")
        return "\n".join(lines) + "\n"


def _confusion(labels: np.ndarray, predicted: np.ndarray, n_classes: int) -> np.ndarray:
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(labels, predicted):
        confusion[t, p] += 1
    return confusion


def evaluate(
    scores: ScoreMatrix,
    labels: dict[str, int],
    plan: FoldPlan | None = None,
    name: str = "run",
) -> EvalReport:
    """Pooled accuracy/AUC/confusion plus per-fold breakdowns.

    Raises :class:`MissingPredictionError` when a scored protein lacks a
    label or fold assignment.
    """
    for pid in scores.row_ids:
        if pid not in labels:
            raise MissingPredictionError(f"no label for {pid!r}")
        if plan is not None and pid not in plan.assignment:
            raise MissingPredictionError(f"no fold for {pid!r}")
    y = np.array([labels[pid] for pid in scores.row_ids])
    predicted = scores.argmax()
    report = EvalReport(
        name=name,
        accuracy=float((predicted == y).mean()),
        auc=_safe_auc(scores, y),
        confusion=_confusion(y, predicted, scores.n_classes),
    )
    if plan is not None:
        folds = sorted({plan.assignment[pid] for pid in scores.row_ids})
        for f in folds:
            sel = np.array([plan.assignment[pid] == f for pid in scores.row_ids])
            sub = ScoreMatrix(
                tuple(pid for pid, s in zip(scores.row_ids, sel) if s),
                scores.scores[sel],
            )
            report.per_fold.append(
                EvalReport(
                    name=f"fold {f}",
                    accuracy=float((predicted[sel] == y[sel]).mean()),
                    auc=_safe_auc(sub, y[sel]),
                    confusion=_confusion(y[sel], predicted[sel], scores.n_classes),
                )
            )
    return report


def _safe_auc(scores: ScoreMatrix, y: np.ndarray) -> float | None:
    try:
        return auc_macro_ovr(scores, y)
    except SingleClassError:
        return None


# -- score-file interchange ----------------------------------------------------


def write_score_csv(
    path, scores: ScoreMatrix, labels: dict[str, int], plan: FoldPlan | None
) -> None:
    """protein_id, fold, true_class, score_0..score_{k-1}; scores use repr
    so a rerun with identical inputs is byte-identical."""
    n = scores.n_classes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["protein_id", "fold", "true_class"] + [f"score_{c}" for c in range(n)])
        for pid, row in zip(scores.row_ids, scores.scores):
            fold = plan.fold_of(pid) if plan is not None else -1
            writer.writerow([pid, fold, labels[pid]] + [repr(float(v)) for v in row])


def read_score_csv(path) -> tuple[ScoreMatrix, dict[str, int], dict[str, int]]:
    """Returns (scores, labels, fold assignment)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) - 3
        ids: list[str] = []
        rows: list[list[float]] = []
        labels: dict[str, int] = {}
        folds: dict[str, int] = {}
        for rec in reader:
            pid = rec[0]
            ids.append(pid)
            folds[pid] = int(rec[1])
            labels[pid] = int(rec[2])
            rows.append([float(v) for v in rec[3 : 3 + n]])
    return ScoreMatrix(tuple(ids), np.array(rows)), labels, folds


def write_confusion_csv(path, report: EvalReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        n = report.confusion.shape[0]
        writer.writerow(["true\\pred"] + [str(c) for c in range(n)])
        for t in range(n):
            writer.writerow([t] + [int(v) for v in report.confusion[t]])
