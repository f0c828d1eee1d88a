import numpy as np
import pytest

from protview.errors import MisalignedMembersError, OrphanViewError
from protview.fusion import EnsembleSpec, ScoreMatrix, average_views, oracle_accuracy, sum_rule_fuse


def _matrix(rows, ids=None):
    rows = np.asarray(rows, dtype=np.float64)
    ids = tuple(ids) if ids else tuple(f"p{i}" for i in range(len(rows)))
    return ScoreMatrix(ids, rows)


def _random_prob_rows(rng, n, k):
    raw = rng.random((n, k)) + 1e-9
    return raw / raw.sum(axis=1, keepdims=True)


def test_score_matrix_validation():
    with pytest.raises(ValueError):
        _matrix([[0.6, 0.6]])
    with pytest.raises(ValueError):
        _matrix([[1.2, -0.2]])


def test_average_views_examples():
    views = _matrix([[1.0, 0.0], [0.0, 1.0]], ids=["a|v0", "a|v1"])
    grouping = {"a|v0": "a", "a|v1": "a"}
    out = average_views(views, grouping)
    assert out.row_ids == ("a",)
    assert np.allclose(out.scores, [[0.5, 0.5]])

    identical = _matrix([[0.7, 0.3]] * 125, ids=[f"a|{i}" for i in range(125)])
    out = average_views(identical, {f"a|{i}": "a" for i in range(125)})
    assert np.allclose(out.scores, [[0.7, 0.3]])

    three = _matrix([[0.6, 0.4], [0.2, 0.8], [0.7, 0.3]], ids=["a|0", "a|1", "a|2"])
    out = average_views(three, {f"a|{i}": "a" for i in range(3)})
    assert np.allclose(out.scores, [[0.5, 0.5]])


def test_average_views_orphan():
    views = _matrix([[1.0, 0.0]], ids=["a|v0"])
    with pytest.raises(OrphanViewError):
        average_views(views, {})


def test_average_views_permutation_invariant_and_idempotent():
    rng = np.random.default_rng(0)
    rows = _random_prob_rows(rng, 9, 3)
    ids = [f"{pid}|{v}" for pid in "abc" for v in range(3)]
    grouping = {vid: vid.split("|")[0] for vid in ids}
    base = average_views(_matrix(rows, ids), grouping)
    perm = rng.permutation(9)
    shuffled = average_views(_matrix(rows[perm], [ids[i] for i in perm]), grouping)
    for pid in "abc":
        i = base.row_ids.index(pid)
        j = shuffled.row_ids.index(pid)
        assert np.allclose(base.scores[i], shuffled.scores[j], atol=1e-12)


def test_sum_rule_single_member_identity():
    member = _matrix([[0.2, 0.8], [0.9, 0.1]])
    fused = sum_rule_fuse([member])
    assert np.array_equal(fused.scores, member.scores)


def test_sum_rule_tie_breaks_low_index():
    a = _matrix([[1.0, 0.0, 0.0]])
    b = _matrix([[0.0, 1.0, 0.0]])
    fused = sum_rule_fuse([a, b])
    assert np.allclose(fused.scores, [[0.5, 0.5, 0.0]])
    assert fused.argmax()[0] == 0


def test_sum_rule_three_members_hand_sum():
    members = [
        _matrix([[0.35, 0.25, 0.40]]),
        _matrix([[0.25, 0.35, 0.40]]),
        _matrix([[0.30, 0.30, 0.40]]),
    ]
    fused = sum_rule_fuse(members)
    assert np.allclose(fused.scores, [[0.3, 0.3, 0.4]])
    assert fused.argmax()[0] == 2


def test_sum_rule_misaligned():
    a = _matrix([[1.0, 0.0]], ids=["x"])
    b = _matrix([[1.0, 0.0]], ids=["y"])
    with pytest.raises(MisalignedMembersError):
        sum_rule_fuse([a, b])


def test_sum_rule_argmax_invariant_under_shared_rescale():
    rng = np.random.default_rng(1)
    for _ in range(50):
        members = [_matrix(_random_prob_rows(rng, 10, 4)) for _ in range(3)]
        fused = sum_rule_fuse(members).argmax()
        c = float(rng.uniform(0.1, 9.0))
        scaled_mean = np.mean([c * m.scores for m in members], axis=0)
        assert np.array_equal(scaled_mean.argmax(axis=1), fused)


def test_oracle_examples():
    perfect = _matrix([[1.0, 0.0], [0.0, 1.0]])
    sloppy = _matrix([[0.5, 0.5], [0.9, 0.1]])
    labels = np.array([0, 1])
    assert oracle_accuracy([perfect, sloppy], labels) == 1.0

    n = 10
    rows = np.zeros((n, 2))
    rows[:, 0] = 1.0  # all predict class 0
    labels = np.zeros(n, dtype=int)
    labels[3] = 1  # one sample the pool gets wrong
    member = _matrix(rows)
    assert oracle_accuracy([member, member], labels) == 0.9


def test_oracle_equals_bruteforce_disjunction():
    rng = np.random.default_rng(2)
    members = [_matrix(_random_prob_rows(rng, 50, 4)) for _ in range(3)]
    labels = rng.integers(0, 4, 50)
    expected = np.mean(
        [any(m.scores[i].argmax() == labels[i] for m in members) for i in range(50)]
    )
    assert oracle_accuracy(members, labels) == pytest.approx(expected, abs=1e-12)


def test_oracle_dominates_members_1000_pools():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        n = int(rng.integers(3, 20))
        k = int(rng.integers(2, 6))
        pool = [_matrix(_random_prob_rows(rng, n, k)) for _ in range(rng.integers(1, 5))]
        labels = rng.integers(0, k, n)
        oracle = oracle_accuracy(pool, labels)
        for member in pool:
            assert oracle >= (member.argmax() == labels).mean() - 1e-12


def test_ensemble_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec("empty", ())
    with pytest.raises(ValueError):
        EnsembleSpec("dup", ("a", "a"))
    assert EnsembleSpec("top2", ("ribbons", "strands")).members == ("ribbons", "strands")
