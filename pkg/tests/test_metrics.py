import itertools

import numpy as np
import pytest

from echoadapt.errors import InvalidInputError, PairingError, ParameterError, ShapeMismatchError
from echoadapt.imgio import write_binary_mask
from echoadapt.metrics import BinaryMask, EvalReport, dice, evaluate_batch, threshold
from echoadapt.spectral import Image2D

EPS = 1e-6


def _mask(bits, shape=(2, 2)):
    return BinaryMask(np.array(bits).reshape(shape))


def _set_dice(a, b, eps):
    """Literal set-cardinality evaluation over coordinate sets."""
    sa = {(i, j) for i, row in enumerate(a) for j, v in enumerate(row) if v}
    sb = {(i, j) for i, row in enumerate(b) for j, v in enumerate(row) if v}
    return (2 * len(sa & sb) + eps) / (len(sa) + len(sb) + eps)


def _all_2x2_masks():
    return [np.array(bits).reshape(2, 2) for bits in itertools.product((0, 1), repeat=4)]


class TestDice:
    def test_perfect_overlap_is_one(self):
        m = _mask([1, 0, 1, 1])
        assert dice(m, m, EPS) == 1.0

    def test_both_empty_epsilon_rescue(self):
        empty = _mask([0, 0, 0, 0])
        assert dice(empty, empty, EPS) == 1.0

    def test_hand_counted_half_overlap(self):
        s = _mask([1, 1, 1, 1, 0, 0, 0, 0], shape=(2, 4))
        s_hat = _mask([1, 1, 0, 0, 1, 1, 0, 0], shape=(2, 4))
        expected = (2 * 2 + EPS) / (4 + 4 + EPS)
        assert abs(dice(s, s_hat, EPS) - expected) < 1e-15
        assert abs(dice(s, s_hat, EPS) - 0.5) < 1e-7

    def test_exhaustive_agreement_with_set_brute_force(self):
        for a in _all_2x2_masks():
            for b in _all_2x2_masks():
                got = dice(BinaryMask(a), BinaryMask(b), EPS)
                want = _set_dice(a.tolist(), b.tolist(), EPS)
                assert abs(got - want) < 1e-15

    def test_symmetry_exact(self):
        for a in _all_2x2_masks():
            for b in _all_2x2_masks():
                assert dice(BinaryMask(a), BinaryMask(b), EPS) == dice(
                    BinaryMask(b), BinaryMask(a), EPS
                )

    def test_range_and_identity_condition(self):
        for a in _all_2x2_masks():
            for b in _all_2x2_masks():
                score = dice(BinaryMask(a), BinaryMask(b), EPS)
                assert 0.0 < score <= 1.0
                assert (score == 1.0) == np.array_equal(a, b)

    def test_correct_pixel_never_decreases_score(self):
        for a in _all_2x2_masks():
            for b in _all_2x2_masks():
                base = dice(BinaryMask(a), BinaryMask(b), EPS)
                for i in range(2):
                    for j in range(2):
                        if a[i, j] == 0 and b[i, j] == 0:
                            a2, b2 = a.copy(), b.copy()
                            a2[i, j] = b2[i, j] = 1
                            assert dice(BinaryMask(a2), BinaryMask(b2), EPS) >= base

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatchError):
            dice(_mask([0, 0, 0, 0]), _mask([0, 0], shape=(1, 2)))

    def test_nonpositive_epsilon_rejected(self):
        m = _mask([1, 0, 0, 1])
        with pytest.raises(ParameterError):
            dice(m, m, 0.0)

    def test_mask_must_be_binary(self):
        with pytest.raises(InvalidInputError):
            BinaryMask(np.array([[0.5, 0.0], [1.0, 0.0]]))


class TestThreshold:
    def test_all_zeros(self):
        assert np.all(threshold(Image2D(np.zeros((3, 3)))).data == 0)

    def test_all_ones_default_threshold(self):
        assert np.all(threshold(Image2D(np.ones((3, 3)))).data == 1)

    def test_checkerboard(self):
        board = np.indices((4, 4)).sum(axis=0) % 2
        img = Image2D(np.where(board, 0.6, 0.4))
        assert np.array_equal(threshold(img, 0.5).data, board.astype(np.uint8))

    def test_threshold_is_strict(self):
        img = Image2D(np.full((2, 2), 0.5))
        assert np.all(threshold(img, 0.5).data == 0)

    def test_out_of_range_rejected(self):
        with pytest.raises(ParameterError):
            threshold(Image2D(np.zeros((2, 2))), 1.5)


class TestEvaluateBatch:
    def _write_pairs(self, tmp_path, pairs):
        pred = tmp_path / "pred"
        gt = tmp_path / "gt"
        pred.mkdir()
        gt.mkdir()
        for name, (p, g) in pairs.items():
            write_binary_mask(pred / name, np.asarray(p))
            write_binary_mask(gt / name, np.asarray(g))
        return pred, gt

    def test_identical_directories_score_one(self, tmp_path):
        rng = np.random.default_rng(42)
        masks = {f"m{i}.png": (rng.random((8, 8)) > 0.5) for i in range(3)}
        pred, gt = self._write_pairs(tmp_path, {k: (v, v) for k, v in masks.items()})
        report = evaluate_batch(pred, gt, EPS)
        assert report.scores == [1.0, 1.0, 1.0]
        assert report.mean == 1.0

    def test_empty_prediction_scores_epsilon_over_k(self, tmp_path):
        gt_mask = np.zeros((4, 4))
        gt_mask[:2, :2] = 1  # k = 4
        pred, gt = self._write_pairs(tmp_path, {"a.png": (np.zeros((4, 4)), gt_mask)})
        report = evaluate_batch(pred, gt, EPS)
        assert abs(report.scores[0] - EPS / (4 + EPS)) < 1e-18

    def test_mean_is_arithmetic_mean_of_hand_built_pairs(self, tmp_path):
        full = np.ones((2, 2))
        half_a = np.array([[1, 1], [0, 0]])
        half_b = np.array([[1, 0], [1, 0]])
        empty = np.zeros((2, 2))
        pred, gt = self._write_pairs(
            tmp_path,
            {"x.png": (full, full), "y.png": (half_a, half_b), "z.png": (empty, full)},
        )
        report = evaluate_batch(pred, gt, EPS)
        expected = [1.0, (2 * 1 + EPS) / (2 + 2 + EPS), EPS / (4 + EPS)]
        assert np.allclose(sorted(report.scores), sorted(expected), atol=1e-15)
        assert abs(report.mean - np.mean(expected)) < 1e-12

    def test_orphan_filenames_rejected(self, tmp_path):
        pred, gt = self._write_pairs(tmp_path, {"a.png": (np.ones((2, 2)), np.ones((2, 2)))})
        write_binary_mask(gt / "extra.png", np.ones((2, 2)))
        with pytest.raises(PairingError, match="extra.png"):
            evaluate_batch(pred, gt, EPS)

    def test_ordering_is_stable(self, tmp_path):
        ones = np.ones((2, 2))
        pred, gt = self._write_pairs(
            tmp_path, {"c.png": (ones, ones), "a.png": (ones, ones), "b.png": (ones, ones)}
        )
        report = evaluate_batch(pred, gt, EPS)
        assert report.sample_ids == ["a.png", "b.png", "c.png"]


class TestEvalReport:
    def test_aggregates_recomputable_from_scores(self):
        report = EvalReport.from_scores(["a", "b", "c"], [1.0, 0.5, 0.25])
        assert report.mean == np.mean([1.0, 0.5, 0.25])
        assert report.median == 0.5
        assert report.std == np.std([1.0, 0.5, 0.25])

    def test_json_roundtrip(self):
        report = EvalReport.from_scores(["a", "b"], [0.75, 0.5], epsilon=1e-5)
        assert EvalReport.from_json(report.to_json()) == report

    def test_table_has_one_row_per_sample(self):
        report = EvalReport.from_scores(["a", "b"], [1.0, 1.0])
        lines = report.to_table().strip().splitlines()
        assert len(lines) == 1 + 2 + 3
