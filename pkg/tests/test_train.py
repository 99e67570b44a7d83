import numpy as np
import pytest

from temploc import (
    ModelParams,
    PartWeights,
    TrainConfig,
    TrainExample,
    TrainingDiverged,
    Window,
    cls_loss,
    evaluate_example,
    init_params,
    loc_loss,
    score_frames,
    subgradient,
    train,
)
from temploc.model import PART_END, PART_MIDDLE, PART_START
from temploc.train import _jitter_window, dataset_loss

import oracles


PLAIN = TrainConfig(middle_balancing=False, boundary_jitter=False)


def random_example(rng, n_range=(6, 24), d=5, num_classes=3):
    n = int(rng.integers(*n_range))
    feats = rng.normal(size=(n, d))
    gs = int(rng.integers(1, n))
    gt = Window(gs, int(rng.integers(gs + 1, n + 1)))
    return TrainExample(feats, gt, int(rng.integers(0, num_classes)), id=f"ex{n}")


def brute_loc_loss(example, params, config=PLAIN):
    scores = score_frames(params, example.features, example.class_id)
    fs, fm, fe = (scores.start_scores.tolist(), scores.middle_scores.tolist(), scores.end_scores.tolist())
    value, _, _ = oracles.brute_loss_augmented_argmax(fs, fm, fe, (example.gt.start, example.gt.end))
    gt_score = oracles.score_window(fs, fm, fe, example.gt.start, example.gt.end)
    return max(0.0, value - gt_score)


def brute_cls_loss(example, params, config=PLAIN):
    if params.num_classes < 2:
        return 0.0
    best = -np.inf
    for c in range(params.num_classes):
        if c == example.class_id:
            continue
        scores = score_frames(params, example.features, c)
        fs, fm, fe = (scores.start_scores.tolist(), scores.middle_scores.tolist(), scores.end_scores.tolist())
        for s, e in oracles.enumerate_windows(len(fs)):
            best = max(best, oracles.score_window(fs, fm, fe, s, e))
    scores = score_frames(params, example.features, example.class_id)
    fs, fm, fe = (scores.start_scores.tolist(), scores.middle_scores.tolist(), scores.end_scores.tolist())
    gt_score = oracles.score_window(fs, fm, fe, example.gt.start, example.gt.end)
    margin = example.gt.length if config.margin_mode == "gt-length" else config.margin_value
    return max(0.0, margin + best - gt_score) / (params.num_classes - 1)


class TestLocLoss:
    def test_zero_params_equals_max_delta(self, rng):
        for _ in range(20):
            ex = random_example(rng, num_classes=2)
            params = init_params(2, 5, scale=0.0)
            loss, witness = loc_loss(ex, params, PLAIN)
            n = ex.features.shape[0]
            expected = max(
                oracles.task_loss((ex.gt.start, ex.gt.end), w)
                for w in oracles.enumerate_windows(n)
                if w != (ex.gt.start, ex.gt.end)
            )
            assert loss == expected
            assert witness.window != ex.gt

    def test_hinge_floor(self):
        # A scorer with a huge margin on the ground truth drives the hinge to 0.
        n = 6
        feats = np.eye(n)
        gt = Window(2, 4)
        weights = np.zeros((1, 3, n))
        weights[0, PART_START, 1] = 100.0
        weights[0, PART_MIDDLE, 2] = 100.0
        weights[0, PART_END, 3] = 100.0
        params = ModelParams(1, n, weights, np.zeros((1, 3)))
        ex = TrainExample(feats, gt, 0)
        loss, _ = loc_loss(ex, params, PLAIN)
        assert loss == 0.0

    def test_matches_brute_force(self, rng):
        for _ in range(30):
            ex = random_example(rng)
            params = init_params(3, 5, seed=int(rng.integers(1000)), scale=0.5)
            loss, _ = loc_loss(ex, params, PLAIN)
            assert loss == pytest.approx(brute_loc_loss(ex, params), rel=1e-9, abs=1e-9)


class TestClsLoss:
    def test_single_class_is_zero(self, rng):
        ex = random_example(rng, num_classes=1)
        loss, witness = cls_loss(ex, init_params(1, 5, scale=0.3), PLAIN)
        assert loss == 0.0 and witness is None

    def test_prefactor(self, rng):
        # Zero params: hinge = margin = |gt|, scaled by 1/(C-1).
        ex = random_example(rng, num_classes=2)
        ex = TrainExample(ex.features, ex.gt, 0, id="fixed-class")
        for C, scale in [(2, 1.0), (3, 0.5)]:
            loss, _ = cls_loss(ex, init_params(C, 5, scale=0.0), PLAIN)
            assert loss == pytest.approx(scale * ex.gt.length)

    def test_hinge_floor(self):
        n = 6
        feats = np.eye(n)
        weights = np.zeros((2, 3, n))
        weights[0, PART_START, 1] = 100.0
        weights[0, PART_END, 3] = 100.0
        params = ModelParams(2, n, weights, np.zeros((2, 3)))
        ex = TrainExample(feats, Window(2, 4), 0)
        loss, _ = cls_loss(ex, params, PLAIN)
        assert loss == 0.0

    def test_matches_brute_force(self, rng):
        for _ in range(25):
            ex = random_example(rng)
            params = init_params(3, 5, seed=int(rng.integers(1000)), scale=0.5)
            loss, _ = cls_loss(ex, params, PLAIN)
            assert loss == pytest.approx(brute_cls_loss(ex, params), rel=1e-9, abs=1e-9)

    def test_total_combines_losses(self, rng):
        ex = random_example(rng)
        params = init_params(3, 5, seed=3, scale=0.4)
        config = TrainConfig(lambda_cls=0.7, middle_balancing=False)
        report = evaluate_example(ex, params, config)
        assert report.total == report.loc_loss + 0.7 * report.cls_loss


class TestSubgradient:
    def test_inactive_hinges_zero_gradient(self):
        n = 6
        feats = np.eye(n)
        weights = np.zeros((2, 3, n))
        weights[0, PART_START, 1] = 100.0
        weights[0, PART_MIDDLE, 2] = 100.0
        weights[0, PART_END, 3] = 100.0
        params = ModelParams(2, n, weights, np.zeros((2, 3)))
        ex = TrainExample(feats, Window(2, 4), 0)
        grad = subgradient(ex, params, PLAIN)
        assert not grad.weights.any()
        assert not grad.biases.any()

    def test_shifted_witness_support(self):
        # Force the witness to be the ground truth shifted right by one; the
        # gradient then lives on the symmetric-difference frames (start/end
        # heads) and the boundary middle frames, everything else cancelling.
        n = 10
        feats = np.eye(n)
        gt = Window(3, 6)
        shifted = Window(4, 7)
        weights = np.zeros((1, 3, n))
        weights[0, PART_START, shifted.start - 1] = 50.0
        weights[0, PART_MIDDLE, shifted.start : shifted.end - 1] = 50.0
        weights[0, PART_END, shifted.end - 1] = 50.0
        params = ModelParams(1, n, weights, np.zeros((1, 3)))
        ex = TrainExample(feats, gt, 0)
        _, witness = loc_loss(ex, params, PLAIN)
        assert witness.window == shifted
        grad = subgradient(ex, params, PLAIN)
        expected_start = np.zeros(n)
        expected_start[shifted.start - 1] = 1.0
        expected_start[gt.start - 1] = -1.0
        expected_mid = np.zeros(n)
        expected_mid[shifted.end - 2] = 1.0  # witness-only middle frame
        expected_mid[gt.start] = -1.0  # gt-only middle frame
        expected_end = np.zeros(n)
        expected_end[shifted.end - 1] = 1.0
        expected_end[gt.end - 1] = -1.0
        assert np.array_equal(grad.weights[0, PART_START], expected_start)
        assert np.array_equal(grad.weights[0, PART_MIDDLE], expected_mid)
        assert np.array_equal(grad.weights[0, PART_END], expected_end)
        assert np.array_equal(grad.biases, np.zeros((1, 3)))

    def test_middle_balancing_scales_middle_rows(self):
        n = 10
        feats = np.eye(n)
        gt = Window(3, 6)
        weights = np.zeros((1, 3, n))
        weights[0, PART_START, 3] = 50.0
        weights[0, PART_MIDDLE, 4:6] = 50.0
        weights[0, PART_END, 6] = 50.0
        params = ModelParams(1, n, weights, np.zeros((1, 3)))
        ex = TrainExample(feats, gt, 0)
        plain = subgradient(ex, params, PLAIN)
        balanced = subgradient(ex, params, TrainConfig(middle_balancing=True))
        # witness and gt both have length 4 here, so balancing divides the
        # middle rows by 4 and leaves start/end rows alone
        assert np.allclose(balanced.weights[0, PART_MIDDLE], plain.weights[0, PART_MIDDLE] / 4)
        assert np.array_equal(balanced.weights[0, PART_START], plain.weights[0, PART_START])
        assert np.array_equal(balanced.weights[0, PART_END], plain.weights[0, PART_END])

    def test_matches_finite_differences(self, rng):
        checked = 0
        trials = 0
        while checked < 12 and trials < 200:
            trials += 1
            ex = random_example(rng, d=4)
            params = init_params(3, 4, seed=int(rng.integers(10_000)), scale=0.5)
            ok, analytic, numeric = directional_check(ex, params, PLAIN, rng)
            if not ok:
                continue
            checked += 1
            scale = max(1.0, abs(numeric))
            assert abs(analytic - numeric) / scale < 1e-4
        assert checked == 12


def directional_check(ex, params, config, rng, h=1e-5):
    """Central finite difference along a random direction.

    Returns (stable, analytic, numeric); stable is False when a witness or
    hinge-activity flip inside [-h, +h] makes the comparison meaningless.
    """
    dw = rng.normal(size=params.weights.shape)
    db = rng.normal(size=params.biases.shape)
    norm = np.sqrt((dw**2).sum() + (db**2).sum())
    dw /= norm
    db /= norm

    def probe(t):
        shifted = ModelParams(params.num_classes, params.dim, params.weights + t * dw, params.biases + t * db)
        return evaluate_example(ex, shifted, config)

    lo, mid, hi = probe(-h), probe(0.0), probe(h)

    def signature(rep):
        return (
            rep.loc_loss > 0,
            None if rep.witness_loc is None else (rep.witness_loc.window, rep.loc_loss > 0),
            rep.cls_loss > 0,
            None if rep.witness_cls is None else (rep.witness_cls.window, rep.witness_cls.class_id),
        )

    if not (signature(lo) == signature(mid) == signature(hi)):
        return False, 0.0, 0.0
    grad = subgradient(ex, params, config)
    analytic = float((grad.weights * dw).sum() + (grad.biases * db).sum())
    numeric = (hi.total - lo.total) / (2 * h)
    return True, analytic, numeric


class TestTrainLoop:
    def small_dataset(self, rng, count=6):
        return [random_example(rng, n_range=(8, 16), d=6, num_classes=2) for _ in range(count)]

    def test_zero_learning_rate_keeps_params(self, rng):
        dataset = self.small_dataset(rng)
        params = init_params(2, 6, seed=5, scale=0.2)
        config = TrainConfig(learning_rate=0.0, epochs=3, middle_balancing=False)
        out, history = train(dataset, params, config)
        assert np.array_equal(out.weights, params.weights)
        assert np.array_equal(out.biases, params.biases)
        assert len({h.total for h in history}) == 1

    def test_deterministic_given_seed(self, rng):
        dataset = self.small_dataset(rng)
        params = init_params(2, 6, seed=5, scale=0.2)
        config = TrainConfig(learning_rate=0.05, epochs=4, seed=9, boundary_jitter=True)
        out1, hist1 = train(dataset, params, config)
        out2, hist2 = train(dataset, params, config)
        assert np.array_equal(out1.weights, out2.weights)
        assert np.array_equal(out1.biases, out2.biases)
        assert hist1 == hist2

    def test_input_params_not_mutated(self, rng):
        dataset = self.small_dataset(rng)
        params = init_params(2, 6, seed=5, scale=0.2)
        before = params.weights.copy()
        train(dataset, params, TrainConfig(learning_rate=0.05, epochs=2))
        assert np.array_equal(params.weights, before)

    def test_divergence_guard(self, rng):
        dataset = self.small_dataset(rng)
        params = init_params(2, 6, seed=5, scale=0.2)
        with pytest.raises(TrainingDiverged):
            train(dataset, params, TrainConfig(learning_rate=1e8, epochs=60))

    def test_loss_decreases_on_easy_problem(self, rng):
        dataset = self.small_dataset(rng, count=10)
        params = init_params(2, 6, seed=1, scale=0.1)
        _, history = train(dataset, params, TrainConfig(learning_rate=0.03, epochs=25))
        assert history[-1].total < history[0].total

    def test_rejects_mismatched_dims(self, rng):
        dataset = self.small_dataset(rng)
        with pytest.raises(ValueError):
            train(dataset, init_params(2, 7, scale=0.1), TrainConfig())
        with pytest.raises(ValueError):
            train([], init_params(2, 6), TrainConfig())

    def test_dataset_loss_threading_deterministic(self, rng):
        dataset = self.small_dataset(rng)
        params = init_params(2, 6, seed=2, scale=0.3)
        serial = dataset_loss(dataset, params, PLAIN, threads=1)
        threaded = dataset_loss(dataset, params, PLAIN, threads=4)
        assert serial == threaded


class TestJitter:
    def test_bounds_and_length(self, rng):
        gt = Window(11, 30)  # length 20, slack 2 per side
        seen_starts, seen_ends = set(), set()
        for _ in range(200):
            w = _jitter_window(gt, rng)
            assert 11 <= w.start <= 12
            assert 29 <= w.end <= 30
            assert w.length >= 2
            seen_starts.add(w.start)
            seen_ends.add(w.end)
        assert seen_starts == {11, 12}
        assert seen_ends == {29, 30}

    def test_short_window_fixed(self, rng):
        gt = Window(4, 5)
        for _ in range(20):
            assert _jitter_window(gt, rng) == gt
