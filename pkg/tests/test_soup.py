"""Pool construction and greedy/uniform soup behavior."""

import numpy as np
import pytest

from conftest import LookupEvaluator, cell_checkpoint, make_checkpoint
from soupkit import (
    CandidatePool,
    Checkpoint,
    LabeledDataset,
    MlpEvaluator,
    MlpSpec,
    Snapshot,
    build_candidate_pool,
    greedy_soup,
    parse_soup_report,
    soup_report,
    uniform_soup,
)
from soupkit.errors import EmptyPoolError, EvaluatorFailure, SchemaMismatchError


def snap(rng, epoch, loss, acc, f1) -> Snapshot:
    return Snapshot(
        epoch=epoch, checkpoint=make_checkpoint(rng), loss=loss, accuracy=acc, f1=f1
    )


class TestBuildCandidatePool:
    def test_k_exceeds_count_saturates(self):
        rng = np.random.default_rng(40)
        snaps = [snap(rng, e, 1.0 - e * 0.1, e * 0.1, e * 0.05) for e in range(3)]
        pool = build_candidate_pool(snaps, 8)
        assert pool.size == 3
        assert pool.epoch_ids == [0, 1, 2]

    def test_one_epoch_sweeps_all_metrics(self):
        rng = np.random.default_rng(41)
        snaps = [
            snap(rng, 0, 0.9, 0.2, 0.2),
            snap(rng, 1, 0.1, 0.9, 0.9),  # best loss, accuracy, and f1
            snap(rng, 2, 0.8, 0.3, 0.3),
        ]
        pool = build_candidate_pool(snaps, 1)
        assert pool.size == 1
        assert pool.epoch_ids == [1]
        assert pool.source_tags == ["loss+accuracy+f1"]

    def test_tags_in_metric_order(self):
        rng = np.random.default_rng(42)
        snaps = [
            snap(rng, 0, 0.1, 0.9, 0.1),  # best loss and accuracy
            snap(rng, 1, 0.9, 0.1, 0.9),  # best f1
        ]
        pool = build_candidate_pool(snaps, 1)
        assert pool.source_tags == ["loss+accuracy", "f1"]

    def test_pool_ordered_by_epoch(self):
        rng = np.random.default_rng(43)
        snaps = [
            snap(rng, 9, 0.1, 0.5, 0.5),
            snap(rng, 2, 0.2, 0.6, 0.6),
            snap(rng, 5, 0.3, 0.7, 0.7),
        ]
        pool = build_candidate_pool(snaps, 8)
        assert pool.epoch_ids == [2, 5, 9]

    def test_metric_tie_prefers_lower_epoch(self):
        rng = np.random.default_rng(44)
        snaps = [
            snap(rng, 3, 0.5, 0.5, 0.5),
            snap(rng, 1, 0.5, 0.5, 0.5),
            snap(rng, 2, 0.9, 0.1, 0.1),
        ]
        pool = build_candidate_pool(snaps, 1)
        # epochs 1 and 3 tie on every metric; the lower epoch wins each slot
        assert pool.epoch_ids == [1]
        assert pool.source_tags == ["loss+accuracy+f1"]

    def test_size_bounded_by_three_k(self):
        rng = np.random.default_rng(45)
        snaps = [
            snap(rng, e, *rng.random(3)) for e in range(30)
        ]
        pool = build_candidate_pool(snaps, 8)
        assert pool.size <= 24

    def test_union_matches_bruteforce(self):
        rng = np.random.default_rng(46)
        for _ in range(10):
            metrics = rng.random((30, 3))
            snaps = [snap(rng, e, *metrics[e]) for e in range(30)]
            pool = build_candidate_pool(snaps, 8)
            by_loss = sorted(range(30), key=lambda e: metrics[e][0])[:8]
            by_acc = sorted(range(30), key=lambda e: -metrics[e][1])[:8]
            by_f1 = sorted(range(30), key=lambda e: -metrics[e][2])[:8]
            assert set(pool.epoch_ids) == set(by_loss) | set(by_acc) | set(by_f1)

    def test_empty_snapshot_list(self):
        with pytest.raises(EmptyPoolError, match="empty snapshot list"):
            build_candidate_pool([], 8)

    def test_duplicate_epoch_rejected(self):
        rng = np.random.default_rng(47)
        snaps = [snap(rng, 1, 0.5, 0.5, 0.5), snap(rng, 1, 0.4, 0.6, 0.6)]
        with pytest.raises(ValueError):
            build_candidate_pool(snaps, 8)

    def test_schema_mismatch(self):
        rng = np.random.default_rng(48)
        snaps = [
            snap(rng, 0, 0.5, 0.5, 0.5),
            Snapshot(1, Checkpoint({"other": np.array([1.0])}), 0.4, 0.6, 0.6),
        ]
        with pytest.raises(SchemaMismatchError):
            build_candidate_pool(snaps, 8)

    def test_bad_k(self):
        rng = np.random.default_rng(49)
        with pytest.raises(ValueError):
            build_candidate_pool([snap(rng, 0, 0.5, 0.5, 0.5)], 0)


def pool_of(checkpoints) -> CandidatePool:
    n = len(checkpoints)
    return CandidatePool(
        checkpoints=list(checkpoints),
        epoch_ids=list(range(n)),
        source_tags=[""] * n,
    )


class TestUniformSoup:
    def test_singleton(self):
        x = make_checkpoint(np.random.default_rng(50))
        out = uniform_soup(pool_of([x]))
        for name in x.names():
            assert np.array_equal(out.tensors[name], x.tensors[name])

    def test_three_value_mean(self):
        cps = [cell_checkpoint(v) for v in (0.0, 6.0, 3.0)]
        out = uniform_soup(pool_of(cps))
        assert np.array_equal(out.tensors["w"], [3.0])

    def test_matches_naive_mean_oracle(self):
        rng = np.random.default_rng(51)
        for _ in range(10):
            cps = [make_checkpoint(rng) for _ in range(5)]
            out = uniform_soup(pool_of(cps))
            for name in cps[0].names():
                oracle = np.mean(np.stack([c.tensors[name] for c in cps]), axis=0)
                np.testing.assert_allclose(
                    out.tensors[name], oracle, atol=1e-12, rtol=0.0
                )

    def test_empty_pool_unconstructible(self):
        with pytest.raises(EmptyPoolError):
            pool_of([])


THRESHOLD_SPEC = MlpSpec((1, 2))


def threshold_checkpoint(threshold: float) -> Checkpoint:
    """Predicts class 1 exactly when the single feature exceeds threshold."""
    return Checkpoint(
        {
            "layer0.weight": np.array([[0.0], [1.0]]),
            "layer0.bias": np.array([0.0, -float(threshold)]),
        }
    )


def threshold_dataset() -> LabeledDataset:
    x = np.arange(1.0, 11.0).reshape(-1, 1)
    labels = (x[:, 0] >= 2.0).astype(int)
    return LabeledDataset(x, labels, 2)


class TestGreedySoup:
    def test_singleton_fixed_point(self):
        x = make_checkpoint(np.random.default_rng(52))
        sel, soup = greedy_soup(pool_of([x]), lambda cp, ds: 0.5, None)
        assert sel.selected == [0]
        for name in x.names():
            assert np.array_equal(soup.tensors[name], x.tensors[name])

    def test_good_garbage_fixture(self):
        # thresholds 2.5 and 11 give accuracies 0.9 and 0.1; their mean
        # (threshold 6.75) scores 0.5, so the garbage model is rejected
        good = threshold_checkpoint(2.5)
        garbage = threshold_checkpoint(11.0)
        ds = threshold_dataset()
        calls = []

        def counting_eval(cp, d):
            value = MlpEvaluator(THRESHOLD_SPEC)(cp, d)
            calls.append(value)
            return value

        sel, soup = greedy_soup(pool_of([good, garbage]), counting_eval, ds)
        assert calls == [0.9, 0.1, 0.5]
        assert sel.selected == [0]
        assert [e.accepted for e in sel.trace] == [True, False]
        for name in good.names():
            assert np.array_equal(soup.tensors[name], good.tensors[name])

    def test_tie_is_accepted(self):
        # thresholds 2.5 and 2.9 classify identically (accuracy 0.9), and
        # so does their mean at 2.7; the non-strict guard admits B
        a = threshold_checkpoint(2.5)
        b = threshold_checkpoint(2.9)
        ds = threshold_dataset()
        sel, _ = greedy_soup(pool_of([a, b]), MlpEvaluator(THRESHOLD_SPEC), ds)
        assert sel.selected == [0, 1]
        assert [e.accuracy for e in sel.trace] == [0.9, 0.9]

    def test_trace_covers_every_candidate(self):
        table = {0.0: 0.5, 2.0: 0.3, 64.0: 0.2, 1.0: 0.6, 32.0: 0.4, 22.0: 0.7}
        pool = pool_of([cell_checkpoint(v) for v in (0.0, 2.0, 64.0)])
        sel, _ = greedy_soup(pool, LookupEvaluator(table), None)
        assert [e.candidate for e in sel.trace] == [0, 1, 2]
        assert len(sel.selected) == 3

    def test_scan_order_changes_selection_without_ties(self):
        # all six accuracies are pairwise distinct, yet the selected SET
        # depends on scan order: sequential acceptance is path-dependent,
        # so order-invariance only holds for 2-candidate pools
        table = {0.0: 0.5, 2.0: 0.3, 64.0: 0.2, 1.0: 0.6, 32.0: 0.4, 22.0: 0.7}
        a, b, c = (cell_checkpoint(v) for v in (0.0, 2.0, 64.0))
        sel_abc, _ = greedy_soup(pool_of([a, b, c]), LookupEvaluator(table), None)
        sel_acb, _ = greedy_soup(pool_of([a, c, b]), LookupEvaluator(table), None)
        values_abc = {(0.0, 2.0, 64.0)[i] for i in sel_abc.selected}
        values_acb = {(0.0, 64.0, 2.0)[i] for i in sel_acb.selected}
        assert values_abc == {0.0, 2.0, 64.0}
        assert values_acb == {0.0, 2.0}

    def test_two_candidate_order_invariance(self):
        rng = np.random.default_rng(53)
        spec = MlpSpec((3, 4, 2))
        from soupkit import random_checkpoint
        from soupkit.synth import make_dataset

        checked = 0
        while checked < 8:
            a = random_checkpoint(spec, rng)
            b = random_checkpoint(spec, rng)
            teacher = random_checkpoint(spec, rng)
            val = make_dataset(teacher, spec, rng, 40)
            ev = MlpEvaluator(spec)
            if ev(a, val) == ev(b, val):
                continue  # invariance is only promised away from ties
            sel_ab, _ = greedy_soup(pool_of([a, b]), ev, val)
            sel_ba, _ = greedy_soup(pool_of([b, a]), ev, val)
            names_ab = {("a", "b")[i] for i in sel_ab.selected}
            names_ba = {("b", "a")[i] for i in sel_ba.selected}
            assert names_ab == names_ba
            checked += 1

    def test_init_is_argmax_under_any_order(self):
        table = {1.0: 0.4, 2.0: 0.9, 4.0: 0.1, 1.5: 0.2, 3.0: 0.3, 2.5: 0.1,
                 7.0 / 3.0: 0.0}
        cps = {v: cell_checkpoint(v) for v in (1.0, 2.0, 4.0)}
        import itertools

        for perm in itertools.permutations((1.0, 2.0, 4.0)):
            ev = LookupEvaluator(dict(table))
            sel, _ = greedy_soup(pool_of([cps[v] for v in perm]), ev, None)
            best_value = perm[sel.selected[0]]
            assert best_value == 2.0
            assert sel.trace[0].candidate == sel.selected[0]
            assert sel.trace[0].accepted

    def test_sorted_mode_scans_by_descending_solo(self):
        table = {1.0: 0.4, 2.0: 0.9, 4.0: 0.1, 1.5: 0.2, 3.0: 0.3, 2.5: 0.1,
                 7.0 / 3.0: 0.0}
        pool = pool_of([cell_checkpoint(v) for v in (1.0, 2.0, 4.0)])
        sel, _ = greedy_soup(pool, LookupEvaluator(dict(table)), None, order="sorted")
        assert [e.candidate for e in sel.trace] == [1, 0, 2]

    def test_unknown_order_rejected(self):
        pool = pool_of([cell_checkpoint(1.0)])
        with pytest.raises(ValueError):
            greedy_soup(pool, lambda cp, ds: 0.5, None, order="best-first")

    def test_dominance_exact(self):
        rng = np.random.default_rng(54)
        spec = MlpSpec((3, 5, 3))
        from soupkit import random_checkpoint
        from soupkit.synth import make_dataset, perturbed

        for _ in range(10):
            teacher = random_checkpoint(spec, rng)
            cps = [perturbed(teacher, rng, float(rng.uniform(0.05, 0.8)))
                   for _ in range(int(rng.integers(2, 7)))]
            val = make_dataset(teacher, spec, rng, 50)
            ev = MlpEvaluator(spec)
            _, soup = greedy_soup(pool_of(cps), ev, val)
            assert ev(soup, val) >= max(ev(cp, val) for cp in cps)

    def test_out_of_range_evaluator_value(self):
        pool = pool_of([cell_checkpoint(1.0)])
        with pytest.raises(EvaluatorFailure):
            greedy_soup(pool, lambda cp, ds: 1.5, None)

    def test_evaluator_exception_propagates(self):
        pool = pool_of([cell_checkpoint(1.0)])

        class Boom(RuntimeError):
            pass

        def exploding(cp, ds):
            raise Boom("no")

        with pytest.raises(Boom):
            greedy_soup(pool, exploding, None)


class TestSoupReport:
    def _run(self):
        table = {0.0: 0.5, 2.0: 0.3, 64.0: 0.2, 1.0: 0.6, 32.0: 0.4, 22.0: 0.7}
        pool = pool_of([cell_checkpoint(v) for v in (0.0, 2.0, 64.0)])
        sel, _ = greedy_soup(pool, LookupEvaluator(table), None)
        return sel, pool

    def test_row_and_accept_counts(self):
        sel, pool = self._run()
        doc = soup_report(sel, pool)
        assert len(doc["candidates"]) == 3
        assert sum(1 for r in doc["candidates"] if r["accepted"]) == 3
        assert doc["final_size"] == 3
        assert doc["pool_size"] == 3

    def test_single_row(self):
        pool = pool_of([cell_checkpoint(1.0)])
        sel, _ = greedy_soup(pool, lambda cp, ds: 0.5, None)
        doc = soup_report(sel, pool)
        assert len(doc["candidates"]) == 1
        assert doc["candidates"][0]["accepted"] is True

    def test_round_trip(self):
        sel, pool = self._run()
        assert parse_soup_report(soup_report(sel, pool)) == sel

    def test_index_out_of_range(self):
        sel, pool = self._run()
        sel.selected.append(99)
        with pytest.raises(IndexError):
            soup_report(sel, pool)
