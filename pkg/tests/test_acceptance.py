"""Acceptance gate: ten checks, one pass/fail line each.

Each criterion runs inside the `criterion` context manager, which prints
its verdict to the real stdout (bypassing capture) and enforces the
stated runtime budget. Oracles here are deliberately independent,
loop-level reimplementations, not calls back into the library.
"""

import math
import shutil
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from conftest import ACCEPTANCE_VERDICTS, random_simplex_rows
from e2e_pipeline import OUTPUT_FILES, run_pipeline
from soupkit import (
    CandidatePool,
    Checkpoint,
    DistanceMatrix,
    MlpEvaluator,
    MlpSpec,
    PredictionMatrix,
    build_candidate_pool,
    classical_mds,
    distance_matrix,
    format_delta,
    forward_logits,
    greedy_soup,
    linear_combine,
    macro_metrics,
    select_best_checkpoint,
    soft_vote,
    stress,
    sym_cross_entropy,
    uniform_soup,
)
from soupkit.metrics import MetricsReport
from soupkit.soup import Snapshot
from soupkit.synth import make_dataset, make_snapshots, random_checkpoint

FIXTURE = Path(__file__).resolve().parent / "fixtures" / "e2e"


@contextmanager
def criterion(num: int, label: str, limit_s: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        elapsed = time.perf_counter() - start
        ACCEPTANCE_VERDICTS.append(
            f"[FAIL] criterion {num}: {label} ({elapsed:.2f}s)"
        )
        raise
    elapsed = time.perf_counter() - start
    verdict = "PASS" if elapsed < limit_s else "FAIL"
    ACCEPTANCE_VERDICTS.append(
        f"[{verdict}] criterion {num}: {label} ({elapsed:.2f}s, budget {limit_s:g}s)"
    )
    assert elapsed < limit_s, f"criterion {num} over budget: {elapsed:.2f}s"


def test_criterion_1_greedy_dominance():
    with criterion(1, "greedy soup dominates best single candidate", 30.0):
        rng = np.random.default_rng(101)
        for trial in range(200):
            hidden = (5,) if trial % 2 else ()
            spec = MlpSpec((4, *hidden, 3))
            teacher = random_checkpoint(spec, rng)
            val = make_dataset(teacher, spec, rng, 60)
            t = int(rng.integers(2, 11))
            snaps = make_snapshots(teacher, spec, val, rng, t)
            pool = CandidatePool(
                checkpoints=[s.checkpoint for s in snaps],
                epoch_ids=[s.epoch for s in snaps],
                source_tags=["" for _ in snaps],
            )
            ev = MlpEvaluator(spec)
            _, soup = greedy_soup(pool, ev, val)
            soup_acc = ev(soup, val)
            best_single = max(ev(cp, val) for cp in pool.checkpoints)
            assert soup_acc >= best_single, (
                f"trial {trial}: soup {soup_acc} < best single {best_single}"
            )


def test_criterion_2_uniform_soup_oracle():
    with criterion(2, "uniform soup equals the naive per-element mean", 5.0):
        rng = np.random.default_rng(102)
        for trial in range(100):
            t = int(rng.integers(1, 9))
            shapes = {
                "a.weight": (int(rng.integers(1, 5)), int(rng.integers(1, 5))),
                "b.bias": (int(rng.integers(1, 7)),),
            }
            cps = [
                Checkpoint(
                    {n: rng.normal(size=s) for n, s in shapes.items()}
                )
                for _ in range(t)
            ]
            soup = uniform_soup(
                CandidatePool(
                    checkpoints=cps,
                    epoch_ids=list(range(t)),
                    source_tags=[""] * t,
                )
            )
            for name in shapes:
                naive = np.mean(np.stack([cp.tensors[name] for cp in cps]), axis=0)
                np.testing.assert_allclose(
                    soup.tensors[name], naive, atol=1e-12, rtol=0.0
                )
        # identical ingredients must average to themselves with no drift
        base = Checkpoint({"w": rng.normal(size=(3, 3)), "b": rng.normal(size=4)})
        for t in (1, 2, 3, 5, 7, 8):
            clones = [Checkpoint({n: a.copy() for n, a in base.tensors.items()}) for _ in range(t)]
            soup = uniform_soup(
                CandidatePool(
                    checkpoints=clones,
                    epoch_ids=list(range(t)),
                    source_tags=[""] * t,
                )
            )
            for name, arr in base.tensors.items():
                assert np.array_equal(soup.tensors[name], arr), (t, name)


def test_criterion_3_pool_union_oracle():
    with criterion(3, "top-k pool matches the set-union oracle, size <= 24", 5.0):
        rng = np.random.default_rng(103)
        schema_cp = Checkpoint({"w": np.zeros(2)})

        def clone():
            return Checkpoint({"w": np.zeros(2)})

        for _ in range(100):
            t = int(rng.integers(1, 41))
            # small discrete grids force plenty of ties
            grid = rng.uniform(0.0, 1.0, size=5).round(1)
            snaps = [
                Snapshot(
                    epoch=e,
                    checkpoint=clone(),
                    loss=float(rng.choice(grid)),
                    accuracy=float(rng.choice(grid)),
                    f1=float(rng.choice(grid)),
                )
                for e in range(t)
            ]
            pool = build_candidate_pool(snaps, 8)
            assert pool.size <= 24

            def top8(key):
                ranked = sorted(range(t), key=lambda i: (key(snaps[i]), snaps[i].epoch))
                return {snaps[i].epoch for i in ranked[:8]}

            union = (
                top8(lambda s: s.loss)
                | top8(lambda s: -s.accuracy)
                | top8(lambda s: -s.f1)
            )
            assert set(pool.epoch_ids) == union
            assert pool.epoch_ids == sorted(pool.epoch_ids)
        del schema_cp


def test_criterion_4_macro_metrics_oracle():
    with criterion(4, "macro metrics equal the literal confusion-matrix math", 5.0):
        rng = np.random.default_rng(104)
        for trial in range(500):
            n = int(rng.integers(1, 51))
            c = int(rng.integers(2, 6))
            pm = random_simplex_rows(rng, n, c)
            if trial % 3 == 0:
                # restrict labels to a subset so some classes never occur
                labels = rng.integers(0, max(1, c - 1), size=n)
            else:
                labels = rng.integers(0, c, size=n)
            report = macro_metrics(pm, labels)

            preds = [int(np.argmax(pm.rows[i])) for i in range(n)]
            conf = [[0] * c for _ in range(c)]
            for true, pred in zip(labels, preds):
                conf[int(true)][pred] += 1
            precs, recs, f1s = [], [], []
            correct = sum(conf[k][k] for k in range(c))
            for k in range(c):
                tp = conf[k][k]
                fp = sum(conf[r][k] for r in range(c)) - tp
                fn = sum(conf[k][r] for r in range(c)) - tp
                prec = tp / (tp + fp) if tp + fp else 0.0
                rec = tp / (tp + fn) if tp + fn else 0.0
                f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
                precs.append(prec)
                recs.append(rec)
                f1s.append(f1)
            assert report.accuracy == correct / n
            assert abs(report.macro_precision - sum(precs) / c) < 1e-12
            assert abs(report.macro_recall - sum(recs) / c) < 1e-12
            assert abs(report.macro_f1 - sum(f1s) / c) < 1e-12


def test_criterion_5_distance_and_mds_fidelity():
    with criterion(5, "distances match oracle; planted MDS reconstructs", 10.0):
        rng = np.random.default_rng(105)

        def h(p, q):
            return -sum(
                p[j] * math.log(min(max(q[j], 1e-12), 1.0)) for j in range(len(p))
            )

        for _ in range(10):
            m = int(rng.integers(2, 6))
            n = int(rng.integers(2, 21))
            c = int(rng.integers(2, 5))
            preds = [random_simplex_rows(rng, n, c) for _ in range(m)]
            dm = distance_matrix(preds, [f"m{i}" for i in range(m)])
            for f in range(m):
                for g in range(m):
                    if f == g:
                        continue
                    total = sum(
                        h(preds[f].rows[i], preds[g].rows[i])
                        + h(preds[g].rows[i], preds[f].rows[i])
                        for i in range(n)
                    )
                    assert abs(dm.values[f, g] - total / n) < 1e-12

        for n_points in range(5, 11):
            points = rng.normal(size=(n_points, 2)) * 2.0
            vals = np.zeros((n_points, n_points))
            for i in range(n_points):
                for j in range(n_points):
                    if i != j:
                        vals[i, j] = float(np.linalg.norm(points[i] - points[j]))
            dm = DistanceMatrix(vals, [f"p{i}" for i in range(n_points)])
            emb = classical_mds(dm, dim=2)
            for i in range(n_points):
                for j in range(n_points):
                    got = float(np.linalg.norm(emb.coords[i] - emb.coords[j]))
                    assert abs(got - vals[i, j]) < 1e-9
            assert stress(dm, emb) < 1e-9

        assert abs(sym_cross_entropy([0.5, 0.5], [0.5, 0.5]) - 2.0 * math.log(2.0)) < 1e-12


def test_criterion_6_soft_voting():
    with criterion(6, "soft vote: row-stochastic, permutation-exact, mean oracle", 5.0):
        rng = np.random.default_rng(106)
        for _ in range(100):
            m = int(rng.integers(1, 7))
            n = int(rng.integers(1, 21))
            c = int(rng.integers(2, 6))
            preds = [random_simplex_rows(rng, n, c) for _ in range(m)]
            vote = soft_vote(preds)
            np.testing.assert_allclose(
                vote.rows.sum(axis=1), 1.0, atol=1e-12, rtol=0.0
            )
            perm = rng.permutation(m)
            shuffled = soft_vote([preds[i] for i in perm])
            assert np.array_equal(vote.rows, shuffled.rows)
            oracle = np.mean(np.stack([p.rows for p in preds]), axis=0)
            np.testing.assert_allclose(vote.rows, oracle, atol=1e-12, rtol=0.0)


def test_criterion_7_logit_linearity():
    with criterion(7, "half-half weight average has the mean logits (linear head)", 5.0):
        rng = np.random.default_rng(107)
        for _ in range(100):
            f = int(rng.integers(1, 7))
            c = int(rng.integers(2, 6))
            spec = MlpSpec((f, c))
            a = random_checkpoint(spec, rng)
            b = random_checkpoint(spec, rng)
            avg = linear_combine([a, b], [0.5, 0.5])
            x = rng.normal(size=(int(rng.integers(1, 13)), f))
            mean_logits = (
                forward_logits(a, spec, x) + forward_logits(b, spec, x)
            ) / 2.0
            np.testing.assert_allclose(
                forward_logits(avg, spec, x), mean_logits, atol=1e-12, rtol=0.0
            )


def test_criterion_8_selection_rule():
    with criterion(8, "two-key (F1, accuracy) winner matches brute-force sort", 2.0):
        rng = np.random.default_rng(108)
        grid = [round(0.1 * v, 1) for v in range(1, 10)]
        for _ in range(200):
            count = int(rng.integers(1, 11))
            reports = [
                MetricsReport(
                    accuracy=float(rng.choice(grid)),
                    per_class=(),
                    macro_precision=0.0,
                    macro_recall=0.0,
                    macro_f1=float(rng.choice(grid)),
                )
                for _ in range(count)
            ]
            got = select_best_checkpoint(reports)
            order = sorted(
                range(count),
                key=lambda i: (-reports[i].macro_f1, -reports[i].accuracy, i),
            )
            assert got == order[0]


def test_criterion_9_end_to_end_cli(tmp_path):
    with criterion(9, "CLI pipeline is byte-stable and matches goldens", 10.0):
        shutil.copytree(FIXTURE / "inputs", tmp_path / "inputs")
        run_pipeline(tmp_path / "inputs", tmp_path / "run1")
        run_pipeline(tmp_path / "inputs", tmp_path / "run2")
        for rel in OUTPUT_FILES:
            first = (tmp_path / "run1" / rel).read_bytes()
            assert first == (tmp_path / "run2" / rel).read_bytes(), (
                f"{rel}: two runs disagree"
            )
            assert first == (FIXTURE / "golden" / rel).read_bytes(), (
                f"{rel}: does not match the checked-in golden file"
            )


def test_criterion_10_delta_formatting():
    with criterion(10, "signed accuracy delta renders as +0.93", 5.0):
        assert format_delta(0.7143, 0.7236) == "+0.93"
        assert format_delta(0.7236, 0.7143) == "-0.93"
