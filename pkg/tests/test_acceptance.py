"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line through the ``criterion`` fixture; the
lines are printed in an "acceptance criteria" section at the end of the run.
"""

import itertools
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import synthetic_pool
from skinfusion.cli import _Models, run_pipeline
from skinfusion.data import load_pair, read_manifest, sample_pools, split_files
from skinfusion.ensemble import combine_binary, compute_weights, sum_of_weights, vote
from skinfusion.evaluate import count, read_report
from skinfusion.mlp import Topology, TrainConfig, forward, init_network, jacobian, train_lm
from skinfusion.reference import ALL_ROWS
from skinfusion.search import COARSE_CANDIDATES, fine_range

# the one published row whose rates do not add up; FAR 20.71 would give exactly 100.00
KNOWN_BAD_ROWS = {"OR Cb-Cr & Cb/Cr"}


def best_time(fn, repeats=20):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def test_c1_weights(criterion):
    with criterion(1, "CDR weights (0.3396, 0.3354, 0.3250)") as notes:
        ws = compute_weights((79.60, 78.63, 76.18))
        assert ws.weights == pytest.approx((0.3396, 0.3354, 0.3250), abs=5e-5)
        assert abs(sum(ws.weights) - 1.0) <= 1e-12
        elapsed = best_time(lambda: compute_weights((79.60, 78.63, 76.18)))
        notes.append(f"{elapsed * 1e6:.1f} us")
        assert elapsed < 1e-3


def test_c2_fine_range(criterion):
    expected = {1: (1, 1), 2: (1, 3), 4: (3, 6), 8: (6, 12), 16: (12, 24),
                32: (24, 48), 64: (48, 96), 128: (96, 128)}
    with criterion(2, "fine search ranges for all coarse winners") as notes:
        assert {hn: fine_range(hn) for hn in COARSE_CANDIDATES} == expected
        elapsed = best_time(lambda: [fine_range(hn) for hn in COARSE_CANDIDATES])
        notes.append(f"{elapsed * 1e6:.1f} us")
        assert elapsed < 1e-3


def test_c3_metric_identities(criterion):
    with criterion(3, "CDR + FAR + FRR = 100") as notes:
        rng = np.random.default_rng(2024)
        for _ in range(200):
            shape = tuple(rng.integers(1, 40, 2))
            pred = rng.integers(0, 2, shape)
            truth = (rng.random(shape) < rng.random()).astype(np.uint8)
            r = count(pred, truth)
            assert sum(r.exact(), Fraction(0)) == 100
            assert r.exact()[1] == Fraction(100 * int(((pred == 1) & (truth == 0)).sum()), pred.size)
        bad = {row.classifier for row in ALL_ROWS if abs(row.cdr + row.far + row.frr - 100.0) > 0.02}
        notes.append(f"{len(ALL_ROWS) - len(bad)}/{len(ALL_ROWS)} published rows within 0.02")
        for name in sorted(bad):
            row = next(r for r in ALL_ROWS if r.classifier == name)
            notes.append(f"published row '{name}' sums to {row.cdr + row.far + row.frr:.2f} (source typo, see ledger)")
        # any inconsistency beyond the documented typo would be a transcription error here
        assert bad == KNOWN_BAD_ROWS


def test_c4_truth_tables(criterion):
    with criterion(4, "AND / OR / VOTE truth tables, equal-weight sum equals vote"):
        equal = compute_weights((1.0, 1.0, 1.0))
        for bits in itertools.product((0, 1), repeat=3):
            masks = [np.array([b], dtype=np.uint8) for b in bits]
            assert combine_binary("and", masks)[0] == int(all(bits))
            assert combine_binary("or", masks)[0] == int(any(bits))
            assert vote(masks)[0] == int(sum(bits) >= 2)
            raw = [np.array([float(b)]) for b in bits]
            assert sum_of_weights(raw, equal, 0.5)[0] == vote(masks)[0]


def central_difference(net, x, h=1e-5):
    theta = net.params
    cols = []
    for j in range(theta.size):
        tp, tm = theta.copy(), theta.copy()
        tp[j] += h
        tm[j] -= h
        cols.append((forward(net.with_params(tp), x) - forward(net.with_params(tm), x)) / (2 * h))
    return np.column_stack(cols)


def test_c5_jacobian(criterion):
    with criterion(5, "analytic Jacobian vs central differences") as notes:
        start = time.perf_counter()
        rng = np.random.default_rng(5)
        worst = 0.0
        for i in range(10):
            c, hn = int(rng.choice([1, 2, 3])), int(rng.choice([1, 5, 17]))
            top = Topology(c, hn)
            net = init_network(top, None, i).with_params(rng.normal(0, 1.5, top.n_params))
            x = rng.random((25, c))
            analytic, numeric = jacobian(net, x), central_difference(net, x)
            scale = np.maximum(np.abs(numeric).max(axis=0), 1e-8)
            worst = max(worst, float((np.abs(analytic - numeric).max(axis=0) / scale).max()))
        notes.append(f"max relative error {worst:.1e}")
        assert worst < 1e-4
        assert time.perf_counter() - start < 10


def test_c6_lm_convergence(criterion):
    with criterion(6, "LM on the 1-2-1 threshold task") as notes:
        start = time.perf_counter()
        x = np.linspace(0, 1, 200)[:, None]
        t = (x[:, 0] > 0.5).astype(float)
        converged = 0
        for seed in range(10):
            res = train_lm(init_network(Topology(1, 2), None, seed), (x, t), (x, t), TrainConfig(max_epochs=500))
            assert len(res.train_mse) - 1 <= 500
            assert np.all(np.diff(res.train_mse) <= 0), f"seed {seed}: accepted MSE increased"
            converged += res.train_mse.min() < 1e-2
        notes.append(f"{converged}/10 seeds converged")
        assert converged >= 9
        assert time.perf_counter() - start < 30


def test_c8_data_protocol(criterion):
    with criterion(8, "840,000-pixel pool -> 30 files x (14,000 + 14,000)") as notes:
        start = time.perf_counter()
        pool = synthetic_pool(21, 200, 200, seed=8)
        assert len(pool) == 840_000
        train, val = sample_pools(pool, seed=1)
        files = split_files(train, val, seed=2)
        assert len(files) == 30
        assert all(len(f.train) == 14_000 and len(f.val) == 14_000 for f in files)
        keys = np.concatenate([p.keys() for f in files for p in (f.train, f.val)])
        assert len(keys) == 840_000 and len(np.unique(keys)) == 840_000
        assert np.array_equal(np.sort(keys), np.sort(pool.keys()))
        elapsed = time.perf_counter() - start
        notes.append(f"{elapsed:.1f} s")
        assert elapsed < 60


# -- end-to-end fixture runs (criteria 7 and 9) ---------------------------------


@pytest.fixture(scope="module")
def pipeline_runs(tmp_path_factory):
    runs = []
    for _ in range(2):
        out = tmp_path_factory.mktemp("pipeline")
        start = time.perf_counter()
        rows = run_pipeline(out, seed=42)
        runs.append((out, dict(rows), time.perf_counter() - start))
    return runs


def artifact_bytes(root: Path):
    paths = sorted(p for p in root.rglob("*") if p.is_file())
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in paths}


@pytest.mark.slow
def test_c7_end_to_end(criterion, pipeline_runs):
    out, rows, elapsed = pipeline_runs[0]
    with criterion(7, "desk-scale fixture pipeline") as notes:
        assert elapsed < 600
        singles = {k: v for k, v in rows.items() if k in ("cb_minus_cr", "cb_over_cr", "cr")}
        assert len(singles) == 3 and {"and", "or", "vote", "sow", "stack"} <= set(rows)
        best_single = max(r.cdr for r in singles.values())
        notes.append(f"{elapsed:.0f} s, sum-of-weights {rows['sow'].cdr:.2f} vs best single {best_single:.2f}")
        assert rows["sow"].cdr >= best_single - 0.5

        manifest = read_manifest(out / "data" / "test_manifest.tsv")
        assert len(manifest) == 20
        models = _Models()
        ens = out / "ensembles"
        for image_id in range(len(manifest)):
            img, _ = load_pair(manifest, image_id)
            a, v, o = (models.predict(ens / f"{r}.json", image_id, img, 0.5) for r in ("and", "vote", "or"))
            assert (a <= v).all() and (v <= o).all(), f"nesting broken on test image {image_id}"

        # the reported ensemble rows agree with a fresh recomputation
        fresh = dict(read_report(out / "reports" / "ensembles.csv"))
        assert fresh["vote"] == rows["vote"]


@pytest.mark.slow
def test_c9_determinism(criterion, pipeline_runs):
    (a, _, _), (b, _, _) = pipeline_runs
    with criterion(9, "identical seed and config give byte-identical outputs") as notes:
        first, second = artifact_bytes(a), artifact_bytes(b)
        assert any(k.endswith(".search.json") for k in first)
        assert any(k.startswith("reports/") for k in first)
        notes.append(f"{len(first)} files compared")
        assert first.keys() == second.keys()
        diff = [k for k in first if first[k] != second[k]]
        assert not diff, f"differing files: {diff}"
