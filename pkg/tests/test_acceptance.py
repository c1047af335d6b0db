"""Acceptance criteria 1-10; each test prints one PASS/FAIL line."""
import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from ris_index import bench
from ris_index.assignment import gray_code, random_assignment
from ris_index.baselines import exact_optimum, greedy_order, random_order, two_opt
from ris_index.heuristic import SolverParams, solve
from ris_index.loss import ber_from_snr_db, expected_loss, path_cost, synth_matrix

from oracles import expected_loss_double_loop, hamming, path_sum

TESTS = Path(__file__).parent
BER_TABLE = [(0, 0.07865), (1, 0.05628), (2, 0.03751), (3, 0.02288), (4, 0.01250),
             (5, 0.00595), (6, 0.00239), (8, 1.91e-4), (12, 9.01e-9)]


def test_criterion_01_ber_table(record_criterion):
    worst = []
    for snr_db, q in BER_TABLE:
        got = ber_from_snr_db(snr_db)
        worst.append(abs(got - q) <= 1e-4 if q >= 1e-3 else abs(got / q - 1) <= 0.02)
    record_criterion(1, "BER table", all(worst), f"({sum(worst)}/9 rows)")
    assert all(worst)


def test_criterion_02_gray_labels(record_criterion):
    ok = True
    for m in range(1, 11):
        labels = [gray_code(k, m) for k in range(2**m)]
        ok &= len(set(labels)) == 2**m
        ok &= all(hamming(a, b) == 1 for a, b in zip(labels, labels[1:]))
    prefix = [format(gray_code(k, 4), "04b") for k in range(4)]
    ok &= prefix == ["0000", "0001", "0011", "0010"]
    record_criterion(2, "Gray labeling", ok, f"(m=4 prefix {','.join(prefix)})")
    assert ok


def test_criterion_03_oracle_equivalence(record_criterion):
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        d = rng.uniform(size=(8, 8))
        np.fill_diagonal(d, 0)
        a = random_assignment(8, seed)
        ref = expected_loss_double_loop(d, a.labels, 0.01)
        worst = max(worst, abs(expected_loss(d, a, 0.01) / ref - 1))
        pi = rng.permutation(8)
        sym = 0.5 * (d + d.T)
        worst = max(worst, abs(path_cost(sym, pi) / path_sum(sym, pi) - 1))
    ok = worst <= 1e-12
    record_criterion(3, "oracle equivalence", ok, f"(max rel err {worst:.1e})")
    assert ok


def test_criterion_04_optimality_gap(record_criterion):
    t0 = time.perf_counter()
    gaps = []
    for seed in range(50):
        d = synth_matrix("uniform", 10, seed).d
        params = SolverParams.defaults(10, seed=seed, n_shot=300, n_cate=2000, T=4)
        opt = exact_optimum(d)[1]
        gaps.append(solve(d, params).best_cost / opt - 1)
    elapsed = time.perf_counter() - t0
    gaps = np.array(gaps)
    within = np.mean(gaps <= 0.05)
    ok = within >= 0.9 and gaps.max() <= 0.15 and elapsed <= 60
    record_criterion(4, "optimality gap K=10", ok,
                     f"({within:.0%} within 5%, max gap {gaps.max():.2%}, {elapsed:.1f}s)")
    assert ok


def _ranking(dist):
    prop, two, greedy = [], [], []
    for seed in range(30):
        d = synth_matrix(dist, 64, seed).d
        prop.append(solve(d, SolverParams.defaults(64, seed=seed)).best_cost)
        two.append(path_cost(d, two_opt(d, random_order(64, seed))))
        greedy.append(path_cost(d, greedy_order(d)))
    return np.mean(prop), np.mean(two), np.mean(greedy)


@pytest.mark.slow
def test_criterion_05_ranking_uniform(record_criterion):
    p, t, g = _ranking("uniform")
    ok = p <= t <= g
    record_criterion(5, "ranking on uniform K=64", ok,
                     f"(proposed {p:.4f} <= 2-opt {t:.4f} <= greedy {g:.4f})")
    assert ok


@pytest.mark.slow
def test_criterion_06_ranking_other_distributions(record_criterion):
    parts, ok = [], True
    for dist in ("clustered", "exploded"):
        p, t, g = _ranking(dist)
        ok &= p <= t <= g
        parts.append(f"{dist}: {p:.4f}/{t:.4f}/{g:.4f}")
    record_criterion(6, "ranking on clustered and exploded", ok, "(" + "; ".join(parts) + ")")
    assert ok


@pytest.mark.slow
def test_criterion_07_experiment_one(record_criterion):
    t0 = time.perf_counter()
    rows = bench.run_campaign(bench.preset("I", runs=100))
    elapsed = time.perf_counter() - t0
    table = {(r.solver, r.bsc_snr_db): r.mean_loss for r in rows}
    ok = elapsed <= 900
    parts = []
    for snr_db in (0.0, 4.0, 8.0, 12.0):
        tsp, rnd, nat = (table[(s, snr_db)] for s in ("tsp", "random", "natural"))
        ok &= tsp < rnd and tsp < nat
        parts.append(f"{snr_db:g}dB tsp/random/natural {tsp:.3g}/{rnd:.3g}/{nat:.3g}")
    record_criterion(7, "Experiment I trend", ok, f"({'; '.join(parts)}; {elapsed:.0f}s)")
    assert ok


@pytest.mark.slow
def test_criterion_08_scaling(record_criterion):
    sizes = [32, 64, 128]
    medians = []
    for K in sizes:
        times = []
        for seed in range(5):
            d = synth_matrix("uniform", K, seed).d
            t0 = time.perf_counter()
            solve(d, SolverParams.defaults(K, seed=seed))
            times.append(time.perf_counter() - t0)
        medians.append(np.median(times))
    slope = np.polyfit(np.log(sizes), np.log(medians), 1)[0]
    ok = slope <= 4.5
    record_criterion(8, "polynomial scaling", ok,
                     f"(slope {slope:.2f}; medians " + ", ".join(f"{m:.2f}s" for m in medians) + ")")
    assert ok


def _cli(args, cwd):
    env = dict(os.environ, NUMBA_NUM_THREADS="8")
    proc = subprocess.run([sys.executable, "-m", "ris_index.cli", "--quiet", *args],
                          cwd=cwd, env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


def test_criterion_09_determinism(record_criterion, tmp_path):
    _cli(["gen", "--K", "32", "--N", "16", "--M", "4", "--b", "3", "--seed", "9",
          "--out", "inst.json"], tmp_path)
    _cli(["loss", "inst.json", "--out", "d.csv"], tmp_path)
    (tmp_path / "params.json").write_text(SolverParams.defaults(32, n_shot=2000, n_cate=1500)
                                          .to_json())
    cfg = dict(experiment="det", K=[16], N=[8], M=[2], b=[2], bsc_snr_db=[0.0, 4.0],
               solvers=["random", "greedy", "2opt", "tsp"], runs=3, seed=21)
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    reports, csvs = [], []
    for threads in ("1", "8"):
        _cli(["solve", "d.csv", "--params", "params.json", "--seed", "4", "--threads", threads,
              "--out", f"r{threads}.json"], tmp_path)
        rep = json.loads((tmp_path / f"r{threads}.json").read_text())
        rep.pop("wall_time_ms")
        reports.append(rep)
        _cli(["bench", "cfg.json", "--threads", threads, "--out", f"b{threads}.csv"], tmp_path)
        lines = (tmp_path / f"b{threads}.csv").read_text().splitlines()
        csvs.append([line.rsplit(",", 1)[0] for line in lines])
    ok = reports[0] == reports[1] and csvs[0] == csvs[1]
    record_criterion(9, "determinism across thread counts", ok,
                     "(report and CSV identical apart from timings)")
    assert ok


@pytest.mark.slow
def test_criterion_10_invariant_suite(record_criterion):
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           "--hypothesis-show-statistics", str(TESTS / "test_invariants.py")],
                          capture_output=True, text=True, cwd=TESTS.parent)
    counts = proc.stdout.count("200 passing examples, 0 failing examples")
    props = proc.stdout.count("::test_")
    ok = proc.returncode == 0 and counts == props > 0
    record_criterion(10, "invariant suite", ok, f"({counts} properties x 200 cases)")
    assert ok, proc.stdout[-2000:]
