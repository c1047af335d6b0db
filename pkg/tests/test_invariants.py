"""Property checks on randomized small instances (K <= 16)."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_index import bench, io
from ris_index.assignment import assign_from_path, gray_code, random_assignment, remap_codebook
from ris_index.baselines import (exact_optimum, greedy_order, natural_order, random_order,
                                 three_opt, two_opt)
from ris_index.codebook import ChannelSet, build_codebook, generate_channels, snr
from ris_index.heuristic import (MODE_CYCLE, DistType, SolverParams, apply_mode, build_layers,
                                 count_pairs, sample_route, selection_probs, solve)
from ris_index.loss import expected_loss, mismatch_loss, path_cost, synth_matrix

from oracles import hamming

pytestmark = pytest.mark.invariants
settings.load_profile("invariants")

seeds = st.integers(0, 2**31 - 1)
small_k = st.integers(2, 16)
pow2_k = st.sampled_from([2, 4, 8, 16])
dists = st.sampled_from(["uniform", "clustered", "exploded"])


def _tiny_params(K, seed):
    return SolverParams.defaults(K, seed=seed, n_shot=40, n_cate=40, T=3)


def _ris(K, seed):
    N = 4 if K <= 16 else 6
    ch = generate_channels(K, N, 2, seed)
    return ch, build_codebook(ch, 2, seed)


# -- codebook -------------------------------------------------------------------

@given(K=small_k, seed=seeds, theta=st.floats(0, 2 * np.pi))
def test_snr_phase_rotation_invariance(K, seed, theta):
    ch, cb = _ris(K, seed)
    ue = seed % K
    base = snr(ch, cb.phases[0], ue)
    assert snr(ch, cb.phases[0] * np.exp(1j * theta), ue) == pytest.approx(base, rel=1e-10)


@given(K=small_k, seed=seeds)
def test_generation_deterministic(K, seed):
    a, b = _ris(K, seed), _ris(K, seed)
    assert a[0].G.tobytes() == b[0].G.tobytes() and a[0].h_r.tobytes() == b[0].h_r.tobytes()
    assert a[1] == b[1]


@given(K=small_k, seed=seeds)
def test_snr_linear_in_power(K, seed):
    ch, cb = _ris(K, seed)
    doubled = ChannelSet(G=ch.G, h_r=ch.h_r, P=2 * ch.P, sigma2=ch.sigma2)
    assert snr(doubled, cb.phases[1 % K], 0) == 2 * snr(ch, cb.phases[1 % K], 0)


# -- loss model -------------------------------------------------------------------

@given(K=st.integers(2, 8), seed=seeds, c=st.floats(0.01, 100))
def test_mismatch_loss_scale_covariance(K, seed, c):
    ch, cb = _ris(K, seed)
    h_r = ch.h_r.copy()
    h_r[0] *= np.sqrt(c)
    scaled = ChannelSet(G=ch.G, h_r=h_r, P=ch.P, sigma2=ch.sigma2)
    for j in range(K):
        assert mismatch_loss(scaled, cb, 0, j) == pytest.approx(mismatch_loss(ch, cb, 0, j),
                                                                rel=1e-9, abs=1e-12)


@given(K=pow2_k, seed=seeds, q=st.floats(1e-9, 0.25), dist=dists)
def test_expected_loss_linear_in_q(K, seed, q, dist):
    d = synth_matrix(dist, K, seed)
    a = random_assignment(K, seed)
    assert expected_loss(d, a, 2 * q) == pytest.approx(2 * expected_loss(d, a, q), rel=1e-12)


@given(K=small_k, seed=seeds, dist=dists)
def test_path_cost_reverse(K, seed, dist):
    d = synth_matrix(dist, K, seed)
    pi = random_order(K, seed)
    assert path_cost(d, pi[::-1]) == pytest.approx(path_cost(d, pi), rel=1e-12)


# -- heuristic --------------------------------------------------------------------

@given(K=st.integers(5, 16), seed=seeds, mu=st.floats(0.05, 2.0), dist=dists,
       typ=st.sampled_from(list(DistType)))
def test_sampled_routes_are_permutations(K, seed, mu, dist, typ):
    d = synth_matrix(dist, K, seed).d
    layers = build_layers(d, SolverParams.defaults(K))
    delta = count_pairs(np.array([random_order(K, seed)]), K)
    for counts in (None, delta):
        pi = sample_route(d, layers, typ, mu, counts=counts, rng=seed)
        assert sorted(pi.tolist()) == list(range(K))


@given(seed=seeds, n=st.integers(1, 15), mu=st.floats(0.05, 2.0), scale=st.floats(1e-3, 1e3))
def test_selection_probs_normalized_and_scale_free(seed, n, mu, scale):
    d = synth_matrix("uniform", 16, seed).d
    omega = list(range(1, n + 1))
    p = selection_probs(0, omega, d, mu)
    assert abs(p.sum() - 1.0) <= 1e-12
    np.testing.assert_allclose(selection_probs(0, omega, d * scale, mu), p, rtol=1e-9)


@given(K=small_k, t=st.integers(0, 1000), mu0=st.floats(0.05, 2), sigma=st.floats(0, 1),
       z=st.integers(0, 10))
def test_schedules_respect_floors(K, t, mu0, sigma, z):
    p = SolverParams.defaults(K, mu0=mu0, sigma=sigma, z=z).clamped()
    mu, k_cate = p.mu0, p.k_cate0
    for step in range(1, t % 50 + 1):
        mu = max(p.mu0 - p.sigma * step, p.mu_min)
        k_cate = max(k_cate - p.z * step, p.k_min)
        assert mu >= p.mu_min and k_cate >= p.k_min


@given(K=small_k, seed=seeds, n=st.integers(1, 30))
def test_pair_counts_symmetric_zero_diagonal(K, seed, n):
    rng = np.random.default_rng(seed)
    delta = count_pairs(np.array([rng.permutation(K) for _ in range(n)]), K)
    for mode in MODE_CYCLE * 2:
        delta = apply_mode(delta + count_pairs(np.array([rng.permutation(K)]), K), mode)
        assert np.array_equal(delta, delta.T) and np.all(np.diag(delta) == 0)
        assert np.all(delta >= 0)


@given(K=st.integers(2, 16), seed=seeds, dist=dists)
def test_solver_trace_monotone_and_deterministic(K, seed, dist):
    d = synth_matrix(dist, K, seed)
    params = _tiny_params(K, seed)
    a, b = solve(d, params), solve(d, params)
    assert all(y <= x for x, y in zip(a.cost_trace, a.cost_trace[1:]))
    assert sorted(a.best_pi.tolist()) == list(range(K))
    ra, rb = a.to_dict(), b.to_dict()
    ra.pop("wall_time_ms"), rb.pop("wall_time_ms")
    assert ra == rb


# -- baselines --------------------------------------------------------------------

@given(K=st.integers(2, 10), seed=seeds, dist=dists)
def test_exact_bounds_all_solvers(K, seed, dist):
    d = synth_matrix(dist, K, seed).d
    opt = exact_optimum(d)[1]
    init = random_order(K, seed)
    for pi in (natural_order(K), init, greedy_order(d), greedy_order(d, None),
               two_opt(d, init), three_opt(d, init), solve(d, _tiny_params(K, seed)).best_pi):
        assert sorted(pi.tolist()) == list(range(K))
        assert path_cost(d, pi) >= opt - 1e-12


@given(K=small_k, seed=seeds, dist=dists)
def test_local_search_idempotent(K, seed, dist):
    d = synth_matrix(dist, K, seed).d
    for solver in (two_opt, three_opt):
        out = solver(d, random_order(K, seed))
        assert solver(d, out).tolist() == out.tolist()


# -- assignment -------------------------------------------------------------------

@given(m=st.integers(1, 12), data=st.data())
def test_gray_adjacent_popcount_one(m, data):
    k = data.draw(st.integers(0, 2**m - 2))
    assert hamming(gray_code(k, m), gray_code(k + 1, m)) == 1


@given(K=pow2_k, seed=seeds, dist=dists)
def test_path_adjacent_pairs_are_hamming_one(K, seed, dist):
    d = synth_matrix(dist, K, seed).d
    pi = random_order(K, seed)
    a = assign_from_path(pi)
    for u, v in zip(pi, pi[1:]):
        assert hamming(int(a.labels[u]), int(a.labels[v])) == 1
    q = 1e-6
    full = sum(d[i, j] for i in range(K) for j in range(K)
               if hamming(int(a.labels[i]), int(a.labels[j])) == 1) / K
    assert expected_loss(d, a, q) / q == pytest.approx(full, rel=1e-9)


@given(K=pow2_k, seed=seeds)
def test_remap_preserves_codewords(K, seed):
    _, cb = _ris(K, seed)
    out = remap_codebook(cb, random_assignment(K, seed))
    assert sorted(map(tuple, out.levels)) == sorted(map(tuple, cb.levels))


# -- files and campaigns ----------------------------------------------------------

@given(K=small_k, seed=seeds)
def test_emitted_files_round_trip(tmp_path_factory, K, seed):
    tmp = tmp_path_factory.mktemp("rt")
    ch, cb = _ris(K, seed)
    io.save_instance(tmp / "i.json", ch, cb)
    ch2, cb2 = io.load_instance(tmp / "i.json")
    assert ch2.G.tobytes() == ch.G.tobytes() and ch2.h_r.tobytes() == ch.h_r.tobytes()
    assert cb2 == cb
    d = synth_matrix("uniform", K, seed)
    io.save_loss(tmp / "d.csv", d)
    assert io.load_loss(tmp / "d.csv").d.tobytes() == d.d.tobytes()
    pi = random_order(K, seed)
    io.save_permutation(tmp / "p.json", pi)
    assert io.load_permutation(tmp / "p.json").tolist() == pi.tolist()


@settings(max_examples=200, deadline=None)
@given(seed=seeds, K=st.sampled_from([2, 4, 8]), threads=st.sampled_from([1, 2, 8]))
def test_campaign_seed_determinism(seed, K, threads):
    cfg = bench.CampaignConfig.from_dict(dict(
        experiment="p", K=[K], N=[4], M=[2], b=[2], bsc_snr_db=[0.0, 6.0],
        solvers=["natural", "random", "greedy", "tsp"], runs=1, seed=seed,
        solver_params={"n_shot": 30, "n_cate": 30, "T": 2}))
    strip = [r.__dict__ | {"mean_time_ms": 0} for r in bench.run_campaign(cfg)]
    again = [r.__dict__ | {"mean_time_ms": 0} for r in bench.run_campaign(cfg, threads=threads)]
    assert strip == again
