"""Backend agreement: the numba kernels against their pure-numpy twins."""

import numpy as np
import pytest

from problex import _kernels


def _random_inputs(rng, n_classes=4, n_verbs=6, n_nouns=9, n_pairs=40):
    verb_ids = rng.integers(0, n_verbs, size=n_pairs).astype(np.int64)
    noun_ids = rng.integers(0, n_nouns, size=n_pairs).astype(np.int64)
    counts = rng.integers(1, 10, size=n_pairs).astype(np.float64)
    priors = rng.dirichlet(np.ones(n_classes))
    verb_emis = rng.dirichlet(np.ones(n_verbs), size=n_classes)
    noun_emis = rng.dirichlet(np.ones(n_nouns), size=n_classes)
    return verb_ids, noun_ids, counts, priors, verb_emis, noun_emis


try:
    import numba  # noqa: F401

    numba_missing = False
except ImportError:
    numba_missing = True


@pytest.mark.skipif(numba_missing, reason="numba backend unavailable")
class TestBackendParity:
    def test_em_pair_stats(self):
        rng = np.random.default_rng(0)
        nb = _kernels.numba_impls()["em_pair_stats"]
        npy = _kernels.numpy_impls()["em_pair_stats"]
        for _ in range(5):
            args = _random_inputs(rng)
            res_nb = nb(*args)
            res_np = npy(*args)
            for a, b in zip(res_nb[:3], res_np[:3]):
                np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-14)
            assert abs(res_nb[3] - res_np[3]) <= 1e-9 * abs(res_np[3])
            assert res_nb[4] == res_np[4] == -1

    def test_em_pair_stats_zero_pair_flagged(self):
        rng = np.random.default_rng(1)
        verb_ids, noun_ids, counts, priors, verb_emis, noun_emis = _random_inputs(rng)
        noun_emis[:, noun_ids[7]] = 0.0
        for impl in (_kernels.numba_impls()["em_pair_stats"], _kernels.numpy_impls()["em_pair_stats"]):
            *_accs, loglik, bad = impl(verb_ids, noun_ids, counts, priors, verb_emis, noun_emis)
            assert loglik == -np.inf
            assert bad >= 0
            assert noun_ids[bad] == noun_ids[7]

    def test_mixture_weight_em(self):
        rng = np.random.default_rng(2)
        nb = _kernels.numba_impls()["mixture_weight_em"]
        npy = _kernels.numpy_impls()["mixture_weight_em"]
        for _ in range(5):
            n_nouns, n_classes = 7, 3
            noun_probs = np.ascontiguousarray(rng.dirichlet(np.ones(n_nouns), size=n_classes).T)
            freqs = rng.integers(1, 8, size=n_nouns).astype(np.float64)
            init = rng.dirichlet(np.ones(n_classes))
            res_nb = nb(noun_probs, freqs, init.copy(), 1e-9, 500)
            res_np = npy(noun_probs, freqs, init.copy(), 1e-9, 500)
            np.testing.assert_allclose(res_nb[0], res_np[0], rtol=1e-8, atol=1e-12)
            assert res_nb[2] == res_np[2]  # same iteration count
            assert res_nb[3] == res_np[3]
            np.testing.assert_allclose(res_nb[1], res_np[1], rtol=1e-9)

    def test_same_backend_is_bit_deterministic(self):
        rng = np.random.default_rng(3)
        args = _random_inputs(rng)
        first = _kernels.em_pair_stats(*args)
        second = _kernels.em_pair_stats(*args)
        for a, b in zip(first[:3], second[:3]):
            assert np.array_equal(a, b)
        assert first[3] == second[3]


def test_mixture_em_monotone_and_converged():
    rng = np.random.default_rng(4)
    impl = _kernels.mixture_weight_em
    for _ in range(10):
        n_nouns, n_classes = 9, 4
        noun_probs = np.ascontiguousarray(rng.dirichlet(np.ones(n_nouns), size=n_classes).T)
        freqs = rng.integers(1, 8, size=n_nouns).astype(np.float64)
        init = rng.dirichlet(np.ones(n_classes))
        weights, trace, n_iters, converged, bad = impl(noun_probs, freqs, init, 1e-10, 2000)
        assert bad == -1
        assert converged
        assert abs(float(weights.sum()) - 1.0) <= 1e-9
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))


def test_zero_rel_tol_runs_to_cap():
    rng = np.random.default_rng(5)
    noun_probs = np.ascontiguousarray(rng.dirichlet(np.ones(5), size=2).T)
    freqs = np.arange(1.0, 6.0)
    _w, trace, n_iters, converged, _bad = _kernels.mixture_weight_em(
        noun_probs, freqs, np.array([0.5, 0.5]), 0.0, 7
    )
    assert n_iters == 7 and len(trace) == 7 and not converged
