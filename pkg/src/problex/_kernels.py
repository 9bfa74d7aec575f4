"""Hot numeric kernels: numba-compiled loops with pure-numpy twins.

Backend selection happens once at import via the env var PLEX_BACKEND:

  auto   (default) numba when importable, numpy otherwise
  numba  require numba, fail loudly if missing
  numpy  force the vectorized fallback

Both backends are deterministic run-to-run; they may differ from each
other in the last few ulps because their reduction orders differ.
``benchmarks/bench_em.py`` compares them head to head.
"""

from __future__ import annotations

import os

import numpy as np


def _em_pair_stats_loop(verb_ids, noun_ids, counts, priors, verb_emis, noun_emis):
    # One E step + unnormalized M step over the observed pairs.
    # Returns (prior_acc, verb_acc, noun_acc, loglik, first_bad) where
    # first_bad is the position of the first pair with non-positive mixture
    # probability (-1 if none); accumulators are only valid when it is -1.
    n_classes = priors.shape[0]
    n_pairs = verb_ids.shape[0]
    prior_acc = np.zeros(n_classes)
    verb_acc = np.zeros(verb_emis.shape)
    noun_acc = np.zeros(noun_emis.shape)
    terms = np.empty(n_classes)
    loglik = 0.0
    for i in range(n_pairs):
        v = verb_ids[i]
        n = noun_ids[i]
        total = 0.0
        for c in range(n_classes):
            t = priors[c] * verb_emis[c, v] * noun_emis[c, n]
            terms[c] = t
            total += t
        if total <= 0.0:
            return prior_acc, verb_acc, noun_acc, -np.inf, i
        loglik += counts[i] * np.log(total)
        weight = counts[i]
        for c in range(n_classes):
            # posterior ratio first: keeps a single class an exact fixed point
            mass = (terms[c] / total) * weight
            prior_acc[c] += mass
            verb_acc[c, v] += mass
            noun_acc[c, n] += mass
    return prior_acc, verb_acc, noun_acc, loglik, -1


def _em_pair_stats_numpy(verb_ids, noun_ids, counts, priors, verb_emis, noun_emis):
    prod = priors[:, None] * verb_emis[:, verb_ids] * noun_emis[:, noun_ids]  # (K, nnz)
    joint = prod.sum(axis=0)
    bad = np.flatnonzero(joint <= 0.0)
    if bad.size:
        return (
            np.zeros(priors.shape[0]),
            np.zeros(verb_emis.shape),
            np.zeros(noun_emis.shape),
            -np.inf,
            int(bad[0]),
        )
    weighted = (prod / joint) * counts  # (K, nnz) posterior mass times count
    prior_acc = weighted.sum(axis=1)
    verb_acc = np.zeros(verb_emis.shape)
    noun_acc = np.zeros(noun_emis.shape)
    np.add.at(verb_acc.T, verb_ids, weighted.T)
    np.add.at(noun_acc.T, noun_ids, weighted.T)
    loglik = float(counts @ np.log(joint))
    return prior_acc, verb_acc, noun_acc, loglik, -1


def _mixture_weight_em_loop(noun_probs, freqs, init_weights, rel_tol, max_iters):
    # EM over mixture weights with the per-class noun probabilities fixed.
    # noun_probs is (S, K) row-per-sample-noun; freqs is (S,).
    # Returns (weights, loglik_trace, n_iters, converged, first_bad) where
    # loglik_trace[t] is the objective of the weights entering iteration t
    # and first_bad flags a sample noun with zero mixture probability (-1 ok).
    n_nouns, n_classes = noun_probs.shape
    size = 0.0
    for s in range(n_nouns):
        size += freqs[s]
    weights = init_weights.copy()
    new_weights = np.empty(n_classes)
    trace = np.empty(max_iters)
    n_iters = 0
    converged = False
    while n_iters < max_iters:
        loglik = 0.0
        for c in range(n_classes):
            new_weights[c] = 0.0
        for s in range(n_nouns):
            p = 0.0
            for c in range(n_classes):
                p += weights[c] * noun_probs[s, c]
            if p <= 0.0:
                return weights, trace[:n_iters], n_iters, False, s
            loglik += freqs[s] * np.log(p)
            scale = freqs[s] / p
            for c in range(n_classes):
                new_weights[c] += scale * weights[c] * noun_probs[s, c]
        trace[n_iters] = loglik
        n_iters += 1
        for c in range(n_classes):
            weights[c] = new_weights[c] / size
        if n_iters >= 2 and rel_tol > 0.0:
            if trace[n_iters - 1] - trace[n_iters - 2] < rel_tol * abs(trace[n_iters - 2]):
                converged = True
                break
    return weights, trace[:n_iters], n_iters, converged, -1


def _mixture_weight_em_numpy(noun_probs, freqs, init_weights, rel_tol, max_iters):
    size = float(freqs.sum())
    weights = init_weights.copy()
    trace = np.empty(max_iters)
    n_iters = 0
    converged = False
    while n_iters < max_iters:
        p = noun_probs @ weights  # (S,) mixture probability per sample noun
        bad = np.flatnonzero(p <= 0.0)
        if bad.size:
            return weights, trace[:n_iters], n_iters, False, int(bad[0])
        trace[n_iters] = float(freqs @ np.log(p))
        n_iters += 1
        weights = ((freqs / p) @ (noun_probs * weights)) / size
        if n_iters >= 2 and rel_tol > 0.0:
            if trace[n_iters - 1] - trace[n_iters - 2] < rel_tol * abs(trace[n_iters - 2]):
                converged = True
                break
    return weights, trace[:n_iters], n_iters, converged, -1


_NUMPY_IMPLS = {
    "em_pair_stats": _em_pair_stats_numpy,
    "mixture_weight_em": _mixture_weight_em_numpy,
}

_numba_impls: dict | None = None


def numba_impls() -> dict:
    """Compile (once) and return the numba versions of the kernels."""
    global _numba_impls
    if _numba_impls is None:
        from numba import njit

        _numba_impls = {
            "em_pair_stats": njit(cache=True)(_em_pair_stats_loop),
            "mixture_weight_em": njit(cache=True)(_mixture_weight_em_loop),
        }
    return _numba_impls


def numpy_impls() -> dict:
    return dict(_NUMPY_IMPLS)


def _resolve_backend() -> str:
    choice = os.environ.get("PLEX_BACKEND", "auto").strip().lower()
    if choice not in {"auto", "numba", "numpy"}:
        raise RuntimeError(f"PLEX_BACKEND must be auto, numba or numpy, got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise RuntimeError("PLEX_BACKEND=numba but numba is not importable")
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()

if BACKEND == "numba":
    _active = numba_impls()
else:
    _active = numpy_impls()

em_pair_stats = _active["em_pair_stats"]
mixture_weight_em = _active["mixture_weight_em"]


def set_threads(n: int) -> None:
    """Cap the numba threading layer; a no-op on the numpy backend."""
    if BACKEND != "numba":
        return
    import warnings

    import numba

    with warnings.catch_warnings():
        # probing the threading layers can warn about an outdated TBB
        warnings.simplefilter("ignore")
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
