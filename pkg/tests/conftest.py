import numpy as np
import pytest

from problex import LCModel, PairCorpus, VerbSlot


def make_model(priors, verb_emis, noun_emis, verbs, nouns) -> LCModel:
    """Assemble an LCModel from explicit arrays (tests only)."""
    verbs = [VerbSlot.parse(v) if isinstance(v, str) else v for v in verbs]
    return LCModel(
        priors=np.asarray(priors, dtype=np.float64),
        verb_emis=np.asarray(verb_emis, dtype=np.float64),
        noun_emis=np.asarray(noun_emis, dtype=np.float64),
        verb_vocab=tuple(verbs),
        noun_vocab=tuple(nouns),
        verb_index={v: i for i, v in enumerate(verbs)},
        noun_index={n: i for i, n in enumerate(nouns)},
    )


def random_model(rng, n_classes, n_verbs, n_nouns) -> LCModel:
    """A model with dirichlet-random (well-spread) rows."""
    return make_model(
        rng.dirichlet(np.ones(n_classes)),
        rng.dirichlet(np.ones(n_verbs), size=n_classes),
        rng.dirichlet(np.ones(n_nouns), size=n_classes),
        [f"v{i}.aso:o" for i in range(n_verbs)],
        [f"n{i}" for i in range(n_nouns)],
    )


def random_corpus(rng, max_verbs=8, max_nouns=10, density=0.6) -> PairCorpus:
    n_verbs = int(rng.integers(2, max_verbs + 1))
    n_nouns = int(rng.integers(2, max_nouns + 1))
    pairs = []
    for v in range(n_verbs):
        for n in range(n_nouns):
            if rng.random() < density:
                pairs.append((f"v{v}.aso:o", f"n{n}", float(rng.integers(1, 10))))
    if not pairs:
        pairs.append(("v0.aso:o", "n0", 1.0))
    return PairCorpus.from_pairs(pairs)


@pytest.fixture
def tiny_corpus() -> PairCorpus:
    return PairCorpus.from_pairs(
        [
            ("cross.aso:o", "border", 3.0),
            ("cross.aso:o", "mind", 5.0),
            ("enter.aso:o", "room", 2.0),
            ("enter.aso:o", "border", 1.0),
        ]
    )
