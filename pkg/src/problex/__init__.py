"""Latent-class verb-noun models, class-based lexica, and target-word selection."""

from .corpus import (
    BilingualTestItem,
    Dictionary,
    Distribution,
    FrameSlot,
    NounSample,
    PairCorpus,
    VerbSlot,
    load_bilingual,
    load_dictionary,
    load_pairs,
    marginal_noun_dist,
    object_sample,
    sample_noun,
    save_pairs,
)
from .disambig import (
    Choice,
    Method,
    Status,
    build_combined_sample,
    clustering_select,
    empirical_select,
    footnote_select,
    major_sense_select,
    problex_select,
    random_select,
)
from .errors import (
    DataError,
    NotFoundError,
    NumericalError,
    ParseError,
    PlexError,
    UsageError,
)
from .evaluate import (
    EvalReport,
    PseudoItem,
    eval_bilingual,
    eval_pseudo,
    make_pseudo_items,
    make_selector,
    mean_ambiguity,
    standardize,
)
from .lexicon import (
    Lexicon,
    LexiconEntry,
    build_entry,
    build_lexicon,
    estimated_frequency,
    fit_class_weights,
    load_lexicon,
    membership,
    save_lexicon,
    top_nouns,
)
from .model import (
    LCModel,
    TrainConfig,
    TrainTrace,
    em_step,
    init_model,
    joint,
    load_model,
    log_likelihood,
    posterior,
    save_model,
    train,
)
from .rng import substream

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
