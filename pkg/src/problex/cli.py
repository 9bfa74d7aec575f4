"""Command-line interface.

Subcommands: train, label, lookup, disambiguate, eval-pseudo,
eval-bilingual, selfcheck. Exit codes: 0 success, 1 usage error, 2 data or
parse error, 3 numerical failure.

Every artifact written here embeds its format version, the effective
configuration and input content hashes, so reruns with identical inputs
are byte-identical. The PLEX_THREADS env var mirrors --threads;
PLEX_BACKEND selects the numeric backend (see problex._kernels).
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import _kernels
from .corpus import (
    VerbSlot,
    load_bilingual,
    load_dictionary,
    load_pairs,
    marginal_noun_dist,
)
from .errors import DataError, NotFoundError, NumericalError, ParseError, PlexError, UsageError
from .evaluate import TSV_HEADER, eval_bilingual, eval_pseudo, make_pseudo_items, make_selector, standardize
from .lexicon import build_lexicon, load_lexicon, save_lexicon, top_nouns
from .model import TrainConfig, load_model, save_model, train
from .rng import substream
from ._textio import fmt17, sha256_file, write_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

METHODS = ["problex", "problex_footnote", "clustering", "empirical", "major_sense", "random"]


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors, matching our exit codes."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="plex", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--threads", type=int, default=None,
        help="cap worker threads (default: PLEX_THREADS or all cores)",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a latent-class model on a pair file")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=35)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--floor", type=float, default=0.0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("label", help="build a class-labeled lexicon from a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-size", type=float, default=1.0, help="minimum sample size for inclusion")
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=200)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("lookup", help="print a lexicon entry: class weights and top nouns")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--model", default=None, help="model path override (default: recorded path)")
    p.add_argument("--verb", required=True)
    p.add_argument("--class", dest="class_index", type=int, default=None)
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_lookup)

    p = sub.add_parser("disambiguate", help="select a target noun among candidates")
    p.add_argument("--method", choices=METHODS, default="problex")
    p.add_argument("--verb", required=True)
    p.add_argument("--cands", default=None, help="comma-separated candidate nouns")
    p.add_argument("--dict", dest="dict_path", default=None, help="dictionary file")
    p.add_argument("--source", default=None, help="source word to look up in --dict")
    p.add_argument("--lexicon", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--pairs", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_disambiguate)

    for name in ("eval-pseudo", "eval-bilingual"):
        p = sub.add_parser(name, help=f"run the {name.split('-')[1]} evaluation protocol")
        p.add_argument("--method", choices=METHODS, required=True)
        p.add_argument("--lexicon", default=None)
        p.add_argument("--model", default=None)
        p.add_argument("--pairs", default=None, help="training pair file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--pooled", action="store_true",
                       help="fit lexicon class weights once per verb on pooled candidates")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--trace", default=None, help="write a per-item trace file")
        if name == "eval-pseudo":
            p.add_argument("--test-pairs", required=True)
            p.add_argument("--count", type=int, required=True)
            p.add_argument("--strict-unseen", action="store_true",
                           help="redraw confounders seen with the verb in --pairs")
            p.set_defaults(func=cmd_eval_pseudo)
        else:
            p.add_argument("--test", required=True)
            p.set_defaults(func=cmd_eval_bilingual)

    p = sub.add_parser("selfcheck", help="run the built-in numeric oracles")
    p.set_defaults(func=cmd_selfcheck)
    return parser


def cmd_train(args) -> int:
    corpus = load_pairs(args.pairs)
    config = TrainConfig(
        n_classes=args.classes, seed=args.seed,
        max_iters=args.max_iters, rel_tol=args.rel_tol, floor=args.floor,
    )
    model, trace = train(corpus, config)
    comments = (
        f"config classes={config.n_classes} seed={config.seed} rel_tol={config.rel_tol!r} "
        f"max_iters={config.max_iters} floor={config.floor!r}",
        f"pairs sha256 {sha256_file(args.pairs)}",
    )
    save_model(model, args.out, comments)
    trace_lines = [
        f"# trace for {args.out}",
        f"# {comments[0]}",
        f"iterations {trace.iterations}",
        f"converged {str(trace.converged).lower()}",
        f"over_parameterized {str(trace.over_parameterized).lower()}",
    ]
    trace_lines.extend(f"{i} {fmt17(ll)}" for i, ll in enumerate(trace.log_likelihoods))
    write_text(str(args.out) + ".trace", trace_lines)
    print(
        f"trained {config.n_classes} classes on {corpus.n_pairs} pair types in "
        f"{trace.iterations} iterations (converged={str(trace.converged).lower()}) "
        f"final log-likelihood {trace.log_likelihoods[-1]:.6f}"
    )
    return EXIT_OK


def cmd_label(args) -> int:
    model = load_model(args.model)
    corpus = load_pairs(args.pairs)
    lexicon = build_lexicon(
        model, corpus, min_size=args.min_size,
        rel_tol=args.rel_tol, max_iters=args.max_iters,
    )
    comments = (
        f"config min_size={args.min_size!r} rel_tol={args.rel_tol!r} max_iters={args.max_iters}",
        f"pairs sha256 {sha256_file(args.pairs)}",
    )
    save_lexicon(lexicon, args.out, args.model, comments)
    print(f"labeled {len(lexicon.entries)} verb slots")
    return EXIT_OK


def cmd_lookup(args) -> int:
    lexicon = load_lexicon(args.lexicon, model_path=args.model)
    verb = VerbSlot.parse(args.verb)
    entry = lexicon.entries.get(verb)
    if entry is None:
        raise NotFoundError(f"no lexicon entry for {verb}")
    if args.class_index is not None:
        if not 0 <= args.class_index < lexicon.model.n_classes:
            raise UsageError(f"class must be in [0, {lexicon.model.n_classes})")
        classes = [args.class_index]
    else:
        order = np.argsort(-entry.class_weights, kind="stable")
        classes = [int(c) for c in order]
    blocks = []
    for c in classes:
        lines = [f"{verb} {c} {entry.class_weights[c]:.6g}"]
        lines.extend(f"{noun} {score:.6g}" for noun, score in top_nouns(entry, lexicon.model, c, args.top))
        blocks.append("\n".join(lines))
    print("\n\n".join(blocks))
    return EXIT_OK


def parse_lookup(text: str):
    """Parse `plex lookup` output back into (verb, class, weight, [(noun, freq)]) blocks."""
    blocks = []
    for raw in text.strip().split("\n\n"):
        lines = raw.strip().splitlines()
        head = lines[0].split(" ")
        if len(head) != 3:
            raise DataError(f"bad lookup header {lines[0]!r}")
        verb = VerbSlot.parse(head[0])
        nouns = []
        for line in lines[1:]:
            fields = line.split(" ")
            if len(fields) != 2:
                raise DataError(f"bad lookup noun line {line!r}")
            nouns.append((fields[0], float(fields[1])))
        blocks.append((verb, int(head[1]), float(head[2]), nouns))
    return blocks


def _candidates_from_args(args) -> list[str]:
    if args.cands is not None:
        return [c.strip() for c in args.cands.split(",") if c.strip()]
    if args.dict_path is not None and args.source is not None:
        dictionary = load_dictionary(args.dict_path)
        targets = dictionary.entries.get(args.source)
        if targets is None:
            raise NotFoundError(f"source word {args.source!r} not in dictionary")
        return list(targets)
    raise UsageError("need either --cands or both --dict and --source")


def _selector_from_args(args, pooled_items=None):
    lexicon = model = corpus = None
    if args.method == "problex":
        if args.lexicon is None:
            raise UsageError("--method problex needs --lexicon")
        lexicon = load_lexicon(args.lexicon, model_path=getattr(args, "model", None))
    if args.method in ("problex_footnote", "clustering"):
        if args.model is None:
            raise UsageError(f"--method {args.method} needs --model")
        model = load_model(args.model)
    if args.method in ("problex_footnote", "empirical", "major_sense"):
        if args.pairs is None:
            raise UsageError(f"--method {args.method} needs --pairs")
        corpus = load_pairs(args.pairs)
    rng = substream(args.seed, "random-baseline")
    return make_selector(
        args.method, lexicon=lexicon, model=model, corpus=corpus, rng=rng,
        pooled_items=pooled_items,
    )


def cmd_disambiguate(args) -> int:
    candidates = _candidates_from_args(args)
    selector = _selector_from_args(args)
    choice = selector(VerbSlot.parse(args.verb), candidates)
    if choice.chosen:
        cls = "-" if choice.class_index is None else str(choice.class_index)
        print(f"{choice.noun}\t{cls}\t{choice.score:.6g}\t{str(choice.tie).lower()}")
    else:
        print(f"ABSTAIN\t{choice.reason}")
    return EXIT_OK


def _config_comment(args, skip=("func", "command", "out", "trace")) -> str:
    fields = " ".join(
        f"{key}={value!r}" for key, value in sorted(vars(args).items()) if key not in skip
    )
    return f"# plex {args.command} {fields}"


def _emit_report(args, report, trace_rows) -> None:
    lines = [TSV_HEADER, report.tsv_line()]
    if args.out is not None:
        write_text(args.out, [_config_comment(args)] + lines)
    else:
        print("\n".join(lines))
    if args.trace is not None:
        write_text(args.trace, [_config_comment(args), "id\tchosen\tclass\tscore\toutcome"] + trace_rows)


def cmd_eval_pseudo(args) -> int:
    test_corpus = load_pairs(args.test_pairs)
    training = load_pairs(args.pairs) if args.pairs is not None else None
    if args.strict_unseen and training is None:
        raise UsageError("--strict-unseen needs --pairs")
    items = make_pseudo_items(
        test_corpus,
        marginal_noun_dist(test_corpus),
        args.count,
        substream(args.seed, "pseudo-gen"),
        training_corpus=training,
        require_unseen=args.strict_unseen,
    )
    selector = _selector_from_args(args, pooled_items=items if args.pooled else None)
    trace_rows: list[str] = []
    report = eval_pseudo(selector, items, seed=args.seed, trace=trace_rows if args.trace else None)
    _emit_report(args, report, trace_rows)
    return EXIT_OK


def cmd_eval_bilingual(args) -> int:
    items = load_bilingual(args.test)
    selector = _selector_from_args(args, pooled_items=items if args.pooled else None)
    trace_rows: list[str] = []
    report = eval_bilingual(selector, items, seed=args.seed, trace=trace_rows if args.trace else None)
    _emit_report(args, report, trace_rows)
    return EXIT_OK


def _selfcheck_standardize() -> bool:
    for amb in (2.0, 2.83, 3.51, 8.63, 9.17):
        if abs(standardize(1.0 / amb, amb) - 0.5) > 1e-12:
            return False
    grid = [standardize(p, 4.0) for p in np.linspace(0.01, 1.0, 50)]
    return all(b > a for a, b in zip(grid, grid[1:]))


def _selfcheck_marginal() -> bool:
    from .corpus import PairCorpus

    corpus = PairCorpus.from_pairs(
        [("take.aso:o", "road", 2.0), ("take.aso:o", "turn", 6.0), ("cross.aso:o", "road", 4.0)]
    )
    dist = marginal_noun_dist(corpus)
    hand = {"road": 6.0 / 12.0, "turn": 6.0 / 12.0}
    return all(abs(dist.probs[i] - hand[tok]) <= 1e-12 for i, tok in enumerate(dist.tokens))


def _selfcheck_monotone() -> bool:
    from .corpus import PairCorpus

    rng = np.random.default_rng(7)
    for k in (1, 3):
        for trial in range(3):
            pairs = []
            for vi in range(4):
                for ni in range(5):
                    if rng.random() < 0.6:
                        pairs.append((f"v{vi}.aso:o", f"n{ni}", float(rng.integers(1, 6))))
            if not pairs:
                continue
            corpus = PairCorpus.from_pairs(pairs)
            _model, trace = train(corpus, TrainConfig(n_classes=k, seed=trial, max_iters=40, rel_tol=0.0))
            lls = trace.log_likelihoods
            if any(b < a - 1e-9 for a, b in zip(lls, lls[1:])):
                return False
    return True


def _selfcheck_grid_oracle() -> bool:
    from .corpus import NounSample
    from .lexicon import fit_class_weights
    from .model import LCModel

    rng = np.random.default_rng(11)
    for trial in range(3):
        nouns = [f"n{n}" for n in range(4)]
        verb = VerbSlot.parse("v0.aso:o")
        model = LCModel(
            priors=rng.dirichlet(np.ones(2)),
            verb_emis=rng.dirichlet(np.ones(1), size=2),
            noun_emis=rng.dirichlet(np.ones(4), size=2),
            verb_vocab=(verb,),
            noun_vocab=tuple(nouns),
            verb_index={verb: 0},
            noun_index={n: i for i, n in enumerate(nouns)},
        )
        freqs = {n: float(rng.integers(1, 7)) for n in nouns}
        sample = NounSample(verb, freqs, math.fsum(freqs.values()))
        weights = fit_class_weights(model, sample, rel_tol=1e-13, max_iters=5000)
        f = np.array([freqs[n] for n in nouns])
        cols = model.noun_emis
        w0 = np.linspace(0.0, 1.0, 10001)
        mix = w0[:, None] * cols[0] + (1.0 - w0)[:, None] * cols[1]
        grid_best = float(np.max(np.log(mix) @ f))
        em_obj = float(f @ np.log(weights @ cols))
        if abs(em_obj - grid_best) > 1e-6:
            return False
    return True


def _selfcheck_partition() -> bool:
    from .corpus import PairCorpus
    from .lexicon import build_entry, estimated_frequency

    corpus = PairCorpus.from_pairs(
        [(f"v{v}.aso:o", f"n{n}", float(1 + (v * 7 + n * 3) % 5)) for v in range(3) for n in range(6)]
    )
    model, _trace = train(corpus, TrainConfig(n_classes=3, seed=5))
    for verb in corpus.verb_vocab:
        entry = build_entry(model, corpus, verb)
        for noun, freq in entry.sample.freqs.items():
            total = math.fsum(
                estimated_frequency(entry, model, c, noun) for c in range(model.n_classes)
            )
            if abs(total - freq) > 1e-12 * max(1.0, freq):
                return False
    return True


def run_selfcheck(out=None) -> bool:
    if out is None:
        out = sys.stdout
    checks = [
        ("standardize identities", _selfcheck_standardize),
        ("noun marginal vs hand sums", _selfcheck_marginal),
        ("EM monotonicity", _selfcheck_monotone),
        ("weight-fit grid oracle", _selfcheck_grid_oracle),
        ("class frequency partition", _selfcheck_partition),
    ]
    all_ok = True
    for name, check in checks:
        ok = check()
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=out)
    return all_ok


def cmd_selfcheck(_args) -> int:
    return EXIT_OK if run_selfcheck() else EXIT_NUMERIC


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    threads = args.threads
    if threads is None:
        env = os.environ.get("PLEX_THREADS")
        threads = int(env) if env else os.cpu_count() or 1
    try:
        _kernels.set_threads(threads)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParseError, NotFoundError, DataError, PlexError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
