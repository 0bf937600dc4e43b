"""``slice2vec`` command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

import argparse
import csv
import logging
import sys

import numpy as np

from . import plotting
from .analysis import label_chord, parse_chord_name, tonnetz_distance
from .config import ConfigError, parse_bool, read_config
from .corpus import format_word, parse_word, read_corpus, write_corpus
from .embedding import load_model, nearest_neighbors, overlap_hints, save_model
from .errors import DataError, NumericalError
from .midi import parse_key, pitch_class_name
from .pipeline import corpus_stats, ingest, prepare_piece
from .remix import render_midi, replace_slices
from .sgns import TrainingConfig, init_model, train
from .slicer import DEFAULT_IOI_THRESHOLD
from .tsne import TsneConfig, tsne_embed
from .vocabulary import build_vocabulary

log = logging.getLogger("slice2vec")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

LOG_FORMAT = "ts=%(asctime)s level=%(levelname)s logger=%(name)s msg=%(message)s"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# (subcommand, dest) pairs that must end up set, from a flag or the config file
REQUIRED = {
    "ingest": ["out"],
    "stats": ["corpus"],
    "train": ["corpus", "out"],
    "nearest": ["model", "slice"],
    "label": ["corpus", "out"],
    "tsne": ["model", "out"],
    "remix": ["model", "input", "positions", "out"],
    "tonal-distance": ["a", "b"],
}


def _lr_value(text):
    return text if text == "auto" else float(text)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key=value config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--log-level", default=argparse.SUPPRESS)

    parser = _Parser(prog="slice2vec", description="Skip-gram embeddings of polyphonic music slices.")
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--log-level", default="INFO")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("ingest", parents=[common], help="MIDI files -> slice corpus")
    p.add_argument("paths", nargs="+", help="MIDI files or directories")
    p.add_argument("--out")
    p.add_argument("--key-override", help="tonic:mode, e.g. D:major, bypasses key detection")
    p.add_argument("--ioi-threshold", type=float, default=DEFAULT_IOI_THRESHOLD)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("stats", parents=[common], help="corpus statistics")
    p.add_argument("--corpus")
    p.add_argument("--csv", help="write machine-readable statistics here")
    p.add_argument("--plot", help="IOI histogram figure")

    defaults = TrainingConfig()
    p = sub.add_parser("train", parents=[common], help="train skip-gram embeddings")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--dims", type=int, default=defaults.dims)
    p.add_argument("--window", type=int, default=defaults.window)
    p.add_argument("--negatives", type=int, default=defaults.negatives)
    p.add_argument("--epochs", type=int, default=defaults.epochs)
    p.add_argument("--lr", type=float, default=defaults.initial_lr)
    p.add_argument("--lr-floor", type=float, default=defaults.lr_floor)
    p.add_argument("--noise-exponent", type=float, default=defaults.noise_exponent)
    p.add_argument("--log-every", type=int, default=defaults.log_every)
    p.add_argument("--min-count", type=int, default=defaults.min_count)
    p.add_argument("--subsample", type=float, default=defaults.subsample)
    p.add_argument("--loss-log", help="CSV of step, mean_loss")
    p.add_argument("--loss-plot", help="loss curve figure")

    p = sub.add_parser("nearest", parents=[common], help="cosine neighbours of a slice")
    p.add_argument("--model")
    p.add_argument("--slice", help='pitches, e.g. "60,64,67"')
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--include-self", action="store_true")

    p = sub.add_parser("label", parents=[common], help="chord labels for every corpus slice")
    p.add_argument("--corpus")
    p.add_argument("--out")

    tsne_defaults = TsneConfig()
    p = sub.add_parser("tsne", parents=[common], help="2-D t-SNE of chord-labelled vocabulary slices")
    p.add_argument("--model")
    p.add_argument("--out")
    p.add_argument("--filter-chords", help='e.g. "E,Eb" (append m for minor)')
    p.add_argument("--labels", help="labels.csv from the label command")
    p.add_argument("--svg", help="scatter plot (any matplotlib format by extension)")
    p.add_argument("--perplexity", type=float, default=tsne_defaults.perplexity)
    p.add_argument("--iterations", type=int, default=tsne_defaults.iterations)
    p.add_argument("--tsne-lr", type=_lr_value, default=tsne_defaults.learning_rate,
                   help='step size or "auto"')
    p.add_argument("--pca-dims", type=int, default=None)
    p.add_argument("--max-points", type=int, default=500)

    p = sub.add_parser("remix", parents=[common], help="replace slices by nearest neighbours")
    p.add_argument("--model")
    p.add_argument("--in", dest="input")
    p.add_argument("--positions", help='comma-separated slice indices or "all"')
    p.add_argument("--out")
    p.add_argument("--report", help="report CSV")
    p.add_argument("--plot", help="piano-roll comparison figure")
    p.add_argument("--key-override")
    p.add_argument("--ioi-threshold", type=float, default=DEFAULT_IOI_THRESHOLD)

    p = sub.add_parser("tonal-distance", parents=[common], help="tonnetz distance of two slices")
    p.add_argument("--a")
    p.add_argument("--b")
    return parser, sub


def _explicit(action, argv):
    return any(tok == opt or tok.startswith(opt + "=")
               for tok in argv for opt in action.option_strings)


def _convert(action, value):
    if action.nargs == 0:
        return parse_bool(value)
    if action.nargs in ("+", "*"):
        return [action.type(v) if action.type else v for v in value.split()]
    return action.type(value) if action.type else value


CONFIG_ALIASES = {"in": "input"}


def apply_config(args, argv, parser, subparsers):
    """Fill ``args`` from the config file for every flag not given on the command line."""
    entries = read_config(args.config)
    known = {a.dest for a in parser._actions}
    for sp in subparsers.choices.values():
        known.update(a.dest for a in sp._actions)
    actions = {a.dest: a for a in subparsers.choices[args.command]._actions}
    for lineno, key, value in entries:
        key = CONFIG_ALIASES.get(key, key)
        if key not in known or key in ("help", "command", "config"):
            raise ConfigError(f"{args.config}:{lineno}: unknown key {key!r}")
        action = actions.get(key)
        if action is None or _explicit(action, argv):
            continue
        try:
            setattr(args, key, _convert(action, value))
        except ValueError as exc:
            raise ConfigError(f"{args.config}:{lineno}: bad value for {key}: {exc}") from None


def _parse_positions(text, slices):
    if text.strip() == "all":
        return [k for k, s in enumerate(slices) if s.word]
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise DataError(f"positions must be integers or 'all', got {text!r}") from None


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# commands

def cmd_ingest(args):
    key = parse_key(args.key_override) if args.key_override else None
    pieces = ingest(args.paths, key, args.ioi_threshold, args.jobs)
    write_corpus(pieces, args.out)
    log.info("ingested pieces=%d slices=%d out=%s", len(pieces),
             sum(len(p.slices) for p in pieces), args.out)


def cmd_stats(args):
    stats = corpus_stats(read_corpus(args.corpus))
    out = sys.stdout
    out.write(f"pieces           {len(stats.slice_ticks)}\n")
    out.write(f"total tokens (T) {stats.total_tokens}\n")
    out.write(f"vocabulary (V)   {stats.vocabulary_size}\n")
    for path, ticks in stats.slice_ticks.items():
        out.write(f"slice_ticks      {ticks:>6}  {path}\n")
    if stats.ioi_histogram:
        out.write("IOI histogram (ticks: count)\n")
        for ioi in sorted(stats.ioi_histogram):
            out.write(f"  {ioi:>6}: {stats.ioi_histogram[ioi]}\n")
    if args.csv:
        _write_csv(args.csv, ["metric", "key", "value"], stats.rows())
    if args.plot:
        plotting.plot_ioi_histogram(stats.ioi_histogram, args.plot)


def training_config_from_args(args):
    return TrainingConfig(
        dims=args.dims, window=args.window, negatives=args.negatives,
        initial_lr=args.lr, lr_floor=args.lr_floor, epochs=args.epochs,
        seed=args.seed if args.seed is not None else TrainingConfig.seed,
        noise_exponent=args.noise_exponent, log_every=args.log_every,
        min_count=args.min_count, subsample=args.subsample,
    )


def cmd_train(args):
    config = training_config_from_args(args)
    pieces = read_corpus(args.corpus)
    vocab, sequences = build_vocabulary([p.words for p in pieces], config.min_count)
    model = init_model(vocab, config)
    log.info("training V=%d T=%d dims=%d window=%d epochs=%d", len(vocab),
             vocab.total_tokens, config.dims, config.window, config.epochs)
    model, loss_log = train(model, sequences, config,
                            progress=lambda s, l: log.info("step=%d mean_loss=%.6f", s, l))
    save_model(model, args.out)
    if args.loss_log:
        _write_csv(args.loss_log, ["step", "mean_loss"], ((s, repr(l)) for s, l in loss_log))
    if args.loss_plot:
        plotting.plot_loss({f"n={config.dims}, c={config.window}": loss_log},
                           args.loss_plot, config.log_every)


def cmd_nearest(args):
    model = load_model(args.model)
    vocab = model.vocabulary
    word = parse_word(args.slice)
    if word not in vocab:
        hints = "; ".join(format_word(w) for w in overlap_hints(vocab, word))
        raise DataError(f"slice {format_word(word)} is not in the vocabulary; closest by pitch overlap: {hints}")
    results = nearest_neighbors(model, vocab.lookup(word), args.top, not args.include_self)
    writer = csv.writer(sys.stdout)
    writer.writerow(["rank", "token_id", "slice", "cosine", "count"])
    for rank, r in enumerate(results, start=1):
        writer.writerow([rank, r.token_id, format_word(r.word), f"{r.score:.6f}", r.count])


def cmd_label(args):
    rows = []
    for piece in read_corpus(args.corpus):
        for k, s in enumerate(piece.slices):
            lab = label_chord(s.word)
            root = pitch_class_name(lab.root) if lab.labeled else ""
            quality = lab.quality if lab.labeled else "none"
            rows.append([piece.path, k, root, quality, lab.match_score, format_word(s.word)])
    _write_csv(args.out, ["piece", "slice_index", "root", "quality", "score", "slice"], rows)


def _labels_from_file(path):
    labels = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row.get("quality") in (None, "", "none") or "slice" not in row:
                continue
            word = parse_word(row["slice"])
            labels.setdefault(word, (parse_chord_name(row["root"])[0], row["quality"]))
    return labels


def cmd_tsne(args):
    model = load_model(args.model)
    vocab = model.vocabulary
    wanted = None
    if args.filter_chords:
        wanted = {parse_chord_name(t) for t in args.filter_chords.split(",") if t.strip()}
    from_file = _labels_from_file(args.labels) if args.labels else None
    norms = np.linalg.norm(model.input_vectors, axis=1)
    chosen, chords = [], []
    for token_id, word in enumerate(vocab.words):
        if from_file is not None:
            chord = from_file.get(word)
        else:
            lab = label_chord(word)
            chord = (lab.root, lab.quality) if lab.labeled else None
        if chord is None or norms[token_id] == 0 or (wanted and chord not in wanted):
            continue
        chosen.append(token_id)
        chords.append(chord)
        if len(chosen) == args.max_points:
            break
    if len(chosen) < 3:
        raise DataError(f"only {len(chosen)} vocabulary slices match the chord filter; t-SNE needs 3")
    config = TsneConfig(perplexity=args.perplexity, iterations=args.iterations,
                        learning_rate=args.tsne_lr, pca_dims=args.pca_dims,
                        seed=args.seed if args.seed is not None else 0)
    coords, trace = tsne_embed(model.input_vectors[chosen], config)
    log.info("tsne points=%d final_kl=%.6f", len(chosen), trace[-1])
    _write_csv(args.out, ["token_id", "x", "y", "chord_root", "chord_quality"],
               ([t, repr(float(x)), repr(float(y)), pitch_class_name(r), q]
                for t, (x, y), (r, q) in zip(chosen, coords, chords)))
    if args.svg:
        names = [pitch_class_name(r) + ("m" if q == "minor" else "") for r, q in chords]
        plotting.plot_tsne(coords, names, args.svg)


def cmd_remix(args):
    model = load_model(args.model)
    key = parse_key(args.key_override) if args.key_override else None
    piece, slice_ticks, slices = prepare_piece(args.input, key, args.ioi_threshold)
    positions = _parse_positions(args.positions, slices)
    if args.positions.strip() == "all":
        missing = [k for k in positions if slices[k].word not in model.vocabulary]
        if missing:
            log.warning("skipping %d slices absent from the vocabulary", len(missing))
        positions = [k for k in positions if k not in set(missing)]
    modified, report = replace_slices(slices, model, positions)
    render_midi(modified, slice_ticks, args.out, piece.ticks_per_quarter, piece.detected_key)
    if args.report:
        _write_csv(args.report,
                   ["position", "original", "replacement", "cosine", "tonnetz_distance", "held_conflicts"],
                   ([r.position, format_word(r.original), format_word(r.replacement),
                     f"{r.cosine:.6f}", "" if r.tonnetz_distance is None else f"{r.tonnetz_distance:.6f}",
                     " ".join(map(str, r.held_conflicts))] for r in report))
    if args.plot:
        plotting.plot_piano_roll(slices, modified, args.plot, [r.position for r in report])
    log.info("remix replaced=%d slice_ticks=%d out=%s", len(report), slice_ticks, args.out)


def cmd_tonal_distance(args):
    sys.stdout.write(f"{tonnetz_distance(parse_word(args.a), parse_word(args.b)):.6f}\n")


COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "train": cmd_train,
    "nearest": cmd_nearest,
    "label": cmd_label,
    "tsne": cmd_tsne,
    "remix": cmd_remix,
    "tonal-distance": cmd_tonal_distance,
}


def run(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        if not argv:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        level = str(args.log_level).upper()
        if not isinstance(logging.getLevelName(level), int):
            raise UsageError(f"slice2vec: unknown log level {args.log_level!r}")
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)
        if args.config:
            apply_config(args, argv, parser, subparsers)
        missing = [d for d in REQUIRED[args.command] if getattr(args, d, None) in (None, "")]
        if missing:
            flags = ", ".join("--" + ("in" if d == "input" else d.replace("_", "-")) for d in missing)
            raise UsageError(f"slice2vec {args.command}: missing required {flags}")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (DataError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
