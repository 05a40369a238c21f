"""Command-line entry point: ``nspm <subcommand> ...``.

Every subcommand accepts ``--config FILE`` (flat ``key = value`` lines,
keys named after the long flags) and flags given on the command line win
over the file.  Domain errors exit with status 1 and a single line
``error: <module>.<Error>: <message>`` on stderr; usage errors exit 2.
"""
import argparse
import json
import logging
import os
import sys
import time

from ._io import atomic_write_text, read_text
from .exceptions import NSPMError, Unrepairable
from .template_engine import SPLIT_NAMES

log = logging.getLogger("nspm")

# Experiment rows: id -> (codec preset, multi-placeholder templates, direct entity pairs)
ROWS = {
    "v1": ("v1", False, False),
    "v1.1": ("v1.1", False, False),
    "v2": ("v1.1", True, False),
    "v2.1": ("v2.1", True, False),
    "v3": ("v3", True, False),
    "v4": ("v4", True, True),
}
ROW_DESCRIPTIONS = {
    "v1": "split URIs, raw punctuation",
    "v1.1": "consistent keyword casing",
    "v2": "two-placeholder templates",
    "v2.1": "double spaces collapsed",
    "v3": "merged tokens",
    "v4": "entity label pairs",
}

CATALOG_FILE = "catalog.tsv"
MODEL_FILE = "model.ckpt"
CURVE_FILE = "curve.csv"
INFO_FILE = "info.json"


class UsageError(Exception):
    pass


# -- configuration -------------------------------------------------------------

def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _ratios(text):
    try:
        parts = tuple(int(x) for x in text.replace(":", ",").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratios must look like 80,10,10, got {text!r}") from None
    if len(parts) != 3 or any(p < 0 for p in parts) or sum(parts) != 100:
        raise argparse.ArgumentTypeError(f"ratios must be three non-negative integers summing to 100, got {text!r}")
    return parts


def _presets(text):
    ids = [p.strip() for p in text.split(",") if p.strip()]
    bad = [p for p in ids if p not in ROWS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown preset(s) {', '.join(bad)}; choose from {', '.join(ROWS)}")
    if len(ids) < 2:
        raise argparse.ArgumentTypeError("an ablation needs at least two presets")
    return ids


def read_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment line."""
    values = {}
    for line_no, line in enumerate(read_text(path).splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(parser, values):
    actions = {a.dest: a for a in parser._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        try:
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                value = _bool(raw)
            elif action.type is not None:
                value = action.type(raw)
            else:
                value = raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} is not one of {', '.join(map(str, action.choices))}")
        defaults[key] = value
    parser.set_defaults(**defaults)


def resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("NSPM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"NSPM_SEED must be an integer, got {env!r}") from None


# -- building blocks -----------------------------------------------------------

def _bundled(path, name):
    from .datasets import bundled_path

    return path if path else bundled_path(name)


def load_catalog(triples_path, ranking_path=None, target_class=None, lenient=False):
    from .kb_catalog import build_catalog, load_ranking, parse_ntriples

    with open(triples_path, encoding="utf-8") as fh:
        triples = parse_ntriples(fh, lenient=lenient)
    catalog = build_catalog(triples, target_class=target_class)
    if ranking_path:
        catalog = load_ranking(read_text(ranking_path), catalog)
    return catalog


def load_templates(path):
    from .template_engine import parse_templates

    return parse_templates(read_text(path))


def generate_row(catalog, templates, row, seed, top_k=10, max_pairs=None, ratios=(80, 10, 10)):
    """Dataset and split indices for one experiment row.

    Every row draws from the same generated question set and the same
    question-disjoint split, so all rows share one test set.  Rows without
    multi-placeholder templates drop those questions from train and dev
    only; direct entity pairs are appended to train only.
    """
    from .template_engine import GeneratorConfig, direct_translations, instantiate, split_indices

    codec, multi, direct = ROWS[row]
    config = GeneratorConfig(codec, True, direct, top_k, max_pairs, seed)
    pairs = instantiate(templates, catalog, config)
    train, dev, test = split_indices(pairs, ratios, seed)
    if not multi:
        single = {t.id for t in templates if len(t.placeholders) < 2}
        train = [i for i in train if pairs[i].template_id in single]
        dev = [i for i in dev if pairs[i].template_id in single]
    if direct:
        extra = direct_translations(catalog, codec)
        train = train + list(range(len(pairs), len(pairs) + len(extra)))
        pairs = pairs + extra
    return pairs, (train, dev, test)


def _train_config(args):
    from .learner import TrainConfig

    return TrainConfig(
        epochs=args.epochs, batch_size=args.batch_size, learning_rate=args.learning_rate,
        optimizer=args.optimizer, grad_clip_norm=args.grad_clip or None, seed=args.seed,
        eval_every=args.eval_every, max_len=args.max_len,
    )


def train_model(pairs, splits, codec, args, curve_callback=None):
    from .learner import build_vocab, init_model, train

    train_pairs = [(list(pairs[i].nl), list(pairs[i].query)) for i in splits[0]]
    dev_pairs = [(list(pairs[i].nl), list(pairs[i].query)) for i in splits[1]]
    if not train_pairs:
        raise ValueError("the train split is empty")
    model = init_model(
        build_vocab([s for s, _ in train_pairs], args.min_count),
        build_vocab([t for _, t in train_pairs], args.min_count),
        args.embed_dim, args.hidden_dim, args.num_layers, args.dropout, args.bidirectional,
        seed=args.seed, preset=codec,
    )
    return train(model, train_pairs, dev_pairs, _train_config(args), curve_callback)


def report_row(row, report, curve, test_pairs, runtime=None):
    from .learner import convergence_epoch

    return {
        "encoding": row,
        "description": ROW_DESCRIPTIONS.get(row, ""),
        "bleu": report.bleu,
        "accuracy": report.accuracy,
        "n_test": report.n,
        "mean_query_length": sum(len(p.query) for p in test_pairs) / len(test_pairs),
        "convergence": convergence_epoch(curve),
        "final_dev_bleu": curve[-1].dev_bleu,
        "runtime": runtime,
    }


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def run_pipeline(args, row, out, catalog=None, templates=None):
    """Generate, split, train and evaluate one row under ``out``.

    Returns the table row.  Wall-clock time is kept out of every
    artifact except ``timing.json`` so that reruns are byte-identical.
    """
    from .evaluator import evaluate, format_table
    from .learner import curve_to_csv, save_model
    from .template_engine import write_dataset

    start = time.perf_counter()
    codec = ROWS[row][0]
    if catalog is None:
        catalog = load_catalog(_bundled(args.triples, "movies.nt"), args.ranking, args.target_class)
    if templates is None:
        templates = load_templates(_bundled(args.templates, "templates.tsv"))
    atomic_write_text(os.path.join(out, CATALOG_FILE), catalog.to_tsv())
    pairs, splits = generate_row(catalog, templates, row, args.seed, args.top_k, args.max_pairs, args.ratios)
    data_dir = os.path.join(out, "dataset")
    write_dataset(data_dir, pairs, splits)
    atomic_write_text(os.path.join(data_dir, INFO_FILE), _json({"preset": row, "codec": codec, "seed": args.seed}))
    log.info("%s: %d pairs, split %s", row, len(pairs), "/".join(str(len(s)) for s in splits))

    model, curve = train_model(pairs, splits, codec, args)
    save_model(model, os.path.join(out, MODEL_FILE))
    atomic_write_text(os.path.join(out, CURVE_FILE), curve_to_csv(curve))

    test_pairs = [pairs[i] for i in splits[2]]
    report = evaluate(model, [(p.nl, p.query) for p in test_pairs], codec, args.max_len)
    row_info = report_row(row, report, curve, test_pairs)
    doc = report.to_dict()
    doc["summary"] = row_info
    atomic_write_text(os.path.join(out, "report.json"), _json(doc))
    atomic_write_text(os.path.join(out, "report.txt"), format_table([row_info]))
    row_info["runtime"] = time.perf_counter() - start
    atomic_write_text(os.path.join(out, "timing.json"), _json({"wall_clock_seconds": row_info["runtime"]}))
    return row_info


# -- subcommands ---------------------------------------------------------------

def cmd_ingest(args):
    catalog = load_catalog(_bundled(args.triples, "movies.nt"), args.ranking, args.target_class, args.lenient)
    atomic_write_text(os.path.join(args.out, CATALOG_FILE), catalog.to_tsv())
    print(f"{len(catalog)} entities -> {os.path.join(args.out, CATALOG_FILE)}", file=sys.stderr)


def _catalog_from_args(args):
    from .kb_catalog import read_catalog_tsv

    if args.catalog:
        return read_catalog_tsv(read_text(args.catalog))
    return load_catalog(_bundled(args.triples, "movies.nt"), args.ranking, args.target_class)


def cmd_generate(args):
    from .template_engine import GeneratorConfig, direct_translations, instantiate, write_dataset

    codec, multi, direct = ROWS[args.preset]
    catalog = _catalog_from_args(args)
    templates = load_templates(_bundled(args.templates, "templates.tsv"))
    config = GeneratorConfig(codec, multi, direct, args.top_k, args.max_pairs, args.seed)
    pairs = instantiate(templates, catalog, config)
    if direct:
        pairs += direct_translations(catalog, codec)
    write_dataset(args.out, pairs)
    atomic_write_text(os.path.join(args.out, INFO_FILE), _json({"preset": args.preset, "codec": codec, "seed": args.seed}))
    print(f"{len(pairs)} pairs -> {args.out}", file=sys.stderr)


def _dataset_codec(data_dir, fallback):
    path = os.path.join(data_dir, INFO_FILE)
    if os.path.exists(path):
        return json.loads(read_text(path))["codec"]
    return ROWS[fallback][0]


def cmd_split(args):
    from .template_engine import DIRECT, read_dataset, split_indices, write_splits

    pairs, _ = read_dataset(args.data)
    generated = [i for i, p in enumerate(pairs) if p.template_id != DIRECT]
    train, dev, test = split_indices([pairs[i] for i in generated], args.ratios, args.seed)
    train, dev, test = ([generated[i] for i in part] for part in (train, dev, test))
    # direct entity pairs are train-only
    train = sorted(train + [i for i, p in enumerate(pairs) if p.template_id == DIRECT])
    out = args.out or args.data
    write_splits(out, (train, dev, test))
    print(f"train {len(train)} / dev {len(dev)} / test {len(test)} -> {out}", file=sys.stderr)


def _load_split_dataset(data_dir):
    from .template_engine import read_dataset

    pairs, splits = read_dataset(data_dir)
    if splits is None:
        raise UsageError(f"{data_dir} has no split.*.idx files; run `nspm split` first")
    return pairs, splits


def cmd_train(args):
    from .learner import curve_to_csv, save_model

    pairs, splits = _load_split_dataset(args.data)
    codec = _dataset_codec(args.data, args.preset)
    model, curve = train_model(pairs, splits, codec, args)
    save_model(model, os.path.join(args.out, MODEL_FILE))
    atomic_write_text(os.path.join(args.out, CURVE_FILE), curve_to_csv(curve))
    print(f"model -> {os.path.join(args.out, MODEL_FILE)}", file=sys.stderr)


def cmd_translate(args):
    from .interpreter import interpret
    from .learner import load_model, translate
    from .sparql_codec import tokenize_nl

    model = load_model(args.model)
    codec = model.preset or ROWS[args.preset][0]
    stream = open(args.input, encoding="utf-8") if args.input else sys.stdin
    try:
        for line in stream:
            if not line.strip():
                continue
            tokens = translate(model, tokenize_nl(line), args.max_len)
            if args.raw:
                print(" ".join(tokens), flush=True)
                continue
            try:
                sparql, report = interpret(tokens, codec)
            except Unrepairable as exc:
                log.warning("unrepairable output for %r: %s", line.strip(), exc)
                print("", flush=True)
                continue
            if args.repair:
                print(report.to_json(), file=sys.stderr, flush=True)
            print(sparql, flush=True)
    finally:
        if stream is not sys.stdin:
            stream.close()


def cmd_eval(args):
    from .evaluator import evaluate, format_table
    from .learner import load_model

    model = load_model(args.model)
    pairs, splits = _load_split_dataset(args.data)
    codec = model.preset or _dataset_codec(args.data, args.preset)
    test_pairs = [pairs[i] for i in splits[SPLIT_NAMES.index(args.split)]]
    report = evaluate(model, [(p.nl, p.query) for p in test_pairs], codec, args.max_len)
    row = {"encoding": codec, "bleu": report.bleu, "accuracy": report.accuracy}
    atomic_write_text(os.path.join(args.out, "report.json"), _json(report.to_dict()))
    atomic_write_text(os.path.join(args.out, "report.txt"), format_table([row]))
    sys.stdout.write(format_table([row]))


def cmd_pipeline(args):
    from .evaluator import format_table

    row = run_pipeline(args, args.preset, args.out)
    sys.stdout.write(format_table([row]))


def cmd_ablation(args):
    from .evaluator import format_table

    catalog = load_catalog(_bundled(args.triples, "movies.nt"), args.ranking, args.target_class)
    templates = load_templates(_bundled(args.templates, "templates.tsv"))
    rows = []
    for row in args.presets:
        try:
            rows.append(run_pipeline(args, row, os.path.join(args.out, row), catalog, templates))
        except (NSPMError, ValueError) as exc:
            code = exc.code if isinstance(exc, NSPMError) else type(exc).__name__
            log.error("row %s failed: %s: %s", row, code, exc)
            rows.append({"encoding": row, "description": ROW_DESCRIPTIONS[row], "error": code})
    timed = [dict(r) for r in rows]
    stable = [{k: v for k, v in r.items() if k != "runtime"} for r in rows]
    atomic_write_text(os.path.join(args.out, "ablation.json"), _json(stable))
    atomic_write_text(os.path.join(args.out, "ablation.txt"), format_table(stable))
    atomic_write_text(os.path.join(args.out, "ablation_timed.txt"), format_table(timed))
    sys.stdout.write(format_table(timed))
    if any("error" in r for r in rows):
        return 1
    return 0


# -- parser --------------------------------------------------------------------

def _add_common(p, preset=True):
    p.add_argument("--config", metavar="FILE", help="flat key = value file; flags override it")
    p.add_argument("--seed", type=int, default=None, help="random seed (falls back to $NSPM_SEED, then 0)")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    if preset:
        p.add_argument("--preset", choices=list(ROWS), default="v3", help="encoding row (default: v3)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def _add_kb(p):
    p.add_argument("--triples", metavar="FILE", help="N-Triples input (default: bundled movie KB)")
    p.add_argument("--ranking", metavar="FILE", help="uri<TAB>rank file overriding degree ranks")
    p.add_argument("--target-class", metavar="IRI", help="keep only entities of this class")


def _add_generation(p):
    p.add_argument("--templates", metavar="FILE", help="template TSV (default: bundled templates)")
    p.add_argument("--top-k", type=int, default=10, help="copies for the rank-1 entity (default: 10)")
    p.add_argument("--max-pairs", type=int, default=None, help="truncate the generated pairs")


def _add_ratios(p):
    p.add_argument("--ratios", type=_ratios, default=(80, 10, 10), help="train,dev,test percentages (default: 80,10,10)")


def _add_model(p):
    p.add_argument("--embed-dim", type=int, default=128)
    p.add_argument("--hidden-dim", type=int, default=128)
    p.add_argument("--num-layers", type=int, default=2)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--bidirectional", action="store_true", help="bidirectional encoder")
    p.add_argument("--min-count", type=int, default=1, help="vocabulary frequency threshold")


def _add_training(p):
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--optimizer", choices=["adam", "sgd"], default="adam")
    p.add_argument("--grad-clip", type=float, default=5.0, help="global gradient-norm clip, 0 disables")
    p.add_argument("--eval-every", type=int, default=1, help="epochs between dev BLEU measurements")


def _add_max_len(p):
    p.add_argument("--max-len", type=int, default=60, help="decoding length bound")


def build_parser():
    parser = argparse.ArgumentParser(prog="nspm", description="Neural SPARQL Machine pipeline.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("ingest", help="N-Triples -> ranked entity catalog")
    _add_common(p, preset=False)
    _add_kb(p)
    p.add_argument("--lenient", action="store_true", help="skip malformed lines instead of failing")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("generate", help="templates x catalog -> question/query pairs")
    _add_common(p)
    _add_kb(p)
    p.add_argument("--catalog", metavar="FILE", help="catalog TSV from `ingest` (instead of --triples)")
    _add_generation(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("split", help="question-disjoint train/dev/test split of a dataset")
    _add_common(p, preset=False)
    p.add_argument("--data", metavar="DIR", required=True, help="dataset directory")
    _add_ratios(p)
    p.set_defaults(func=cmd_split, out=None)

    p = sub.add_parser("train", help="train the encoder-decoder on a split dataset")
    _add_common(p)
    p.add_argument("--data", metavar="DIR", required=True, help="dataset directory with split files")
    _add_model(p)
    _add_training(p)
    _add_max_len(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("translate", help="questions (stdin or --input) -> SPARQL lines")
    _add_common(p)
    p.add_argument("--model", metavar="FILE", required=True, help="checkpoint from `train`")
    p.add_argument("--input", metavar="FILE", help="one question per line (default: stdin)")
    p.add_argument("--raw", action="store_true", help="print token sequences without repair")
    p.add_argument("--repair", action="store_true", help="also write one JSON repair report per input to stderr")
    _add_max_len(p)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("eval", help="score a checkpoint on a dataset split")
    _add_common(p)
    p.add_argument("--model", metavar="FILE", required=True)
    p.add_argument("--data", metavar="DIR", required=True)
    p.add_argument("--split", choices=list(SPLIT_NAMES), default="test")
    _add_max_len(p)
    p.set_defaults(func=cmd_eval)

    for name, func, helptext in (
        ("pipeline", cmd_pipeline, "ingest, generate, split, train and evaluate one row"),
        ("ablation", cmd_ablation, "run the pipeline for several rows on shared data"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p, preset=(name == "pipeline"))
        if name == "ablation":
            p.add_argument("--presets", type=_presets, default=list(ROWS),
                           help="comma-separated rows (default: all)")
        _add_kb(p)
        _add_generation(p)
        _add_ratios(p)
        _add_model(p)
        _add_training(p)
        _add_max_len(p)
        p.set_defaults(func=func)
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices.get(command)
    return None


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            sub = _subparser(parser, args.command)
            _apply_config(sub, read_config(args.config))
            args = parser.parse_args(argv)
        args.seed = resolve_seed(args.seed)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nspm: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"nspm: error: cannot read config: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        status = args.func(args)
    except UsageError as exc:
        print(f"nspm: error: {exc}", file=sys.stderr)
        return 2
    except NSPMError as exc:
        print(f"error: {exc.code}: {_one_line(exc)}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return 1
    return status or 0


def _one_line(exc):
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
