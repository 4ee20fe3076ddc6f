"""Command-line pipeline: generate, mine, weigh, score, analyze, correlate,
serve. Stages exchange JSON Lines files; every run writes a manifest with
content hashes so identical inputs and config are verifiable by diff.
"""

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, analysis, generator, scoring, study, treebank, weights
from .ngram import train_ngram
from .pairs import SHIFT_TYPES, read_pairs, write_pairs

DEFAULT_SEED = 1729


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def emit_manifest(command, args, inputs, outputs, manifest_path):
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "tool": "shiftbench",
        "version": __version__,
        "command": command,
        "seed": config.get("seed"),
        "config": {k: str(v) if isinstance(v, Path) else v for k, v in config.items()},
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


def _parse_shifts(value):
    if value == "all":
        return list(SHIFT_TYPES)
    shifts = [s.strip().upper() for s in value.split(",") if s.strip()]
    for s in shifts:
        if s not in SHIFT_TYPES:
            raise argparse.ArgumentTypeError(f"unknown shift type {s!r}")
    return shifts


def _load_lexicon(arg):
    if arg == "default":
        return generator.default_lexicon()
    with open(arg, encoding="utf-8") as fh:
        return generator.load_lexicon(fh)


def _build_backend(args):
    kind = args.backend
    if kind == "ngram":
        if not args.train:
            raise ValueError("--backend ngram requires --train CORPUS")
        with open(args.train, encoding="utf-8") as fh:
            sentences = [line.strip() for line in fh if line.strip()]
        return train_ngram(sentences, order=args.order, delta=args.delta)
    if kind == "http":
        if args.endpoint:
            return scoring.HttpLogprobBackend(args.endpoint, cache_path=args.cache)
        return scoring.HttpLogprobBackend.from_env(cache_path=args.cache)
    if kind == "replay":
        if not args.fixture:
            raise ValueError("--backend replay requires --fixture FILE")
        return scoring.ReplayBackend.from_file(args.fixture)
    raise ValueError(f"unknown backend {kind!r}")


def cmd_generate(args):
    lexicon = _load_lexicon(args.lexicon)
    all_pairs = []
    for shift in args.shift:
        if args.max_level is None:
            section = lexicon.section(shift)
            graded = [
                base
                for frame in section.frames
                for role, grade in zip(frame.roles, generator._GRADED[shift])
                if grade
                for base in section.constituents[role]
            ]
            max_level = min(len(section.chain(b)) for b in graded) if graded else 0
        else:
            max_level = args.max_level
        plan = generator.GenerationPlan.default(shift, max_level)
        all_pairs.extend(generator.expand(lexicon, plan))
    write_pairs(args.out, all_pairs)
    census = generator.dataset_census(all_pairs)
    print(json.dumps(census, indent=2, sort_keys=True))
    inputs = [] if args.lexicon == "default" else [args.lexicon]
    emit_manifest("generate", args, inputs, [args.out], f"{args.out}.manifest.json")
    return 0


def cmd_mine(args):
    trees = []
    for path in args.treebank.split(","):
        trees.extend(treebank.read_treebank_file(path.strip()))
    allowlist = None
    if args.verb_allowlist:
        lines = Path(args.verb_allowlist).read_text("utf-8").splitlines()
        allowlist = frozenset(w.strip().lower() for w in lines if w.strip())
    quality = treebank.QualityFilter(verb_allowlist=allowlist)
    mined = []
    for shift in args.shift:
        mined.extend(treebank.mine(trees, shift, args.sample_size, args.seed, quality))
    write_pairs(args.out, mined)
    inputs = [p.strip() for p in args.treebank.split(",")]
    if args.verb_allowlist:
        inputs.append(args.verb_allowlist)
    emit_manifest("mine", args, inputs, [args.out], f"{args.out}.manifest.json")
    return 0


def _backend_inputs(args):
    if args.backend == "ngram":
        return [args.train]
    if args.backend == "replay":
        return [args.fixture]
    return []


def cmd_weigh(args):
    pairs = read_pairs(args.pairs)
    tokenizer = _build_backend(args) if args.backend else None
    for pair in pairs:
        weights.annotate_pair(pair, tokenizer)
    write_pairs(args.out, pairs)
    emit_manifest("weigh", args, [args.pairs] + _backend_inputs(args),
                  [args.out], f"{args.out}.manifest.json")
    return 0


def cmd_score(args):
    pairs = read_pairs(args.pairs)
    backend = _build_backend(args)
    records = [scoring.preference(backend, pair) for pair in pairs]
    scoring.write_preferences(args.out, records)
    emit_manifest("score", args, [args.pairs] + _backend_inputs(args),
                  [args.out], f"{args.out}.manifest.json")
    return 0


def _detect_predictors(records):
    common = None
    for rec in records:
        keys = set(rec["ratios"])
        common = keys if common is None else common & keys
    return [p for p in analysis.PREDICTORS if common and p in common]


def cmd_analyze(args):
    pairs = read_pairs(args.pairs)
    prefs = scoring.read_preferences(args.preferences)
    records = analysis.join_records(pairs, prefs)
    if not records:
        raise ValueError("no records after joining pairs with preferences")
    predictors = (
        [p.strip() for p in args.predictors.split(",")] if args.predictors
        else _detect_predictors(records)
    )
    if args.lambda_grid:
        lambda_grid = tuple(float(v) for v in args.lambda_grid.split(","))
    else:
        from .gam import DEFAULT_LAMBDA_GRID as lambda_grid
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    table = analysis.ablate(records, predictors, basis_size=args.basis_size,
                            lambda_grid=lambda_grid)
    ablation_path = out_dir / "ablation.tsv"
    ablation_path.write_text(table.to_tsv(), encoding="utf-8")
    outputs.append(ablation_path)
    grouped = {}
    for rec in records:
        grouped.setdefault((rec["backend_id"], rec["shift_type"]), []).append(rec)
    for (backend_id, shift_type), group in sorted(grouped.items()):
        curves = {m: analysis.preference_curve(group, m, bins=args.bins) for m in predictors}
        safe = "".join(c if c.isalnum() or c in "._-" else "_" for c in backend_id)
        path = out_dir / f"curves_{safe}_{shift_type}.tsv"
        analysis.write_curve_tsv(path, curves)
        outputs.append(path)
    for row in table.rows:
        for where, message in row.errors.items():
            print(f"ablation {row.backend_id}/{row.shift_type} [{where}]: {message}", file=sys.stderr)
    emit_manifest("analyze", args, [args.pairs, args.preferences], outputs,
                  out_dir / "manifest.json")
    return 0


def _load_aggregates(args):
    if args.aggregates:
        out = []
        for line in Path(args.aggregates).read_text("utf-8").splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out
    store = study.StudyStore(pool=[], data_dir=args.data_dir, attention_checks=[])
    return [agg.to_record() for agg in store.aggregates()]


def cmd_correlate(args):
    if not args.aggregates and not args.data_dir:
        raise ValueError("correlate needs --aggregates FILE or --data-dir DIR")
    pairs = {p.id: p for p in read_pairs(args.pairs)}
    prefs = scoring.read_preferences(args.preferences)
    human = {
        rec["pair_id"]: rec["mean_rating"]
        for rec in _load_aggregates(args)
        if not rec["excluded"]
    }
    grouped = {}
    for pref in prefs:
        pair = pairs.get(pref.pair_id)
        if pair is None or pref.pair_id not in human:
            continue
        grouped.setdefault((pref.backend_id, pair.shift_type), []).append(
            (human[pref.pair_id], pref.m_preference)
        )
    lines = ["backend\tshift_type\tn\trho\tabs_rho"]
    for (backend_id, shift_type), values in sorted(grouped.items()):
        if len(values) < 3:
            print(f"skipping {backend_id}/{shift_type}: only {len(values)} pairs",
                  file=sys.stderr)
            continue
        try:
            rho = analysis.spearman([v[0] for v in values], [v[1] for v in values])
        except ValueError as exc:
            print(f"skipping {backend_id}/{shift_type}: {exc}", file=sys.stderr)
            continue
        lines.append(f"{backend_id}\t{shift_type}\t{len(values)}\t{rho:.6f}\t{abs(rho):.6f}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    inputs = [args.pairs, args.preferences]
    if args.aggregates:
        inputs.append(args.aggregates)
    emit_manifest("correlate", args, inputs, [args.out], f"{args.out}.manifest.json")
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    pool = read_pairs(args.pairs)
    checks = study.load_attention_checks(args.attention_checks)
    store = study.StudyStore(
        pool=pool, attention_checks=checks, data_dir=args.data_dir, seed=args.seed,
        items_per_assignment=args.items_per_assignment,
        attention_count=args.attention_count,
    )
    uvicorn.run(create_app(store), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="shiftbench",
        description="Constituent-movement minimal pairs: generation, scoring, analysis.",
    )
    parser.add_argument("--version", action="version", version=f"shiftbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="expand a lexicon into graded minimal pairs")
    p.add_argument("--lexicon", default="default", help="lexicon JSON path or 'default'")
    p.add_argument("--shift", type=_parse_shifts, default=list(SHIFT_TYPES),
                   help="comma-separated shift types or 'all'")
    p.add_argument("--max-level", type=int, default=None,
                   help="cap modifier levels (default: full chains)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("mine", help="mine minimal pairs from a bracketed treebank")
    p.add_argument("--treebank", required=True, help="treebank file(s), comma-separated")
    p.add_argument("--shift", type=_parse_shifts, default=list(SHIFT_TYPES))
    p.add_argument("--sample-size", type=int, default=500)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--verb-allowlist", default=None, help="file of allowed verb lemmas")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    def add_backend_flags(p, required=False):
        p.add_argument("--backend", choices=["ngram", "http", "replay"], required=required)
        p.add_argument("--train", default=None, help="training corpus for --backend ngram")
        p.add_argument("--order", type=int, default=2)
        p.add_argument("--delta", type=float, default=1.0)
        p.add_argument("--endpoint", default=None, help="URL for --backend http")
        p.add_argument("--cache", default=None, help="response cache file for --backend http")
        p.add_argument("--fixture", default=None, help="recorded logprobs for --backend replay")

    p = sub.add_parser("weigh", help="annotate pairs with weight measures and ratios")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    add_backend_flags(p)
    p.set_defaults(func=cmd_weigh)

    p = sub.add_parser("score", help="score pair preferences against a backend")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    add_backend_flags(p, required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("analyze", help="ablation table and preference curves")
    p.add_argument("--pairs", required=True, help="weighted pairs file")
    p.add_argument("--preferences", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--predictors", default=None, help="comma-separated ratio metrics")
    p.add_argument("--basis-size", type=int, default=10)
    p.add_argument("--bins", type=int, default=12)
    p.add_argument("--lambda-grid", default=None,
                   help="comma-separated smoothing grid (default logspace 1e-4..1e4, 12 points)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("correlate", help="Spearman correlation with human aggregates")
    p.add_argument("--pairs", required=True)
    p.add_argument("--preferences", required=True)
    p.add_argument("--aggregates", default=None, help="aggregates JSONL (from /api/aggregates)")
    p.add_argument("--data-dir", default=None, help="study data dir to fold logs from")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("serve", help="run the judgment study service")
    p.add_argument("--pairs", required=True)
    p.add_argument("--data-dir", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--items-per-assignment", type=int, default=25)
    p.add_argument("--attention-count", type=int, default=2)
    p.add_argument("--attention-checks", default=None, help="catalogue JSONL (default: bundled)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except (OSError, ValueError, KeyError, scoring.BackendError, study.StudyError) as exc:
        print(f"shiftbench {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
