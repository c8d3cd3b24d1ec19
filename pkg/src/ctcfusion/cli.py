"""Command-line front end: prepare -> train-lm -> synth -> decode -> eval -> report.

Exit codes: 0 success, 1 internal error, 2 usage/input error. Every output
gets a JSON provenance sidecar (inputs, seeds, version) so runs are
reproducible from the artifacts alone.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__, corpus, emissions, metrics, ngram, textnorm
from .ctcdecode import DecodeParams, beam_search_decode, greedy_decode


class UsageError(Exception):
    pass


def _write(path: Path, content: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")


def _sidecar(path: Path, args: argparse.Namespace, **extra):
    info = {
        "tool": f"ctcfusion {__version__}",
        "command": args.command,
        "arguments": {k: v for k, v in vars(args).items() if k not in ("command", "func")},
        **extra,
    }
    _write(Path(str(path) + ".provenance.json"), json.dumps(info, indent=2, default=str) + "\n")


def _read_manifest(path: str) -> list[corpus.Utterance]:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"manifest not found: {path}")
    try:
        return corpus.parse_manifest(p.read_text(encoding="utf-8"))
    except ValueError as e:
        raise UsageError(f"{path}: {e}")


def _load_config(path: str) -> dict[str, str]:
    cfg = {}
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {path}")
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


# --- subcommands ------------------------------------------------------------


def cmd_prepare(args) -> int:
    utts = []
    for m in args.manifests:
        utts.extend(_read_manifest(m))
    spec = corpus.SplitSpec(
        test_fraction=args.test_fraction,
        val_fraction_of_train=args.val_fraction,
        seed=args.seed,
    )
    try:
        parts = corpus.split_dataset(utts, spec, by_speaker=args.by_speaker)
    except ValueError as e:
        raise UsageError(str(e))

    out = Path(args.out_dir)
    for name, part in parts.items():
        path = out / f"{name}.tsv"
        _write(path, corpus.format_manifest(part))
        _sidecar(path, args, partition=name, utterances=len(part))

    train_val = parts["train"] + parts["val"]
    normalized = [textnorm.normalize_text(u.text) for u in train_val]
    try:
        alphabet = textnorm.build_alphabet(normalized)
    except ValueError as e:
        raise UsageError(str(e))
    vocab_path = out / "vocab.txt"
    _write(vocab_path, alphabet.to_lines())
    _sidecar(vocab_path, args, symbols=alphabet.size)
    print(
        f"prepare: {len(parts['train'])} train / {len(parts['val'])} val / "
        f"{len(parts['test'])} test, {alphabet.size} symbols"
    )
    return 0


def _parse_source(spec: str) -> tuple[str, float]:
    if ":" in spec:
        path, frac = spec.rsplit(":", 1)
        try:
            return path, float(frac)
        except ValueError:
            raise UsageError(f"bad source fraction in {spec!r}")
    return spec, 1.0


def cmd_train_lm(args) -> int:
    sources = []
    for spec in args.sources:
        path, fraction = _parse_source(spec)
        p = Path(path)
        if not p.exists():
            raise UsageError(f"corpus file not found: {path}")
        sentences = [
            textnorm.normalize_text(line)
            for line in p.read_text(encoding="utf-8").splitlines()
        ]
        sources.append(([s for s in sentences if s], fraction))
    try:
        text = corpus.build_lm_corpus(sources, seed=args.seed)
        model = ngram.train(
            [s.split() for s in text], args.order, strict=args.strict
        )
    except ValueError as e:
        raise UsageError(str(e))
    out = Path(args.out)
    _write(out, ngram.write_arpa(model))
    _sidecar(out, args, sentences=len(text), vocab=len(model.vocab))
    print(f"train-lm: order {args.order}, {len(text)} sentences, {len(model.vocab)} words -> {out}")
    return 0


def cmd_synth(args) -> int:
    utts = _read_manifest(args.manifest)
    alphabet = textnorm.Alphabet.from_lines(Path(args.vocab).read_text(encoding="utf-8"))
    out = Path(args.out_dir)
    for k, u in enumerate(utts):
        params = emissions.SynthParams(
            frames_per_symbol=args.frames_per_symbol,
            blank_prob=args.blank_prob,
            noise_epsilon=args.noise_epsilon,
            seed=args.seed + k,
        )
        text = textnorm.normalize_text(u.text)
        try:
            m = emissions.synthesize_emissions(text, alphabet, params)
        except ValueError as e:
            raise UsageError(f"{u.utterance_id}: {e}")
        _write(out / f"{u.utterance_id}.emit", emissions.write_emissions(m))
    _sidecar(out / "emissions", args, utterances=len(utts))
    print(f"synth: {len(utts)} emission files -> {out}")
    return 0


def _decode_one(path_str: str) -> tuple[str, str, float, list | None]:
    em = emissions.read_emissions(Path(path_str).read_text(encoding="utf-8"))
    utt_id = Path(path_str).stem
    if _WORKER["greedy"]:
        return utt_id, greedy_decode(em, em.alphabet), 0.0, None
    ranked = beam_search_decode(em, em.alphabet, _WORKER["params"])
    text, score = ranked[0]
    nbest = None
    if _WORKER["nbest"]:
        nbest = [{"text": t, "score": s} for t, s in ranked[: _WORKER["nbest"]]]
    return utt_id, text, score, nbest


_WORKER: dict = {}


def _init_worker(lm_path, alpha, beta, beam, prune, greedy, nbest):
    lm = ngram.read_arpa(Path(lm_path).read_text(encoding="utf-8")) if lm_path else None
    _WORKER.update(
        params=DecodeParams(
            beam_width=beam, alpha=alpha, beta=beta, prune_log_floor=prune, lm=lm
        ),
        greedy=greedy,
        nbest=nbest,
    )


def cmd_decode(args) -> int:
    files = list(args.emissions)
    if not files:
        raise UsageError("no emission files given")
    for f in files:
        if not Path(f).exists():
            raise UsageError(f"emission file not found: {f}")
    if args.lm and not Path(args.lm).exists():
        raise UsageError(f"LM file not found: {args.lm}")
    prune = -math.inf if args.no_prune else args.prune_log_floor
    init_args = (args.lm, args.alpha, args.beta, args.beam, prune, args.greedy, args.nbest)

    if args.jobs > 1:
        import multiprocessing as mp

        with mp.Pool(args.jobs, initializer=_init_worker, initargs=init_args) as pool:
            results = pool.map(_decode_one, files)
    else:
        _init_worker(*init_args)
        results = [_decode_one(f) for f in files]

    out = Path(args.out)
    _write(out, "".join(f"{utt}\t{text}\n" for utt, text, _, _ in results))
    _sidecar(out, args, utterances=len(results))
    if args.nbest_out:
        nbest_all = {utt: nb for utt, _, _, nb in results if nb is not None}
        _write(Path(args.nbest_out), json.dumps(nbest_all, indent=2) + "\n")
    print(f"decode: {len(results)} utterances -> {out}")
    return 0


def cmd_eval(args) -> int:
    refs = {u.utterance_id: u.text for u in _read_manifest(args.ref)}
    hyp_path = Path(args.hyp)
    if not hyp_path.exists():
        raise UsageError(f"hypothesis file not found: {args.hyp}")
    hyps = []
    for lineno, line in enumerate(hyp_path.read_text(encoding="utf-8").splitlines(), 1):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise UsageError(f"{args.hyp}:{lineno}: expected utterance_id<TAB>hypothesis")
        hyps.append((cols[0], cols[1]))
    if not hyps:
        raise UsageError("empty evaluation set")

    detail_lines = []
    pairs = []
    for utt_id, hyp in hyps:
        if utt_id not in refs:
            raise UsageError(f"hypothesis {utt_id!r} has no reference")
        ref = textnorm.normalize_text(refs[utt_id])
        hyp = textnorm.normalize_text(hyp)
        try:
            b = metrics.wer(ref, hyp)
        except ValueError as e:
            raise UsageError(f"{utt_id}: {e}")
        pairs.append((ref, hyp))
        detail_lines.append(
            f"{utt_id}\t{b.wer_percent:.2f}\t{b.substitutions}\t{b.deletions}"
            f"\t{b.insertions}\t{b.reference_words}\n"
        )
    total = metrics.pooled_wer(pairs)

    out = Path(args.out_prefix + ".detail.tsv")
    _write(out, "".join(detail_lines))
    _sidecar(out, args, utterances=len(pairs))
    summary = {
        "utterances": len(pairs),
        "substitutions": total.substitutions,
        "deletions": total.deletions,
        "insertions": total.insertions,
        "reference_words": total.reference_words,
        "wer_percent": round(total.wer_percent, 4),
    }
    _write(Path(args.out_prefix + ".summary.json"), json.dumps(summary, indent=2) + "\n")
    print(f"eval: corpus WER {total.wer_percent:.2f}% over {len(pairs)} utterances")
    return 0


def cmd_report(args) -> int:
    report = metrics.EvalReport.empty()
    import csv as _csv

    for path in args.cells:
        p = Path(path)
        if not p.exists():
            raise UsageError(f"cells file not found: {path}")
        with p.open(encoding="utf-8") as fh:
            reader = _csv.DictReader(fh)
            required = {"model", "lm", "dataset", "wer"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise UsageError(f"{path}: header must contain {sorted(required)}")
            for row in reader:
                try:
                    report.add(row["model"], row["lm"], row["dataset"], float(row["wer"]))
                except ValueError as e:
                    raise UsageError(f"{path}: {e}")
    if not report.cells:
        raise UsageError("no report cells given")
    text, csv_text = metrics.render_report(report)
    if args.out_prefix:
        _write(Path(args.out_prefix + ".txt"), text)
        _write(Path(args.out_prefix + ".csv"), csv_text)
        _sidecar(Path(args.out_prefix + ".txt"), args)
    print(text, end="")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctcfusion",
        description="CTC decoding with n-gram LM fusion: data prep, LM training, "
        "decoding, and WER reporting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="split manifests and build the vocabulary")
    p.add_argument("manifests", nargs="+", help="3-column TSV manifests")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--test-fraction", type=float, default=0.10)
    p.add_argument("--val-fraction", type=float, default=0.10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--by-speaker", action="store_true")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train-lm", help="train a backoff n-gram LM, write ARPA")
    p.add_argument("sources", nargs="+", help="text file, optionally path:fraction")
    p.add_argument("--order", type=int, required=True, choices=range(2, 7))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="error on degenerate discount statistics")
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("synth", help="synthesize emission files from a manifest")
    p.add_argument("manifest")
    p.add_argument("--vocab", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--frames-per-symbol", type=int, default=1)
    p.add_argument("--blank-prob", type=float, default=0.4)
    p.add_argument("--noise-epsilon", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("decode", help="decode emission files to hypotheses")
    p.add_argument("emissions", nargs="+", help="CTCEMIT files")
    p.add_argument("--out", required=True, help="hypothesis TSV")
    p.add_argument("--lm", help="ARPA LM for shallow fusion")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--beam", type=int, default=50)
    p.add_argument("--prune-log-floor", type=float, default=-9.2)
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--greedy", action="store_true", help="best-path instead of beam search")
    p.add_argument("--nbest", type=int, default=0, help="hypotheses per utterance in --nbest-out")
    p.add_argument("--nbest-out", help="JSON file for N-best lists")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="score hypotheses against references")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True, help="reference manifest TSV")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="render the model-comparison grid")
    p.add_argument("cells", nargs="+", help="CSV files with model,lm,dataset,wer rows")
    p.add_argument("--out-prefix")
    p.set_defaults(func=cmd_report)
    return parser


def _apply_config(argv: list[str]) -> list[str]:
    """Expand --config key=value entries into flags (explicit flags win)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config requires a path")
    cfg = _load_config(argv[i + 1])
    argv = argv[:i] + argv[i + 2 :]
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                argv.append(flag)
        else:
            argv.extend([flag, value])
    return argv


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        argv = _apply_config(list(argv))
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # pragma: no cover - defensive
        print(f"internal error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
