#!/usr/bin/env python3
"""Synthetic fusion benchmark: how much does n-gram shallow fusion help?

Samples utterances from a seeded toy language, synthesizes noisy CTC
emissions for them, decodes with no LM and with 2..6-gram LMs trained on the
full toy corpus, and prints a per-order WER table.

Example:
    python scripts/run_synthetic_benchmark.py --utterances 200 --noise 0.35
"""
import argparse
import random
import sys
import time

from ctcfusion import ngram
from ctcfusion.ctcdecode import DecodeParams, beam_search_decode
from ctcfusion.emissions import SynthParams, synthesize_emissions
from ctcfusion.metrics import pooled_wer
from ctcfusion.textnorm import build_alphabet
from ctcfusion.toylang import make_sentences


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sentences", type=int, default=500, help="toy-language corpus size")
    ap.add_argument("--utterances", type=int, default=200, help="utterances to decode")
    ap.add_argument("--noise", type=float, default=0.35, help="synthesis noise epsilon")
    ap.add_argument("--frames-per-symbol", type=int, default=2)
    ap.add_argument("--blank-prob", type=float, default=0.4)
    ap.add_argument("--beam", type=int, default=50)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--orders", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    ap.add_argument("--corpus-seed", type=int, default=7)
    ap.add_argument("--seed", type=int, default=42, help="sampling / synthesis seed")
    args = ap.parse_args()

    sentences = make_sentences(args.sentences, seed=args.corpus_seed)
    texts = [" ".join(s) for s in sentences]
    alphabet = build_alphabet(texts)
    if args.utterances > len(texts):
        ap.error("--utterances cannot exceed --sentences")
    sample = random.Random(args.seed).sample(texts, args.utterances)

    print(f"synthesizing {len(sample)} utterances (noise={args.noise}) ...", file=sys.stderr)
    ems = [
        synthesize_emissions(
            text,
            alphabet,
            SynthParams(
                frames_per_symbol=args.frames_per_symbol,
                blank_prob=args.blank_prob,
                noise_epsilon=args.noise,
                seed=args.seed + i,
            ),
        )
        for i, text in enumerate(sample)
    ]

    train = [t.split() for t in texts]
    conditions = [("no LM", None)] + [
        (f"{k}-gram", ngram.train(train, k)) for k in args.orders
    ]

    print(f"{'condition':<10} {'WER%':>8} {'errors':>8} {'seconds':>8}")
    baseline = None
    for name, lm in conditions:
        params = DecodeParams(
            beam_width=args.beam, alpha=args.alpha, beta=args.beta, lm=lm
        )
        t0 = time.perf_counter()
        pairs = [
            (text, beam_search_decode(em, alphabet, params)[0][0])
            for text, em in zip(sample, ems)
        ]
        elapsed = time.perf_counter() - t0
        total = pooled_wer(pairs)
        print(f"{name:<10} {total.wer_percent:>8.2f} {total.errors:>8} {elapsed:>8.2f}")
        if baseline is None:
            baseline = total.wer_percent
        elif total.wer_percent > 0:
            print(f"{'':<10} (factor {baseline / total.wer_percent:.1f} vs no LM)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
