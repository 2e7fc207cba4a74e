#!/usr/bin/env python3
"""Linear baseline (1 layer) vs deeper MLP on pronoun generation, with a
paired t-test over per-item correctness on the test split.

Usage:
  python3 scripts/baseline_comparison.py --n 2500 --layers 2 --epochs 30
"""

import argparse

from droprec import mlp
from droprec.corpus import split_corpus
from droprec.embeddings import deterministic_fallback_table
from droprec.evaluate import paired_significance
from droprec.hypotheses import build_dpg_instances
from droprec.mlp import Hyperparams
from droprec.synth import builtin_grammar, generate_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", default="ontonotes-like",
                    choices=["separable", "ontonotes-like", "zhidao-like"])
    ap.add_argument("--n", type=int, default=2500)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--window", type=int, default=1)
    ap.add_argument("--layers", type=int, default=2, help="layer count of the deeper model")
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--lr", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=101)
    ap.add_argument("--alpha", type=float, default=0.05)
    args = ap.parse_args()

    corpus = generate_corpus(builtin_grammar(args.profile), args.n, seed=args.seed)
    train, dev, test = split_corpus(corpus, seed=args.seed + 1)
    vocab = sorted({t for c in (train, dev) for s in c.sentences for t in s.tokens})
    table = deterministic_fallback_table(vocab, args.dim, seed=args.seed + 2)
    num_classes = len(train.label_set)
    tr = [(i.feature.values, i.label) for i in build_dpg_instances(train, table, args.window)]
    te = [(i.feature.values, i.label) for i in build_dpg_instances(test, table, args.window)]
    print(f"{args.profile}: {len(tr)} train / {len(te)} test generation instances, "
          f"{num_classes} classes")

    scores = {}
    for name, layers in (("linear", 1), ("mlp", args.layers)):
        hp = Hyperparams(embed_dim=args.dim, window=args.window, layer_count=layers,
                         epochs=args.epochs, learning_rate=args.lr, seed=args.seed + 3)
        model = mlp.build_model(hp.input_dim, num_classes, hp)
        mlp.train(model, tr, hp)
        scores[name] = [float(mlp.predict(model, f)[0] == y) for f, y in te]
        print(f"{name} ({layers} layer{'s' if layers > 1 else ''}): "
              f"test acc {sum(scores[name]) / len(te):.4f}")

    res = paired_significance(scores["mlp"], scores["linear"], alpha=args.alpha)
    verdict = "significant" if res.significant else "not significant"
    print(f"paired t-test: t={res.statistic:.4f}, p={res.p_value:.6f} -> {verdict} "
          f"at alpha={args.alpha}")


if __name__ == "__main__":
    main()
