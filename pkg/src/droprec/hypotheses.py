"""Candidate gap enumeration and training-instance construction.

Every position between adjacent tokens, plus the sentence start and end,
is a candidate gap: a sentence of n tokens yields n + 1 of them.  Gap
detection trains on binary instances (one positive per annotation, a
seeded sample of the unannotated gaps as negatives); pronoun generation
trains on one multi-class instance per annotated gap.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus, AnnotatedSentence
from .embeddings import ContextVector, EmbeddingTable, context_embedding
from .rng import SplitMix64

# Binary class indices for gap detection.
NOT_DROPPED = 0
DROPPED = 1


@dataclass(frozen=True)
class DroppedHypothesis:
    """One candidate gap in a sentence, optionally carrying its feature."""

    sentence_ref: int
    gap_index: int
    feature: ContextVector | None = None


@dataclass(frozen=True)
class DpiInstance:
    feature: ContextVector
    label: int  # DROPPED or NOT_DROPPED


@dataclass(frozen=True)
class DpgInstance:
    feature: ContextVector
    label: int  # class index into the corpus label set


def enumerate_hypotheses(
    sentence: AnnotatedSentence,
    sentence_ref: int = 0,
    table: EmbeddingTable | None = None,
    window: int | None = None,
) -> list[DroppedHypothesis]:
    """All n + 1 candidate gaps of a sentence, in increasing gap order.

    Features are attached only when both `table` and `window` are given.
    """
    n = len(sentence.tokens)
    if n < 1:
        raise ValueError("cannot enumerate gaps of an empty sentence")
    out = []
    for gap in range(n + 1):
        feature = None
        if table is not None and window is not None:
            feature = context_embedding(sentence, gap, window, table)
        out.append(DroppedHypothesis(sentence_ref, gap, feature))
    return out


def build_dpi_instances(
    corpus: Corpus,
    table: EmbeddingTable,
    window: int,
    negative_rate: float = 1.0,
    seed: int = 0,
) -> list[DpiInstance]:
    """Binary gap-detection instances for a whole corpus.

    Every annotated gap becomes a positive.  Unannotated gaps are
    negatives, downsampled to round(negative_rate * count) by shuffling
    the full negative list with SplitMix64(seed) and keeping a prefix.
    Output order is sentence order then gap order, positives and
    negatives interleaved as they occur.
    """
    if not 0.0 < negative_rate <= 1.0:
        raise ValueError(f"negative_rate must be in (0, 1], got {negative_rate}")
    annotated = []
    unannotated = []
    for si, sent in enumerate(corpus.sentences):
        gold = {gap for gap, _ in sent.annotations}
        for gap in range(len(sent.tokens) + 1):
            (annotated if gap in gold else unannotated).append((si, gap))

    if negative_rate < 1.0:
        keep = int(len(unannotated) * negative_rate + 0.5)  # round half up
        pool = list(unannotated)
        SplitMix64(seed).shuffle(pool)
        selected = set(pool[:keep])
    else:
        selected = set(unannotated)

    positives = set(annotated)
    instances = []
    for si, sent in enumerate(corpus.sentences):
        for gap in range(len(sent.tokens) + 1):
            key = (si, gap)
            if key in positives:
                label = DROPPED
            elif key in selected:
                label = NOT_DROPPED
            else:
                continue
            instances.append(DpiInstance(context_embedding(sent, gap, window, table), label))
    return instances


def build_dpg_instances(corpus: Corpus, table: EmbeddingTable, window: int) -> list[DpgInstance]:
    """One pronoun-generation instance per annotation, at its gold gap."""
    instances = []
    for sent in corpus.sentences:
        for gap, tag in sent.annotations:
            label = corpus.label_set.index_of(tag)
            instances.append(DpgInstance(context_embedding(sent, gap, window, table), label))
    return instances
