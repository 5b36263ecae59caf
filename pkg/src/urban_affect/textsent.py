"""Dictionary tokenizer, trainable naive Bayes sentiment, word frequency.

The tokenizer segments text over a frequency lexicon: it lays out every
lexicon match as an edge in a position DAG, adds a single-character edge at
every position (lexicon frequency when the character is itself an entry,
otherwise a fallback frequency of 1), and picks the path maximizing
``sum(log(freq(word) / total))`` by dynamic programming from the right.

Path scores are compared exactly: a path's probability is the integer pair
``(prod(freqs), n_tokens)`` against ``total ** n_tokens``, so the argmax —
and the longest-first-token tie rule — never depend on float rounding.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Callable, Iterable, Mapping, Sequence

#: Minimal default stopword list (small function words; pure punctuation
#: and whitespace tokens are dropped regardless).
DEFAULT_STOPWORDS = frozenset(
    [
        "的", "了", "是", "在", "和", "有", "就", "都", "也", "很",
        "我", "你", "他", "她", "它", "这", "那", "个", "不", "与",
        "the", "a", "an", "of", "to", "and", "in", "is", "it", "for",
    ]
)


@dataclass(frozen=True)
class Lexicon:
    """Word-frequency dictionary driving segmentation."""

    entries: Mapping[str, int]
    total: int
    max_word_len: int

    @classmethod
    def from_entries(cls, entries: Mapping[str, int]) -> "Lexicon":
        if not entries:
            raise ValueError("lexicon must not be empty")
        clean: dict[str, int] = {}
        for word, count in entries.items():
            if not word:
                raise ValueError("lexicon words must be non-empty")
            if int(count) <= 0:
                raise ValueError(f"lexicon count must be positive for {word!r}")
            clean[word] = int(count)
        return cls(
            entries=clean,
            total=sum(clean.values()),
            max_word_len=max(len(w) for w in clean),
        )

    @classmethod
    def load(cls, stream: IO[str]) -> "Lexicon":
        """Read UTF-8 lines of the form ``word<TAB>count``."""
        entries: dict[str, int] = {}
        for lineno, line in enumerate(stream, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"lexicon line {lineno}: expected word<TAB>count")
            word, raw = parts
            try:
                entries[word] = int(raw)
            except ValueError as exc:
                raise ValueError(f"lexicon line {lineno}: bad count {raw!r}") from exc
        return cls.from_entries(entries)


def tokenize(text: str, lex: Lexicon) -> list[str]:
    """Best-path dictionary segmentation; concatenation equals the input."""
    n = len(text)
    if n == 0:
        return []
    entries = lex.entries
    total = lex.total
    # total**k for path lengths up to n, for exact cross-multiplied compares.
    pow_total = [1] * (n + 1)
    for k in range(1, n + 1):
        pow_total[k] = pow_total[k - 1] * total
    # best[i] = (prod_of_freqs, n_tokens, first_token_len) for text[i:].
    best: list[tuple[int, int, int]] = [(1, 0, 0)] * (n + 1)
    for i in range(n - 1, -1, -1):
        max_len = min(lex.max_word_len, n - i)
        chosen: tuple[int, int, int] | None = None
        for length in range(1, max_len + 1):
            freq = entries.get(text[i : i + length])
            if freq is None:
                if length > 1:
                    continue
                freq = 1  # single-character fallback edge
            tail_prod, tail_count, _ = best[i + length]
            cand = (freq * tail_prod, tail_count + 1, length)
            if chosen is None:
                chosen = cand
                continue
            # cand beats chosen iff cand_prod/T^cand_n > chosen_prod/T^chosen_n;
            # ties prefer the longer first token.
            lhs = cand[0] * pow_total[chosen[1]]
            rhs = chosen[0] * pow_total[cand[1]]
            if lhs > rhs or (lhs == rhs and cand[2] > chosen[2]):
                chosen = cand
        assert chosen is not None
        best[i] = chosen
    tokens = []
    i = 0
    while i < n:
        length = best[i][2]
        tokens.append(text[i : i + length])
        i += length
    return tokens


# --------------------------------------------------------------------------
# Naive Bayes sentiment


@dataclass(frozen=True)
class SentimentModel:
    """Multinomial naive Bayes over two sentiment classes."""

    n_pos_docs: int
    n_neg_docs: int
    pos_counts: Mapping[str, int]
    neg_counts: Mapping[str, int]
    pos_total: int
    neg_total: int
    vocab_size: int
    alpha: float
    tokenizer: Callable[[str], Sequence[str]] = field(compare=False)

    @property
    def prior_pos(self) -> float:
        return self.n_pos_docs / (self.n_pos_docs + self.n_neg_docs)


def train_sentiment(
    pos_docs: Sequence[str],
    neg_docs: Sequence[str],
    alpha: float = 1.0,
    tokenizer: Callable[[str], Sequence[str]] = str.split,
) -> SentimentModel:
    """Fit class priors and smoothed token counts from two labeled corpora."""
    if not pos_docs or not neg_docs:
        raise ValueError("both corpora must be non-empty")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    pos_counts: Counter[str] = Counter()
    neg_counts: Counter[str] = Counter()
    for doc in pos_docs:
        pos_counts.update(tokenizer(doc))
    for doc in neg_docs:
        neg_counts.update(tokenizer(doc))
    vocab = set(pos_counts) | set(neg_counts)
    if not vocab:
        raise ValueError("corpora contain no tokens")
    return SentimentModel(
        n_pos_docs=len(pos_docs),
        n_neg_docs=len(neg_docs),
        pos_counts=dict(pos_counts),
        neg_counts=dict(neg_counts),
        pos_total=sum(pos_counts.values()),
        neg_total=sum(neg_counts.values()),
        vocab_size=len(vocab),
        alpha=alpha,
        tokenizer=tokenizer,
    )


def score_text(model: SentimentModel, text: str) -> float:
    """P(positive | text) in [0, 1]; the prior when the text has no tokens.

    Token log-likelihoods are accumulated with fsum, so the score is
    independent of token order (bag of words, exactly).
    """
    tokens = list(model.tokenizer(text))
    if not tokens:
        return model.prior_pos
    alpha, v = model.alpha, model.vocab_size
    log_pos = [math.log(model.prior_pos)]
    log_neg = [math.log(1.0 - model.prior_pos)]
    pos_denom = model.pos_total + alpha * v
    neg_denom = model.neg_total + alpha * v
    for tok in tokens:
        log_pos.append(math.log((model.pos_counts.get(tok, 0) + alpha) / pos_denom))
        log_neg.append(math.log((model.neg_counts.get(tok, 0) + alpha) / neg_denom))
    lp = math.fsum(log_pos)
    ln = math.fsum(log_neg)
    # Posterior via the stable log-sum trick on two terms.
    m = max(lp, ln)
    return math.exp(lp - m) / (math.exp(lp - m) + math.exp(ln - m))


OPINION_SCALE = 10.0


def opinion_score(model: SentimentModel, text: str) -> float:
    """Sentiment on the 0-10 scale shared with the perception channel."""
    return OPINION_SCALE * score_text(model, text)


# --------------------------------------------------------------------------
# Word frequency


@dataclass(frozen=True)
class WordFrequencyReport:
    """Top tokens by count; ties break on ascending code-point order."""

    entries: tuple[tuple[str, int], ...]
    corpus_size: int
    stopwords_id: str


def _is_noise_token(token: str) -> bool:
    # Pure punctuation/whitespace/symbol runs carry no content.
    return not any(ch.isalnum() for ch in token)


def word_frequency(
    docs: Iterable[str],
    lex: Lexicon,
    stopwords: frozenset[str] | set[str] = DEFAULT_STOPWORDS,
    k: int = 50,
    stopwords_id: str = "default",
) -> WordFrequencyReport:
    """Count lexicon tokens across documents and keep the top ``k``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    counts: Counter[str] = Counter()
    n_docs = 0
    for doc in docs:
        n_docs += 1
        for tok in tokenize(doc, lex):
            if tok in stopwords or _is_noise_token(tok):
                continue
            counts[tok] += 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return WordFrequencyReport(
        entries=tuple(ranked[:k]),
        corpus_size=n_docs,
        stopwords_id=stopwords_id,
    )


def load_stopwords(stream: IO[str]) -> frozenset[str]:
    """One stopword per line; blank lines ignored."""
    return frozenset(line.strip() for line in stream if line.strip())


def write_word_frequency_csv(report: WordFrequencyReport, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["rank", "token", "count"])
    for rank, (token, count) in enumerate(report.entries, start=1):
        writer.writerow([rank, token, count])
