"""Tokenization helpers shared by the vectorizer, term networks, and portraits."""

from __future__ import annotations

import re

# Compact English stopword list; enough to keep title unigrams and n-gram
# candidates from being dominated by function words.
STOPWORDS = frozenset(
    """
    a about above after again against all also am an and any are as at be
    because been before being below between both but by can could did do does
    doing down during each few for from further had has have having he her
    here hers him his how i if in into is it its itself just me more most my
    no nor not now of off on once only or other our ours out over own s same
    she should so some such t than that the their theirs them then there
    these they this those through to too under until up upon very was we were
    what when where which while who whom why will with would you your yours
    via using used use based upon toward towards
    """.split()
)

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:['’][a-z0-9]+)?")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens of ``text`` (alphanumeric runs)."""
    return _TOKEN_RE.findall(text.casefold())


def content_tokens(text: str) -> list[str]:
    """Tokens of ``text`` with stopwords removed."""
    return [t for t in tokenize(text) if t not in STOPWORDS]


def ngrams_within_stopword_boundaries(text: str, max_n: int = 3) -> list[str]:
    """1..max_n word n-grams that neither contain a stopword nor cross one.

    Stopwords (and punctuation handled by tokenization) act as window
    boundaries, so "responsible AI governance" yields the full trigram while
    "fairness of models" yields only "fairness" and "models".
    """
    grams: list[str] = []
    window: list[str] = []
    for tok in tokenize(text):
        if tok in STOPWORDS:
            window = []
            continue
        window.append(tok)
        if len(window) > max_n:
            window = window[-max_n:]
        for n in range(1, len(window) + 1):
            grams.append(" ".join(window[-n:]))
    return grams
