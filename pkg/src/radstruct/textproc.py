"""Deterministic text processing for clinical finding terms.

Everything here is rule-based on purpose: concept keys, cache keys, and
source-sentence grounding all depend on these functions producing the
same output on every run and every machine.
"""

from __future__ import annotations

import re

# Token-level lemma exceptions consulted before any suffix rule.  Mostly
# medical nouns whose surface form looks plural (or whose plural is
# irregular) and would be mangled by generic stripping.
LEMMA_EXCEPTIONS: dict[str, str] = {
    "atelectasis": "atelectasis",
    "atelectases": "atelectasis",
    "pneumothoraces": "pneumothorax",
    "pneumothorax": "pneumothorax",
    "bases": "base",
    "lobes": "lobe",
    "series": "series",
    "diagnosis": "diagnosis",
    "diagnoses": "diagnosis",
    "metastasis": "metastasis",
    "metastases": "metastasis",
    "stenosis": "stenosis",
    "stenoses": "stenosis",
    "fibrosis": "fibrosis",
    "emphysema": "emphysema",
    "edema": "edema",
    "ascites": "ascites",
    "calices": "calyx",
    "vertebrae": "vertebra",
}

_INTRAWORD_HYPHEN = re.compile(r"(?<=[0-9a-z])-(?=[0-9a-z])")
_NON_WORD = re.compile(r"[^0-9a-zÀ-ɏ \x00]+")


def lemmatize_token(token: str) -> str:
    """Reduce one lowercase token to its lemma via suffix rules.

    Rule order: exception dictionary, then -ies -> -y, then -es stripping
    after sibilant stems, then plain -s stripping (guarded so -ss, -us and
    -is endings are left alone).
    """
    if token in LEMMA_EXCEPTIONS:
        return LEMMA_EXCEPTIONS[token]
    if len(token) > 4 and token.endswith("ies"):
        return token[:-3] + "y"
    if len(token) > 4 and token.endswith("es") and token[:-2].endswith(("ss", "sh", "ch", "x", "z")):
        return token[:-2]
    if len(token) > 3 and token.endswith("s") and not token.endswith(("ss", "us", "is")):
        return token[:-1]
    return token


def normalize_concept(text: str) -> str:
    """Canonical form of a concept term: the cache and dedup key.

    Lowercase, punctuation stripped (intra-word hyphens survive as
    hyphens), whitespace collapsed, every token lemmatized.  Idempotent:
    normalizing a normalized string is a no-op.
    """
    lowered = text.lower().replace("\x00", " ")
    lowered = _INTRAWORD_HYPHEN.sub("\x00", lowered)
    lowered = _NON_WORD.sub(" ", lowered)
    lowered = lowered.replace("\x00", "-")
    tokens = [lemmatize_token(tok) for tok in lowered.split()]
    return " ".join(tokens)


# Abbreviations that end with a period mid-sentence and must not split.
_ABBREVIATIONS = ("dr", "mr", "mrs", "ms", "prof", "vs", "approx", "fig", "etc", "e.g", "i.e", "st")

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9])")


def split_sentences(text: str) -> list[str]:
    """Split report text into sentences.

    Boundary rule: sentence-final punctuation followed by whitespace and a
    capital letter or digit, with an abbreviation exception list.  The
    returned sentences are whitespace-collapsed but otherwise verbatim, so
    they remain substrings of the whitespace-normalized report.
    """
    flat = " ".join(text.split())
    if not flat:
        return []
    pieces: list[str] = []
    start = 0
    for match in _SENTENCE_BOUNDARY.finditer(flat):
        candidate = flat[start : match.start()]
        last_word = candidate.rsplit(" ", 1)[-1].rstrip(".").lower()
        if last_word in _ABBREVIATIONS:
            continue
        pieces.append(candidate)
        start = match.end()
    tail = flat[start:]
    if tail:
        pieces.append(tail)
    return pieces


POLARITY_PRESENT = "present"
POLARITY_ABSENT = "absent"
POLARITY_UNCERTAIN = "uncertain"

ABSENT_CUES = (
    "no ",
    "not ",
    "without",
    "absence of",
    "absent",
    "negative for",
    "free of",
    "clear of",
    "resolved",
    "rather than",
    "ruled out",
)

UNCERTAIN_CUES = (
    "possible",
    "possibly",
    "probable",
    "may represent",
    "may be",
    "might",
    "cannot exclude",
    "cannot be excluded",
    "suspected",
    "suspicious for",
    "questionable",
    "equivocal",
    "concerning for",
    "versus",
)


def detect_polarity(sentence: str, extra_cues: tuple[str, ...] = ()) -> str:
    """Classify a finding mention as asserted, negated, or hedged.

    Cue matching is plain lowercase substring search over the whole
    sentence (cue rules, not linguistics: a mixed-polarity sentence takes
    the negated reading); negation wins over uncertainty when both cues
    appear.  ``extra_cues`` come from per-term lexicon entries and count
    as absence cues.
    """
    lowered = f" {sentence.lower()} "
    for cue in ABSENT_CUES + tuple(c.lower() for c in extra_cues):
        if cue in lowered:
            return POLARITY_ABSENT
    for cue in UNCERTAIN_CUES:
        if cue in lowered:
            return POLARITY_UNCERTAIN
    return POLARITY_PRESENT


def contains_tokens(haystack_tokens: list[str], needle_tokens: list[str]) -> int:
    """Index of the first needle token inside the haystack token bag.

    Returns the smallest haystack index at which any needle token occurs
    when *all* needle tokens occur somewhere in the haystack, else -1.
    Order-insensitive so inverted phrasings ("lungs are clear" vs "clear
    lungs") still match.
    """
    if not needle_tokens:
        return -1
    positions = []
    for needle in needle_tokens:
        if needle in haystack_tokens:
            positions.append(haystack_tokens.index(needle))
        else:
            return -1
    return min(positions)
