"""German text canonicalization and the token-equivalence oracle.

Canonical tokens are lowercase ASCII words: umlauts and eszett are folded
(ae/oe/ue/ss), other diacritics stripped, punctuation and digits removed.
Hyphens and apostrophes are deleted, not treated as split points, so
"D'Artagnan" and "Baden-Wuerttemberg" stay single tokens.

Equivalence between token sequences is decided by comparing canonical
normal forms: abbreviations are expanded, number words are replaced by
their numeric value, and the result is joined without spaces (so a pure
token split never breaks equality). Because it is a comparison of images
under one function, it is an equivalence relation by construction.
"""

import re
from dataclasses import dataclass
from importlib import resources
from unicodedata import combining, normalize

from . import numwords

_GERMAN_FOLDS = {
    "ä": "ae", "ö": "oe", "ü": "ue", "ß": "ss",
}

_INT_TOKEN = re.compile(r"^\W*(\d+)\W*$")


@dataclass(frozen=True)
class CanonicalToken:
    """One canonical word plus the character span it came from in the raw text."""

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class CanonicalText:
    tokens: tuple[CanonicalToken, ...]
    digits_present: bool

    @property
    def words(self) -> list[str]:
        return [t.text for t in self.tokens]


def _fold_chunk(chunk: str) -> str:
    lowered = chunk.lower()
    folded = "".join(_GERMAN_FOLDS.get(ch, ch) for ch in lowered)
    decomposed = normalize("NFKD", folded)
    return "".join(ch for ch in decomposed if not combining(ch) and "a" <= ch <= "z")


def canonicalize(raw: str, render_digits: bool = False) -> CanonicalText:
    """Canonicalize raw text into tokens.

    ``render_digits=True`` rewrites chunks that are bare integers up to
    999999 into German number words before folding; anything else with
    digits is left to the fold (digits dropped) and only flagged.
    """
    digits_present = any(ch.isdigit() for ch in raw)
    tokens: list[CanonicalToken] = []
    for match in re.finditer(r"\S+", raw):
        chunk = match.group(0)
        if render_digits:
            int_match = _INT_TOKEN.match(chunk)
            if int_match and int(int_match.group(1)) <= numwords.MAX_VALUE:
                chunk = numwords.render(int(int_match.group(1)))
        text = _fold_chunk(chunk)
        if text:
            tokens.append(CanonicalToken(text, match.start(), match.end()))
    return CanonicalText(tuple(tokens), digits_present)


def canonical_words(raw: str, render_digits: bool = False) -> list[str]:
    return canonicalize(raw, render_digits=render_digits).words


def load_abbreviations(path: str | None = None) -> dict[str, tuple[str, ...]]:
    """Load short->expansion pairs from a TSV (one pair per line)."""
    if path is None:
        text = resources.files("asrf.data").joinpath("abbreviations.tsv").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    table: dict[str, tuple[str, ...]] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        short, _, expansion = line.partition("\t")
        short_words = canonical_words(short)
        expansion_words = canonical_words(expansion)
        if len(short_words) == 1 and expansion_words:
            table[short_words[0]] = tuple(expansion_words)
    return table


_default_abbreviations: dict[str, tuple[str, ...]] | None = None


def default_abbreviations() -> dict[str, tuple[str, ...]]:
    global _default_abbreviations
    if _default_abbreviations is None:
        _default_abbreviations = load_abbreviations()
    return _default_abbreviations


def normal_form(words: list[str] | tuple[str, ...],
                abbreviations: dict[str, tuple[str, ...]] | None = None) -> str:
    """Map a canonical token sequence to its comparison key."""
    if abbreviations is None:
        abbreviations = default_abbreviations()
    expanded: list[str] = []
    for word in words:
        expanded.extend(abbreviations.get(word, (word,)))
    parts: list[str] = []
    for word in expanded:
        number = numwords.parse(word)
        # Digits cannot occur in canonical words, so this marker is collision-free.
        parts.append(f"#{number.value}#" if number is not None else word)
    return "".join(parts)


def equivalent(a: list[str] | tuple[str, ...], b: list[str] | tuple[str, ...],
               abbreviations: dict[str, tuple[str, ...]] | None = None) -> bool:
    """True when two canonical token sequences are harmless variants of each other."""
    return normal_form(a, abbreviations) == normal_form(b, abbreviations)
