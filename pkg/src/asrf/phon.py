"""Rule-based German grapheme-to-phoneme conversion for homophone detection.

Phoneme inventory (documented, fixed):
  plosives   p t k b d g
  fricatives f v s z ʃ ç x h
  nasals     m n ŋ
  liquids    l r
  vowels     a e i o u ɛ ø y, long variants carry ː
  diphthongs ai au oy
  affricates ts pf ks kv

The rewrite rules live in ``data/g2p_rules.tsv`` and are applied left to
right, longest match first, with table order breaking ties. A rule may be
restricted to a context (initial/final position, after a vowel, after a
back vowel, before a vowel letter) and may carry a "short" flag marking
the preceding vowel as short (doubled consonants, ck, tz, ...).

Vowel length: a vowel is long when a silent h follows, when spelled double
(aa/ee/oo/ie), or when at most one non-shortening consonant unit separates
it from the next vowel or the word end (open syllable, "graf", "a").
Stress and schwa reduction are intentionally not modeled; loanwords fall
through letter by letter.
"""

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

_VOWEL_LETTERS = set("aeiouy")
_SHORT_VOWELS = {"a", "e", "i", "o", "u", "ɛ", "ø", "y"}
_DIPHTHONGS = {"ai", "au", "oy"}
_BACK_VOWELS = {"a", "aː", "o", "oː", "u", "uː", "au"}

_CONTEXTS = {"initial", "final", "after-vowel", "after-back-vowel", "before-vowel"}


@dataclass(frozen=True)
class Rule:
    pattern: str
    phonemes: tuple[str, ...]
    contexts: frozenset[str]
    short_mark: bool
    lengthen: bool


@dataclass
class _Unit:
    phonemes: list[str]
    is_vowel: bool
    short_mark: bool
    force_long: bool = False


def _parse_rule(line: str) -> Rule:
    fields = line.split("\t")
    fields += [""] * (4 - len(fields))
    pattern, replacement, context, flags = (f.strip() for f in fields[:4])
    lengthen = replacement == "<len>"
    if replacement in ("-", "<len>"):
        phonemes: tuple[str, ...] = ()
    else:
        phonemes = tuple(replacement.split())
    contexts = frozenset(c for c in context.split(",") if c)
    unknown = contexts - _CONTEXTS
    if unknown:
        raise ValueError(f"unknown g2p context(s) {sorted(unknown)} in rule {pattern!r}")
    return Rule(pattern, phonemes, contexts, short_mark="short" in flags.split(","), lengthen=lengthen)


def load_rules(path: str | None = None) -> tuple[Rule, ...]:
    if path is None:
        text = resources.files("asrf.data").joinpath("g2p_rules.tsv").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    rules = []
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rules.append(_parse_rule(line))
    return tuple(rules)


_default_rules: tuple[Rule, ...] | None = None


def default_rules() -> tuple[Rule, ...]:
    global _default_rules
    if _default_rules is None:
        _default_rules = load_rules()
    return _default_rules


def _context_ok(rule: Rule, token: str, pos: int, units: list[_Unit]) -> bool:
    end = pos + len(rule.pattern)
    for ctx in rule.contexts:
        if ctx == "initial" and pos != 0:
            return False
        if ctx == "final" and end != len(token):
            return False
        if ctx == "before-vowel" and not (end < len(token) and token[end] in _VOWEL_LETTERS):
            return False
        if ctx in ("after-vowel", "after-back-vowel"):
            if not units or not units[-1].is_vowel:
                return False
            if ctx == "after-back-vowel" and units[-1].phonemes[-1] not in _BACK_VOWELS:
                return False
    return True


def _pick_rule(rules: tuple[Rule, ...], token: str, pos: int, units: list[_Unit]) -> Rule | None:
    best: Rule | None = None
    for rule in rules:
        if best is not None and len(rule.pattern) <= len(best.pattern):
            continue
        if token.startswith(rule.pattern, pos) and _context_ok(rule, token, pos, units):
            best = rule
    return best


def _is_vowel_phonemes(phonemes: tuple[str, ...]) -> bool:
    return bool(phonemes) and all(
        p.rstrip("ː") in _SHORT_VOWELS or p in _DIPHTHONGS for p in phonemes
    )


def _assign_lengths(units: list[_Unit]) -> None:
    for idx, unit in enumerate(units):
        if not unit.is_vowel:
            continue
        symbol = unit.phonemes[-1]
        if symbol in _DIPHTHONGS or symbol.endswith("ː"):
            continue
        if unit.force_long:
            unit.phonemes[-1] = symbol + "ː"
            continue
        trailing = 0
        shortened = False
        for follower in units[idx + 1:]:
            if follower.is_vowel:
                break
            trailing += 1
            shortened = shortened or follower.short_mark
        if trailing == 0 or (trailing == 1 and not shortened):
            unit.phonemes[-1] = symbol + "ː"


def g2p(token: str, rules: tuple[Rule, ...] | None = None) -> tuple[str, ...]:
    """Convert one canonical token to its phoneme sequence."""
    if rules is None:
        return _g2p_default(token)
    return _g2p(token, rules)


@lru_cache(maxsize=65536)
def _g2p_default(token: str) -> tuple[str, ...]:
    return _g2p(token, default_rules())


def _g2p(token: str, rules: tuple[Rule, ...]) -> tuple[str, ...]:
    units: list[_Unit] = []
    pos = 0
    while pos < len(token):
        rule = _pick_rule(rules, token, pos, units)
        if rule is None:
            letter = token[pos]
            phonemes = (letter,)
            units.append(_Unit(list(phonemes), letter in _VOWEL_LETTERS, False))
            pos += 1
            continue
        if rule.lengthen:
            for unit in reversed(units):
                if unit.is_vowel:
                    unit.force_long = True
                    break
        elif rule.phonemes:
            units.append(_Unit(list(rule.phonemes), _is_vowel_phonemes(rule.phonemes), rule.short_mark))
        pos += len(rule.pattern)
    _assign_lengths(units)
    return tuple(p for unit in units for p in unit.phonemes)


def is_homophone(a: str, b: str, rules: tuple[Rule, ...] | None = None) -> bool:
    """True for two distinct tokens with identical phoneme sequences."""
    return a != b and g2p(a, rules) == g2p(b, rules)
