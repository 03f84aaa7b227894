"""Bidirectional German cardinal number grammar, 0 to 999999.

Works on canonical (lowercased, umlaut-folded) tokens, so the tables use
"fuenf", "zwoelf", "dreissig". Two compositions are supported:

* standard:  [1-999]"tausend"[0-999], e.g. "eintausendneunhundertdreiundsechzig"
* yearstyle: [11-19]"hundert"[0-99],  e.g. "neunzehnhundertdreiundsechzig"

Yearstyle only exists for values 1100-1999; the two grammars are disjoint
because standard hundreds take a single-digit prefix. ``parse`` accepts both
"ein" and "eins" in terminal position; ``render`` always emits the canonical
form ("eins" terminally, "ein" in compounds and before "hundert"/"tausend").
"""

from dataclasses import dataclass

MAX_VALUE = 999_999
YEAR_MIN, YEAR_MAX = 1100, 1999

STANDARD = "standard"
YEARSTYLE = "yearstyle"

_UNITS = [
    "null", "eins", "zwei", "drei", "vier", "fuenf", "sechs", "sieben",
    "acht", "neun", "zehn", "elf", "zwoelf", "dreizehn", "vierzehn",
    "fuenfzehn", "sechzehn", "siebzehn", "achtzehn", "neunzehn",
]
_TENS = {
    20: "zwanzig", 30: "dreissig", 40: "vierzig", 50: "fuenfzig",
    60: "sechzig", 70: "siebzig", 80: "achtzig", 90: "neunzig",
}

_UNIT_VALUES = {w: v for v, w in enumerate(_UNITS) if v > 0}
_UNIT_VALUES["ein"] = 1
_TENS_VALUES = {w: v for v, w in _TENS.items()}

# "ein" (not "eins") composes: einundzwanzig, einhundert, eintausend.
_COMPOUND_UNIT = {1: "ein", **{v: _UNITS[v] for v in range(2, 10)}}


class StyleOutOfRange(ValueError):
    """Yearstyle rendering requested for a value outside 1100-1999."""


@dataclass(frozen=True)
class NumberValue:
    value: int
    style: str


def _render_under_100(n: int, one: str = "eins") -> str:
    if n == 0:
        return ""
    if n == 1:
        return one
    if n < 20:
        return _UNITS[n]
    tens, unit = (n // 10) * 10, n % 10
    if unit == 0:
        return _TENS[tens]
    return _COMPOUND_UNIT[unit] + "und" + _TENS[tens]


def _render_under_1000(n: int, one: str = "eins") -> str:
    hundreds, rest = divmod(n, 100)
    prefix = _COMPOUND_UNIT[hundreds] + "hundert" if hundreds else ""
    return prefix + _render_under_100(rest, one)


def render(value: int, style: str = STANDARD) -> str:
    """Render an integer as a single canonical German number word."""
    if not 0 <= value <= MAX_VALUE:
        raise ValueError(f"value out of range [0, {MAX_VALUE}]: {value}")
    if style == YEARSTYLE:
        if not YEAR_MIN <= value <= YEAR_MAX:
            raise StyleOutOfRange(f"yearstyle only covers [{YEAR_MIN}, {YEAR_MAX}], got {value}")
        teens, rest = divmod(value, 100)
        return _UNITS[teens] + "hundert" + _render_under_100(rest)
    if style != STANDARD:
        raise ValueError(f"unknown style: {style!r}")
    if value == 0:
        return "null"
    thousands, rest = divmod(value, 1000)
    # The thousands part composes, so a trailing 1 is "ein": eintausend.
    prefix = _render_under_1000(thousands, one="ein") + "tausend" if thousands else ""
    return prefix + _render_under_1000(rest)


def _parse_under_100(s: str) -> int | None:
    if s in _UNIT_VALUES:
        return _UNIT_VALUES[s]
    if s in _TENS_VALUES:
        return _TENS_VALUES[s]
    for unit, word in _COMPOUND_UNIT.items():
        prefix = word + "und"
        if s.startswith(prefix) and s[len(prefix):] in _TENS_VALUES:
            return unit + _TENS_VALUES[s[len(prefix):]]
    return None


def _parse_under_1000(s: str) -> int | None:
    if "hundert" in s:
        for hundreds, word in _COMPOUND_UNIT.items():
            prefix = word + "hundert"
            if s.startswith(prefix):
                rest = s[len(prefix):]
                rest_value = 0 if rest == "" else _parse_under_100(rest)
                return None if rest_value is None else hundreds * 100 + rest_value
        if s.startswith("hundert"):
            rest = s[len("hundert"):]
            rest_value = 0 if rest == "" else _parse_under_100(rest)
            return None if rest_value is None else 100 + rest_value
        return None
    return _parse_under_100(s)


def parse(token: str) -> NumberValue | None:
    """Parse a canonical token as a German cardinal; None when it is not one."""
    if token == "null":
        return NumberValue(0, STANDARD)
    for teens in range(11, 20):
        prefix = _UNITS[teens] + "hundert"
        if token.startswith(prefix):
            rest = token[len(prefix):]
            rest_value = 0 if rest == "" else _parse_under_100(rest)
            if rest_value is not None:
                return NumberValue(teens * 100 + rest_value, YEARSTYLE)
            return None
    if "tausend" in token:
        left, _, right = token.partition("tausend")
        thousands = 1 if left == "" else _parse_under_1000(left)
        if thousands is None:
            return None
        rest_value = 0 if right == "" else _parse_under_1000(right)
        if rest_value is None:
            return None
        return NumberValue(thousands * 1000 + rest_value, STANDARD)
    value = _parse_under_1000(token)
    return None if value is None else NumberValue(value, STANDARD)
