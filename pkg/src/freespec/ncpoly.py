"""Non-commutative polynomials in free circular or semicircular variables.

Terms are keyed by words over the letter alphabet; a letter is a 1-based
variable index plus a flag that marks the adjoint (written with a prime, e.g.
``c1'``) on polynomial letters and the conjugate basis direction on Fock
words.  Coefficients are double-precision complex numbers and zero
coefficients are never stored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ParseError, StructureError

__all__ = [
    "CIRCULAR",
    "SEMICIRCULAR",
    "MAX_VARIABLES",
    "Letter",
    "Word",
    "EMPTY_WORD",
    "NCPolynomial",
    "QuadraticForm",
    "parse",
    "extract_quadratic",
    "pack_word",
    "unpack_word",
    "word_rank",
    "word_from_rank",
]

CIRCULAR = "circular"
SEMICIRCULAR = "semicircular"

# 4-bit letter packing (3 index bits + 1 adjoint/bar bit) behind a sentinel bit
MAX_VARIABLES = 7


class Letter(NamedTuple):
    index: int
    bar: bool = False

    def code(self) -> int:
        return (self.index - 1) | (8 if self.bar else 0)


Word = tuple  # tuple[Letter, ...]
EMPTY_WORD: Word = ()

EMPTY_PACKED = 1


def pack_word(word: Word) -> int:
    """Pack a word into an int, first letter in the lowest 4 bits."""
    code = EMPTY_PACKED
    for letter in reversed(word):
        code = (code << 4) | letter.code()
    return code


def unpack_word(code: int) -> Word:
    letters = []
    while code != EMPTY_PACKED:
        nibble = code & 15
        letters.append(Letter((nibble & 7) + 1, bool(nibble & 8)))
        code >>= 4
    return tuple(letters)


def word_rank(word: Word, d: int) -> int:
    """Base-d rank of an unbarred word, first letter most significant.

    Satisfies rank(vw) = rank(v) * d**len(w) + rank(w), so all words with a
    fixed prefix v occupy one contiguous rank interval.
    """
    r = 0
    for letter in word:
        r = r * d + (letter.index - 1)
    return r


def word_from_rank(rank: int, length: int, d: int) -> Word:
    letters = []
    for _ in range(length):
        rank, digit = divmod(rank, d)
        letters.append(Letter(digit + 1))
    return tuple(reversed(letters))


def _word_sort_key(word: Word):
    return (len(word), tuple(letter.code() for letter in word))


def _validate_letter(letter: Letter, d: int, kind: str) -> None:
    if not 1 <= letter.index <= d:
        raise ValueError(f"letter index {letter.index} outside 1..{d}")
    if letter.bar and kind == SEMICIRCULAR:
        raise ValueError("semicircular variables are self-adjoint; barred letters not allowed")


class NCPolynomial:
    """Finite complex combination of words in d free variables.

    Immutable after construction; like terms are combined and zero
    coefficients dropped, so equal polynomials have equal term maps.
    """

    __slots__ = ("kind", "d", "terms")

    def __init__(self, kind: str, d: int, terms: dict):
        if kind not in (CIRCULAR, SEMICIRCULAR):
            raise ValueError(f"unknown variable kind {kind!r}")
        if not 1 <= d <= MAX_VARIABLES:
            raise ValueError(f"variable count must be in 1..{MAX_VARIABLES}, got {d}")
        clean: dict[Word, complex] = {}
        for word, coeff in terms.items():
            word = tuple(word)
            for letter in word:
                _validate_letter(letter, d, kind)
            value = clean.get(word, 0j) + complex(coeff)
            if value == 0:
                clean.pop(word, None)
            else:
                clean[word] = value
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("NCPolynomial is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, kind: str, d: int) -> "NCPolynomial":
        return cls(kind, d, {})

    @classmethod
    def constant(cls, kind: str, d: int, value: complex) -> "NCPolynomial":
        return cls(kind, d, {EMPTY_WORD: value})

    @classmethod
    def variable(cls, kind: str, d: int, index: int, bar: bool = False) -> "NCPolynomial":
        return cls(kind, d, {(Letter(index, bar),): 1.0})

    # -- structure ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NCPolynomial)
            and self.kind == other.kind
            and self.d == other.d
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.kind, self.d, frozenset(self.terms.items())))

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda item: _word_sort_key(item[0]))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def constant_term(self) -> complex:
        return self.terms.get(EMPTY_WORD, 0j)

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def is_holomorphic(self) -> bool:
        return not any(letter.bar for word in self.terms for letter in word)

    def homogeneous_degree(self) -> int | None:
        """Common word length if all terms share one, else None (None for the zero polynomial)."""
        lengths = {len(w) for w in self.terms}
        if len(lengths) != 1:
            return None
        return lengths.pop()

    def coefficient_l2(self) -> float:
        """sqrt of the summed squared coefficient moduli (the L2 norm for holomorphic terms)."""
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    def adjoint(self) -> "NCPolynomial":
        """Formal star: reverse each word, flip adjoint marks, conjugate coefficients."""
        flip = self.kind == CIRCULAR
        terms = {}
        for word, coeff in self.terms.items():
            starred = tuple(
                Letter(letter.index, (not letter.bar) if flip else letter.bar)
                for letter in reversed(word)
            )
            terms[starred] = terms.get(starred, 0j) + np.conj(coeff)
        return NCPolynomial(self.kind, self.d, terms)

    # -- arithmetic --------------------------------------------------------

    def _check_compatible(self, other: "NCPolynomial") -> None:
        if self.kind != other.kind or self.d != other.d:
            raise ValueError("polynomials must share variable kind and count")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = NCPolynomial.constant(self.kind, self.d, other)
        self._check_compatible(other)
        terms = dict(self.terms)
        for word, coeff in other.terms.items():
            terms[word] = terms.get(word, 0j) + coeff
        return NCPolynomial(self.kind, self.d, terms)

    __radd__ = __add__

    def __neg__(self):
        return NCPolynomial(self.kind, self.d, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = NCPolynomial.constant(self.kind, self.d, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return NCPolynomial(self.kind, self.d, {w: c * other for w, c in self.terms.items()})
        self._check_compatible(other)
        terms: dict[Word, complex] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                word = w1 + w2
                terms[word] = terms.get(word, 0j) + c1 * c2
        return NCPolynomial(self.kind, self.d, terms)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    # -- printing ----------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        symbol = "c" if self.kind == CIRCULAR else "s"
        pieces = []
        for word, coeff in self.sorted_terms():
            text = _format_term(symbol, word, coeff)
            if pieces:
                if text.startswith("-"):
                    pieces.append(" - " + text[1:])
                else:
                    pieces.append(" + " + text)
            else:
                pieces.append(text)
        return "".join(pieces)

    __repr__ = __str__


def _format_float(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _format_coeff(c: complex) -> str:
    if c.imag == 0:
        return _format_float(c.real)
    if c.real == 0:
        return _format_float(c.imag) + "i"
    sign = "+" if c.imag >= 0 else "-"
    return f"({_format_float(c.real)}{sign}{_format_float(abs(c.imag))}i)"


def _format_word(symbol: str, word: Word) -> str:
    runs: list[list] = []
    for letter in word:
        if runs and runs[-1][0] == letter:
            runs[-1][1] += 1
        else:
            runs.append([letter, 1])
    parts = []
    for letter, count in runs:
        text = f"{symbol}{letter.index}" + ("'" if letter.bar else "")
        if count > 1:
            text += f"^{count}"
        parts.append(text)
    return "*".join(parts)


def _format_term(symbol: str, word: Word, coeff: complex) -> str:
    if not word:
        return _format_coeff(coeff)
    if coeff == 1:
        return _format_word(symbol, word)
    if coeff == -1:
        return "-" + _format_word(symbol, word)
    return _format_coeff(coeff) + "*" + _format_word(symbol, word)


# -- parser ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?i?)
  | (?P<var>[cs]\d+)
  | (?P<prime>')
  | (?P<caret>\^)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<plus>\+)
  | (?P<minus>-)
  | (?P<star>\*)
    """,
    re.VERBOSE,
)


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            if m.lastgroup != "ws":
                self.items.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.i = 0

    def peek(self) -> str | None:
        return self.items[self.i][0] if self.i < len(self.items) else None

    def next(self) -> tuple[str, str, int]:
        if self.i >= len(self.items):
            raise ParseError("unexpected end of input", len(self.text))
        item = self.items[self.i]
        self.i += 1
        return item

    @property
    def pos(self) -> int:
        return self.items[self.i][2] if self.i < len(self.items) else len(self.text)


def _parse_number(token: str) -> complex:
    if token.endswith("i"):
        return complex(0.0, float(token[:-1]))
    return complex(float(token), 0.0)


def _parse_paren_complex(tokens: _Tokens) -> complex:
    # '(' already consumed: [sign] number [sign number] ')'
    value = 0j
    first = True
    while True:
        kind = tokens.peek()
        if kind == "rparen":
            if first:
                raise ParseError("empty parentheses", tokens.pos)
            tokens.next()
            return value
        sign = 1.0
        if kind in ("plus", "minus"):
            sign = -1.0 if kind == "minus" else 1.0
            tokens.next()
            kind = tokens.peek()
        elif not first:
            raise ParseError("expected '+' or '-' inside complex literal", tokens.pos)
        if kind != "number":
            raise ParseError("expected a number inside parentheses", tokens.pos)
        _, text, _ = tokens.next()
        value += sign * _parse_number(text)
        first = False


def _parse_variable(tokens: _Tokens, d: int | None, kind: str | None):
    _, text, pos = tokens.next()
    symbol, index = text[0], int(text[1:])
    var_kind = CIRCULAR if symbol == "c" else SEMICIRCULAR
    if kind is not None and var_kind != kind:
        raise ParseError(f"variable {text!r} does not match declared kind {kind!r}", pos)
    if not 1 <= index <= 9:
        raise ParseError(f"variable index must be a single digit 1..9, got {text!r}", pos)
    if d is not None and index > d:
        raise ParseError(f"variable index {index} exceeds declared count {d}", pos)
    bar = False
    if tokens.peek() == "prime":
        _, _, ppos = tokens.next()
        if var_kind == SEMICIRCULAR:
            raise ParseError("adjoint mark on a semicircular variable (they are self-adjoint)", ppos)
        bar = True
    power = 1
    if tokens.peek() == "caret":
        tokens.next()
        if tokens.peek() != "number":
            raise ParseError("expected an integer exponent after '^'", tokens.pos)
        _, ptext, ppos = tokens.next()
        if not ptext.isdigit():
            raise ParseError("exponent must be a nonnegative integer", ppos)
        power = int(ptext)
    return var_kind, (Letter(index, bar),) * power


def parse(text: str, d: int | None = None, kind: str | None = None) -> NCPolynomial:
    """Parse polynomial text like ``"(0.5i)*c1^2 + c1*c2 - 2*c2"``.

    Terms are joined by + or -; a term is an optional complex coefficient
    (``2``, ``0.5``, ``1i``, ``(0.5+0.5i)``) times a product of variables
    ``c1..c9`` / ``s1..s9``, with ``'`` for the adjoint and ``^k`` for powers.
    ``d`` and ``kind`` are inferred from the text when not given.
    """
    tokens = _Tokens(text.replace("−", "-"))
    seen_kind: str | None = kind
    max_index = 0
    terms: dict[Word, complex] = {}

    if tokens.peek() is None:
        raise ParseError("empty polynomial text", 0)

    sign = 1.0
    if tokens.peek() in ("plus", "minus"):
        tok, _, _ = tokens.next()
        sign = -1.0 if tok == "minus" else 1.0

    while True:
        coeff = complex(sign)
        word: Word = EMPTY_WORD
        got_factor = False
        while True:
            nxt = tokens.peek()
            if nxt == "star":
                tokens.next()
                nxt = tokens.peek()
                if nxt not in ("number", "var", "lparen"):
                    raise ParseError("expected a factor after '*'", tokens.pos)
                continue
            if nxt == "number":
                _, text_, _ = tokens.next()
                coeff *= _parse_number(text_)
            elif nxt == "lparen":
                tokens.next()
                coeff *= _parse_paren_complex(tokens)
            elif nxt == "var":
                var_kind, letters = _parse_variable(tokens, d, seen_kind)
                if seen_kind is None:
                    seen_kind = var_kind
                max_index = max(max_index, *(l.index for l in letters)) if letters else max_index
                word = word + letters
            else:
                break
            got_factor = True
        if not got_factor:
            raise ParseError("expected a term", tokens.pos)
        terms[word] = terms.get(word, 0j) + coeff

        nxt = tokens.peek()
        if nxt is None:
            break
        if nxt not in ("plus", "minus"):
            raise ParseError("expected '+' or '-' between terms", tokens.pos)
        tok, _, _ = tokens.next()
        sign = -1.0 if tok == "minus" else 1.0

    if seen_kind is None:
        seen_kind = CIRCULAR  # constant polynomial: kind is conventional
    if d is None:
        d = max(max_index, 1)
    return NCPolynomial(seen_kind, d, terms)


# -- quadratic extraction ---------------------------------------------------


@dataclass(frozen=True)
class QuadraticForm:
    """Data (A, b, c0) of a degree-<=2 holomorphic polynomial in two circular variables."""

    a: np.ndarray  # (2, 2) complex, a[i, j] = coefficient of c_{i+1} c_{j+1}
    b: np.ndarray  # (2,) complex, b[i] = coefficient of c_{i+1}
    c0: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "a", np.array(self.a, dtype=complex).reshape(2, 2))
        object.__setattr__(self, "b", np.array(self.b, dtype=complex).reshape(2))
        object.__setattr__(self, "c0", complex(self.c0))

    def to_polynomial(self) -> NCPolynomial:
        terms: dict[Word, complex] = {EMPTY_WORD: self.c0}
        for i in range(2):
            terms[(Letter(i + 1),)] = self.b[i]
            for j in range(2):
                terms[(Letter(i + 1), Letter(j + 1))] = self.a[i, j]
        return NCPolynomial(CIRCULAR, 2, terms)


def extract_quadratic(p: NCPolynomial) -> QuadraticForm:
    """Read off (A, b, c0) from a holomorphic circular polynomial of degree <= 2 in d=2."""
    if p.kind != CIRCULAR:
        raise StructureError("quadratic extraction requires circular variables")
    if p.d != 2:
        raise StructureError(f"quadratic extraction requires exactly 2 variables, got d={p.d}")
    if not p.is_holomorphic():
        raise StructureError("quadratic extraction requires a polynomial without adjoints")
    if p.degree() > 2:
        raise StructureError(f"polynomial has degree {p.degree()} > 2")
    a = np.zeros((2, 2), dtype=complex)
    b = np.zeros(2, dtype=complex)
    c0 = 0j
    for word, coeff in p.terms.items():
        if len(word) == 0:
            c0 = coeff
        elif len(word) == 1:
            b[word[0].index - 1] = coeff
        else:
            a[word[0].index - 1, word[1].index - 1] = coeff
    return QuadraticForm(a=a, b=b, c0=c0)
