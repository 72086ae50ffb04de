"""Boolean/proximity query language: parsing and matching.

Grammar (operators are case-sensitive uppercase; precedence from loosest
to tightest: OR, AND, NOT, NEAR; parentheses override):

    query  = or ;
    or     = and { "OR" and } ;
    and    = not { "AND" not } ;
    not    = [ "NOT" ] near ;
    near   = prim { "NEAR/" INT prim } ;
    prim   = TERM | PHRASE | "(" query ")" ;
    TERM   = word [ "*" ] ;
    PHRASE = '"' word { " " word } '"'   (trailing "*" allowed per word)

Words are maximal runs of Unicode letters/digits, lowercased by the
parser. Wildcards are trailing-only and mean prefix match. NEAR/n
requires both operands to be position-bearing (terms, phrases, or ORs
over those); |p1 - p2| <= n over token indices, with a phrase's position
being its start index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import NearOperandError, QuerySyntaxError

__all__ = [
    "Term",
    "Phrase",
    "Or",
    "And",
    "Not",
    "Near",
    "Node",
    "MatchResult",
    "TokenIndex",
    "parse_query",
    "match_query",
    "match_positions",
    "query_to_string",
    "is_position_bearing",
]


@dataclass(frozen=True)
class Term:
    word: str
    wildcard: bool = False


@dataclass(frozen=True)
class Phrase:
    words: tuple[Term, ...]


@dataclass(frozen=True)
class Or:
    children: tuple["Node", ...]


@dataclass(frozen=True)
class And:
    children: tuple["Node", ...]


@dataclass(frozen=True)
class Not:
    child: "Node"


@dataclass(frozen=True)
class Near:
    left: "Node"
    right: "Node"
    n: int


Node = Union[Term, Phrase, Or, And, Not, Near]


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    # (surface pattern, token positions hit), positive literals only
    matched_terms: tuple[tuple[str, tuple[int, ...]], ...]


def is_position_bearing(node: Node) -> bool:
    if isinstance(node, (Term, Phrase)):
        return True
    if isinstance(node, Or):
        return all(is_position_bearing(c) for c in node.children)
    return False


# ---------------------------------------------------------------------------
# Lexer / parser
# ---------------------------------------------------------------------------

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)
_INT_RE = re.compile(r"\d+")


def _lex_word_token(text: str, i: int) -> tuple[Term, int]:
    m = _WORD_RE.match(text, i)
    assert m is not None
    word = m.group()
    j = m.end()
    wildcard = False
    if j < len(text) and text[j] == "*":
        wildcard = True
        j += 1
        if j < len(text) and _WORD_RE.match(text, j):
            raise QuerySyntaxError("wildcard '*' must be trailing", j)
    return Term(word.lower(), wildcard), j


def _parse_phrase_word(part: str, position: int) -> Term:
    wildcard = part.endswith("*")
    core = part[:-1] if wildcard else part
    m = _WORD_RE.fullmatch(core)
    if not m or not core:
        raise QuerySyntaxError(f"invalid word {part!r} in phrase", position)
    return Term(core.lower(), wildcard)


def _lex(text: str) -> list[tuple[str, object, int]]:
    tokens: list[tuple[str, object, int]] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "()":
            tokens.append((c, c, i))
            i += 1
            continue
        if c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise QuerySyntaxError("unterminated phrase quote", i)
            parts = text[i + 1 : j].split()
            if not parts:
                raise QuerySyntaxError("empty phrase", i)
            words = tuple(_parse_phrase_word(p, i) for p in parts)
            tokens.append(("PHRASE", words, i))
            i = j + 1
            continue
        m = _WORD_RE.match(text, i)
        if m:
            word = m.group()
            if word in ("OR", "AND", "NOT"):
                tokens.append((word, word, i))
                i = m.end()
                continue
            if word == "NEAR":
                j = m.end()
                if j < n and text[j] == "/":
                    mi = _INT_RE.match(text, j + 1)
                    if mi:
                        tokens.append(("NEAR", int(mi.group()), i))
                        i = mi.end()
                        continue
                raise QuerySyntaxError("NEAR requires an integer window (NEAR/<int>)", i)
            term, i = _lex_word_token(text, i)
            tokens.append(("TERM", term, i))
            continue
        raise QuerySyntaxError(f"unexpected character {c!r}", i)
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, object, int]], length: int):
        self.tokens = tokens
        self.pos = 0
        self.length = length

    def _peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][0]
        return None

    def _here(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][2]
        return self.length

    def parse(self) -> Node:
        node = self._or()
        if self.pos != len(self.tokens):
            raise QuerySyntaxError("unexpected trailing input", self._here())
        return node

    def _or(self) -> Node:
        children = [self._and()]
        while self._peek() == "OR":
            self.pos += 1
            children.append(self._and())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def _and(self) -> Node:
        children = [self._not()]
        while self._peek() == "AND":
            self.pos += 1
            children.append(self._not())
        return children[0] if len(children) == 1 else And(tuple(children))

    def _not(self) -> Node:
        if self._peek() == "NOT":
            self.pos += 1
            return Not(self._near())
        return self._near()

    def _near(self) -> Node:
        node = self._prim()
        while self._peek() == "NEAR":
            at = self._here()
            n = self.tokens[self.pos][1]
            self.pos += 1
            right = self._prim()
            for operand in (node, right):
                if not is_position_bearing(operand):
                    raise NearOperandError(
                        f"NEAR operand must be a term, phrase, or OR over those "
                        f"(at position {at})"
                    )
            node = Near(node, right, int(n))  # type: ignore[arg-type]
        return node

    def _prim(self) -> Node:
        kind = self._peek()
        if kind == "TERM":
            term = self.tokens[self.pos][1]
            self.pos += 1
            return term  # type: ignore[return-value]
        if kind == "PHRASE":
            words = self.tokens[self.pos][1]
            self.pos += 1
            return Phrase(words)  # type: ignore[arg-type]
        if kind == "(":
            self.pos += 1
            node = self._or()
            if self._peek() != ")":
                raise QuerySyntaxError("missing closing parenthesis", self._here())
            self.pos += 1
            return node
        raise QuerySyntaxError("expected a term, phrase, or '('", self._here())


def parse_query(text: str) -> Node:
    if not text or not text.strip():
        raise QuerySyntaxError("empty query", 0)
    return _Parser(_lex(text), len(text)).parse()


def _term_pattern(term: Term) -> str:
    return term.word + ("*" if term.wildcard else "")


def query_to_string(node: Node) -> str:
    """Serialize an AST back to parseable query text (fully parenthesized)."""
    if isinstance(node, Term):
        return _term_pattern(node)
    if isinstance(node, Phrase):
        return '"' + " ".join(_term_pattern(w) for w in node.words) + '"'
    if isinstance(node, Or):
        return "(" + " OR ".join(query_to_string(c) for c in node.children) + ")"
    if isinstance(node, And):
        return "(" + " AND ".join(query_to_string(c) for c in node.children) + ")"
    if isinstance(node, Not):
        return f"(NOT {query_to_string(node.child)})"
    if isinstance(node, Near):
        return f"({query_to_string(node.left)} NEAR/{node.n} {query_to_string(node.right)})"
    raise TypeError(f"not a query node: {node!r}")


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------


class TokenIndex:
    """Word -> sorted positions map over one document's tokens.

    Building the index once per document keeps corpus-scale matching
    linear in document length; the observable semantics stay those of a
    naive scan.
    """

    __slots__ = ("tokens", "positions")

    def __init__(self, tokens: list[str] | tuple[str, ...]):
        self.tokens = tokens
        positions: dict[str, list[int]] = {}
        for i, tok in enumerate(tokens):
            positions.setdefault(tok, []).append(i)
        self.positions = positions

    def term_positions(self, term: Term) -> list[int]:
        if not term.wildcard:
            return self.positions.get(term.word, [])
        out: list[int] = []
        for word, plist in self.positions.items():
            if word.startswith(term.word):
                out.extend(plist)
        out.sort()
        return out

    def phrase_positions(self, phrase: Phrase) -> list[int]:
        words = phrase.words
        tokens = self.tokens
        starts: list[int] = []
        for p in self.term_positions(words[0]):
            if p + len(words) > len(tokens):
                continue
            if all(_word_matches(tokens[p + k], words[k]) for k in range(1, len(words))):
                starts.append(p)
        return starts


def _word_matches(token: str, term: Term) -> bool:
    if term.wildcard:
        return token.startswith(term.word)
    return token == term.word


def _positions(node: Node, index: TokenIndex) -> list[int]:
    if isinstance(node, Term):
        return index.term_positions(node)
    if isinstance(node, Phrase):
        return index.phrase_positions(node)
    if isinstance(node, Or):
        merged: set[int] = set()
        for child in node.children:
            merged.update(_positions(child, index))
        return sorted(merged)
    raise NearOperandError(
        f"positions are only defined for terms, phrases, and OR over those, "
        f"not {type(node).__name__}"
    )


def _near_pair_exists(left: list[int], right: list[int], n: int) -> bool:
    # Both lists sorted; walk the smaller-head pointer.
    i = j = 0
    while i < len(left) and j < len(right):
        d = left[i] - right[j]
        if abs(d) <= n:
            return True
        if d < 0:
            i += 1
        else:
            j += 1
    return False


def _eval(node: Node, index: TokenIndex) -> bool:
    if isinstance(node, (Term, Phrase)):
        return bool(_positions(node, index))
    if isinstance(node, Or):
        return any(_eval(c, index) for c in node.children)
    if isinstance(node, And):
        return all(_eval(c, index) for c in node.children)
    if isinstance(node, Not):
        return not _eval(node.child, index)
    if isinstance(node, Near):
        return _near_pair_exists(
            _positions(node.left, index), _positions(node.right, index), node.n
        )
    raise TypeError(f"not a query node: {node!r}")


def _collect_positive_hits(
    node: Node, index: TokenIndex, negated: bool, out: dict[str, set[int]]
) -> None:
    if isinstance(node, (Term, Phrase)):
        if not negated:
            positions = _positions(node, index)
            if positions:
                out.setdefault(_surface(node), set()).update(positions)
        return
    if isinstance(node, (Or, And)):
        for child in node.children:
            _collect_positive_hits(child, index, negated, out)
        return
    if isinstance(node, Not):
        _collect_positive_hits(node.child, index, not negated, out)
        return
    if isinstance(node, Near):
        _collect_positive_hits(node.left, index, negated, out)
        _collect_positive_hits(node.right, index, negated, out)
        return


def _surface(node: Node) -> str:
    if isinstance(node, Term):
        return _term_pattern(node)
    if isinstance(node, Phrase):
        return '"' + " ".join(_term_pattern(w) for w in node.words) + '"'
    raise TypeError(f"not a literal: {node!r}")


def match_query(
    ast: Node, tokens: list[str] | tuple[str, ...], index: TokenIndex | None = None
) -> MatchResult:
    """Match a parsed query against a token list.

    ``matched_terms`` is populated only for matching queries and reports
    the hit positions of positive literals (literals under an even number
    of NOTs).
    """
    idx = index if index is not None else TokenIndex(tokens)
    matched = _eval(ast, idx)
    if not matched:
        return MatchResult(False, ())
    hits: dict[str, set[int]] = {}
    _collect_positive_hits(ast, idx, False, hits)
    terms = tuple(
        (pattern, tuple(sorted(positions))) for pattern, positions in sorted(hits.items())
    )
    return MatchResult(True, terms)


def match_positions(
    ast: Node, tokens: list[str] | tuple[str, ...], index: TokenIndex | None = None
) -> list[int]:
    """Sorted match positions for a position-bearing query node."""
    idx = index if index is not None else TokenIndex(tokens)
    return _positions(ast, idx)
