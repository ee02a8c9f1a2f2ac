"""Hand-rolled tokenizer for the declaration and kernel grammars.

Keywords are not distinguished here; parsers classify identifiers
themselves. Numeric literals may carry a width suffix (7i64, 1.5f32).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import ParseError
from .nodes import SourceSpan

PUNCT2 = ("+=", "-=", "*=", "/=", "->", "::", "..", "//")
PUNCT1 = "+-*/<>(){}[];,=.:&"
SUFFIXES = ("i32", "i64", "f32", "f64")


@dataclass
class Token:
    kind: str  # ident | int | float | punct | eof
    text: str
    span: SourceSpan
    value: Union[int, float, None] = None
    suffix: Optional[str] = None


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    line, col, i, n = 1, 1, 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        span = SourceSpan(line, col)
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            toks.append(Token("ident", text, SourceSpan(line, col, j - i)))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            is_float = False
            # a '.' starts a fraction only when followed by a digit, so the
            # range punctuation 0..n lexes as int, '..', int
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            suffix = None
            for s in SUFFIXES:
                if source.startswith(s, j):
                    suffix = s
                    j += 3
                    break
            text = source[i:j]
            lit = text[:-3] if suffix else text
            span = SourceSpan(line, col, j - i)
            if is_float:
                toks.append(Token("float", text, span, float(lit), suffix))
            else:
                toks.append(Token("int", text, span, int(lit), suffix))
            col += j - i
            i = j
            continue
        if source.startswith("...", i):
            toks.append(Token("punct", "...", SourceSpan(line, col, 3)))
            i += 3
            col += 3
            continue
        two = source[i : i + 2]
        if two in PUNCT2:
            toks.append(Token("punct", two, SourceSpan(line, col, 2)))
            i += 2
            col += 2
            continue
        if ch in PUNCT1:
            toks.append(Token("punct", ch, span))
            i += 1
            col += 1
            continue
        raise ParseError(span, f"unexpected character {ch!r}")
    toks.append(Token("eof", "", SourceSpan(line, col, 0)))
    return toks


class TokenStream:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.text == text

    def at_word(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.text == word

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            t = self.peek()
            raise ParseError(t.span, f"expected {text!r}, found {t.text or t.kind!r}")
        return self.next()

    def expect_word(self, word: str) -> Token:
        if not self.at_word(word):
            t = self.peek()
            raise ParseError(t.span, f"expected {word!r}, found {t.text or t.kind!r}")
        return self.next()

    def expect_ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError(t.span, f"expected identifier, found {t.text or t.kind!r}")
        return self.next()

    def at_eof(self) -> bool:
        return self.peek().kind == "eof"
