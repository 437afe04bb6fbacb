"""Minimal s-expression reader for solver output and script round-trips."""

from __future__ import annotations

__all__ = ["SExprError", "tokenize", "parse_all", "parse_one"]

Sexp = "str | list"


class SExprError(Exception):
    pass


def tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SExprError("unterminated quoted symbol")
            tokens.append(text[i : j + 1])
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise SExprError("unterminated string literal")
            tokens.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def _parse(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise SExprError("unexpected end of input")
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _parse(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise SExprError("missing closing parenthesis")
        return items, pos + 1
    if tok == ")":
        raise SExprError("unexpected closing parenthesis")
    return tok, pos + 1


def parse_all(text: str) -> list:
    """Parse every top-level s-expression in the text."""
    tokens = tokenize(text)
    out = []
    pos = 0
    while pos < len(tokens):
        item, pos = _parse(tokens, pos)
        out.append(item)
    return out


def parse_one(text: str):
    forms = parse_all(text)
    if len(forms) != 1:
        raise SExprError(f"expected one s-expression, found {len(forms)}")
    return forms[0]
