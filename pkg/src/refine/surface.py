"""Surface syntax for `.rfn` files: lexer, parser, printer, alias expansion.

The concrete grammar is ASCII:

    program := item*
    item    := "type" NAME ("(" NAME ")")? "=" type
             | "fun" NAME ("(" NAME ":" type ")")+ ":" type "=" term
             | "val" NAME ":" type "=" term
    type    := "Nat" | "Int" | "Bool"
             | "{" NAME ":" base "|" pred "}"
             | "(" NAME ":" type ")" "->" type
             | NAME ("(" linterm ")")?

Predicates are disjunctions of conjunctions over comparison atoms
(`==`, `/=`, `<`, `<=`, `>`, `>=`) with `true`, `false`, `!` and `=>`;
arithmetic inside them is linear, with multiplication restricted to
literal coefficients. `suc`/`zero` are surface constructors on Nat and
desugar to `+1` / literal `0`. `#` starts a line comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .logic import (
    BaseType,
    Cmp,
    LinearTerm,
    Predicate,
    PVar,
    BoolConst,
    Not,
    And,
    Or,
    Implies,
    TRUE,
    format_linear,
    format_predicate,
    pred_free_vars,
    rename_pred_var,
)

__all__ = [
    "Span",
    "ParseError",
    "CyclicAliasError",
    "UnknownAliasError",
    "AliasArityError",
    "DuplicateAliasError",
    "RefinedType",
    "RBase",
    "RFun",
    "RAlias",
    "Term",
    "Var",
    "NatLit",
    "IntLit",
    "BoolLit",
    "Arith",
    "App",
    "Lam",
    "Let",
    "If",
    "Match",
    "Pair",
    "Auto",
    "ProofUnit",
    "Annot",
    "Item",
    "AliasDef",
    "FunDef",
    "ValDef",
    "SurfaceProgram",
    "parse",
    "parse_predicate",
    "expand_aliases",
    "print_program",
    "print_item",
    "print_type",
    "print_term",
    "rename_term",
    "rename_type_var",
    "subst_type_linear",
    "type_free_vars",
]


@dataclass(frozen=True)
class Span:
    start: int
    end: int


NO_SPAN = Span(0, 0)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = expected
        suffix = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{suffix}")


class AliasError(Exception):
    def __init__(self, name: str, message: str):
        self.name = name
        super().__init__(message)


class CyclicAliasError(AliasError):
    def __init__(self, name: str):
        super().__init__(name, f"type alias {name!r} is cyclic")


class UnknownAliasError(AliasError):
    def __init__(self, name: str):
        super().__init__(name, f"unknown type alias {name!r}")


class AliasArityError(AliasError):
    def __init__(self, name: str, message: str):
        super().__init__(name, message)


class DuplicateAliasError(AliasError):
    def __init__(self, name: str):
        super().__init__(name, f"type alias {name!r} is defined twice")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


class RefinedType:
    __slots__ = ()


@dataclass(frozen=True)
class RBase(RefinedType):
    """Base refinement: binder of a primitive type constrained by a predicate."""

    base: BaseType
    binder: str
    pred: Predicate
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class RFun(RefinedType):
    """Dependent function type; the codomain may mention the parameter."""

    param: str
    domain: RefinedType
    codomain: RefinedType
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class RAlias(RefinedType):
    """Alias reference; gone after expansion."""

    name: str
    arg: LinearTerm | None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class NatLit(Term):
    """Non-negative literal; the lexeme records whether it was written as a
    numeral or as the `zero`/`suc` constructor form."""

    value: int
    lexeme: str = ""
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def is_constructor(self) -> bool:
        return self.lexeme == "zero"


@dataclass(frozen=True)
class IntLit(Term):
    value: int
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit(Term):
    value: bool
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Arith(Term):
    """Arithmetic on terms: `+`, `-`, and multiplication by a literal."""

    op: str
    args: tuple[Term, ...]
    sugar: str | None = None  # "suc" when written in constructor form
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Lam(Term):
    param: str
    ann: RefinedType | None
    body: Term
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Let(Term):
    name: str
    bound: Term
    body: Term
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class If(Term):
    """Branch on a predicate; each branch is checked under the matching
    path condition."""

    cond: Predicate
    then_branch: Term
    else_branch: Term
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Match(Term):
    """Case split on a Nat-typed scrutinee: zero branch and suc branch
    binding a fresh name for the predecessor."""

    scrutinee: Term
    zero_body: Term
    binder: str
    suc_body: Term
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Pair(Term):
    """Refinement introduction: a value together with its proof slot."""

    value: Term
    proof: Term
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Auto(Term):
    """Proof slot discharged by the solver; only legal inside a pair."""

    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ProofUnit(Term):
    """Placeholder left in the proof slot by erasure."""

    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Annot(Term):
    term: Term
    ann: RefinedType
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


class Item:
    __slots__ = ()


@dataclass(frozen=True)
class AliasDef(Item):
    name: str
    param: str | None
    body: RefinedType
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class FunDef(Item):
    name: str
    params: tuple[tuple[str, RefinedType], ...]
    ret: RefinedType
    body: Term
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ValDef(Item):
    name: str
    ty: RefinedType
    term: Term
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class SurfaceProgram:
    items: tuple[Item, ...]
    source: str = field(default="", compare=False, repr=False)
    path: str | None = field(default=None, compare=False, repr=False)

    def line_col(self, offset: int) -> tuple[int, int]:
        """1-based line and column of a byte offset in the source."""
        prefix = self.source[:offset]
        line = prefix.count("\n") + 1
        col = offset - (prefix.rfind("\n") + 1) + 1
        return line, col


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

KEYWORDS = frozenset(
    {
        "type", "fun", "val", "Nat", "Int", "Bool", "true", "false",
        "zero", "suc", "auto", "if", "then", "else", "match", "let", "in",
    }
)

BASE_KEYWORDS = {"Nat": BaseType.NAT, "Int": BaseType.INT, "Bool": BaseType.BOOL}

TWO_CHAR_SYMS = ("->", "==", "/=", "<=", ">=", "=>", "&&", "||")
ONE_CHAR_SYMS = "{}():|,=<>+-*!\\"


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "int" | "sym" | "kw" | "eof"
    text: str
    start: int
    end: int
    line: int
    col: int


def _lex(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(source)
    line, col = 1, 1

    def bump(text: str) -> None:
        nonlocal line, col
        for ch in text:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1

    while i < n:
        c = source[i]
        if c.isspace():
            bump(c)
            i += 1
            continue
        if c == "#":
            j = source.find("\n", i)
            j = n if j < 0 else j
            bump(source[i:j])
            i = j
            continue
        start_line, start_col = line, col
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            text = source[i:j]
            tokens.append(Token("int", text, i, j, start_line, start_col))
            bump(text)
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "kw" if text in KEYWORDS else "name"
            tokens.append(Token(kind, text, i, j, start_line, start_col))
            bump(text)
            i = j
            continue
        two = source[i : i + 2]
        if two in TWO_CHAR_SYMS:
            tokens.append(Token("sym", two, i, i + 2, start_line, start_col))
            bump(two)
            i += 2
            continue
        if c in ONE_CHAR_SYMS:
            tokens.append(Token("sym", c, i, i + 1, start_line, start_col))
            bump(c)
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", n, n, line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_CMP_TOKENS = ("==", "/=", "<", "<=", ">", ">=")
_ATOM_START_SYMS = ("(", "-")


class _Parser:
    def __init__(self, source: str, path: str | None = None):
        self.source = source
        self.path = path
        self.tokens = _lex(source)
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("sym", "kw") and tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"found {self._describe(self.peek())}", expected=(text,))
        return self.advance()

    def expect_name(self) -> Token:
        tok = self.peek()
        if tok.kind != "name":
            self.fail(f"found {self._describe(tok)}", expected=("identifier",))
        return self.advance()

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def fail(self, message: str, expected: tuple[str, ...] = ()) -> None:
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col, expected)

    def span_from(self, start_tok: Token) -> Span:
        end = self.tokens[self.pos - 1].end if self.pos > 0 else start_tok.end
        return Span(start_tok.start, end)

    # -- program ------------------------------------------------------------

    def parse_program(self) -> SurfaceProgram:
        items: list[Item] = []
        while self.peek().kind != "eof":
            items.append(self.parse_item())
        return SurfaceProgram(tuple(items), source=self.source, path=self.path)

    def parse_item(self) -> Item:
        tok = self.peek()
        if self.at("type"):
            return self.parse_alias()
        if self.at("fun"):
            return self.parse_fun()
        if self.at("val"):
            return self.parse_val()
        self.fail(
            f"found {self._describe(tok)}", expected=("type", "fun", "val")
        )
        raise AssertionError

    def parse_alias(self) -> AliasDef:
        start = self.expect("type")
        name = self.expect_name().text
        param = None
        if self.at("("):
            self.advance()
            param = self.expect_name().text
            self.expect(")")
        self.expect("=")
        body = self.parse_type()
        return AliasDef(name, param, body, self.span_from(start))

    def parse_fun(self) -> FunDef:
        start = self.expect("fun")
        name = self.expect_name().text
        params: list[tuple[str, RefinedType]] = []
        while self.at("("):
            self.advance()
            pname = self.expect_name().text
            self.expect(":")
            pty = self.parse_type()
            self.expect(")")
            params.append((pname, pty))
        if not params:
            self.fail("function definitions need at least one parameter")
        self.expect(":")
        ret = self.parse_type()
        self.expect("=")
        body = self.parse_term()
        return FunDef(name, tuple(params), ret, body, self.span_from(start))

    def parse_val(self) -> ValDef:
        start = self.expect("val")
        name = self.expect_name().text
        self.expect(":")
        ty = self.parse_type()
        self.expect("=")
        term = self.parse_term()
        return ValDef(name, ty, term, self.span_from(start))

    # -- types --------------------------------------------------------------

    def parse_type(self) -> RefinedType:
        tok = self.peek()
        if self.at("{"):
            start = self.advance()
            binder = self.expect_name().text
            self.expect(":")
            base_tok = self.peek()
            if base_tok.text not in BASE_KEYWORDS:
                self.fail(
                    f"found {self._describe(base_tok)}",
                    expected=tuple(BASE_KEYWORDS),
                )
            self.advance()
            self.expect("|")
            pred = self.parse_pred()
            self.expect("}")
            return RBase(
                BASE_KEYWORDS[base_tok.text], binder, pred, self.span_from(start)
            )
        if self.at("(") and self.peek(1).kind == "name" and self.peek(2).text == ":":
            start = self.advance()
            param = self.expect_name().text
            self.expect(":")
            domain = self.parse_type()
            self.expect(")")
            self.expect("->")
            codomain = self.parse_type()
            return RFun(param, domain, codomain, self.span_from(start))
        if tok.text in BASE_KEYWORDS:
            self.advance()
            return RBase(
                BASE_KEYWORDS[tok.text], "v", TRUE, Span(tok.start, tok.end)
            )
        if tok.kind == "name":
            self.advance()
            arg = None
            if self.at("("):
                self.advance()
                arg = self.parse_linterm()
                self.expect(")")
            return RAlias(tok.text, arg, self.span_from(tok))
        self.fail(f"found {self._describe(tok)}", expected=("type",))
        raise AssertionError

    # -- predicates ---------------------------------------------------------

    def parse_pred(self) -> Predicate:
        lhs = self.parse_pred_or()
        if self.at("=>"):
            self.advance()
            return Implies(lhs, self.parse_pred())
        return lhs

    def parse_pred_or(self) -> Predicate:
        args = [self.parse_pred_and()]
        while self.at("||"):
            self.advance()
            args.append(self.parse_pred_and())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def parse_pred_and(self) -> Predicate:
        args = [self.parse_pred_unary()]
        while self.at("&&"):
            self.advance()
            args.append(self.parse_pred_unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def parse_pred_unary(self) -> Predicate:
        if self.at("!"):
            self.advance()
            return Not(self.parse_pred_unary())
        return self.parse_pred_atom()

    def parse_pred_atom(self) -> Predicate:
        if self.at("true"):
            self.advance()
            return TRUE
        if self.at("false"):
            self.advance()
            return BoolConst(False)
        if self.at("("):
            # A leading parenthesis may open a nested predicate or a
            # parenthesized arithmetic operand; try the predicate reading
            # and fall back when an operator follows the closing paren.
            snapshot = self.pos
            try:
                self.advance()
                inner = self.parse_pred()
                self.expect(")")
                nxt = self.peek().text
                if nxt not in _CMP_TOKENS and nxt not in ("+", "-", "*"):
                    return inner
            except ParseError:
                pass
            self.pos = snapshot
        lhs = self.parse_linterm()
        tok = self.peek()
        if tok.text in _CMP_TOKENS:
            self.advance()
            rhs = self.parse_linterm()
            return Cmp(tok.text, lhs, rhs)
        name = lhs.as_var()
        if name is not None:
            return PVar(name)
        self.fail(
            f"found {self._describe(tok)}", expected=_CMP_TOKENS
        )
        raise AssertionError

    def parse_linterm(self) -> LinearTerm:
        acc = self.parse_linmul()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            rhs = self.parse_linmul()
            acc = acc.add(rhs) if op == "+" else acc.sub(rhs)
        return acc

    def parse_linmul(self) -> LinearTerm:
        acc = self.parse_linatom()
        while self.at("*"):
            tok = self.advance()
            rhs = self.parse_linatom()
            if acc.monomials and rhs.monomials:
                raise ParseError(
                    "multiplication needs a literal coefficient", tok.line, tok.col
                )
            acc = rhs.scale(acc.const) if not acc.monomials else acc.scale(rhs.const)
        return acc

    def parse_linatom(self) -> LinearTerm:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return LinearTerm.of_const(int(tok.text))
        if tok.kind == "name":
            self.advance()
            return LinearTerm.var(tok.text)
        if self.at("zero"):
            self.advance()
            return LinearTerm.of_const(0)
        if self.at("suc"):
            self.advance()
            return self.parse_linatom().shift(1)
        if self.at("-"):
            self.advance()
            return self.parse_linatom().scale(-1)
        if self.at("("):
            self.advance()
            inner = self.parse_linterm()
            self.expect(")")
            return inner
        self.fail(f"found {self._describe(tok)}", expected=("arithmetic term",))
        raise AssertionError

    # -- terms ---------------------------------------------------------------

    def parse_term(self) -> Term:
        if self.at("\\"):
            return self.parse_lambda()
        if self.at("let"):
            return self.parse_let()
        if self.at("if"):
            return self.parse_if()
        if self.at("match"):
            return self.parse_match()
        return self.parse_arith()

    def parse_lambda(self) -> Lam:
        start = self.expect("\\")
        ann = None
        if self.at("("):
            self.advance()
            param = self.expect_name().text
            self.expect(":")
            ann = self.parse_type()
            self.expect(")")
        else:
            param = self.expect_name().text
        self.expect("->")
        body = self.parse_term()
        return Lam(param, ann, body, self.span_from(start))

    def parse_let(self) -> Let:
        start = self.expect("let")
        name = self.expect_name().text
        self.expect("=")
        bound = self.parse_term()
        self.expect("in")
        body = self.parse_term()
        return Let(name, bound, body, self.span_from(start))

    def parse_if(self) -> If:
        start = self.expect("if")
        cond = self.parse_pred()
        self.expect("then")
        then_branch = self.parse_term()
        self.expect("else")
        else_branch = self.parse_term()
        return If(cond, then_branch, else_branch, self.span_from(start))

    def parse_match(self) -> Match:
        start = self.expect("match")
        scrutinee = self.parse_arith()
        self.expect("{")
        self.expect("zero")
        self.expect("->")
        zero_body = self.parse_term()
        self.expect("|")
        self.expect("suc")
        binder = self.expect_name().text
        self.expect("->")
        suc_body = self.parse_term()
        self.expect("}")
        return Match(scrutinee, zero_body, binder, suc_body, self.span_from(start))

    def parse_arith(self) -> Term:
        start = self.peek()
        left = self.parse_mul()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            right = self.parse_mul()
            left = Arith(op, (left, right), None, self.span_from(start))
        return left

    def parse_mul(self) -> Term:
        start = self.peek()
        left = self.parse_app()
        while self.at("*"):
            tok = self.advance()
            right = self.parse_app()
            if not self._is_int_literal(left) and not self._is_int_literal(right):
                raise ParseError(
                    "multiplication needs a literal coefficient", tok.line, tok.col
                )
            left = Arith("*", (left, right), None, self.span_from(start))
        return left

    @staticmethod
    def _is_int_literal(t: Term) -> bool:
        return isinstance(t, (NatLit, IntLit))

    def _at_atom_start(self) -> bool:
        tok = self.peek()
        if tok.kind in ("name", "int"):
            return True
        return tok.text in ("true", "false", "zero", "suc", "auto", "(")

    def parse_app(self) -> Term:
        start = self.peek()
        fn = self.parse_atom_term()
        while self._at_atom_start():
            arg = self.parse_atom_term()
            fn = App(fn, arg, self.span_from(start))
        return fn

    def parse_atom_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "name":
            self.advance()
            return Var(tok.text, Span(tok.start, tok.end))
        if tok.kind == "int":
            self.advance()
            return NatLit(int(tok.text), tok.text, Span(tok.start, tok.end))
        if self.at("-"):
            start = self.advance()
            num = self.peek()
            if num.kind != "int":
                self.fail("found a lone '-'; unary minus applies to numerals only")
            self.advance()
            return IntLit(-int(num.text), Span(start.start, num.end))
        if self.at("true") or self.at("false"):
            self.advance()
            return BoolLit(tok.text == "true", Span(tok.start, tok.end))
        if self.at("zero"):
            self.advance()
            return NatLit(0, "zero", Span(tok.start, tok.end))
        if self.at("suc"):
            start = self.advance()
            arg = self.parse_atom_term()
            span = self.span_from(start)
            return Arith("+", (arg, NatLit(1, "1", span)), "suc", span)
        if self.at("auto"):
            self.fail("`auto` is only allowed as the proof component of a pair")
        if self.at("("):
            start = self.advance()
            term = self.parse_term()
            if self.at(","):
                self.advance()
                proof_tok = self.peek()
                if not self.at("auto"):
                    self.fail(
                        f"found {self._describe(proof_tok)}; the proof component must be `auto`"
                    )
                self.advance()
                proof = Auto(Span(proof_tok.start, proof_tok.end))
                self.expect(")")
                return Pair(term, proof, self.span_from(start))
            if self.at(":"):
                self.advance()
                ann = self.parse_type()
                self.expect(")")
                return Annot(term, ann, self.span_from(start))
            self.expect(")")
            return term
        self.fail(f"found {self._describe(tok)}", expected=("term",))
        raise AssertionError


def parse(source: str, path: str | None = None) -> SurfaceProgram:
    """Parse `.rfn` source text into a surface program.

    Raises ParseError with line/column and the expected-token set.
    """
    return _Parser(source, path).parse_program()


def parse_predicate(source: str) -> Predicate:
    """Parse a standalone predicate (used by tests and tools)."""
    parser = _Parser(source)
    pred = parser.parse_pred()
    if parser.peek().kind != "eof":
        parser.fail(f"trailing input after predicate")
    return pred


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------


def print_type(t: RefinedType) -> str:
    match t:
        case RBase(base, _, BoolConst(True)):
            return str(base)
        case RBase(base, binder, pred):
            return f"{{{binder}: {base} | {format_predicate(pred)}}}"
        case RFun(param, domain, codomain):
            return f"({param} : {print_type(domain)}) -> {print_type(codomain)}"
        case RAlias(name, None):
            return name
        case RAlias(name, arg):
            return f"{name}({format_linear(arg)})"
    raise TypeError(f"not a type: {t!r}")


def print_term(t: Term, prec: int = 0) -> str:
    """Render a term; `prec` is the surrounding precedence (0 loosest)."""

    def wrap(text: str, node_prec: int) -> str:
        return f"({text})" if node_prec < prec else text

    match t:
        case Var(name):
            return name
        case NatLit(value, lexeme):
            return lexeme or str(value)
        case IntLit(value):
            return str(value)
        case BoolLit(value):
            return "true" if value else "false"
        case Arith("+", (arg, NatLit(1, _)), "suc"):
            return wrap(f"suc {print_term(arg, 4)}", 3)
        case Arith(op, (a, b), _):
            if op == "*":
                return wrap(f"{print_term(a, 2)} * {print_term(b, 3)}", 2)
            return wrap(f"{print_term(a, 1)} {op} {print_term(b, 2)}", 1)
        case App(fn, arg):
            return wrap(f"{print_term(fn, 3)} {print_term(arg, 4)}", 3)
        case Lam(param, None, body):
            return wrap(f"\\{param} -> {print_term(body)}", 0)
        case Lam(param, ann, body):
            return wrap(f"\\({param} : {print_type(ann)}) -> {print_term(body)}", 0)
        case Let(name, bound, body):
            return wrap(f"let {name} = {print_term(bound)} in {print_term(body)}", 0)
        case If(cond, a, b):
            return wrap(
                f"if {format_predicate(cond)} then {print_term(a)} else {print_term(b)}",
                0,
            )
        case Match(scrutinee, zero_body, binder, suc_body):
            return wrap(
                f"match {print_term(scrutinee, 1)} {{ zero -> {print_term(zero_body)}"
                f" | suc {binder} -> {print_term(suc_body)} }}",
                0,
            )
        case Pair(value, _):
            return f"({print_term(value)}, auto)"
        case Annot(term, ann):
            return f"({print_term(term)} : {print_type(ann)})"
        case Auto() | ProofUnit():
            return "auto"
    raise TypeError(f"not a term: {t!r}")


def print_item(item: Item) -> str:
    match item:
        case AliasDef(name, None, body):
            return f"type {name} = {print_type(body)}"
        case AliasDef(name, param, body):
            return f"type {name}({param}) = {print_type(body)}"
        case FunDef(name, params, ret, body):
            plist = " ".join(f"({p} : {print_type(t)})" for p, t in params)
            return f"fun {name} {plist} : {print_type(ret)} = {print_term(body)}"
        case ValDef(name, ty, term):
            return f"val {name} : {print_type(ty)} = {print_term(term)}"
    raise TypeError(f"not an item: {item!r}")


def print_program(p: SurfaceProgram) -> str:
    if not p.items:
        return ""
    return "\n".join(print_item(item) for item in p.items) + "\n"


# ---------------------------------------------------------------------------
# AST surgery: renaming and substitution
# ---------------------------------------------------------------------------


def type_free_vars(t: RefinedType) -> tuple[str, ...]:
    """Term-level variables free in a type's predicates, in occurrence order."""
    out: dict[str, None] = {}

    def walk(ty: RefinedType, bound: frozenset[str]) -> None:
        match ty:
            case RBase(_, binder, pred):
                for v in pred_free_vars(pred):
                    if v != binder and v not in bound:
                        out.setdefault(v)
            case RFun(param, domain, codomain):
                walk(domain, bound)
                walk(codomain, bound | {param})
            case RAlias(_, arg):
                if arg is not None:
                    for v in arg.free_vars():
                        if v not in bound:
                            out.setdefault(v)

    walk(t, frozenset())
    return tuple(out)


def _fresh_against(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    k = 1
    while f"{base}!{k}" in avoid:
        k += 1
    return f"{base}!{k}"


def rename_type_var(t: RefinedType, old: str, new: str) -> RefinedType:
    """Rename free occurrences of a term variable inside a type.

    The caller guarantees `new` is fresh for `t`.
    """
    match t:
        case RBase(base, binder, pred, span):
            if binder == old:
                return t
            return RBase(base, binder, rename_pred_var(pred, old, new), span)
        case RFun(param, domain, codomain, span):
            domain2 = rename_type_var(domain, old, new)
            codomain2 = codomain if param == old else rename_type_var(codomain, old, new)
            return RFun(param, domain2, codomain2, span)
        case RAlias(name, arg, span):
            if arg is None:
                return t
            return RAlias(name, arg.rename(old, new), span)
    raise TypeError(f"not a type: {t!r}")


def subst_type_linear(t: RefinedType, name: str, term: LinearTerm) -> RefinedType:
    """Substitute an integer variable by a linear term inside a type,
    renaming binders that would capture variables of the term."""
    from .logic import subst_pred_linear

    match t:
        case RBase(base, binder, pred, span):
            if binder == name:
                return t
            if binder in term.free_vars():
                avoid = set(term.free_vars()) | set(pred_free_vars(pred)) | {name}
                binder2 = _fresh_against(binder, avoid)
                pred = rename_pred_var(pred, binder, binder2)
                binder = binder2
            return RBase(base, binder, subst_pred_linear(pred, name, term), span)
        case RFun(param, domain, codomain, span):
            domain2 = subst_type_linear(domain, name, term)
            if param == name:
                return RFun(param, domain2, codomain, span)
            if param in term.free_vars():
                avoid = set(term.free_vars()) | set(type_free_vars(codomain)) | {name}
                param2 = _fresh_against(param, avoid)
                codomain = rename_type_var(codomain, param, param2)
                param = param2
            return RFun(param, domain2, subst_type_linear(codomain, name, term), span)
        case RAlias(alias_name, arg, span):
            if arg is None:
                return t
            return RAlias(alias_name, arg.subst(name, term), span)
    raise TypeError(f"not a type: {t!r}")


def rename_term(t: Term, old: str, new: str) -> Term:
    """Rename free occurrences of a variable in a term.

    The caller guarantees `new` is fresh for `t`.
    """
    rec = lambda x: rename_term(x, old, new)
    match t:
        case Var(name, span):
            return Var(new, span) if name == old else t
        case NatLit() | IntLit() | BoolLit() | Auto() | ProofUnit():
            return t
        case Arith(op, args, sugar, span):
            return Arith(op, tuple(rec(a) for a in args), sugar, span)
        case App(fn, arg, span):
            return App(rec(fn), rec(arg), span)
        case Lam(param, ann, body, span):
            ann2 = rename_type_var(ann, old, new) if ann is not None else None
            return Lam(param, ann2, body if param == old else rec(body), span)
        case Let(name, bound, body, span):
            return Let(name, rec(bound), body if name == old else rec(body), span)
        case If(cond, a, b, span):
            return If(rename_pred_var(cond, old, new), rec(a), rec(b), span)
        case Match(scrutinee, zero_body, binder, suc_body, span):
            suc2 = suc_body if binder == old else rec(suc_body)
            return Match(rec(scrutinee), rec(zero_body), binder, suc2, span)
        case Pair(value, proof, span):
            return Pair(rec(value), proof, span)
        case Annot(term, ann, span):
            return Annot(rec(term), rename_type_var(ann, old, new), span)
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Alias expansion
# ---------------------------------------------------------------------------


def expand_aliases(program: SurfaceProgram) -> SurfaceProgram:
    """Expand every alias reference; parameterized aliases substitute
    capture-avoidingly. Aliases must form a DAG."""
    aliases: dict[str, AliasDef] = {}
    for item in program.items:
        if isinstance(item, AliasDef):
            if item.name in aliases:
                raise DuplicateAliasError(item.name)
            aliases[item.name] = item

    expanded: dict[str, RefinedType] = {}

    def expand_type(t: RefinedType, stack: tuple[str, ...]) -> RefinedType:
        match t:
            case RBase():
                return t
            case RFun(param, domain, codomain, span):
                return RFun(
                    param,
                    expand_type(domain, stack),
                    expand_type(codomain, stack),
                    span,
                )
            case RAlias(name, arg, _):
                if name in stack:
                    raise CyclicAliasError(name)
                if name not in aliases:
                    raise UnknownAliasError(name)
                alias = aliases[name]
                if name in expanded:
                    body = expanded[name]
                else:
                    body = expand_type(alias.body, stack + (name,))
                    expanded[name] = body
                if alias.param is None:
                    if arg is not None:
                        raise AliasArityError(name, f"alias {name!r} takes no argument")
                    return body
                if arg is None:
                    raise AliasArityError(name, f"alias {name!r} needs an argument")
                return subst_type_linear(body, alias.param, arg)
        raise TypeError(f"not a type: {t!r}")

    def expand_term(t: Term) -> Term:
        match t:
            case Var() | NatLit() | IntLit() | BoolLit() | Auto() | ProofUnit():
                return t
            case Arith(op, args, sugar, span):
                return Arith(op, tuple(expand_term(a) for a in args), sugar, span)
            case App(fn, arg, span):
                return App(expand_term(fn), expand_term(arg), span)
            case Lam(param, ann, body, span):
                ann2 = expand_type(ann, ()) if ann is not None else None
                return Lam(param, ann2, expand_term(body), span)
            case Let(name, bound, body, span):
                return Let(name, expand_term(bound), expand_term(body), span)
            case If(cond, a, b, span):
                return If(cond, expand_term(a), expand_term(b), span)
            case Match(scrutinee, zero_body, binder, suc_body, span):
                return Match(
                    expand_term(scrutinee),
                    expand_term(zero_body),
                    binder,
                    expand_term(suc_body),
                    span,
                )
            case Pair(value, proof, span):
                return Pair(expand_term(value), proof, span)
            case Annot(term, ann, span):
                return Annot(expand_term(term), expand_type(ann, ()), span)
        raise TypeError(f"not a term: {t!r}")

    items: list[Item] = []
    for item in program.items:
        match item:
            case AliasDef(name, param, body, span):
                items.append(AliasDef(name, param, expand_type(body, (name,)), span))
            case FunDef(name, params, ret, body, span):
                items.append(
                    FunDef(
                        name,
                        tuple((p, expand_type(t, ())) for p, t in params),
                        expand_type(ret, ()),
                        expand_term(body),
                        span,
                    )
                )
            case ValDef(name, ty, term, span):
                items.append(ValDef(name, expand_type(ty, ()), expand_term(term), span))
            case _:
                raise TypeError(f"not an item: {item!r}")
    return SurfaceProgram(tuple(items), source=program.source, path=program.path)
